#include "graphnls/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>
#include <vector>

namespace graphnls {

StarGraph make_graph(int num_edges, double edge_length, int points_per_edge) {
  if (num_edges < 2) throw ValidationError("make_graph: need at least 2 edges");
  if (!(edge_length > 0.0)) throw ValidationError("make_graph: edge length must be positive");
  if (points_per_edge < 3) throw ValidationError("make_graph: need at least 3 points per edge");
  return StarGraph{num_edges, edge_length, points_per_edge};
}

double default_edge_length(double omega) {
  if (!(omega > 0.0)) throw ValidationError("default_edge_length: omega must be positive");
  return std::max(30.0, 30.0 / std::sqrt(omega));
}

GridField::GridField(const StarGraph& graph, Eigen::MatrixXcd values)
    : graph_(graph), values_(std::move(values)) {
  if (values_.rows() != graph_.points_per_edge || values_.cols() != graph_.num_edges)
    throw ValidationError("GridField: value array does not match the grid");
}

GridField GridField::zero(const StarGraph& graph) {
  return GridField(graph, Eigen::MatrixXcd::Zero(graph.points_per_edge, graph.num_edges));
}

GridField GridField::constant(const StarGraph& graph, Complex value) {
  return GridField(graph,
                   Eigen::MatrixXcd::Constant(graph.points_per_edge, graph.num_edges, value));
}

GridField GridField::sample(const StarGraph& graph,
                            const std::function<Complex(int, double)>& f) {
  Eigen::MatrixXcd vals(graph.points_per_edge, graph.num_edges);
  for (int e = 0; e < graph.num_edges; ++e)
    for (int i = 0; i < graph.points_per_edge; ++i)
      vals(i, e) = f(e + 1, graph.coordinate(i));
  return GridField(graph, std::move(vals));
}

double GridField::vertex_defect() const {
  double defect = 0.0;
  for (int e = 1; e < graph_.num_edges; ++e)
    defect = std::max(defect, std::abs(values_(0, e) - values_(0, 0)));
  return defect;
}

void GridField::enforce_vertex_continuity() {
  const Complex mean = values_.row(0).mean();
  values_.row(0).setConstant(mean);
}

bool GridField::is_real(double tol) const {
  return values_.imag().cwiseAbs().maxCoeff() <= tol;
}

TwoComponentState zero_state(const StarGraph& graph) {
  return TwoComponentState{GridField::zero(graph), GridField::zero(graph)};
}

namespace {

// Trapezoid weights: h at interior samples, h/2 at both edge ends.
double trapezoid_sum(const StarGraph& g, const std::function<double(int, int)>& term) {
  const double h = g.spacing();
  double total = 0.0;
  for (int e = 0; e < g.num_edges; ++e) {
    double edge_sum = 0.5 * (term(e, 0) + term(e, g.points_per_edge - 1));
    for (int i = 1; i < g.points_per_edge - 1; ++i) edge_sum += term(e, i);
    total += h * edge_sum;
  }
  return total;
}

} // namespace

double lp_norm(const GridField& f, double p) {
  if (std::isinf(p)) return f.values().cwiseAbs().maxCoeff();
  if (!(p >= 1.0)) throw ValidationError("lp_norm: p must be >= 1 or infinity");
  const auto& v = f.values();
  const double s =
      trapezoid_sum(f.graph(), [&](int e, int i) { return std::pow(std::abs(v(i, e)), p); });
  return std::pow(s, 1.0 / p);
}

GridField derivative(const GridField& f) {
  const StarGraph& g = f.graph();
  const double h = g.spacing();
  const int m = g.points_per_edge;
  Eigen::MatrixXcd d(m, g.num_edges);
  for (int e = 0; e < g.num_edges; ++e) {
    const auto col = f.values().col(e);
    d(0, e) = (-3.0 * col(0) + 4.0 * col(1) - col(2)) / (2.0 * h);
    for (int i = 1; i < m - 1; ++i) d(i, e) = (col(i + 1) - col(i - 1)) / (2.0 * h);
    d(m - 1, e) = (3.0 * col(m - 1) - 4.0 * col(m - 2) + col(m - 3)) / (2.0 * h);
  }
  return GridField(g, std::move(d));
}

double h1_norm(const GridField& f) {
  if (!f.vertex_continuous())
    throw ValidationError("h1_norm: field is discontinuous at the vertex (defect " +
                          std::to_string(f.vertex_defect()) + ")");
  const double dn = lp_norm(derivative(f), 2.0);
  const double n = lp_norm(f, 2.0);
  return std::sqrt(dn * dn + n * n);
}

double x_norm(const TwoComponentState& s) {
  const double nu = h1_norm(s.u);
  const double nv = h1_norm(s.v);
  return std::sqrt(nu * nu + nv * nv);
}

double inner_product(const GridField& f, const GridField& g) {
  return complex_inner_product(f, g).real();
}

Complex complex_inner_product(const GridField& f, const GridField& g) {
  if (!f.graph().same_grid(g.graph()))
    throw ValidationError("inner_product: fields live on different grids");
  const auto& a = f.values();
  const auto& b = g.values();
  const double h = f.graph().spacing();
  Complex total = 0.0;
  for (int e = 0; e < f.graph().num_edges; ++e) {
    const int m = f.graph().points_per_edge;
    Complex edge_sum = 0.5 * (a(0, e) * std::conj(b(0, e)) + a(m - 1, e) * std::conj(b(m - 1, e)));
    for (int i = 1; i < m - 1; ++i) edge_sum += a(i, e) * std::conj(b(i, e));
    total += h * edge_sum;
  }
  return total;
}

Complex complex_h1_pairing(const GridField& f, const GridField& g) {
  return complex_inner_product(derivative(f), derivative(g)) + complex_inner_product(f, g);
}

double graph_distance(const StarGraph& graph, const GraphPoint& x, const GraphPoint& y) {
  auto check = [&](const GraphPoint& p) {
    if (p.edge < 1 || p.edge > graph.num_edges)
      throw ValidationError("graph_distance: edge index out of range");
    if (p.coordinate < 0.0 || p.coordinate > graph.edge_length)
      throw ValidationError("graph_distance: coordinate outside the truncated edge");
  };
  check(x);
  check(y);
  if (x.edge == y.edge) return std::abs(x.coordinate - y.coordinate);
  return x.coordinate + y.coordinate;
}

double ball_norm(const GridField& f, const GraphPoint& center, double r, double p) {
  if (!(r > 0.0)) return 0.0;
  const StarGraph& g = f.graph();
  if (center.edge < 1 || center.edge > g.num_edges || center.coordinate < 0.0 ||
      center.coordinate > g.edge_length)
    throw ValidationError("ball_norm: center outside the graph");
  const auto& v = f.values();
  const double h = g.spacing();

  // Each sample owns the cell [x-h/2, x+h/2] (clipped); its weight is the
  // length of the cell inside the ball, so small balls shrink correctly.
  double s = 0.0;
  for (int e = 0; e < g.num_edges; ++e) {
    // Ball intersected with this edge is an interval (lo, hi).
    double lo, hi;
    if (e + 1 == center.edge) {
      lo = center.coordinate - r;
      hi = center.coordinate + r;
    } else {
      lo = 0.0;
      hi = r - center.coordinate;
    }
    lo = std::max(lo, 0.0);
    hi = std::min(hi, g.edge_length);
    if (hi <= lo) continue;
    for (int i = 0; i < g.points_per_edge; ++i) {
      const double cell_lo = std::max(g.coordinate(i) - 0.5 * h, 0.0);
      const double cell_hi = std::min(g.coordinate(i) + 0.5 * h, g.edge_length);
      const double overlap = std::min(hi, cell_hi) - std::max(lo, cell_lo);
      if (overlap > 0.0) s += overlap * std::pow(std::abs(v(i, e)), p);
    }
  }
  return std::pow(s, 1.0 / p);
}

GridField rearrange(const GridField& f) {
  const StarGraph& g = f.graph();
  const int n = g.num_edges;
  const int m = g.points_per_edge;

  struct Sample {
    double modulus;
    int edge;
    int index;
  };
  std::vector<Sample> samples;
  samples.reserve(static_cast<size_t>(n) * m);
  for (int e = 0; e < n; ++e)
    for (int i = 0; i < m; ++i) samples.push_back({std::abs(f.values()(i, e)), e, i});
  std::sort(samples.begin(), samples.end(), [](const Sample& a, const Sample& b) {
    return std::tie(b.modulus, a.edge, a.index) < std::tie(a.modulus, b.edge, b.index);
  });

  Eigen::MatrixXcd out(m, n);
  for (int i = 0; i < m; ++i)
    for (int e = 0; e < n; ++e) out(i, e) = samples[static_cast<size_t>(i) * n + e].modulus;
  return GridField(g, std::move(out));
}

} // namespace graphnls
