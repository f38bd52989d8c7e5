#include "graphnls/operators.hpp"

#include <cmath>
#include <numeric>

namespace graphnls {

OperatorMatrix OperatorMatrix::build(
    const StarGraph& graph, double gamma, int block_size, BlockStructure structure,
    const std::function<Eigen::MatrixXd(int edge, int grid_index)>& potential,
    std::vector<double> edge_weights) {
  const int n = graph.num_edges;
  const int m = graph.points_per_edge - 2; // interior points; Dirichlet at x = L
  const double h = graph.spacing();
  if (m < 1) throw ValidationError("operator assembly: grid too coarse");
  if (edge_weights.empty()) edge_weights.assign(n, 1.0);
  const double weight_sum =
      std::accumulate(edge_weights.begin(), edge_weights.end(), 0.0);

  OperatorMatrix op;
  op.graph_ = graph;
  op.gamma_ = gamma;
  op.structure_ = structure;
  op.edge_weights_ = edge_weights;
  op.chain_ = RealStarChain(n, m, block_size);

  auto& chain = op.chain_;
  const double lap = 1.0 / (h * h);
  chain.vertex_block() = 2.0 * lap * Eigen::MatrixXd::Identity(block_size, block_size);
  chain.vertex_block().diagonal().array() -= 2.0 * gamma / (h * weight_sum);
  chain.vertex_block() += potential(0, 0);
  for (int e = 0; e < n; ++e) {
    chain.vertex_bond(e).setConstant(-lap * std::sqrt(2.0 * edge_weights[e] / weight_sum));
    for (int i = 0; i < m; ++i) {
      chain.diag(e, i) = 2.0 * lap * Eigen::MatrixXd::Identity(block_size, block_size);
      chain.diag(e, i) += potential(e, i + 1);
      if (i + 1 < m) chain.bond(e, i).setConstant(-lap);
    }
  }

  op.point_weights_.resize(chain.num_points());
  op.point_weights_(0) = 0.5 * h * weight_sum;
  for (int e = 0; e < n; ++e)
    for (int i = 0; i < m; ++i) op.point_weights_(1 + e * m + i) = h * edge_weights[e];
  return op;
}

Eigen::VectorXd OperatorMatrix::pack(const std::vector<const GridField*>& components) const {
  const int s = block_size();
  if (static_cast<int>(components.size()) != s)
    throw ValidationError("pack: expected one field per operator component");
  const int m = chain_.chain_length();
  Eigen::VectorXd coords(dimension());
  for (int c = 0; c < s; ++c) {
    const GridField& f = *components[c];
    if (!f.graph().same_grid(graph_)) throw ValidationError("pack: field grid mismatch");
    if (!f.vertex_continuous())
      throw ValidationError("pack: field is discontinuous at the vertex");
    Complex vertex = 0.0;
    for (int e = 0; e < graph_.num_edges; ++e) vertex += f.values()(0, e);
    vertex /= graph_.num_edges;
    coords(c) = std::sqrt(point_weights_(0)) * vertex.real();
    for (int e = 0; e < graph_.num_edges; ++e)
      for (int i = 0; i < m; ++i)
        coords(chain_.offset(e, i) + c) =
            std::sqrt(point_weights_(1 + e * m + i)) * f.values()(i + 1, e).real();
  }
  return coords;
}

std::vector<GridField> OperatorMatrix::unpack(const Eigen::VectorXd& coords) const {
  const int s = block_size();
  const int m = chain_.chain_length();
  if (coords.size() != dimension()) throw ValidationError("unpack: coordinate size mismatch");
  std::vector<GridField> out;
  out.reserve(s);
  for (int c = 0; c < s; ++c) {
    Eigen::MatrixXcd vals =
        Eigen::MatrixXcd::Zero(graph_.points_per_edge, graph_.num_edges);
    const double vertex = coords(c) / std::sqrt(point_weights_(0));
    for (int e = 0; e < graph_.num_edges; ++e) {
      vals(0, e) = vertex;
      for (int i = 0; i < m; ++i)
        vals(i + 1, e) =
            coords(chain_.offset(e, i) + c) / std::sqrt(point_weights_(1 + e * m + i));
    }
    out.emplace_back(graph_, std::move(vals));
  }
  return out;
}

std::vector<GridField> OperatorMatrix::apply(
    const std::vector<const GridField*>& components) const {
  return unpack(chain_.apply(pack(components)));
}

double OperatorMatrix::quadratic_form(const std::vector<const GridField*>& components) const {
  const Eigen::VectorXd x = pack(components);
  return x.dot(chain_.apply(x));
}

namespace {

Eigen::MatrixXd scalar_potential(double v) {
  Eigen::MatrixXd m(1, 1);
  m(0, 0) = v;
  return m;
}

double real_sample(const GridField& f, int edge, int grid_index) {
  return std::abs(f.values()(grid_index, edge));
}

} // namespace

OperatorMatrix assemble_delta_laplacian(const StarGraph& graph, double gamma) {
  return OperatorMatrix::build(graph, gamma, 1, BlockStructure::Scalar,
                               [](int, int) { return scalar_potential(0.0); });
}

OperatorMatrix assemble_one_component_linearization(const GridField& profile,
                                                    const PowerParams& params, Part part,
                                                    int component) {
  const StarGraph& graph = profile.graph();
  if (component != 1 && component != 2)
    throw ValidationError("one-component linearization: component must be 1 or 2");
  auto potential = [&, part, component](int e, int i) {
    const double phi = real_sample(profile, e, i);
    double v = params.omega;
    if (component == 1) {
      const double coeff = (part == Part::R) ? params.a * (params.q - 1.0) : params.a;
      v -= coeff * std::pow(phi, params.q - 2.0);
    } else if (params.p == 2.0) {
      v -= params.b * phi * phi;
    }
    return scalar_potential(v);
  };
  return OperatorMatrix::build(graph, params.gamma, 1, BlockStructure::Scalar, potential);
}

OperatorMatrix assemble_two_component_linearization(const GridField& profile, double p, double b,
                                                    double omega, double gamma, Part part) {
  if (!(b > -1.0)) throw ValidationError("two-component linearization requires b > -1");
  const StarGraph& graph = profile.graph();
  auto potential = [&, p, b, omega, part](int e, int i) {
    const double w = std::pow(real_sample(profile, e, i), 2.0 * p - 2.0);
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(2, 2);
    if (part == Part::I) {
      v(0, 0) = v(1, 1) = omega - (1.0 + b) * w;
    } else {
      v(0, 0) = v(1, 1) = omega - (2.0 * p - 1.0 + b * (p - 1.0)) * w;
      v(0, 1) = v(1, 0) = -b * p * w;
    }
    return v;
  };
  return OperatorMatrix::build(graph, gamma, 2, BlockStructure::TwoBlock, potential);
}

std::pair<OperatorMatrix, OperatorMatrix> assemble_plus_minus(const GridField& profile, double p,
                                                              double b, double omega,
                                                              double gamma) {
  const StarGraph& graph = profile.graph();
  auto make = [&](double coeff) {
    return OperatorMatrix::build(graph, gamma, 1, BlockStructure::Scalar, [&, coeff](int e, int i) {
      const double w = std::pow(real_sample(profile, e, i), 2.0 * p - 2.0);
      return scalar_potential(omega - coeff * w);
    });
  };
  return {make((2.0 * p - 1.0) * (b + 1.0)), make(2.0 * p - b - 1.0)};
}

OperatorMatrix assemble_epsilon_operator(double epsilon, int k, double gamma_eff, double p,
                                         const StarGraph& graph) {
  GridField psi = unit_frequency_profile(gamma_eff, k, p, graph);
  auto potential = [&, epsilon, p](int e, int i) {
    const double w = std::pow(real_sample(psi, e, i), 2.0 * p - 2.0);
    return scalar_potential(1.0 - epsilon * w);
  };
  return OperatorMatrix::build(graph, gamma_eff, 1, BlockStructure::Scalar, potential);
}

OperatorMatrix assemble_epsilon_operator_symmetric(double epsilon, int k, double gamma_eff,
                                                   double p, const StarGraph& graph) {
  if (k < 0 || k > max_bump_index(graph.num_edges))
    throw ValidationError("symmetric-subspace epsilon operator needs 0 <= k <= floor((N-1)/2)");
  GridField psi = unit_frequency_profile(gamma_eff, k, p, graph);
  if (k == 0) {
    // Radial subspace {v_1 = ... = v_N}: a single branch of multiplicity N.
    StarGraph surrogate{1, graph.edge_length, graph.points_per_edge};
    auto potential = [&, epsilon, p](int, int i) {
      const double w = std::pow(real_sample(psi, 0, i), 2.0 * p - 2.0);
      return scalar_potential(1.0 - epsilon * w);
    };
    return OperatorMatrix::build(surrogate, gamma_eff, 1, BlockStructure::Scalar, potential,
                                 {static_cast<double>(graph.num_edges)});
  }
  // Branch 0 carries the k bump edges, branch 1 the N-k tail edges.
  StarGraph surrogate = make_graph(2, graph.edge_length, graph.points_per_edge);
  auto potential = [&, epsilon, p](int e, int i) {
    const int source_edge = (e == 0) ? 0 : graph.num_edges - 1;
    const double w = std::pow(real_sample(psi, source_edge, i), 2.0 * p - 2.0);
    return scalar_potential(1.0 - epsilon * w);
  };
  return OperatorMatrix::build(surrogate, gamma_eff, 1, BlockStructure::Scalar, potential,
                               {static_cast<double>(k), static_cast<double>(graph.num_edges - k)});
}

OperatorMatrix assemble_rotation_linearization(double omega0, double omega1,
                                               const GridField& profile, double gamma,
                                               const StarGraph& graph) {
  auto potential = [&, omega0, omega1](int e, int i) {
    const double phi2 = std::pow(real_sample(profile, e, i), 2.0);
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(4, 4);
    v(0, 0) = v(3, 3) = omega0 - phi2;
    v(1, 1) = v(2, 2) = omega0 - 2.0 * phi2;
    v(0, 3) = v(3, 0) = omega1;
    v(1, 2) = v(2, 1) = -omega1 - phi2;
    return v;
  };
  return OperatorMatrix::build(graph, gamma, 4, BlockStructure::FourBlock, potential);
}

double default_zero_tol(double omega, double h) {
  return std::max(1e-6 * omega, 100.0 * h * h);
}

} // namespace graphnls
