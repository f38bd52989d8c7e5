#pragma once

#include <Eigen/Core>
#include <complex>
#include <functional>

#include "graphnls/errors.hpp"

namespace graphnls {

using Complex = std::complex<double>;

// Star graph with N half-lines truncated at length L, uniform grid of M
// samples per edge (x_i = i*h, h = L/(M-1)). Sample 0 is the common vertex.
struct StarGraph {
  int num_edges = 0;
  double edge_length = 0.0;
  int points_per_edge = 0;

  double spacing() const { return edge_length / (points_per_edge - 1); }
  double coordinate(int i) const { return i * spacing(); }
  bool same_grid(const StarGraph& other) const {
    return num_edges == other.num_edges && points_per_edge == other.points_per_edge &&
           edge_length == other.edge_length;
  }
};

StarGraph make_graph(int num_edges, double edge_length, int points_per_edge);

// Default truncation length: profile tails e^{-sqrt(omega) L} below 1e-12.
double default_edge_length(double omega);

struct GraphPoint {
  int edge = 1;            // 1-based, matching the usual edge labels
  double coordinate = 0.0; // in [0, L]
};

// Absolute vertex-continuity tolerance for fields meant to represent H^1
// members.
inline constexpr double kVertexContinuityTol = 1e-8;

// One complex-valued function on the graph, sampled edge-wise. Column e of
// `values` holds edge e+1; row 0 is the vertex sample of every edge.
class GridField {
public:
  GridField() = default;
  GridField(const StarGraph& graph, Eigen::MatrixXcd values);

  static GridField zero(const StarGraph& graph);
  static GridField constant(const StarGraph& graph, Complex value);
  // Samples f(edge, x) on the grid; f must agree across edges at x = 0.
  static GridField sample(const StarGraph& graph,
                          const std::function<Complex(int, double)>& f);

  const StarGraph& graph() const { return graph_; }
  const Eigen::MatrixXcd& values() const { return values_; }
  Eigen::MatrixXcd& values() { return values_; }
  Complex value(int edge, int i) const { return values_(i, edge - 1); }
  Complex vertex_value() const { return values_(0, 0); }

  // max_e |f_e(0) - f_1(0)|
  double vertex_defect() const;
  bool vertex_continuous(double tol = kVertexContinuityTol) const {
    return vertex_defect() <= tol;
  }
  // Replaces all vertex samples by their mean.
  void enforce_vertex_continuity();

  bool is_real(double tol = 0.0) const;

private:
  StarGraph graph_;
  Eigen::MatrixXcd values_; // points_per_edge x num_edges
};

struct TwoComponentState {
  GridField u;
  GridField v;

  const StarGraph& graph() const { return u.graph(); }
};

TwoComponentState zero_state(const StarGraph& graph);

// Composite-trapezoid L^p norm over all edges; p = infinity gives the max
// sample modulus.
double lp_norm(const GridField& f, double p);

// Edge-wise first derivative: centered differences in the interior,
// second-order one-sided stencils at x = 0 and x = L.
GridField derivative(const GridField& f);

// ||f||_{H^1}^2 = ||f'||_2^2 + ||f||_2^2. Rejects vertex-discontinuous input.
double h1_norm(const GridField& f);
double x_norm(const TwoComponentState& s);

// Re sum_e int f_e conj(g_e) (trapezoid).
double inner_product(const GridField& f, const GridField& g);
Complex complex_inner_product(const GridField& f, const GridField& g);
Complex complex_h1_pairing(const GridField& f, const GridField& g);

// Path metric: |x-y| on a shared edge, x+y across edges.
double graph_distance(const StarGraph& graph, const GraphPoint& x, const GraphPoint& y);

// L^p norm of f restricted to the open ball {y : d(center, y) < r}.
double ball_norm(const GridField& f, const GraphPoint& center, double r, double p);

// Symmetric rearrangement on the sampled graph: all N*M moduli sorted in
// decreasing order (ties by edge then index) and laid down along a single
// decreasing profile distributed round-robin over the N edges, so the sample
// multiset of |f| is preserved exactly. Nonincreasing on each edge; vertex
// values may differ by the spread of the top N samples.
GridField rearrange(const GridField& f);

} // namespace graphnls
