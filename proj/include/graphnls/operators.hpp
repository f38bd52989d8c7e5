#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "graphnls/graph.hpp"
#include "graphnls/profiles.hpp"
#include "graphnls/star_chain.hpp"

namespace graphnls {

enum class Part { R, I };
enum class BlockStructure { Scalar = 1, TwoBlock = 2, FourBlock = 4 };

// Discretized self-adjoint operator with the delta vertex condition baked in.
//
// The quadratic form  sum_e w_e int |u'|^2 - gamma |u(0)|^2 + int <V u, u>
// is assembled with P1 stiffness and lumped (trapezoid) quadrature weights,
// one shared vertex unknown, and a homogeneous Dirichlet condition at x = L.
// The stored chain is the weight-symmetrized representation
// D^{-1/2} F D^{-1/2}, whose standard eigenproblem matches the generalized
// one F v = lambda M v; the vertex row realizes continuity plus the flux
// condition sum_e u'_e(0) = -gamma u(0) to second order in the eigenvalues.
class OperatorMatrix {
public:
  OperatorMatrix() = default;

  int dimension() const { return chain_.dimension(); }
  int block_size() const { return chain_.block_size(); }
  bool symmetric() const { return true; }
  BlockStructure block_structure() const { return structure_; }
  const StarGraph& graph() const { return graph_; }
  const RealStarChain& chain() const { return chain_; }
  double gamma() const { return gamma_; }
  const std::vector<double>& edge_weights() const { return edge_weights_; }

  // Quadrature weight of each spatial point in the chain layout
  // (vertex, then edge interiors).
  const Eigen::VectorXd& point_weights() const { return point_weights_; }

  // Function values -> symmetrized coordinates (D^{1/2} v). The Euclidean
  // inner product of packed vectors is the weighted L^2(Gamma) product.
  Eigen::VectorXd pack(const std::vector<const GridField*>& components) const;
  Eigen::VectorXd pack(const GridField& f) const { return pack(std::vector<const GridField*>{&f}); }
  std::vector<GridField> unpack(const Eigen::VectorXd& coords) const;

  // L f in function space (the generalized operator M^{-1} F).
  std::vector<GridField> apply(const std::vector<const GridField*>& components) const;
  // v^T F v for function values v.
  double quadratic_form(const std::vector<const GridField*>& components) const;

  Eigen::MatrixXd dense() const { return chain_.dense(); }

  static OperatorMatrix build(const StarGraph& graph, double gamma, int block_size,
                              BlockStructure structure,
                              const std::function<Eigen::MatrixXd(int edge, int grid_index)>& potential,
                              std::vector<double> edge_weights = {});

private:
  StarGraph graph_;
  BlockStructure structure_ = BlockStructure::Scalar;
  double gamma_ = 0.0;
  RealStarChain chain_;
  Eigen::VectorXd point_weights_;
  std::vector<double> edge_weights_;
};

// -Delta_gamma (zero potential).
OperatorMatrix assemble_delta_laplacian(const StarGraph& graph, double gamma);

// L1R = -Delta_gamma + omega - a(q-1) Phi^{q-2},  L1I with coefficient a,
// L2 = -Delta_gamma + omega - b Phi^2 (p = 2) or -Delta_gamma + omega (p > 2).
OperatorMatrix assemble_one_component_linearization(const GridField& profile,
                                                    const PowerParams& params, Part part,
                                                    int component);

// Two-component linearization blocks of the p-power system at (Phi, Phi).
OperatorMatrix assemble_two_component_linearization(const GridField& profile, double p, double b,
                                                    double omega, double gamma, Part part);

// Diagonalizing combinations acting on h_± = h_1 ± h_2.
std::pair<OperatorMatrix, OperatorMatrix> assemble_plus_minus(const GridField& profile, double p,
                                                              double b, double omega,
                                                              double gamma);

// -d^2/dx^2 + 1 - eps Psi_k^{2p-2} with coupling gamma_eff at the vertex.
OperatorMatrix assemble_epsilon_operator(double epsilon, int k, double gamma_eff, double p,
                                         const StarGraph& graph);

// Same operator restricted to the edge-symmetric subspace
// {v_1 = ... = v_k, v_{k+1} = ... = v_N}: a two-branch chain with edge
// multiplicities k and N-k.
OperatorMatrix assemble_epsilon_operator_symmetric(double epsilon, int k, double gamma_eff,
                                                   double p, const StarGraph& graph);

// 4-block operator on (h1R, h1I, h2R, h2I) of the 2D-rotation standing wave.
OperatorMatrix assemble_rotation_linearization(double omega0, double omega1,
                                               const GridField& profile, double gamma,
                                               const StarGraph& graph);

struct SpectrumReport {
  std::vector<double> eigenvalues;      // ascending, with multiplicity
  Eigen::MatrixXd eigenvectors;         // columns, symmetrized coords; empty unless requested
  int n_negative = 0;                   // #{lambda < -zero_tol} of the full operator
  int kernel_dim = 0;                   // #{|lambda| <= zero_tol}
  double zero_tol = 0.0;
};

double default_zero_tol(double omega, double h);

// n_lowest smallest eigenvalues: dense solve below `dense_threshold`,
// otherwise Sturm bisection on the chain inertia plus (optionally) block
// inverse iteration for the eigenvectors.
SpectrumReport spectrum(const OperatorMatrix& op, int n_lowest, double zero_tol,
                        bool want_eigenvectors = false, int dense_threshold = 800);

// (n_negative, kernel_dim) by Sylvester inertia at -+zero_tol.
std::pair<int, int> morse_index(const OperatorMatrix& op, double zero_tol);

// x with (A - shift) x = rhs in symmetrized coordinates.
Eigen::VectorXd solve_shifted(const OperatorMatrix& op, double shift, const Eigen::VectorXd& rhs);

// Newton refinement of a real scalar profile to the stationary state of the
// discretized equation -Delta_gamma u + omega u - coeff u^{power-1} = 0.
// Closed-form profiles sampled on the grid sit O(h^2) away from the discrete
// stationary state; dynamics experiments use the refined profile so orbital
// deviations measure the perturbation, not the sampling bias.
GridField refine_stationary_profile(const GridField& initial, double omega, double gamma,
                                    double coeff, double power, int max_newton = 12);

// Number of eigenvalues strictly below tau.
int count_below(const OperatorMatrix& op, double tau);

struct InstabilityOptions {
  double zero_tol = 0.0;        // 0 -> default from the operator scale
  bool want_modes = false;
  int dense_threshold = 1200;   // full block dimension 2*dim below this -> dense solve
  double lambda_cap = 0.0;      // 0 -> automatic upper bound
};

struct InstabilityReport {
  std::vector<std::complex<double>> eigenvalues; // Re > tol, descending real part
  // Physical perturbation pairs (w1, w2), one entry per real eigenvalue, as
  // function-space components matching the operators' block size; the growing
  // perturbation of each component j is w1_j + i w2_j.
  std::vector<std::vector<GridField>> modes_w1;
  std::vector<std::vector<GridField>> modes_w2;
  int grillakis_bound = 0;
};

// Eigenvalues with positive real part of [[0, LI], [-LR, 0]] after deflating
// ker(LI). Dense nonsymmetric solve for small problems; otherwise the real
// unstable eigenvalues are located exactly by bisection on the inertia of the
// bordered pencil [[LR, lambda I], [lambda I, -LI]] (all lambda^2 are real
// for LI >= 0, so no complex quartets exist).
InstabilityReport instability_eigenvalues(const OperatorMatrix& LR, const OperatorMatrix& LI,
                                          double tol, const InstabilityOptions& opts = {});

// n(P LR P) - n(P LI^{-1} P) with P the projector onto ker(LI)^perp; the
// second term is asserted to vanish (LI >= 0 away from its kernel).
int grillakis_lower_bound(const OperatorMatrix& LR, const OperatorMatrix& LI, double zero_tol);

struct HessianReport {
  Eigen::Matrix2d d2;
  int p_positive = 0;
  double det = 0.0;
  double trace = 0.0;
  double phi_h_plus = 0.0;  // <Phi, h_+>_2
  double phi_h_minus = 0.0; // <Phi, h_->_2
};

// d''(omega) of the two-component action: solve L_+ h_+ = -Phi and
// L_- h_- = -Phi, assemble the 2x2 Hessian and report its signature.
HessianReport hessian_two_component(const GridField& profile, double p, double b, double omega,
                                    double gamma);

// Centered finite difference of ||Phi(omega)||_2^2.
double mass_derivative(const std::function<GridField(double)>& profile_builder, double omega,
                       double delta_omega);

// Smallest omega in (lo, hi) where the mass derivative changes sign,
// bisected to `tol`.
double mass_derivative_sign_change(const std::function<GridField(double)>& profile_builder,
                                   double lo, double hi, double tol);

} // namespace graphnls
