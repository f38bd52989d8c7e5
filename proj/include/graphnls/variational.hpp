#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "graphnls/operators.hpp"
#include "graphnls/profiles.hpp"

namespace graphnls {

struct MinimizeConfig {
  double step_size = 0.5; // initial step of the preconditioned flow
  int max_iters = 50000;
  double grad_tol = 1e-6;
  double mass_tol = 1e-12;
  enum class Init { ClosedFormPerturbed, GaussianBumps, Random };
  Init init_kind = Init::GaussianBumps;
  std::uint64_t rng_seed = 1;
  bool complex_descent = false;

  void validate() const;
};

// Conserved energy of the general power system,
// E = ||u'||^2 + ||v'||^2 - gamma(|u(0)|^2 + |v(0)|^2) - G(u, v),
// G = (2a/q)||u||_q^q + (2c/r)||v||_r^r + (2b/p)||uv||_p^p,
// evaluated with the same stiffness form and lumped quadrature the
// discretized operators use.
double energy(const TwoComponentState& state, const PowerParams& params);
double energy(const TwoComponentState& state, const CubicParams& params);

struct IterationRecord {
  int iter;
  double energy;
  double grad_norm;
};

struct MinimizeResult {
  TwoComponentState state;
  double energy = 0.0;
  double omega1 = 0.0;
  double omega2 = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<IterationRecord> trace;
};

// Projected Sobolev gradient flow on E with exact per-component mass
// rescaling after every step; Lagrange multipliers from Rayleigh quotients.
MinimizeResult minimize_fixed_masses(const CubicParams& params, double alpha, double beta,
                                     const MinimizeConfig& cfg, const StarGraph& graph);

enum class SingleProblem { J1, J2, EndpointA, EndpointC };

struct SingleResult {
  GridField field;
  double energy = 0.0;
  double omega = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<IterationRecord> trace;
};

// One-field reduction with a single mass constraint; the quartic coefficient
// is (b^2-ac)/(b-c), (b^2-ac)/(b-a), a or c depending on the problem.
SingleResult minimize_single(SingleProblem problem, double mass, const CubicParams& params,
                             const MinimizeConfig& cfg, const StarGraph& graph);

double single_problem_coefficient(SingleProblem problem, const CubicParams& params);

} // namespace graphnls
