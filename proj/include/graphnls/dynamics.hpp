#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "graphnls/profiles.hpp"
#include "graphnls/variational.hpp"

namespace graphnls {

struct EvolveConfig {
  double dt = 0.01;
  double t_final = 10.0;
  enum class Scheme { CrankNicolsonFixedPoint, StrangSplit };
  Scheme scheme = Scheme::CrankNicolsonFixedPoint;
  double nonlinear_tol = 1e-13;
  int max_picard = 50;

  void validate(double h) const;
};

struct EvolutionTrace {
  std::vector<double> times;
  std::vector<double> mass_u;
  std::vector<double> mass_v;
  std::vector<double> energy;
  std::vector<double> q1;
  std::vector<double> orbital_dev;
  int dt_halvings = 0;
};

struct EvolveResult {
  TwoComponentState final_state;
  EvolutionTrace trace;
  bool blew_up = false;
};

// Crank-Nicolson with the midpoint nonlinearity resolved by fixed-point
// iteration (or Strang splitting), delta coupling through the shared vertex
// unknown, Dirichlet at x = L. The trace is sampled every step; orbital
// deviation is measured against `reference` (the initial state if absent).
EvolveResult evolve(const TwoComponentState& initial, const PowerParams& params,
                    const EvolveConfig& cfg,
                    const TwoComponentState* reference = nullptr);

// Signed-step variant used for time-reversal checks.
EvolveResult evolve_steps(const TwoComponentState& initial, const PowerParams& params,
                          const EvolveConfig& cfg, double dt_signed, int steps,
                          const TwoComponentState* reference = nullptr);

// inf over independent per-component phases of || (u,v) - (e^{i t1} r_u, e^{i t2} r_v) ||_X,
// via the closed-form optimal phase arg<component, reference>_{H^1}.
double orbital_deviation(const TwoComponentState& state, const TwoComponentState& reference);

// Deviation for the 2D-rotation family: quotient over the common phase and,
// optionally, the rotation mixing the two components.
double orbital_deviation_rotation(const TwoComponentState& state,
                                  const TwoComponentState& reference, bool quotient_rotation);

struct ConservedQuantities {
  double mass_u = 0.0;
  double mass_v = 0.0;
  double energy = 0.0;
  double q1 = 0.0; // Im int u conj(v)
};

ConservedQuantities conserved_quantities(const TwoComponentState& state,
                                         const PowerParams& params);

enum class PerturbationKind { Random, UnstableEigvec };

struct ExperimentConfig {
  double amplitude = 1e-3;
  PerturbationKind direction = PerturbationKind::Random;
  std::uint64_t seed = 1;
  double horizon = 0.0;        // 0 -> 50 / sqrt(omega)
  double growth_factor = 10.0; // GROWTH once deviation exceeds factor * amplitude
};

struct StabilityVerdict {
  bool growth = false;
  double max_dev = 0.0;
  double efold_rate = 0.0; // least-squares slope of log(dev) in the growth window
  double horizon = 0.0;
  double amplitude = 0.0;
  double threshold = 0.0;
  EvolutionTrace trace;
  TwoComponentState final_state;
};

// Evolves profile + perturbation over the horizon and classifies the orbit.
// direction = UnstableEigvec requires the precomputed mode (w1 + i w2).
StabilityVerdict stability_experiment(const TwoComponentState& profile,
                                      const PowerParams& params, const ExperimentConfig& exp_cfg,
                                      EvolveConfig evolve_cfg,
                                      const TwoComponentState* unstable_mode = nullptr);

} // namespace graphnls
