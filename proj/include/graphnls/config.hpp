#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "graphnls/dynamics.hpp"
#include "graphnls/profiles.hpp"
#include "graphnls/variational.hpp"

namespace graphnls {

enum class ModelKind { Cubic, Power, Rotation };

struct ModelConfig {
  ModelKind kind = ModelKind::Cubic;
  double a = 1.0, b = 0.0, c = 1.0;
  double p = 2.0, q = 4.0, r = 4.0;
  double gamma = 0.0;
  double omega = 0.0;
  double omega0 = 0.0, omega1 = 0.0;
  int k = 0;
  bool two_components = false;           // power kind: (Phi,Phi) instead of (Phi,0)
  std::optional<double> epsilon;         // Leps spectrum only
  bool override_mass_restriction = false;

  CubicParams cubic() const;
  PowerParams power() const;
  double frequency() const { return kind == ModelKind::Rotation ? omega0 - omega1 : omega; }
};

struct ExperimentSection {
  bool present = false;
  double amplitude = 1e-3;
  PerturbationKind direction = PerturbationKind::Random;
  int trials = 1;
  double horizon = 0.0;
  bool quotient_rotation = false;
};

struct RunConfig {
  int graph_n = 3;
  double graph_l = 0.0; // 0 -> max(30, 30/sqrt(omega))
  int graph_m = 0;      // 0 -> spacing 0.01
  ModelConfig model;
  MinimizeConfig solver;
  EvolveConfig evolve;
  ExperimentSection experiment;
  double zero_tol = 0.0; // 0 -> max(1e-6 omega, 100 h^2)
  double mass_tol = 1e-12;
  std::string output_dir = ".";
  std::uint64_t seed = 1;

  StarGraph graph() const;
  double resolved_zero_tol() const;
  nlohmann::json resolved_json() const;
};

// Strict parse: unknown keys anywhere are errors.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

// Worker cap from GRAPHNLS_THREADS (>= 1).
int worker_count();

} // namespace graphnls
