#include "graphnls/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>

namespace graphnls {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ValidationError("config: " + where + " must be an object");
  for (const auto& item : j.items())
    if (!allowed.count(item.key()))
      throw ValidationError("config: unknown key '" + item.key() + "' in " + where);
}

template <class T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

template <class T>
T require(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key))
    throw ValidationError("config: missing required key '" + key + "' in " + where);
  return j.at(key).get<T>();
}

} // namespace

CubicParams ModelConfig::cubic() const {
  CubicParams p;
  p.a = a;
  p.b = b;
  p.c = c;
  p.gamma = gamma;
  p.omega = omega;
  p.override_mass_restriction = override_mass_restriction;
  return p;
}

PowerParams ModelConfig::power() const {
  PowerParams out;
  out.p = p;
  out.q = q;
  out.r = r;
  out.a = a;
  out.b = b;
  out.c = c;
  out.gamma = gamma;
  out.omega = frequency();
  out.k = k;
  if (kind == ModelKind::Cubic) {
    out.p = 2.0;
    out.q = 4.0;
    out.r = 4.0;
  } else if (kind == ModelKind::Rotation) {
    // effective cubic system at frequency omega0 - omega1
    out.p = 2.0;
    out.q = 4.0;
    out.r = 4.0;
    out.a = 1.0;
    out.c = 1.0;
    out.b = 1.0;
  } else if (two_components) {
    out.q = 2.0 * p;
    out.r = 2.0 * p;
    out.a = 1.0;
    out.c = 1.0;
  }
  return out;
}

StarGraph RunConfig::graph() const {
  double l = graph_l;
  if (l <= 0.0) l = default_edge_length(std::max(model.frequency(), 1e-6));
  int m = graph_m;
  if (m <= 0) m = static_cast<int>(std::lround(l / 0.01)) + 1;
  return make_graph(graph_n, l, m);
}

double RunConfig::resolved_zero_tol() const {
  if (zero_tol > 0.0) return zero_tol;
  const StarGraph g = graph();
  return default_zero_tol(std::max(model.frequency(), 1e-12), g.spacing());
}

RunConfig parse_config(const json& j) {
  check_keys(j, "top level",
             {"graph", "model", "solver", "evolve", "experiment", "tolerances", "output_dir",
              "seed"});
  RunConfig cfg;

  const json graph = require<json>(j, "graph", "top level");
  check_keys(graph, "graph", {"N", "L", "M"});
  cfg.graph_n = require<int>(graph, "N", "graph");
  cfg.graph_l = get_or<double>(graph, "L", 0.0);
  cfg.graph_m = get_or<int>(graph, "M", 0);

  const json model = require<json>(j, "model", "top level");
  check_keys(model, "model",
             {"kind", "a", "b", "c", "p", "q", "r", "gamma", "omega", "omega0", "omega1", "k",
              "components", "epsilon", "override_mass_restriction"});
  const std::string kind = require<std::string>(model, "kind", "model");
  if (kind == "cubic")
    cfg.model.kind = ModelKind::Cubic;
  else if (kind == "power")
    cfg.model.kind = ModelKind::Power;
  else if (kind == "rotation")
    cfg.model.kind = ModelKind::Rotation;
  else
    throw ValidationError("config: model.kind must be cubic|power|rotation");
  cfg.model.a = get_or<double>(model, "a", 1.0);
  cfg.model.b = get_or<double>(model, "b", 0.0);
  cfg.model.c = get_or<double>(model, "c", 1.0);
  cfg.model.p = get_or<double>(model, "p", 2.0);
  cfg.model.q = get_or<double>(model, "q", 4.0);
  cfg.model.r = get_or<double>(model, "r", cfg.model.q);
  cfg.model.gamma = require<double>(model, "gamma", "model");
  cfg.model.omega = get_or<double>(model, "omega", 0.0);
  cfg.model.omega0 = get_or<double>(model, "omega0", 0.0);
  cfg.model.omega1 = get_or<double>(model, "omega1", 0.0);
  cfg.model.k = get_or<int>(model, "k", 0);
  cfg.model.override_mass_restriction = get_or<bool>(model, "override_mass_restriction", false);
  if (model.contains("components")) {
    const std::string mode = model.at("components").get<std::string>();
    if (mode == "two")
      cfg.model.two_components = true;
    else if (mode == "one")
      cfg.model.two_components = false;
    else
      throw ValidationError("config: model.components must be one|two");
  }
  if (model.contains("epsilon")) cfg.model.epsilon = model.at("epsilon").get<double>();
  if (cfg.model.kind == ModelKind::Cubic || cfg.model.kind == ModelKind::Power) {
    if (!(cfg.model.omega != 0.0))
      throw ValidationError("config: model.omega is required for cubic/power models");
  } else if (!(cfg.model.omega0 > cfg.model.omega1)) {
    throw ValidationError("config: rotation model needs omega0 > omega1");
  }

  if (j.contains("solver")) {
    const json solver = j.at("solver");
    check_keys(solver, "solver",
               {"step_size", "max_iters", "grad_tol", "mass_tol", "init_kind", "rng_seed",
                "complex_descent"});
    cfg.solver.step_size = get_or<double>(solver, "step_size", cfg.solver.step_size);
    cfg.solver.max_iters = get_or<int>(solver, "max_iters", cfg.solver.max_iters);
    cfg.solver.grad_tol = get_or<double>(solver, "grad_tol", cfg.solver.grad_tol);
    cfg.solver.mass_tol = get_or<double>(solver, "mass_tol", cfg.solver.mass_tol);
    cfg.solver.rng_seed = get_or<std::uint64_t>(solver, "rng_seed", cfg.solver.rng_seed);
    cfg.solver.complex_descent = get_or<bool>(solver, "complex_descent", false);
    if (solver.contains("init_kind")) {
      const std::string init = solver.at("init_kind").get<std::string>();
      if (init == "closed_form_perturbed")
        cfg.solver.init_kind = MinimizeConfig::Init::ClosedFormPerturbed;
      else if (init == "gaussian_bumps")
        cfg.solver.init_kind = MinimizeConfig::Init::GaussianBumps;
      else if (init == "random")
        cfg.solver.init_kind = MinimizeConfig::Init::Random;
      else
        throw ValidationError("config: solver.init_kind must be "
                              "closed_form_perturbed|gaussian_bumps|random");
    }
  }

  if (j.contains("evolve")) {
    const json ev = j.at("evolve");
    check_keys(ev, "evolve", {"dt", "t_final", "scheme", "nonlinear_tol", "max_picard"});
    cfg.evolve.dt = get_or<double>(ev, "dt", cfg.evolve.dt);
    cfg.evolve.t_final = get_or<double>(ev, "t_final", cfg.evolve.t_final);
    cfg.evolve.nonlinear_tol = get_or<double>(ev, "nonlinear_tol", cfg.evolve.nonlinear_tol);
    cfg.evolve.max_picard = get_or<int>(ev, "max_picard", cfg.evolve.max_picard);
    if (ev.contains("scheme")) {
      const std::string scheme = ev.at("scheme").get<std::string>();
      if (scheme == "crank_nicolson_fixed_point")
        cfg.evolve.scheme = EvolveConfig::Scheme::CrankNicolsonFixedPoint;
      else if (scheme == "strang_split")
        cfg.evolve.scheme = EvolveConfig::Scheme::StrangSplit;
      else
        throw ValidationError("config: evolve.scheme must be "
                              "crank_nicolson_fixed_point|strang_split");
    }
  }

  if (j.contains("experiment")) {
    const json ex = j.at("experiment");
    check_keys(ex, "experiment",
               {"amplitude", "direction", "trials", "horizon", "quotient_rotation"});
    cfg.experiment.present = true;
    cfg.experiment.amplitude = get_or<double>(ex, "amplitude", cfg.experiment.amplitude);
    cfg.experiment.trials = get_or<int>(ex, "trials", 1);
    cfg.experiment.horizon = get_or<double>(ex, "horizon", 0.0);
    cfg.experiment.quotient_rotation = get_or<bool>(ex, "quotient_rotation", false);
    if (ex.contains("direction")) {
      const std::string dir = ex.at("direction").get<std::string>();
      if (dir == "random")
        cfg.experiment.direction = PerturbationKind::Random;
      else if (dir == "unstable_eigvec")
        cfg.experiment.direction = PerturbationKind::UnstableEigvec;
      else
        throw ValidationError("config: experiment.direction must be random|unstable_eigvec");
    }
  }

  if (j.contains("tolerances")) {
    const json tol = j.at("tolerances");
    check_keys(tol, "tolerances", {"zero_tol", "mass_tol"});
    cfg.zero_tol = get_or<double>(tol, "zero_tol", 0.0);
    cfg.mass_tol = get_or<double>(tol, "mass_tol", cfg.mass_tol);
  }

  cfg.output_dir = get_or<std::string>(j, "output_dir", ".");
  cfg.seed = get_or<std::uint64_t>(j, "seed", 1);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot read " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: JSON parse error: ") + e.what());
  }
  return parse_config(j);
}

nlohmann::json RunConfig::resolved_json() const {
  const StarGraph g = graph();
  json model_j{{"kind", model.kind == ModelKind::Cubic
                            ? "cubic"
                            : (model.kind == ModelKind::Power ? "power" : "rotation")},
               {"a", model.a},
               {"b", model.b},
               {"c", model.c},
               {"p", model.p},
               {"q", model.q},
               {"r", model.r},
               {"gamma", model.gamma},
               {"omega", model.omega},
               {"omega0", model.omega0},
               {"omega1", model.omega1},
               {"k", model.k},
               {"components", model.two_components ? "two" : "one"},
               {"override_mass_restriction", model.override_mass_restriction}};
  if (model.epsilon) model_j["epsilon"] = *model.epsilon;
  json j{{"graph", {{"N", g.num_edges}, {"L", g.edge_length}, {"M", g.points_per_edge}}},
         {"model", model_j},
         {"solver",
          {{"step_size", solver.step_size},
           {"max_iters", solver.max_iters},
           {"grad_tol", solver.grad_tol},
           {"mass_tol", solver.mass_tol},
           {"init_kind",
            solver.init_kind == MinimizeConfig::Init::ClosedFormPerturbed
                ? "closed_form_perturbed"
                : (solver.init_kind == MinimizeConfig::Init::GaussianBumps ? "gaussian_bumps"
                                                                           : "random")},
           {"rng_seed", solver.rng_seed},
           {"complex_descent", solver.complex_descent}}},
         {"evolve",
          {{"dt", evolve.dt},
           {"t_final", evolve.t_final},
           {"scheme", evolve.scheme == EvolveConfig::Scheme::CrankNicolsonFixedPoint
                          ? "crank_nicolson_fixed_point"
                          : "strang_split"},
           {"nonlinear_tol", evolve.nonlinear_tol},
           {"max_picard", evolve.max_picard}}},
         {"tolerances", {{"zero_tol", resolved_zero_tol()}, {"mass_tol", mass_tol}}},
         {"output_dir", output_dir},
         {"seed", seed}};
  if (experiment.present)
    j["experiment"] = {{"amplitude", experiment.amplitude},
                       {"direction", experiment.direction == PerturbationKind::Random
                                         ? "random"
                                         : "unstable_eigvec"},
                       {"trials", experiment.trials},
                       {"horizon", experiment.horizon},
                       {"quotient_rotation", experiment.quotient_rotation}};
  return j;
}

int worker_count() {
  const char* env = std::getenv("GRAPHNLS_THREADS");
  if (!env) return 1;
  const int n = std::atoi(env);
  return n > 0 ? n : 1;
}

} // namespace graphnls
