#include "graphnls/cli.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <thread>

#include "graphnls/report.hpp"

namespace graphnls {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string out_path(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.output_dir);
  return (fs::path(cfg.output_dir) / name).string();
}

// Profile of the configured model family.
TwoComponentState build_profile(const RunConfig& cfg, const StarGraph& graph) {
  const ModelConfig& m = cfg.model;
  switch (m.kind) {
    case ModelKind::Cubic:
      return coupled_cubic_ground_state(m.cubic(), graph);
    case ModelKind::Power:
      if (m.two_components) return two_component_profile(m.omega, m.gamma, m.b, m.p, m.k, graph);
      return TwoComponentState{nls_profile_family(m.omega, m.gamma, m.k, m.q, m.a, graph),
                               GridField::zero(graph)};
    case ModelKind::Rotation:
      return rotation_profile(m.omega0, m.omega1, m.gamma, m.k, graph);
  }
  throw ValidationError("unknown model kind");
}

json norms_json(const GridField& f) {
  return json{{"l2_sq", std::pow(lp_norm(f, 2.0), 2)},
              {"l4", lp_norm(f, 4.0)},
              {"sup", lp_norm(f, std::numeric_limits<double>::infinity())}};
}

} // namespace

int cmd_profile(const RunConfig& cfg) {
  const StarGraph graph = cfg.graph();
  const TwoComponentState state = build_profile(cfg, graph);
  const PowerParams pp = cfg.model.power();
  const json config = cfg.resolved_json();

  json summary{{"masses", {std::pow(lp_norm(state.u, 2.0), 2), std::pow(lp_norm(state.v, 2.0), 2)}},
               {"energy", energy(state, pp)},
               {"stationary_residual", stationary_residual(state, pp)},
               {"vertex_value", std::abs(state.u.vertex_value())},
               {"norms_u", norms_json(state.u)},
               {"norms_v", norms_json(state.v)}};
  if (cfg.model.kind == ModelKind::Cubic) {
    const CubicParams cp = cfg.model.cubic();
    const auto [alpha, beta] = mass_targets(cp, graph.num_edges);
    const ClosedFormJ cf = j_closed_form(cp, graph.num_edges);
    const double e = energy(state, pp);
    summary["closed_form"] = {{"alpha", alpha},
                              {"beta", beta},
                              {"j1", cf.j1},
                              {"j2", cf.j2},
                              {"j", cf.j},
                              {"energy_rel_error", std::abs(e - cf.j) / std::abs(cf.j)}};
  }
  write_field_csv(out_path(cfg, "profile.csv"), config, state);
  write_json(out_path(cfg, "summary.json"), config, std::move(summary));
  return 0;
}

int cmd_ground_state(const RunConfig& cfg) {
  if (cfg.model.kind != ModelKind::Cubic)
    throw ValidationError("ground-state requires a cubic model");
  const StarGraph graph = cfg.graph();
  const CubicParams cp = cfg.model.cubic();
  const auto [alpha, beta] = mass_targets(cp, graph.num_edges);
  const json config = cfg.resolved_json();

  const MinimizeResult res = minimize_fixed_masses(cp, alpha, beta, cfg.solver, graph);

  const ClosedFormJ cf = j_closed_form(cp, graph.num_edges);
  const TwoComponentState exact = coupled_cubic_ground_state(cp, graph);
  double sup_err = 0.0;
  {
    const auto& a = res.state.u.values();
    const auto& b = exact.u.values();
    const auto& c = res.state.v.values();
    const auto& d = exact.v.values();
    sup_err = std::max((a.cwiseAbs() - b.cwiseAbs()).cwiseAbs().maxCoeff(),
                       (c.cwiseAbs() - d.cwiseAbs()).cwiseAbs().maxCoeff());
  }
  json summary{{"converged", res.converged},
               {"iterations", res.iterations},
               {"energy", res.energy},
               {"omega1", res.omega1},
               {"omega2", res.omega2},
               {"masses", {alpha, beta}},
               {"comparison",
                {{"closed_form_energy", cf.j},
                 {"energy_rel_error", std::abs(res.energy - cf.j) / std::abs(cf.j)},
                 {"sup_error_to_closed_form", sup_err},
                 {"omega", cp.omega},
                 {"omega_error", std::max(std::abs(res.omega1 - cp.omega),
                                          std::abs(res.omega2 - cp.omega))}}}};
  write_field_csv(out_path(cfg, "ground_state.csv"), config, res.state);
  write_iteration_csv(out_path(cfg, "iterations.csv"), config, res.trace);
  write_json(out_path(cfg, "summary.json"), config, std::move(summary));
  return res.converged ? 0 : 3;
}

namespace {

struct NamedOperator {
  OperatorMatrix op;
  json expectation; // paper-derived Morse expectation when a theorem applies
};

NamedOperator assemble_named(const RunConfig& cfg, const std::string& name,
                             const StarGraph& graph) {
  const ModelConfig& m = cfg.model;
  NamedOperator out;
  const int n = graph.num_edges;
  if (name == "delta_laplacian") {
    out.op = assemble_delta_laplacian(graph, m.gamma);
    out.expectation = {{"n_negative", m.gamma > 0 ? 1 : 0}};
    return out;
  }
  if (name == "L1R" || name == "L1I" || name == "L2") {
    const PowerParams pp = m.power();
    pp.validate(n);
    const GridField profile = nls_profile_family(pp.omega, pp.gamma, pp.k, pp.q, pp.a, graph);
    if (name == "L1R") {
      out.op = assemble_one_component_linearization(profile, pp, Part::R, 1);
      out.expectation = {{"n_negative", m.gamma > 0 ? pp.k + 1 : n - pp.k}};
    } else if (name == "L1I") {
      out.op = assemble_one_component_linearization(profile, pp, Part::I, 1);
      out.expectation = {{"n_negative", 0}, {"kernel_dim", 1}};
    } else {
      out.op = assemble_one_component_linearization(profile, pp, Part::R, 2);
      if (pp.p > 2.0) out.expectation = {{"n_negative", 0}};
    }
    return out;
  }
  if (name == "L2tildeR" || name == "L2tildeI" || name == "Lplus" || name == "Lminus") {
    const GridField profile = two_component_profile(m.omega, m.gamma, m.b, m.p, m.k, graph).u;
    if (name == "L2tildeR") {
      out.op = assemble_two_component_linearization(profile, m.p, m.b, m.omega, m.gamma, Part::R);
    } else if (name == "L2tildeI") {
      out.op = assemble_two_component_linearization(profile, m.p, m.b, m.omega, m.gamma, Part::I);
      out.expectation = {{"n_negative", 0}, {"kernel_dim", 2}};
    } else {
      auto [plus, minus] = assemble_plus_minus(profile, m.p, m.b, m.omega, m.gamma);
      if (name == "Lplus") {
        out.op = std::move(plus);
        out.expectation = {{"n_negative", m.gamma > 0 ? m.k + 1 : n - m.k}, {"kernel_dim", 0}};
      } else {
        out.op = std::move(minus);
        if (m.b > m.p - 1.0)
          out.expectation = {{"n_negative", 0}};
        else if (m.b > 0.0 && m.k == 0 && m.gamma > 0)
          out.expectation = {{"n_negative", 1}};
      }
    }
    return out;
  }
  if (name == "Leps") {
    if (!m.epsilon) throw ValidationError("spectrum Leps needs model.epsilon");
    const double gamma_eff = m.gamma / std::sqrt(m.omega);
    out.op = assemble_epsilon_operator(*m.epsilon, m.k, gamma_eff, m.p, graph);
    if (*m.epsilon < 1.0)
      out.expectation = {{"n_negative", 0}};
    else if (m.k == 0 && m.gamma > 0 && *m.epsilon > 1.0 && *m.epsilon < 2.0 * m.p - 1.0)
      out.expectation = {{"n_negative", 1}};
    return out;
  }
  if (name == "L2D") {
    const double eff = m.omega0 - m.omega1;
    const GridField profile = nls_profile_family(eff, m.gamma, m.k, 4.0, 1.0, graph);
    out.op = assemble_rotation_linearization(m.omega0, m.omega1, profile, m.gamma, graph);
    out.expectation = {{"n_negative", m.gamma > 0 ? m.k + 1 : n - m.k}, {"kernel_dim", 1}};
    return out;
  }
  throw ValidationError("unknown operator name '" + name +
                        "' (expected delta_laplacian|L1R|L1I|L2|L2tildeR|L2tildeI|Lplus|"
                        "Lminus|Leps|L2D)");
}

} // namespace

int cmd_spectrum(const RunConfig& cfg, const std::string& operator_name) {
  const StarGraph graph = cfg.graph();
  NamedOperator named = assemble_named(cfg, operator_name, graph);
  const double zero_tol = cfg.resolved_zero_tol();
  const SpectrumReport rep = spectrum(named.op, 12, zero_tol);
  const json config = cfg.resolved_json();

  json summary{{"operator", operator_name},
               {"n_negative", rep.n_negative},
               {"kernel_dim", rep.kernel_dim},
               {"zero_tol", zero_tol},
               {"dimension", named.op.dimension()}};
  if (!named.expectation.is_null()) {
    summary["expected"] = named.expectation;
    bool match = true;
    if (named.expectation.contains("n_negative"))
      match = match && named.expectation["n_negative"].get<int>() == rep.n_negative;
    if (named.expectation.contains("kernel_dim"))
      match = match && named.expectation["kernel_dim"].get<int>() == rep.kernel_dim;
    summary["matches_expected"] = match;
  }
  write_spectrum_csv(out_path(cfg, "spectrum.csv"), config, rep);
  write_json(out_path(cfg, "morse_summary.json"), config, std::move(summary));
  return 0;
}

namespace {

std::pair<OperatorMatrix, OperatorMatrix> instability_pair(const RunConfig& cfg,
                                                           const StarGraph& graph) {
  const ModelConfig& m = cfg.model;
  if (m.kind == ModelKind::Power && m.two_components) {
    const GridField profile = two_component_profile(m.omega, m.gamma, m.b, m.p, m.k, graph).u;
    return {assemble_two_component_linearization(profile, m.p, m.b, m.omega, m.gamma, Part::R),
            assemble_two_component_linearization(profile, m.p, m.b, m.omega, m.gamma, Part::I)};
  }
  const PowerParams pp = m.power();
  pp.validate(graph.num_edges);
  const GridField profile = nls_profile_family(pp.omega, pp.gamma, pp.k, pp.q, pp.a, graph);
  return {assemble_one_component_linearization(profile, pp, Part::R, 1),
          assemble_one_component_linearization(profile, pp, Part::I, 1)};
}

TwoComponentState mode_to_state(const InstabilityReport& rep, const StarGraph& graph,
                                size_t index) {
  const auto& w1 = rep.modes_w1[index];
  const auto& w2 = rep.modes_w2[index];
  const Complex im(0.0, 1.0);
  GridField du(graph, w1[0].values() + im * w2[0].values());
  GridField dv = (w1.size() > 1) ? GridField(graph, w1[1].values() + im * w2[1].values())
                                 : GridField::zero(graph);
  return TwoComponentState{std::move(du), std::move(dv)};
}

constexpr double kInstabilityTol = 1e-3;

} // namespace

int cmd_instability(const RunConfig& cfg) {
  const StarGraph graph = cfg.graph();
  auto [lr, li] = instability_pair(cfg, graph);
  InstabilityOptions opts;
  opts.zero_tol = cfg.resolved_zero_tol();
  const InstabilityReport rep = instability_eigenvalues(lr, li, kInstabilityTol, opts);
  const json config = cfg.resolved_json();

  json eigen_list = json::array();
  for (const auto& lam : rep.eigenvalues)
    eigen_list.push_back({{"re", lam.real()}, {"im", lam.imag()}});
  const int count = static_cast<int>(rep.eigenvalues.size());
  json summary{{"unstable_eigenvalues", eigen_list},
               {"count", count},
               {"grillakis_lower_bound", rep.grillakis_bound},
               {"count_geq_bound", count >= rep.grillakis_bound},
               {"tol", kInstabilityTol}};
  write_json(out_path(cfg, "instability.json"), config, std::move(summary));
  return 0;
}

int cmd_evolve(const RunConfig& cfg) {
  const StarGraph graph = cfg.graph();
  const TwoComponentState profile = build_profile(cfg, graph);
  const PowerParams pp = cfg.model.power();
  const json config = cfg.resolved_json();

  if (!cfg.experiment.present) {
    const EvolveResult res = evolve(profile, pp, cfg.evolve, &profile);
    write_trace_csv(out_path(cfg, "trace.csv"), config, res.trace);
    double max_dev = 0.0;
    for (double d : res.trace.orbital_dev) max_dev = std::max(max_dev, d);
    const double m0 = res.trace.mass_u.front();
    const double e0 = res.trace.energy.front();
    json summary{{"blew_up", res.blew_up},
                 {"max_orbital_dev", max_dev},
                 {"dt_halvings", res.trace.dt_halvings},
                 {"mass_u_drift", std::abs(res.trace.mass_u.back() - m0) / std::max(m0, 1e-300)},
                 {"energy_drift",
                  std::abs(res.trace.energy.back() - e0) / std::max(std::abs(e0), 1e-300)}};
    write_json(out_path(cfg, "summary.json"), config, std::move(summary));
    return res.blew_up ? 4 : 0;
  }

  // Stability experiment; direction = unstable_eigvec seeds with the leading
  // mode of the instability eigenproblem.
  TwoComponentState mode = zero_state(graph);
  bool have_mode = false;
  if (cfg.experiment.direction == PerturbationKind::UnstableEigvec) {
    auto [lr, li] = instability_pair(cfg, graph);
    InstabilityOptions opts;
    opts.zero_tol = cfg.resolved_zero_tol();
    opts.want_modes = true;
    const InstabilityReport rep = instability_eigenvalues(lr, li, kInstabilityTol, opts);
    if (rep.eigenvalues.empty())
      throw ValidationError("evolve: no unstable eigenvector exists for this configuration");
    mode = mode_to_state(rep, graph, 0);
    have_mode = true;
  }

  const int trials = std::max(1, cfg.experiment.trials);
  std::vector<StabilityVerdict> verdicts(trials);
  const int workers = std::min(worker_count(), trials);
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  auto work = [&]() {
    for (int i = next.fetch_add(1); i < trials; i = next.fetch_add(1)) {
      ExperimentConfig ec;
      ec.amplitude = cfg.experiment.amplitude;
      ec.direction = cfg.experiment.direction;
      ec.seed = cfg.seed + static_cast<std::uint64_t>(i);
      ec.horizon = cfg.experiment.horizon;
      verdicts[i] =
          stability_experiment(profile, pp, ec, cfg.evolve, have_mode ? &mode : nullptr);
    }
  };
  if (workers > 1) {
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  } else {
    work();
  }

  bool growth = false;
  double max_dev = 0.0, efold = 0.0;
  for (int i = 0; i < trials; ++i) {
    const auto& v = verdicts[i];
    growth = growth || v.growth;
    max_dev = std::max(max_dev, v.max_dev);
    if (v.growth && v.efold_rate > efold) efold = v.efold_rate;
    write_trace_csv(out_path(cfg, trials == 1 ? "trace.csv"
                                              : "trace_trial" + std::to_string(i) + ".csv"),
                    config, v.trace);
  }
  json summary{{"verdict", growth ? "GROWTH" : "BOUNDED"},
               {"max_dev", max_dev},
               {"efold_rate", efold},
               {"horizon", verdicts[0].horizon},
               {"amplitude", cfg.experiment.amplitude},
               {"threshold", verdicts[0].threshold},
               {"trials", trials},
               {"dt_halvings", verdicts[0].trace.dt_halvings}};
  write_json(out_path(cfg, "verdict.json"), config, std::move(summary));
  return 0;
}

int cmd_rearrange(const RunConfig& cfg, const std::string& input_csv) {
  if (input_csv.empty()) throw ValidationError("rearrange needs --input <field.csv>");
  const TwoComponentState state = read_field_csv(input_csv);
  const TwoComponentState starred{rearrange(state.u), rearrange(state.v)};
  const json config = cfg.resolved_json();

  const int n = state.graph().num_edges;
  auto component_report = [&](const GridField& f, const GridField& fs) {
    json norms = json::array();
    for (double p : {1.0, 2.0, 4.0}) {
      norms.push_back({{"p", p}, {"before", lp_norm(f, p)}, {"after", lp_norm(fs, p)}});
    }
    const double inf = std::numeric_limits<double>::infinity();
    norms.push_back({{"p", "inf"}, {"before", lp_norm(f, inf)}, {"after", lp_norm(fs, inf)}});
    const double before = lp_norm(derivative(f), 2.0);
    const double after = lp_norm(derivative(fs), 2.0);
    return json{{"lp_norms", norms},
                {"derivative_ratio", before > 0.0 ? after / before : 0.0},
                {"polya_szego_bound", 0.5 * n}};
  };
  GridField au(state.graph(), state.u.values().cwiseAbs().cast<Complex>());
  GridField av(state.graph(), state.v.values().cwiseAbs().cast<Complex>());
  json summary{{"u", component_report(state.u, starred.u)},
               {"v", component_report(state.v, starred.v)},
               {"hardy_littlewood",
                {{"before", inner_product(au, av)},
                 {"after", inner_product(starred.u, starred.v)}}}};
  write_field_csv(out_path(cfg, "rearranged.csv"), config, starred);
  write_json(out_path(cfg, "rearrange_report.json"), config, std::move(summary));
  return 0;
}

int run_command(const std::string& command, const RunConfig& cfg,
                const std::string& operator_name, const std::string& input_csv) {
  try {
    if (command == "profile") return cmd_profile(cfg);
    if (command == "ground-state") return cmd_ground_state(cfg);
    if (command == "spectrum") {
      if (operator_name.empty())
        throw ValidationError("spectrum needs --operator <name>");
      return cmd_spectrum(cfg, operator_name);
    }
    if (command == "instability") return cmd_instability(cfg);
    if (command == "evolve") return cmd_evolve(cfg);
    if (command == "rearrange") return cmd_rearrange(cfg, input_csv);
    throw ValidationError("unknown command '" + command + "'");
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const BlowupError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}

} // namespace graphnls
