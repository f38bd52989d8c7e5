#include "graphnls/dynamics.hpp"

#include <cmath>
#include <functional>
#include <random>

namespace graphnls {

void EvolveConfig::validate(double h) const {
  if (!(dt > 0.0)) throw ValidationError("evolve: dt must be positive");
  if (dt > h * (1.0 + 1e-12))
    throw ValidationError("evolve: dt must not exceed the grid spacing");
  if (!(t_final > 0.0)) throw ValidationError("evolve: t_final must be positive");
  if (!(nonlinear_tol > 0.0) || max_picard < 1)
    throw ValidationError("evolve: bad fixed-point settings");
}

namespace {

using Vec = Eigen::VectorXcd;

// Time stepping works on the reduced layout (shared vertex + interior
// points, Dirichlet at x = L), in plain function values.
struct Workspace {
  StarGraph graph;
  int m = 0; // interior points per edge
  double h = 0.0;
  Eigen::VectorXd w; // lumped weights per slot
  ComplexStarChain stiffness; // K: P1 stiffness with the -gamma vertex term

  Workspace(const StarGraph& g, double gamma) : graph(g) {
    m = g.points_per_edge - 2;
    h = g.spacing();
    const int n = 1 + g.num_edges * m;
    w.resize(n);
    w(0) = 0.5 * h * g.num_edges;
    for (int i = 1; i < n; ++i) w(i) = h;

    stiffness = ComplexStarChain(g.num_edges, m, 1);
    stiffness.vertex_block()(0, 0) = g.num_edges / h - gamma;
    for (int e = 0; e < g.num_edges; ++e) {
      stiffness.vertex_bond(e)(0) = -1.0 / h;
      for (int i = 0; i < m; ++i) {
        stiffness.diag(e, i)(0, 0) = 2.0 / h;
        if (i + 1 < m) stiffness.bond(e, i)(0) = -1.0 / h;
      }
    }
  }

  int dim() const { return static_cast<int>(w.size()); }
  int slot(int e, int i) const { return 1 + e * m + i; } // interior i >= 0

  Vec from_state_component(const GridField& f) const {
    Vec x(dim());
    Complex vertex = 0.0;
    for (int e = 0; e < graph.num_edges; ++e) vertex += f.values()(0, e);
    x(0) = vertex / static_cast<double>(graph.num_edges);
    for (int e = 0; e < graph.num_edges; ++e)
      for (int i = 0; i < m; ++i) x(slot(e, i)) = f.values()(i + 1, e);
    return x;
  }
  GridField to_field(const Vec& x) const {
    Eigen::MatrixXcd vals = Eigen::MatrixXcd::Zero(graph.points_per_edge, graph.num_edges);
    for (int e = 0; e < graph.num_edges; ++e) {
      vals(0, e) = x(0);
      for (int i = 0; i < m; ++i) vals(i + 1, e) = x(slot(e, i));
    }
    return GridField(graph, std::move(vals));
  }

  double mass(const Vec& x) const { return (w.array() * x.cwiseAbs2().array()).sum(); }

  double energy(const Vec& xu, const Vec& xv, const PowerParams& p) const {
    const double kin = xu.dot(stiffness.apply(xu)).real() + xv.dot(stiffness.apply(xv)).real();
    double g = 0.0;
    for (int i = 0; i < dim(); ++i) {
      const double au = std::abs(xu(i));
      const double av = std::abs(xv(i));
      g += w(i) * (2.0 * p.a / p.q * std::pow(au, p.q) + 2.0 * p.c / p.r * std::pow(av, p.r) +
                   2.0 * p.b / p.p * std::pow(au * av, p.p));
    }
    return kin - g;
  }

  double q1(const Vec& xu, const Vec& xv) const {
    Complex s = 0.0;
    for (int i = 0; i < dim(); ++i) s += w(i) * xu(i) * std::conj(xv(i));
    return s.imag();
  }
};

void nonlinear_coefficients(const PowerParams& p, const Vec& mu, const Vec& mv,
                            Eigen::VectorXd& gu, Eigen::VectorXd& gv) {
  const int n = static_cast<int>(mu.size());
  gu.resize(n);
  gv.resize(n);
  for (int i = 0; i < n; ++i) {
    const double au = std::abs(mu(i));
    const double av = std::abs(mv(i));
    gu(i) = p.a * std::pow(au, p.q - 2.0) + p.b * std::pow(av, p.p) * std::pow(au, p.p - 2.0);
    gv(i) = p.c * std::pow(av, p.r - 2.0) + p.b * std::pow(au, p.p) * std::pow(av, p.p - 2.0);
  }
}

// (M + i theta (K - M G)) x_new = (M - i theta (K - M G)) x_old for one
// component with frozen coefficients G.
Vec cayley_solve(const Workspace& ws, const Eigen::VectorXd& g, double theta, const Vec& x_old) {
  const Complex it(0.0, theta);
  ComplexStarChain a = ws.stiffness;
  a.vertex_block()(0, 0) = ws.w(0) + it * (a.vertex_block()(0, 0) - ws.w(0) * g(0));
  for (int e = 0; e < ws.graph.num_edges; ++e) {
    a.vertex_bond(e)(0) *= it;
    for (int i = 0; i < ws.m; ++i) {
      const int s = ws.slot(e, i);
      a.diag(e, i)(0, 0) = ws.w(s) + it * (a.diag(e, i)(0, 0) - ws.w(s) * g(s));
      if (i + 1 < ws.m) a.bond(e, i)(0) *= it;
    }
  }
  Vec rhs = ws.stiffness.apply(x_old);
  for (int i = 0; i < ws.dim(); ++i)
    rhs(i) = ws.w(i) * x_old(i) - it * (rhs(i) - ws.w(i) * g(i) * x_old(i));
  return a.factor(Complex(0.0)).solve(rhs);
}

bool crank_nicolson_step(const Workspace& ws, const PowerParams& p, const EvolveConfig& cfg,
                         double dt, Vec& xu, Vec& xv) {
  const double theta = 0.5 * dt;
  Vec xu_new = xu, xv_new = xv;
  Eigen::VectorXd gu, gv;
  const double scale = std::max({1.0, xu.cwiseAbs().maxCoeff(), xv.cwiseAbs().maxCoeff()});
  double prev_delta = std::numeric_limits<double>::max();
  for (int j = 0; j < cfg.max_picard; ++j) {
    const Vec mu = 0.5 * (xu + xu_new);
    const Vec mv = 0.5 * (xv + xv_new);
    nonlinear_coefficients(p, mu, mv, gu, gv);
    Vec xu_next = cayley_solve(ws, gu, theta, xu);
    Vec xv_next = cayley_solve(ws, gv, theta, xv);
    const double delta = std::max((xu_next - xu_new).cwiseAbs().maxCoeff(),
                                  (xv_next - xv_new).cwiseAbs().maxCoeff());
    xu_new.swap(xu_next);
    xv_new.swap(xv_next);
    if (delta <= cfg.nonlinear_tol * scale) {
      xu.swap(xu_new);
      xv.swap(xv_new);
      return true;
    }
    if (j > 2 && delta >= prev_delta && delta <= 1e4 * std::numeric_limits<double>::epsilon() * scale) {
      xu.swap(xu_new); // converged to the roundoff floor
      xv.swap(xv_new);
      return true;
    }
    prev_delta = delta;
  }
  return false;
}

void strang_step(const Workspace& ws, const PowerParams& p, double dt, Vec& xu, Vec& xv) {
  Eigen::VectorXd gu, gv;
  auto phase_half = [&]() {
    nonlinear_coefficients(p, xu, xv, gu, gv);
    for (int i = 0; i < ws.dim(); ++i) {
      xu(i) *= std::exp(Complex(0.0, 0.5 * dt * gu(i)));
      xv(i) *= std::exp(Complex(0.0, 0.5 * dt * gv(i)));
    }
  };
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(ws.dim());
  phase_half();
  xu = cayley_solve(ws, zero, 0.5 * dt, xu);
  xv = cayley_solve(ws, zero, 0.5 * dt, xv);
  phase_half();
}

struct RunControl {
  double dt0 = 0.0;
  int fixed_steps = -1;   // <0: run to t_final
  double t_final = 0.0;
  bool allow_halving = true;
  std::function<bool(double dev)> stop = nullptr;
};

EvolveResult run_evolution(const TwoComponentState& initial, const PowerParams& params,
                           const EvolveConfig& cfg, const TwoComponentState* reference,
                           const RunControl& control) {
  const Workspace ws(initial.graph(), params.gamma);
  if (!initial.u.vertex_continuous() || !initial.v.vertex_continuous())
    throw ValidationError("evolve: initial state is discontinuous at the vertex");

  Vec xu = ws.from_state_component(initial.u);
  Vec xv = ws.from_state_component(initial.v);
  const TwoComponentState ref = reference ? *reference : initial;
  const double sup0 =
      std::max({xu.cwiseAbs().maxCoeff(), xv.cwiseAbs().maxCoeff(), 1e-30});

  EvolveResult out{TwoComponentState{initial.u, initial.v}};
  EvolutionTrace& trace = out.trace;
  auto record = [&](double t) {
    const GridField fu = ws.to_field(xu);
    const GridField fv = ws.to_field(xv);
    trace.times.push_back(t);
    trace.mass_u.push_back(ws.mass(xu));
    trace.mass_v.push_back(ws.mass(xv));
    trace.energy.push_back(ws.energy(xu, xv, params));
    trace.q1.push_back(ws.q1(xu, xv));
    trace.orbital_dev.push_back(orbital_deviation(TwoComponentState{fu, fv}, ref));
  };

  double t = 0.0;
  double dt = control.dt0;
  record(t);
  int step_index = 0;
  while (true) {
    if (control.fixed_steps >= 0) {
      if (step_index >= control.fixed_steps) break;
    } else if (t >= control.t_final - 1e-12 * control.t_final) {
      break;
    }
    double dt_step = dt;
    if (control.fixed_steps < 0) dt_step = std::min(std::abs(dt), control.t_final - t) *
                                           (dt >= 0.0 ? 1.0 : -1.0);
    if (cfg.scheme == EvolveConfig::Scheme::StrangSplit) {
      strang_step(ws, params, dt_step, xu, xv);
    } else {
      while (!crank_nicolson_step(ws, params, cfg, dt_step, xu, xv)) {
        if (!control.allow_halving || trace.dt_halvings >= 8)
          throw ConvergenceError("evolve: fixed-point iteration failed to converge");
        dt *= 0.5;
        dt_step *= 0.5;
        ++trace.dt_halvings;
      }
    }
    t += dt_step;
    ++step_index;
    record(t);
    const double sup = std::max(xu.cwiseAbs().maxCoeff(), xv.cwiseAbs().maxCoeff());
    if (sup > 1e3 * sup0) {
      out.blew_up = true;
      break;
    }
    if (control.stop && control.stop(trace.orbital_dev.back())) break;
  }
  out.final_state = TwoComponentState{ws.to_field(xu), ws.to_field(xv)};
  return out;
}

} // namespace

EvolveResult evolve(const TwoComponentState& initial, const PowerParams& params,
                    const EvolveConfig& cfg, const TwoComponentState* reference) {
  cfg.validate(initial.graph().spacing());
  RunControl control;
  control.dt0 = cfg.dt;
  control.t_final = cfg.t_final;
  return run_evolution(initial, params, cfg, reference, control);
}

EvolveResult evolve_steps(const TwoComponentState& initial, const PowerParams& params,
                          const EvolveConfig& cfg, double dt_signed, int steps,
                          const TwoComponentState* reference) {
  RunControl control;
  control.dt0 = dt_signed;
  control.fixed_steps = steps;
  control.allow_halving = false;
  return run_evolution(initial, params, cfg, reference, control);
}

namespace {

double component_phase_deviation(const GridField& f, const GridField& r) {
  const double nf = h1_norm(f);
  const double nr = h1_norm(r);
  if (nr == 0.0) return nf * nf;
  const Complex pairing = complex_h1_pairing(f, r);
  return std::max(0.0, nf * nf + nr * nr - 2.0 * std::abs(pairing));
}

} // namespace

double orbital_deviation(const TwoComponentState& state, const TwoComponentState& reference) {
  return std::sqrt(component_phase_deviation(state.u, reference.u) +
                   component_phase_deviation(state.v, reference.v));
}

double orbital_deviation_rotation(const TwoComponentState& state,
                                  const TwoComponentState& reference, bool quotient_rotation) {
  if (!quotient_rotation) {
    // Common phase only: || (u,v) - e^{it}(ru,rv) ||_X minimized in closed form.
    const double n2 = std::pow(x_norm(state), 2) + std::pow(x_norm(reference), 2);
    const Complex pairing =
        complex_h1_pairing(state.u, reference.u) + complex_h1_pairing(state.v, reference.v);
    return std::sqrt(std::max(0.0, n2 - 2.0 * std::abs(pairing)));
  }
  // Scan the rotation angle; the common phase is optimized in closed form.
  const Complex puu = complex_h1_pairing(state.u, reference.u);
  const Complex puv = complex_h1_pairing(state.u, reference.v);
  const Complex pvu = complex_h1_pairing(state.v, reference.u);
  const Complex pvv = complex_h1_pairing(state.v, reference.v);
  const double n2 = std::pow(x_norm(state), 2) + std::pow(x_norm(reference), 2);
  auto value = [&](double th) {
    // R(th) (ru, rv) = (cos ru + sin rv, -sin ru + cos rv)
    const double c = std::cos(th), s = std::sin(th);
    const Complex pairing = c * puu + s * puv - s * pvu + c * pvv;
    return n2 - 2.0 * std::abs(pairing);
  };
  double best = value(0.0);
  const int samples = 256;
  double best_th = 0.0;
  for (int i = 1; i < samples; ++i) {
    const double th = 2.0 * M_PI * i / samples;
    const double v = value(th);
    if (v < best) {
      best = v;
      best_th = th;
    }
  }
  double lo = best_th - 2.0 * M_PI / samples, hi = best_th + 2.0 * M_PI / samples;
  for (int it = 0; it < 60; ++it) {
    const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (value(m1) < value(m2))
      hi = m2;
    else
      lo = m1;
  }
  return std::sqrt(std::max(0.0, value(0.5 * (lo + hi))));
}

ConservedQuantities conserved_quantities(const TwoComponentState& state,
                                         const PowerParams& params) {
  ConservedQuantities q;
  q.mass_u = std::pow(lp_norm(state.u, 2.0), 2);
  q.mass_v = std::pow(lp_norm(state.v, 2.0), 2);
  q.energy = energy(state, params);
  q.q1 = complex_inner_product(state.u, state.v).imag();
  return q;
}

namespace {

TwoComponentState random_perturbation(const StarGraph& graph, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.3, 3.0);
  // A vertex-symmetric bump plus edge-local bumps vanishing at the vertex.
  const double v_amp_re = gauss(rng), v_amp_im = gauss(rng);
  const double v_width = unif(rng);
  std::vector<std::array<double, 4>> edge_bumps; // re, im, center, width
  for (int e = 0; e < graph.num_edges; ++e)
    edge_bumps.push_back({gauss(rng), gauss(rng), unif(rng), unif(rng)});
  return TwoComponentState{
      GridField::sample(graph,
                        [&](int e, double x) -> Complex {
                          const auto& b = edge_bumps[e - 1];
                          const double loc = (x - b[2]) / b[3];
                          const Complex local =
                              Complex(b[0], b[1]) * x * std::exp(-loc * loc);
                          const Complex shared =
                              Complex(v_amp_re, v_amp_im) * std::exp(-x * x / (v_width * v_width));
                          return shared + local;
                        }),
      GridField::sample(graph, [&](int e, double x) -> Complex {
        const auto& b = edge_bumps[e - 1];
        const double loc = (x - b[3]) / b[2];
        return Complex(b[1], b[0]) * x * std::exp(-loc * loc) +
               Complex(v_amp_im, -v_amp_re) * std::exp(-x * x / (v_width * v_width));
      })};
}

} // namespace

StabilityVerdict stability_experiment(const TwoComponentState& profile,
                                      const PowerParams& params, const ExperimentConfig& exp_cfg,
                                      EvolveConfig evolve_cfg,
                                      const TwoComponentState* unstable_mode) {
  TwoComponentState dir = [&] {
    if (exp_cfg.direction == PerturbationKind::UnstableEigvec) {
      if (!unstable_mode)
        throw ValidationError("stability_experiment: unstable_eigvec direction needs a mode");
      return *unstable_mode;
    }
    return random_perturbation(profile.graph(), exp_cfg.seed);
  }();
  const double norm = x_norm(dir);
  if (!(norm > 0.0)) throw ValidationError("stability_experiment: zero perturbation");
  const double scale = exp_cfg.amplitude / norm;
  TwoComponentState initial{
      GridField(profile.graph(), profile.u.values() + scale * dir.u.values()),
      GridField(profile.graph(), profile.v.values() + scale * dir.v.values())};

  StabilityVerdict verdict;
  verdict.amplitude = exp_cfg.amplitude;
  verdict.threshold = exp_cfg.growth_factor * exp_cfg.amplitude;
  verdict.horizon =
      (exp_cfg.horizon > 0.0) ? exp_cfg.horizon : 50.0 / std::sqrt(params.omega);

  evolve_cfg.t_final = verdict.horizon;
  evolve_cfg.validate(profile.graph().spacing());
  RunControl control;
  control.dt0 = evolve_cfg.dt;
  control.t_final = verdict.horizon;
  const double stop_at = 1.5 * verdict.threshold;
  control.stop = [stop_at](double dev) { return dev > stop_at; };

  EvolveResult res = run_evolution(initial, params, evolve_cfg, &profile, control);

  verdict.trace = std::move(res.trace);
  verdict.final_state = std::move(res.final_state);
  for (double dev : verdict.trace.orbital_dev) verdict.max_dev = std::max(verdict.max_dev, dev);
  verdict.growth = verdict.max_dev > verdict.threshold;

  // e-folding rate from the log-linear window [2 eps, 8 eps].
  std::vector<double> ts, ls;
  for (size_t i = 0; i < verdict.trace.times.size(); ++i) {
    const double dev = verdict.trace.orbital_dev[i];
    if (dev >= 2.0 * exp_cfg.amplitude && dev <= 8.0 * exp_cfg.amplitude) {
      ts.push_back(verdict.trace.times[i]);
      ls.push_back(std::log(dev));
    }
  }
  if (ts.size() >= 5) {
    const double n = static_cast<double>(ts.size());
    double st = 0, sl = 0, stt = 0, stl = 0;
    for (size_t i = 0; i < ts.size(); ++i) {
      st += ts[i];
      sl += ls[i];
      stt += ts[i] * ts[i];
      stl += ts[i] * ls[i];
    }
    const double denom = n * stt - st * st;
    if (std::abs(denom) > 0.0) verdict.efold_rate = (n * stl - st * sl) / denom;
  }
  return verdict;
}

} // namespace graphnls
