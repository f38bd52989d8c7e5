#include "graphnls/variational.hpp"

#include <cmath>
#include <memory>
#include <random>

#include "spectra_detail.hpp"

namespace graphnls {

void MinimizeConfig::validate() const {
  if (!(step_size > 0.0)) throw ValidationError("minimize: step_size must be positive");
  if (max_iters < 1) throw ValidationError("minimize: max_iters must be positive");
  if (!(grad_tol > 0.0) || !(mass_tol > 0.0))
    throw ValidationError("minimize: tolerances must be positive");
}

namespace {

// Stiffness quadratic form sum_e sum_i |u_{i+1}-u_i|^2/h - gamma |u(0)|^2,
// directly on grid values (P1 form, Dirichlet value included as a sample).
double stiffness_form(const GridField& f, double gamma) {
  const StarGraph& g = f.graph();
  const double h = g.spacing();
  const auto& v = f.values();
  double total = 0.0;
  for (int e = 0; e < g.num_edges; ++e)
    for (int i = 0; i + 1 < g.points_per_edge; ++i)
      total += std::norm(v(i + 1, e) - v(i, e)) / h;
  return total - gamma * std::norm(f.vertex_value());
}

double power_quadrature(const GridField& f, double p) {
  const StarGraph& g = f.graph();
  const double h = g.spacing();
  const auto& v = f.values();
  double total = 0.0;
  for (int e = 0; e < g.num_edges; ++e) {
    double edge = 0.5 * (std::pow(std::abs(v(0, e)), p) +
                         std::pow(std::abs(v(g.points_per_edge - 1, e)), p));
    for (int i = 1; i < g.points_per_edge - 1; ++i) edge += std::pow(std::abs(v(i, e)), p);
    total += h * edge;
  }
  return total;
}

double mixed_quadrature(const GridField& f, const GridField& g, double p) {
  const StarGraph& gr = f.graph();
  const double h = gr.spacing();
  const auto& a = f.values();
  const auto& b = g.values();
  auto term = [&](int i, int e) {
    return std::pow(std::abs(a(i, e)) * std::abs(b(i, e)), p);
  };
  double total = 0.0;
  for (int e = 0; e < gr.num_edges; ++e) {
    double edge = 0.5 * (term(0, e) + term(gr.points_per_edge - 1, e));
    for (int i = 1; i < gr.points_per_edge - 1; ++i) edge += term(i, e);
    total += h * edge;
  }
  return total;
}

} // namespace

double energy(const TwoComponentState& state, const PowerParams& params) {
  if (!state.u.vertex_continuous() || !state.v.vertex_continuous())
    throw ValidationError("energy: state is discontinuous at the vertex");
  const double kin = stiffness_form(state.u, params.gamma) + stiffness_form(state.v, params.gamma);
  const double g = 2.0 * params.a / params.q * power_quadrature(state.u, params.q) +
                   2.0 * params.c / params.r * power_quadrature(state.v, params.r) +
                   2.0 * params.b / params.p * mixed_quadrature(state.u, state.v, params.p);
  return kin - g;
}

double energy(const TwoComponentState& state, const CubicParams& params) {
  return energy(state, cubic_as_power(params));
}

double single_problem_coefficient(SingleProblem problem, const CubicParams& params) {
  const double denom = params.b * params.b - params.a * params.c;
  switch (problem) {
    case SingleProblem::J1: return denom / (params.b - params.c);
    case SingleProblem::J2: return denom / (params.b - params.a);
    case SingleProblem::EndpointA: return params.a;
    case SingleProblem::EndpointC: return params.c;
  }
  throw ValidationError("unknown single minimization problem");
}

namespace {

// The descent works on packed coordinates of the zero-potential operator:
// Euclidean geometry there is the weighted L^2(Gamma) geometry, masses are
// squared coordinate norms, and vertex continuity plus the Dirichlet end are
// structural.
class DescentSpace {
public:
  DescentSpace(const StarGraph& graph, double gamma)
      : laplacian_(assemble_delta_laplacian(graph, gamma)), graph_(graph) {
    const auto& w = laplacian_.point_weights();
    slot_weight_.resize(laplacian_.dimension());
    for (int p = 0; p < w.size(); ++p) slot_weight_(p) = w(p);
    const double n2 = graph.num_edges * (double)graph.num_edges;
    const double shift = 1.0 + (gamma > 0.0 ? 1.5 * gamma * gamma / n2 : 0.0);
    precond_ = std::make_unique<RealStarChain::Factorization>(
        detail::factor_with_retry(laplacian_.chain(), -shift, 10.0));
  }

  int dim() const { return laplacian_.dimension(); }
  const OperatorMatrix& laplacian() const { return laplacian_; }
  const Eigen::VectorXd& slot_weight() const { return slot_weight_; }

  Eigen::VectorXcd apply_laplacian(const Eigen::VectorXcd& x) const {
    Eigen::VectorXcd y(x.size());
    y.real() = laplacian_.chain().apply(x.real());
    y.imag() = laplacian_.chain().apply(x.imag());
    return y;
  }
  Eigen::VectorXcd precondition(const Eigen::VectorXcd& g) const {
    Eigen::VectorXcd y(g.size());
    y.real() = precond_->solve(g.real());
    y.imag() = precond_->solve(g.imag());
    return y;
  }

  GridField to_field(const Eigen::VectorXcd& x) const {
    auto re = laplacian_.unpack(x.real());
    auto im = laplacian_.unpack(x.imag());
    Eigen::MatrixXcd vals = re[0].values().real().cast<Complex>() +
                            Complex(0.0, 1.0) * im[0].values().real().cast<Complex>();
    return GridField(graph_, std::move(vals));
  }
  Eigen::VectorXcd from_field(const GridField& f) const {
    GridField re(graph_, f.values().real().cast<Complex>());
    GridField im(graph_, f.values().imag().cast<Complex>());
    Eigen::VectorXcd x(dim());
    x.real() = laplacian_.pack(re);
    x.imag() = laplacian_.pack(im);
    return x;
  }

private:
  OperatorMatrix laplacian_;
  StarGraph graph_;
  Eigen::VectorXd slot_weight_;
  std::unique_ptr<RealStarChain::Factorization> precond_;
};

struct CoupledFunctional {
  double a, b, c;

  // E restricted to coordinates; quartic terms use the lumped weights.
  double value(const DescentSpace& sp, const Eigen::VectorXcd& xu,
               const Eigen::VectorXcd& xv) const {
    const auto& w = sp.slot_weight();
    double quart = 0.0;
    for (int i = 0; i < xu.size(); ++i) {
      const double pu = std::norm(xu(i)) / w(i);
      const double pv = std::norm(xv(i)) / w(i);
      quart += w(i) * (0.5 * a * pu * pu + 0.5 * c * pv * pv + b * pu * pv);
    }
    return xu.real().dot(sp.laplacian().chain().apply(xu.real())) +
           xu.imag().dot(sp.laplacian().chain().apply(xu.imag())) +
           xv.real().dot(sp.laplacian().chain().apply(xv.real())) +
           xv.imag().dot(sp.laplacian().chain().apply(xv.imag())) - quart;
  }

  void gradient(const DescentSpace& sp, const Eigen::VectorXcd& xu, const Eigen::VectorXcd& xv,
                Eigen::VectorXcd& gu, Eigen::VectorXcd& gv) const {
    const auto& w = sp.slot_weight();
    gu = 2.0 * sp.apply_laplacian(xu);
    gv = 2.0 * sp.apply_laplacian(xv);
    for (int i = 0; i < xu.size(); ++i) {
      const double pu = std::norm(xu(i)) / w(i);
      const double pv = std::norm(xv(i)) / w(i);
      gu(i) -= 2.0 * (a * pu + b * pv) * xu(i);
      gv(i) -= 2.0 * (c * pv + b * pu) * xv(i);
    }
  }
};

void rescale_mass(Eigen::VectorXcd& x, double mass) {
  const double current = x.squaredNorm();
  if (!(current > 0.0)) throw ConvergenceError("minimize: iterate collapsed to zero");
  x *= std::sqrt(mass / current);
}

Eigen::VectorXcd tangent_project(const Eigen::VectorXcd& g, const Eigen::VectorXcd& x) {
  return g - (x.dot(g) / x.squaredNorm()) * x;
}

Eigen::VectorXcd initial_coords(const DescentSpace& sp, const StarGraph& graph, double mass,
                                MinimizeConfig::Init kind, std::uint64_t seed,
                                const GridField* closed_form) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Eigen::VectorXcd x;
  switch (kind) {
    case MinimizeConfig::Init::ClosedFormPerturbed: {
      if (!closed_form) throw ValidationError("closed_form_perturbed init needs a profile");
      x = sp.from_field(*closed_form);
      Eigen::VectorXcd noise(x.size());
      for (int i = 0; i < x.size(); ++i) noise(i) = gauss(rng);
      noise = sp.precondition(noise); // smooth it
      x += 0.01 * x.norm() / noise.norm() * noise;
      break;
    }
    case MinimizeConfig::Init::GaussianBumps: {
      std::uniform_real_distribution<double> unif(0.5, 2.0);
      const double width = unif(rng);
      const double center = 0.4 * unif(rng);
      GridField f = GridField::sample(graph, [&](int, double t) -> Complex {
        const double d = (t - center) / width;
        return std::exp(-d * d);
      });
      x = sp.from_field(f);
      break;
    }
    case MinimizeConfig::Init::Random: {
      x.resize(sp.dim());
      for (int i = 0; i < x.size(); ++i) x(i) = Complex(gauss(rng), 0.0);
      x = sp.precondition(sp.precondition(x));
      x = x.cwiseAbs().cast<Complex>();
      break;
    }
  }
  rescale_mass(x, mass);
  return x;
}

} // namespace

MinimizeResult minimize_fixed_masses(const CubicParams& params, double alpha, double beta,
                                     const MinimizeConfig& cfg, const StarGraph& graph) {
  cfg.validate();
  if (!(alpha > 0.0 && beta > 0.0)) throw ValidationError("minimize: masses must be positive");

  DescentSpace sp(graph, params.gamma);
  const CoupledFunctional func{params.a, params.b, params.c};

  GridField phi_u = GridField::zero(graph);
  GridField phi_v = GridField::zero(graph);
  const bool have_closed_form = [&] {
    try {
      auto gs = coupled_cubic_ground_state(params, graph);
      phi_u = gs.u;
      phi_v = gs.v;
      return true;
    } catch (const ValidationError&) {
      return false;
    }
  }();
  if (cfg.init_kind == MinimizeConfig::Init::ClosedFormPerturbed && !have_closed_form)
    throw ValidationError("closed_form_perturbed init is unavailable in this regime");

  Eigen::VectorXcd xu = initial_coords(sp, graph, alpha, cfg.init_kind, cfg.rng_seed, &phi_u);
  Eigen::VectorXcd xv =
      initial_coords(sp, graph, beta, cfg.init_kind, cfg.rng_seed + 1, &phi_v);
  if (!cfg.complex_descent) {
    xu = xu.cwiseAbs().cast<Complex>();
    xv = xv.cwiseAbs().cast<Complex>();
    rescale_mass(xu, alpha);
    rescale_mass(xv, beta);
  }

  MinimizeResult res;
  double e_now = func.value(sp, xu, xv);
  double step = cfg.step_size;
  Eigen::VectorXcd gu, gv;
  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    func.gradient(sp, xu, xv, gu, gv);
    const double grad_norm =
        std::sqrt(tangent_project(gu, xu).squaredNorm() + tangent_project(gv, xv).squaredNorm());
    if (it % 25 == 0 || grad_norm < cfg.grad_tol)
      res.trace.push_back({it, e_now, grad_norm});
    if (grad_norm < cfg.grad_tol) {
      res.converged = true;
      break;
    }
    // project - precondition - project: a guaranteed descent direction on
    // the mass spheres, <g, d> = <Pg, M^{-1} Pg> > 0
    const Eigen::VectorXcd du = tangent_project(sp.precondition(tangent_project(gu, xu)), xu);
    const Eigen::VectorXcd dv = tangent_project(sp.precondition(tangent_project(gv, xv)), xv);
    const double slope = (gu.dot(du) + gv.dot(dv)).real();
    bool accepted = false;
    while (!accepted) {
      Eigen::VectorXcd tu = xu - step * du;
      Eigen::VectorXcd tv = xv - step * dv;
      rescale_mass(tu, alpha);
      rescale_mass(tv, beta);
      const double e_trial = func.value(sp, tu, tv);
      if (e_trial <= e_now - 1e-4 * step * slope) {
        xu.swap(tu);
        xv.swap(tv);
        e_now = e_trial;
        accepted = true;
        step = std::min(step * 1.25, 50.0 * cfg.step_size);
      } else {
        step *= 0.5;
        if (step < 1e-14) {
          // the energy resolution floor: accept as converged when the
          // projected gradient is already tiny, otherwise a genuine stall
          if (grad_norm < 1e3 * cfg.grad_tol) {
            res.converged = true;
            accepted = true;
          } else {
            throw ConvergenceError("minimize: step size reached the floor without descent");
          }
        }
      }
    }
    if (res.converged) break;
  }
  res.iterations = it;
  res.energy = e_now;

  func.gradient(sp, xu, xv, gu, gv);
  res.omega1 = -0.5 * xu.dot(gu).real() / alpha;
  res.omega2 = -0.5 * xv.dot(gv).real() / beta;

  // Canonical phase: vertex value real and nonnegative.
  auto align = [](Eigen::VectorXcd& x) {
    const Complex v = x(0);
    if (std::abs(v) > 0.0) x *= std::conj(v) / std::abs(v);
  };
  align(xu);
  align(xv);
  res.state = TwoComponentState{sp.to_field(xu), sp.to_field(xv)};
  return res;
}

SingleResult minimize_single(SingleProblem problem, double mass, const CubicParams& params,
                             const MinimizeConfig& cfg, const StarGraph& graph) {
  cfg.validate();
  if (!(mass > 0.0)) throw ValidationError("minimize_single: mass must be positive");
  const double coeff = single_problem_coefficient(problem, params);
  if (!(coeff > 0.0))
    throw ValidationError("minimize_single: quartic coefficient must be positive");

  DescentSpace sp(graph, params.gamma);
  const auto& w = sp.slot_weight();
  auto value = [&](const Eigen::VectorXcd& x) {
    double quart = 0.0;
    for (int i = 0; i < x.size(); ++i) {
      const double p = std::norm(x(i)) / w(i);
      quart += w(i) * p * p;
    }
    return x.real().dot(sp.laplacian().chain().apply(x.real())) +
           x.imag().dot(sp.laplacian().chain().apply(x.imag())) - 0.5 * coeff * quart;
  };
  auto gradient = [&](const Eigen::VectorXcd& x) {
    Eigen::VectorXcd g = 2.0 * sp.apply_laplacian(x);
    for (int i = 0; i < x.size(); ++i) g(i) -= 2.0 * coeff * (std::norm(x(i)) / w(i)) * x(i);
    return g;
  };

  GridField seed_profile = GridField::sample(graph, [&](int, double t) -> Complex {
    return std::exp(-t * t);
  });
  Eigen::VectorXcd x;
  if (cfg.init_kind == MinimizeConfig::Init::ClosedFormPerturbed) {
    GridField phi = half_soliton(params.omega, params.gamma, graph);
    x = initial_coords(sp, graph, mass, cfg.init_kind, cfg.rng_seed, &phi);
  } else {
    x = initial_coords(sp, graph, mass, cfg.init_kind, cfg.rng_seed, &seed_profile);
  }

  SingleResult res{GridField::zero(graph)};
  double e_now = value(x);
  double step = cfg.step_size;
  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    const Eigen::VectorXcd g = gradient(x);
    const double grad_norm = tangent_project(g, x).norm();
    if (it % 25 == 0 || grad_norm < cfg.grad_tol) res.trace.push_back({it, e_now, grad_norm});
    if (grad_norm < cfg.grad_tol) {
      res.converged = true;
      break;
    }
    const Eigen::VectorXcd d = tangent_project(sp.precondition(tangent_project(g, x)), x);
    const double slope = g.dot(d).real();
    bool accepted = false;
    while (!accepted) {
      Eigen::VectorXcd t = x - step * d;
      rescale_mass(t, mass);
      const double e_trial = value(t);
      if (e_trial <= e_now - 1e-4 * step * slope) {
        x.swap(t);
        e_now = e_trial;
        accepted = true;
        step = std::min(step * 1.25, 50.0 * cfg.step_size);
      } else {
        step *= 0.5;
        if (step < 1e-14) {
          if (grad_norm < 1e3 * cfg.grad_tol) {
            res.converged = true;
            accepted = true;
          } else {
            throw ConvergenceError("minimize_single: step size reached the floor");
          }
        }
      }
    }
    if (res.converged) break;
  }
  res.iterations = it;
  res.energy = e_now;
  res.omega = -0.5 * x.dot(gradient(x)).real() / mass;
  res.field = sp.to_field(x);
  return res;
}

} // namespace graphnls
