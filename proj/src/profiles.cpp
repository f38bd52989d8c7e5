#include "graphnls/profiles.hpp"

#include <cmath>
#include <sstream>

namespace graphnls {

double artanh_checked(double t) {
  if (!(std::abs(t) < 1.0 - 1e-12))
    throw ValidationError("artanh: argument " + std::to_string(t) + " outside (-1, 1)");
  return 0.5 * std::log((1.0 + t) / (1.0 - t));
}

int max_bump_index(int num_edges) { return (num_edges - 1) / 2; }

void CubicParams::validate(int num_edges) const {
  if (!(gamma > 0.0)) throw ValidationError("cubic regime requires gamma > 0");
  if (!regime_a1() && !regime_a2())
    throw ValidationError("coefficients violate both (A1) 0<b<min{a,c} and (A2) a,c>0, b>max{a,c}");
  const double thr = gamma * gamma / (num_edges * (double)num_edges);
  if (!(omega > thr)) {
    std::ostringstream msg;
    msg << "omega = " << omega << " violates omega > gamma^2/N^2 = " << thr;
    throw ValidationError(msg.str());
  }
  const double excess = num_edges * std::sqrt(omega) - gamma;
  if (!override_mass_restriction && excess > 2.0 * gamma / num_edges) {
    std::ostringstream msg;
    msg << "mass restriction violated: N sqrt(omega) - gamma = " << excess
        << " exceeds 2 gamma / N = " << 2.0 * gamma / num_edges;
    throw ValidationError(msg.str());
  }
}

void PowerParams::validate(int num_edges) const {
  if (!(q > 2.0 && r > 2.0 && p >= 2.0))
    throw ValidationError("power nonlinearity requires q, r > 2 and p >= 2");
  if (k < 0 || k > max_bump_index(num_edges)) {
    std::ostringstream msg;
    msg << "bump index k = " << k << " outside 0..floor((N-1)/2) = " << max_bump_index(num_edges);
    throw ValidationError(msg.str());
  }
  const double denom = num_edges - 2 * k;
  if (!(omega > gamma * gamma / (denom * denom))) {
    std::ostringstream msg;
    msg << "omega = " << omega << " violates omega > gamma^2/(N-2k)^2 = "
        << gamma * gamma / (denom * denom);
    throw ValidationError(msg.str());
  }
}

std::pair<double, double> mass_targets(const CubicParams& params, int num_edges) {
  params.validate(num_edges);
  const double excess = num_edges * std::sqrt(params.omega) - params.gamma;
  const double denom = params.b * params.b - params.a * params.c;
  const double alpha = 2.0 * (params.b - params.c) / denom * excess;
  const double beta = 2.0 * (params.b - params.a) / denom * excess;
  return {alpha, beta};
}

GridField half_soliton(double omega, double gamma, const StarGraph& graph) {
  const double root = std::sqrt(omega);
  const double a0 = artanh_checked(gamma / (graph.num_edges * root));
  return GridField::sample(graph, [&](int, double x) -> Complex {
    return std::sqrt(2.0 * omega) / std::cosh(root * x + a0);
  });
}

GridField nls_profile_family(double omega, double gamma, int k, double q, double a,
                             const StarGraph& graph) {
  if (!(a > 0.0)) throw ValidationError("profile family requires a > 0");
  if (!(q > 2.0)) throw ValidationError("profile family requires q > 2");
  if (k < 0 || k > max_bump_index(graph.num_edges))
    throw ValidationError("bump index k outside 0..floor((N-1)/2)");
  const double root = std::sqrt(omega);
  const double ak = artanh_checked(gamma / ((graph.num_edges - 2 * k) * root));
  const double amp = q * omega / (2.0 * a);
  const double rate = 0.5 * (q - 2.0) * root;
  const double expo = 1.0 / (q - 2.0);
  return GridField::sample(graph, [&](int edge, double x) -> Complex {
    const double arg = (edge <= k) ? rate * x - ak : rate * x + ak;
    const double sech = 1.0 / std::cosh(arg);
    return std::pow(amp * sech * sech, expo);
  });
}

TwoComponentState coupled_cubic_ground_state(const CubicParams& params, const StarGraph& graph) {
  params.validate(graph.num_edges);
  const double denom = params.b * params.b - params.a * params.c;
  const double su = (params.b - params.c) / denom;
  const double sv = (params.b - params.a) / denom;
  if (!(su > 0.0) || !(sv > 0.0))
    throw ValidationError("scale factors (b-c)/(b^2-ac), (b-a)/(b^2-ac) must be positive");
  GridField phi = half_soliton(params.omega, params.gamma, graph);
  GridField u(graph, std::sqrt(su) * phi.values());
  GridField v(graph, std::sqrt(sv) * phi.values());
  return TwoComponentState{std::move(u), std::move(v)};
}

TwoComponentState two_component_profile(double omega, double gamma, double b, double p, int k,
                                        const StarGraph& graph) {
  if (!(b > -1.0)) throw ValidationError("two-component profile requires b > -1");
  if (!(p >= 2.0)) throw ValidationError("two-component profile requires p >= 2");
  GridField phi = nls_profile_family(omega, gamma, k, 2.0 * p, b + 1.0, graph);
  return TwoComponentState{phi, phi};
}

TwoComponentState rotation_profile(double omega0, double omega1, double gamma, int k,
                                   const StarGraph& graph) {
  const double eff = omega0 - omega1;
  const double denom = graph.num_edges - 2 * k;
  if (!(eff > gamma * gamma / (denom * denom)))
    throw ValidationError("rotation profile requires omega0 - omega1 > gamma^2/(N-2k)^2");
  GridField phi = nls_profile_family(eff, gamma, k, 4.0, 1.0, graph);
  GridField u(graph, (Complex(0.0, 1.0) / std::sqrt(2.0)) * phi.values());
  GridField v(graph, (1.0 / std::sqrt(2.0)) * phi.values());
  return TwoComponentState{std::move(u), std::move(v)};
}

GridField unit_frequency_profile(double gamma_eff, int k, double p, const StarGraph& graph) {
  if (k < 0 || k > max_bump_index(graph.num_edges))
    throw ValidationError("bump index k outside 0..floor((N-1)/2)");
  const double ak = artanh_checked(gamma_eff / (graph.num_edges - 2 * k));
  const double rate = p - 1.0;
  const double expo = 1.0 / (2.0 * p - 2.0);
  return GridField::sample(graph, [&](int edge, double x) -> Complex {
    const double arg = (edge <= k) ? rate * x - ak : rate * x + ak;
    const double sech = 1.0 / std::cosh(arg);
    return std::pow(p * sech * sech, expo);
  });
}

ClosedFormJ j_closed_form(const CubicParams& params, int num_edges) {
  const auto [alpha, beta] = mass_targets(params, num_edges);
  const double denom = params.b * params.b - params.a * params.c;
  const double k1 = denom / (params.b - params.c);
  const double k2 = denom / (params.b - params.a);
  ClosedFormJ out;
  out.j1 = j_endpoint(alpha, k1, params.gamma, num_edges);
  out.j2 = j_endpoint(beta, k2, params.gamma, num_edges);
  out.j = out.j1 + out.j2;
  return out;
}

double j_endpoint(double delta, double coeff, double gamma, int num_edges) {
  const double n2 = static_cast<double>(num_edges) * num_edges;
  return -(coeff * coeff * delta * delta * delta / 12.0 +
           0.5 * coeff * gamma * delta * delta + gamma * gamma * delta) / n2;
}

namespace {

double component_residual(const GridField& f, const GridField& other, double omega, double gamma,
                          double self_coeff, double self_power, double cross_coeff,
                          double cross_power, double other_power) {
  const StarGraph& g = f.graph();
  const double h = g.spacing();
  const auto& a = f.values();
  const auto& b = other.values();

  double sup = 0.0;
  for (int e = 0; e < g.num_edges; ++e) {
    for (int i = 1; i < g.points_per_edge - 1; ++i) {
      const Complex lap = (a(i - 1, e) - 2.0 * a(i, e) + a(i + 1, e)) / (h * h);
      const double au = std::abs(a(i, e));
      const double av = std::abs(b(i, e));
      const Complex nonlin =
          (self_coeff * std::pow(au, self_power) +
           cross_coeff * std::pow(av, cross_power) * std::pow(au, other_power)) *
          a(i, e);
      sup = std::max(sup, std::abs(-lap + omega * a(i, e) - nonlin));
    }
  }

  // Vertex flux defect, second-order one-sided derivatives.
  Complex flux = 0.0;
  for (int e = 0; e < g.num_edges; ++e)
    flux += (-3.0 * a(0, e) + 4.0 * a(1, e) - a(2, e)) / (2.0 * h);
  flux += gamma * a(0, 0);
  return std::max(sup, std::abs(flux));
}

} // namespace

double stationary_residual(const TwoComponentState& state, const PowerParams& params) {
  if (!state.u.vertex_continuous() || !state.v.vertex_continuous())
    throw ValidationError("stationary_residual: state is discontinuous at the vertex");
  const double ru = component_residual(state.u, state.v, params.omega, params.gamma, params.a,
                                       params.q - 2.0, params.b, params.p, params.p - 2.0);
  const double rv = component_residual(state.v, state.u, params.omega, params.gamma, params.c,
                                       params.r - 2.0, params.b, params.p, params.p - 2.0);
  return std::max(ru, rv);
}

PowerParams cubic_as_power(const CubicParams& params) {
  PowerParams out;
  out.p = 2.0;
  out.q = 4.0;
  out.r = 4.0;
  out.a = params.a;
  out.b = params.b;
  out.c = params.c;
  out.gamma = params.gamma;
  out.omega = params.omega;
  out.k = 0;
  return out;
}

} // namespace graphnls
