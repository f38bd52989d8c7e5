#include <doctest.h>

#include <cmath>
#include <random>

#include "graphnls/profiles.hpp"
#include "oracles.hpp"

using namespace graphnls;

namespace {

// fixture A: N=3, gamma=1, omega=0.16, a=c=2, b=1
CubicParams fixture_a() { return CubicParams{2.0, 1.0, 2.0, 1.0, 0.16}; }

} // namespace

TEST_CASE("mass targets: fixture value, symmetry, limits") {
  const auto [alpha, beta] = mass_targets(fixture_a(), 3);
  CHECK(alpha == doctest::Approx(2.0 / 15.0).epsilon(1e-14));
  CHECK(beta == doctest::Approx(2.0 / 15.0).epsilon(1e-14));

  CubicParams asym = fixture_a();
  asym.a = 3.0; // still (A1)
  const auto [a1, b1] = mass_targets(asym, 3);
  std::swap(asym.a, asym.c);
  const auto [a2, b2] = mass_targets(asym, 3);
  CHECK(a1 == doctest::Approx(b2).epsilon(1e-14));
  CHECK(b1 == doctest::Approx(a2).epsilon(1e-14));
  CHECK(a1 > 0.0);
  CHECK(b1 > 0.0);

  CubicParams near = fixture_a();
  near.omega = (1.0 / 9.0) * (1.0 + 1e-10);
  const auto [a3, b3] = mass_targets(near, 3);
  CHECK(a3 == doctest::Approx(0.0).epsilon(1e-4));
  CHECK(b3 < 1e-9);

  CubicParams bad = fixture_a();
  bad.omega = 0.1; // below gamma^2/N^2
  CHECK_THROWS_AS(mass_targets(bad, 3), ValidationError);

  CubicParams too_heavy = fixture_a();
  too_heavy.omega = 1.0; // N sqrt(omega) - gamma = 2 > 2/3
  CHECK_THROWS_AS(mass_targets(too_heavy, 3), ValidationError);
  too_heavy.override_mass_restriction = true;
  CHECK_NOTHROW(mass_targets(too_heavy, 3));

  CubicParams bad_regime = fixture_a();
  bad_regime.b = 2.0; // neither (A1) nor (A2)
  CHECK_THROWS_AS(mass_targets(bad_regime, 3), ValidationError);
}

TEST_CASE("half soliton: vertex value, gamma=0 peak, mass identity") {
  const StarGraph g = make_graph(3, 30.0, 3001);
  const GridField phi = half_soliton(0.16, 1.0, g);
  // phi(0)^2 = 2 omega (1 - gamma^2/(N^2 omega))
  const double expected0 = 2.0 * 0.16 * (1.0 - 1.0 / (9.0 * 0.16));
  CHECK(std::norm(phi.vertex_value()) == doctest::Approx(expected0).epsilon(1e-12));
  CHECK(phi.vertex_defect() == 0.0);

  const GridField kirchhoff = half_soliton(0.25, 0.0, g);
  CHECK(std::abs(kirchhoff.vertex_value()) ==
        doctest::Approx(std::sqrt(0.5)).epsilon(1e-13));
  // decreasing from the vertex for gamma > 0
  for (int i = 0; i + 1 < g.points_per_edge; ++i)
    CHECK(std::abs(phi.values()(i + 1, 0)) <= std::abs(phi.values()(i, 0)) + 1e-15);

  CHECK(std::pow(lp_norm(phi, 2.0), 2) == doctest::Approx(0.4).epsilon(1e-5));
  CHECK_THROWS_AS(half_soliton(0.1, 1.0, g), ValidationError); // artanh domain
}

TEST_CASE("profile family: reductions, vertex flux, interior maximum") {
  const StarGraph g = make_graph(3, 30.0, 3001);
  const GridField phi = half_soliton(0.16, 1.0, g);
  const GridField fam = nls_profile_family(0.16, 1.0, 0, 4.0, 1.0, g);
  CHECK((fam.values() - phi.values()).cwiseAbs().maxCoeff() < 1e-12);

  // vertex flux: sum_e phi'_e(0) = -gamma phi(0), one-sided second order
  auto flux_defect = [](const GridField& f, double gamma) {
    const double h = f.graph().spacing();
    Complex flux = 0.0;
    for (int e = 0; e < f.graph().num_edges; ++e)
      flux += (-3.0 * f.values()(0, e) + 4.0 * f.values()(1, e) - f.values()(2, e)) / (2.0 * h);
    return std::abs(flux + gamma * f.values()(0, 0));
  };
  const StarGraph g2 = make_graph(3, 30.0, 6001);
  const GridField nu = nls_profile_family(4.0, 1.0, 1, 4.0, 1.0, g);
  const GridField nu2 = nls_profile_family(4.0, 1.0, 1, 4.0, 1.0, g2);
  const double d1 = flux_defect(nu, 1.0);
  const double d2 = flux_defect(nu2, 1.0);
  CHECK(d1 < 5e-3);
  CHECK(d1 / d2 == doctest::Approx(4.0).epsilon(0.25));

  // k=1: first component peaks inside the edge at 2 a_1 / ((q-2) sqrt(omega))
  const double a1 = artanh_checked(0.5);
  const double x_star = 2.0 * a1 / (2.0 * 2.0);
  int argmax = 0;
  for (int i = 0; i < g.points_per_edge; ++i)
    if (std::abs(nu.values()(i, 0)) > std::abs(nu.values()(argmax, 0))) argmax = i;
  CHECK(g.coordinate(argmax) == doctest::Approx(x_star).epsilon(0.05));
  // tail components decrease from the vertex
  for (int i = 0; i + 1 < g.points_per_edge; ++i)
    CHECK(std::abs(nu.values()(i + 1, 1)) <= std::abs(nu.values()(i, 1)) + 1e-15);

  CHECK_THROWS_AS(nls_profile_family(4.0, 1.0, 2, 4.0, 1.0, g), ValidationError);
  CHECK_THROWS_AS(nls_profile_family(4.0, 1.0, -1, 4.0, 1.0, g), ValidationError);
  CHECK_THROWS_AS(nls_profile_family(0.9, 1.0, 1, 4.0, 1.0, g), ValidationError);

  // family count: exactly floor((N-1)/2)+1 admitted values of k
  for (int n : {2, 3, 4, 5}) {
    const StarGraph gn = make_graph(n, 10.0, 101);
    int accepted = 0;
    for (int k = 0; k < n; ++k) {
      try {
        nls_profile_family(4.0, 1.0, k, 4.0, 1.0, gn);
        ++accepted;
      } catch (const ValidationError&) {
      }
    }
    CHECK(accepted == (n - 1) / 2 + 1);
  }
}

TEST_CASE("coupled cubic ground state: scales and masses") {
  const StarGraph g = make_graph(3, 30.0, 3001);
  const auto gs = coupled_cubic_ground_state(fixture_a(), g);
  const GridField phi = half_soliton(0.16, 1.0, g);
  const double scale = std::sqrt(1.0 / 3.0);
  CHECK((gs.u.values() - scale * phi.values()).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(std::pow(lp_norm(gs.u, 2.0), 2) == doctest::Approx(2.0 / 15.0).epsilon(1e-5));
  CHECK(std::pow(lp_norm(gs.v, 2.0), 2) == doctest::Approx(2.0 / 15.0).epsilon(1e-5));

  CubicParams a2_regime = fixture_a();
  a2_regime.b = 5.0; // (A2): scales (b-c)/(b^2-ac) stay positive
  CHECK_NOTHROW(coupled_cubic_ground_state(a2_regime, g));
}

TEST_CASE("stationary residual: second order, zero state, random positivity") {
  const CubicParams cp = fixture_a();
  const PowerParams pp = cubic_as_power(cp);
  const StarGraph g1 = make_graph(3, 30.0, 1501);
  const StarGraph g2 = make_graph(3, 30.0, 3001);
  const double r1 = stationary_residual(coupled_cubic_ground_state(cp, g1), pp);
  const double r2 = stationary_residual(coupled_cubic_ground_state(cp, g2), pp);
  CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.3));

  CHECK(stationary_residual(zero_state(g1), pp) == doctest::Approx(0.0));

  std::mt19937_64 rng(2);
  const TwoComponentState random{oracles::random_smooth_field(g1, rng),
                                 oracles::random_smooth_field(g1, rng)};
  CHECK(stationary_residual(random, pp) > 1e-3);
}

TEST_CASE("closed-form J: two algebraic routes, signs, limits") {
  const CubicParams cp = fixture_a();
  const ClosedFormJ cf = j_closed_form(cp, 3);
  // route 1: the polynomial in alpha (implementation); route 2:
  // -(2/3) (b-c)/(b^2-ac) (N omega^{3/2} - gamma^3/N^2)
  const double route2 = -(2.0 / 3.0) * (1.0 / 3.0) * (3.0 * std::pow(0.16, 1.5) - 1.0 / 9.0);
  CHECK(cf.j1 == doctest::Approx(route2).epsilon(1e-12));
  CHECK(cf.j1 == doctest::Approx(-0.017975308641975306).epsilon(1e-12));
  CHECK(cf.j2 == doctest::Approx(cf.j1).epsilon(1e-14));
  CHECK(cf.j == doctest::Approx(2.0 * cf.j1).epsilon(1e-14));
  CHECK(cf.j < 0.0);

  // alpha -> 0: J1 -> 0 (omega near the threshold)
  CubicParams near = cp;
  near.omega = (1.0 / 9.0) * (1.0 + 1e-8);
  CHECK(std::abs(j_closed_form(near, 3).j1) < 1e-9);
}

TEST_CASE("endpoint values and comparison with the reduced problem") {
  CHECK(j_endpoint(0.0, 2.0, 1.0, 3) == doctest::Approx(0.0));

  // independent arithmetic of -(1/N^2)(coeff^2 d^3/12 + coeff gamma d^2/2 + gamma^2 d)
  const double d = 2.0 / 15.0;
  const double by_horner = -(d * (1.0 + d * (0.5 * 2.0 + d * (4.0 / 12.0)))) / 9.0;
  CHECK(j_endpoint(d, 2.0, 1.0, 3) == doctest::Approx(by_horner).epsilon(1e-14));

  // J(delta,0) with coefficient a exceeds J1(delta) whenever
  // (b^2-ac)/(2(b-c)) > a/2 in regime (A1)
  const CubicParams cp = fixture_a();
  const double k1 = (cp.b * cp.b - cp.a * cp.c) / (cp.b - cp.c);
  CHECK(k1 / 2.0 > cp.a / 2.0);
  CHECK(j_endpoint(d, cp.a, cp.gamma, 3) > j_endpoint(d, k1, cp.gamma, 3));
}

TEST_CASE("two-component profile and its reductions") {
  const StarGraph g = make_graph(3, 30.0, 3001);
  // p=2, b=1: amplitude omega^{1/2} sech, peak at the interior max of sech
  const auto state = two_component_profile(4.0, 1.0, 1.0, 2.0, 0, g);
  const double peak = lp_norm(state.u, std::numeric_limits<double>::infinity());
  // vertex is the max for k=0: sqrt(omega) sech(a_0)
  const double a0 = artanh_checked(1.0 / (3.0 * 2.0));
  CHECK(peak == doctest::Approx(2.0 / std::cosh(a0)).epsilon(1e-10));
  CHECK((state.u.values() - state.v.values()).cwiseAbs().maxCoeff() == 0.0);

  // agrees with the q = 2p, a = b+1 family
  const GridField fam = nls_profile_family(4.0, 1.0, 0, 4.0, 2.0, g);
  CHECK((state.u.values() - fam.values()).cwiseAbs().maxCoeff() < 1e-12);

  // solves the stationary equation to second order
  PowerParams pp;
  pp.p = 2.0;
  pp.q = 4.0;
  pp.r = 4.0;
  pp.a = 1.0;
  pp.c = 1.0;
  pp.b = 1.0;
  pp.gamma = 1.0;
  pp.omega = 4.0;
  const StarGraph gh = make_graph(3, 30.0, 1501);
  const double r1 = stationary_residual(two_component_profile(4.0, 1.0, 1.0, 2.0, 0, gh), pp);
  const double r2 = stationary_residual(state, pp);
  CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.3));

  CHECK_THROWS_AS(two_component_profile(4.0, 1.0, -1.5, 2.0, 0, g), ValidationError);
}

TEST_CASE("rotation profile: masses, conserved rotation pairing, reduction") {
  const StarGraph g = make_graph(3, 30.0, 3001);
  const auto rot = rotation_profile(3.0, 1.0, 1.0, 0, g);
  const GridField phi = nls_profile_family(2.0, 1.0, 0, 4.0, 1.0, g);
  const double phi_mass = std::pow(lp_norm(phi, 2.0), 2);
  CHECK(std::pow(lp_norm(rot.u, 2.0), 2) == doctest::Approx(0.5 * phi_mass).epsilon(1e-12));
  CHECK(std::pow(lp_norm(rot.v, 2.0), 2) == doctest::Approx(0.5 * phi_mass).epsilon(1e-12));

  // Im int u conj(v) = Im(i |Phi|^2 / 2) = +mass/2
  const double q1 = complex_inner_product(rot.u, rot.v).imag();
  CHECK(q1 == doctest::Approx(0.5 * phi_mass).epsilon(1e-12));

  // omega1 = 0 reduces to the phase-rotated cubic profile
  const auto reduced = rotation_profile(2.0, 0.0, 1.0, 0, g);
  CHECK((reduced.v.values() * std::sqrt(2.0) - phi.values()).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(rotation_profile(1.0, 0.95, 1.0, 0, g), ValidationError);
}

TEST_CASE("unit-frequency profile matches the rescaled closed form") {
  const StarGraph g = make_graph(3, 30.0, 2001);
  const double p = 2.5, omega = 4.0, gamma = 1.0;
  // Phi(x) = (omega/(b+1))^{1/(2p-2)} Psi(sqrt(omega) x) with b = 0
  const GridField phi = nls_profile_family(omega, gamma, 0, 2.0 * p, 1.0, g);
  const double pref = std::pow(omega, 1.0 / (2.0 * p - 2.0));
  const double ak = artanh_checked(gamma / (3.0 * std::sqrt(omega)));
  for (int i = 0; i < g.points_per_edge / 2; i += 17) {
    const double x = g.coordinate(i);
    const double arg = (p - 1.0) * std::sqrt(omega) * x + ak;
    const double psi_scaled =
        std::pow(p / std::pow(std::cosh(arg), 2.0), 1.0 / (2.0 * p - 2.0));
    CHECK(std::abs(phi.values()(i, 2)) == doctest::Approx(pref * psi_scaled).epsilon(1e-11));
  }
  // and the sampled Psi itself matches at x-values on its own grid
  const GridField psi = unit_frequency_profile(gamma / std::sqrt(omega), 0, p, g);
  CHECK(std::abs(psi.values()(0, 0)) ==
        doctest::Approx(std::pow(p / std::pow(std::cosh(ak), 2.0), 1.0 / (2.0 * p - 2.0)))
            .epsilon(1e-12));
}
