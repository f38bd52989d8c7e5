#include <doctest.h>

#include <cmath>

#include "graphnls/variational.hpp"
#include "oracles.hpp"

using namespace graphnls;

namespace {

CubicParams fixture_a() { return CubicParams{2.0, 1.0, 2.0, 1.0, 0.16}; }

// Coarser-than-desk grid keeps the unit suite quick; the acceptance suite
// repeats the key runs at h = 0.01.
const StarGraph kGrid = make_graph(3, 30.0, 1001);

} // namespace

TEST_CASE("energy: zero state, closed-form ground state, phase invariance") {
  const CubicParams cp = fixture_a();
  CHECK(energy(zero_state(kGrid), cp) == doctest::Approx(0.0));

  const auto gs = coupled_cubic_ground_state(cp, kGrid);
  const ClosedFormJ cf = j_closed_form(cp, 3);
  CHECK(energy(gs, cp) == doctest::Approx(cf.j).epsilon(1e-4));

  const Complex phase1 = std::polar(1.0, 0.7);
  const Complex phase2 = std::polar(1.0, -1.3);
  const TwoComponentState rotated{GridField(kGrid, phase1 * gs.u.values()),
                                  GridField(kGrid, phase2 * gs.v.values())};
  CHECK(energy(rotated, cp) == doctest::Approx(energy(gs, cp)).epsilon(1e-13));
  CHECK(std::pow(lp_norm(rotated.u, 2.0), 2) ==
        doctest::Approx(std::pow(lp_norm(gs.u, 2.0), 2)).epsilon(1e-13));
}

TEST_CASE("coupled minimization reaches the closed form from a gaussian start") {
  const CubicParams cp = fixture_a();
  const auto [alpha, beta] = mass_targets(cp, 3);
  MinimizeConfig cfg;
  cfg.grad_tol = 1e-6;
  cfg.init_kind = MinimizeConfig::Init::GaussianBumps;
  cfg.rng_seed = 5;
  const auto res = minimize_fixed_masses(cp, alpha, beta, cfg, kGrid);
  REQUIRE(res.converged);

  const ClosedFormJ cf = j_closed_form(cp, 3);
  CHECK(res.energy == doctest::Approx(cf.j).epsilon(1e-4));
  CHECK(res.omega1 == doctest::Approx(0.16).epsilon(1e-2));
  CHECK(res.omega2 == doctest::Approx(0.16).epsilon(1e-2));
  CHECK(std::abs(res.omega1 - res.omega2) < 1e-3);

  // masses are held exactly by the projection
  CHECK(std::pow(lp_norm(res.state.u, 2.0), 2) == doctest::Approx(alpha).epsilon(1e-10));
  CHECK(std::pow(lp_norm(res.state.v, 2.0), 2) == doctest::Approx(beta).epsilon(1e-10));

  // converged profile matches the scaled half-soliton pointwise
  const auto exact = coupled_cubic_ground_state(cp, kGrid);
  const double sup_err =
      (res.state.u.values().cwiseAbs() - exact.u.values().cwiseAbs()).cwiseAbs().maxCoeff();
  CHECK(sup_err < 1e-3);

  // ratio law between the components
  const double r = std::pow((cp.b - cp.a) / (cp.b - cp.c), 0.25);
  const double s = std::pow((cp.b - cp.c) / (cp.b - cp.a), 0.25);
  const double ratio_err =
      (r * res.state.u.values().cwiseAbs() - s * res.state.v.values().cwiseAbs())
          .cwiseAbs()
          .maxCoeff();
  CHECK(ratio_err < 2e-3);

  // energy is monotone along the recorded trace
  for (size_t i = 1; i < res.trace.size(); ++i)
    CHECK(res.trace[i].energy <= res.trace[i - 1].energy + 1e-12);
  // closed-form-perturbed init lands on the same energy
  MinimizeConfig cfg2 = cfg;
  cfg2.init_kind = MinimizeConfig::Init::ClosedFormPerturbed;
  const auto res2 = minimize_fixed_masses(cp, alpha, beta, cfg2, kGrid);
  REQUIRE(res2.converged);
  CHECK(std::abs(res2.energy - res.energy) / std::abs(res.energy) < 1e-5);

  CHECK(res.energy < 0.0);
}

TEST_CASE("single-constraint minimization against the closed forms") {
  const CubicParams cp = fixture_a();
  const auto [alpha, beta] = mass_targets(cp, 3);
  MinimizeConfig cfg;
  cfg.grad_tol = 1e-6;
  cfg.rng_seed = 9;

  const auto j1 = minimize_single(SingleProblem::J1, alpha, cp, cfg, kGrid);
  REQUIRE(j1.converged);
  CHECK(j1.energy == doctest::Approx(-0.017975308641975306).epsilon(1e-4));

  // subadditivity spot check: J1(alpha) < 2 J1(alpha/2)
  const auto half = minimize_single(SingleProblem::J1, 0.5 * alpha, cp, cfg, kGrid);
  REQUIRE(half.converged);
  CHECK(j1.energy < 2.0 * half.energy);

  // endpoint comparison: J(0, delta) with coefficient c sits above J2(delta)
  const auto j2 = minimize_single(SingleProblem::J2, beta, cp, cfg, kGrid);
  const auto endpoint = minimize_single(SingleProblem::EndpointC, beta, cp, cfg, kGrid);
  REQUIRE(j2.converged);
  REQUIRE(endpoint.converged);
  CHECK(endpoint.energy > j2.energy);
  CHECK(endpoint.energy == doctest::Approx(j_endpoint(beta, cp.c, cp.gamma, 3)).epsilon(1e-4));

  CHECK_THROWS_AS(minimize_single(SingleProblem::J1, -1.0, cp, cfg, kGrid), ValidationError);
}

TEST_CASE("minimize configuration validation") {
  MinimizeConfig cfg;
  cfg.step_size = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.step_size = 0.5;
  cfg.max_iters = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}
