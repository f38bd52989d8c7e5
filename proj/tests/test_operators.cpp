#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "graphnls/operators.hpp"
#include "oracles.hpp"

using namespace graphnls;

namespace {

const StarGraph kDesk = make_graph(3, 30.0, 3001); // h = 0.01

PowerParams one_component(double omega, double gamma, int k, double q = 4.0) {
  PowerParams pp;
  pp.q = q;
  pp.r = q;
  pp.a = 1.0;
  pp.c = 1.0;
  pp.p = 3.0; // p > 2: no coupling in L2
  pp.b = 0.5;
  pp.gamma = gamma;
  pp.omega = omega;
  pp.k = k;
  return pp;
}

} // namespace

TEST_CASE("delta Laplacian: ground state vs secular oracle, Kirchhoff positivity") {
  auto lap = assemble_delta_laplacian(kDesk, 1.0);
  const double zt = default_zero_tol(0.16, kDesk.spacing());
  auto rep = spectrum(lap, 2, zt, true);

  // analytic secular equation on the truncated graph: N kappa coth(kappa L) = gamma
  double lo = 1e-8, hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (3.0 * mid / std::tanh(mid * 30.0) - 1.0 > 0.0 ? hi : lo) = mid;
  }
  const double lambda_oracle = -0.25 * (lo + hi) * (lo + hi);
  CHECK(rep.eigenvalues[0] == doctest::Approx(lambda_oracle).epsilon(1e-4));
  CHECK(std::abs(rep.eigenvalues[0] + 1.0 / 9.0) < 1e-4);
  CHECK(rep.n_negative == 1);
  CHECK(rep.kernel_dim == 0);

  // the negative eigenvector is radially symmetric across edges
  const auto modes = lap.unpack(rep.eigenvectors.col(0));
  const auto& vals = modes[0].values();
  CHECK((vals.col(0) - vals.col(1)).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((vals.col(0) - vals.col(2)).cwiseAbs().maxCoeff() < 1e-8);

  auto kirchhoff = assemble_delta_laplacian(kDesk, 0.0);
  CHECK(morse_index(kirchhoff, zt).first == 0);
}

TEST_CASE("quadratic form matches the analytic form to O(h^2)") {
  // fields tapered to zero at x = L, where the operator imposes Dirichlet
  auto defect_at = [&](const StarGraph& g) {
    std::mt19937_64 rng(31);
    const GridField f = oracles::random_smooth_field(g, rng);
    Eigen::MatrixXcd vals = f.values().real().cast<Complex>();
    for (int e = 0; e < g.num_edges; ++e)
      for (int i = 0; i < g.points_per_edge; ++i) {
        const double s = std::cos(0.5 * M_PI * g.coordinate(i) / g.edge_length);
        vals(i, e) *= s * s;
      }
    GridField re(g, std::move(vals));
    auto lap = assemble_delta_laplacian(g, 1.0);
    const double form = lap.quadratic_form({&re});
    const double analytic =
        std::pow(lp_norm(derivative(re), 2.0), 2) - std::norm(re.vertex_value());
    return std::abs(form - analytic);
  };
  const double e1 = defect_at(make_graph(3, 10.0, 501));
  const double e2 = defect_at(make_graph(3, 10.0, 1001));
  CHECK(e1 < 1e-2);
  CHECK(e1 / std::max(e2, 1e-300) > 2.0);
}

TEST_CASE("Morse table of the one-component linearization (q=4)") {
  const double zt = default_zero_tol(4.0, kDesk.spacing());
  for (double gamma : {1.0, -1.0})
    for (int k : {0, 1}) {
      const auto pp = one_component(4.0, gamma, k);
      const GridField prof = nls_profile_family(4.0, gamma, k, 4.0, 1.0, kDesk);
      auto l1r = assemble_one_component_linearization(prof, pp, Part::R, 1);
      auto l1i = assemble_one_component_linearization(prof, pp, Part::I, 1);
      const auto [nr, kr] = morse_index(l1r, zt);
      CHECK(nr == (gamma > 0 ? k + 1 : 3 - k));
      CHECK(kr == 0);
      const auto [ni, ki] = morse_index(l1i, zt);
      CHECK(ni == 0);
      CHECK(ki == 1);
    }
}

TEST_CASE("L1I annihilates the profile; kernel vector aligns with it") {
  const auto pp = one_component(4.0, 1.0, 1);
  const GridField prof = nls_profile_family(4.0, 1.0, 1, 4.0, 1.0, kDesk);
  auto l1i = assemble_one_component_linearization(prof, pp, Part::I, 1);

  // interior rows are second order; the vertex row carries the O(h) flux
  // truncation, so it is excluded from the sup and bounded separately
  const auto image = l1i.apply({&prof});
  double interior_sup = 0.0;
  for (int e = 0; e < 3; ++e)
    for (int i = 1; i < kDesk.points_per_edge - 1; ++i)
      interior_sup = std::max(interior_sup, std::abs(image[0].values()(i, e)));
  CHECK(interior_sup < 5e-3);
  CHECK(std::abs(image[0].vertex_value()) < 10.0 * kDesk.spacing());
  CHECK(lp_norm(image[0], 2.0) < 1e-2);

  const double zt = default_zero_tol(4.0, kDesk.spacing());
  auto rep = spectrum(l1i, 2, zt, true);
  Eigen::VectorXd packed = l1i.pack(prof);
  packed.normalize();
  CHECK(std::abs(packed.dot(rep.eigenvectors.col(0))) >= 1.0 - 1e-6);
  CHECK(rep.eigenvalues[1] > 1.0); // ladder starts near omega
}

TEST_CASE("L2 block: positive for p > 2") {
  const auto pp = one_component(4.0, 1.0, 0);
  const GridField prof = nls_profile_family(4.0, 1.0, 0, 4.0, 1.0, kDesk);
  auto l2 = assemble_one_component_linearization(prof, pp, Part::R, 2);
  auto rep = spectrum(l2, 1, 1e-8);
  CHECK(rep.eigenvalues[0] >= pp.omega - 1.0 / 9.0 - 1e-6);
  CHECK(rep.n_negative == 0);
}

TEST_CASE("two-component blocks: kernels, Morse counts, decomposition") {
  const double p = 2.5, omega = 4.0, zt = default_zero_tol(omega, kDesk.spacing());
  for (double b : {0.5, 2.5}) {
    const GridField prof = two_component_profile(omega, 1.0, b, p, 0, kDesk).u;
    auto lR = assemble_two_component_linearization(prof, p, b, omega, 1.0, Part::R);
    auto lI = assemble_two_component_linearization(prof, p, b, omega, 1.0, Part::I);
    auto [plus, minus] = assemble_plus_minus(prof, p, b, omega, 1.0);

    const auto [nI, kI] = morse_index(lI, zt);
    CHECK(nI == 0);
    CHECK(kI == 2);

    const auto [np, kp] = morse_index(plus, zt);
    CHECK(np == 1); // k+1 for gamma > 0, k = 0
    CHECK(kp == 0);
    const auto [nm, km] = morse_index(minus, zt);
    CHECK(nm == (b > p - 1.0 ? 0 : 1));
    CHECK(km == 0);
    CHECK(morse_index(lR, zt).first == np + nm);

    // kernel of the I block spans (Phi, 0) and (0, Phi)
    auto repI = spectrum(lI, 3, zt, true);
    const GridField zero = GridField::zero(kDesk);
    Eigen::MatrixXd span(lI.dimension(), 2);
    span.col(0) = lI.pack({&prof, &zero});
    span.col(1) = lI.pack({&zero, &prof});
    span.col(0).normalize();
    span.col(1).normalize();
    for (int j = 0; j < 2; ++j) {
      const Eigen::Vector2d coeff = span.transpose() * repI.eigenvectors.col(j);
      CHECK(coeff.norm() >= 1.0 - 1e-6);
    }
  }
}

TEST_CASE("2-block spectrum equals the merged plus/minus spectra") {
  const double p = 2.5, omega = 4.0, b = 0.5;
  const GridField prof = two_component_profile(omega, 1.0, b, p, 0, kDesk).u;
  auto lR = assemble_two_component_linearization(prof, p, b, omega, 1.0, Part::R);
  auto [plus, minus] = assemble_plus_minus(prof, p, b, omega, 1.0);
  auto repR = spectrum(lR, 10, 1e-8);
  auto repP = spectrum(plus, 10, 1e-8);
  auto repM = spectrum(minus, 10, 1e-8);
  std::vector<double> merged;
  merged.insert(merged.end(), repP.eigenvalues.begin(), repP.eigenvalues.end());
  merged.insert(merged.end(), repM.eigenvalues.begin(), repM.eigenvalues.end());
  std::sort(merged.begin(), merged.end());
  for (int i = 0; i < 10; ++i) CHECK(std::abs(repR.eigenvalues[i] - merged[i]) < 1e-8);
}

TEST_CASE("b = 0 block-diagonalizes into two scalar copies") {
  const double p = 2.5, omega = 4.0;
  const GridField prof = two_component_profile(omega, 1.0, 0.5, p, 0, kDesk).u;
  auto lR = assemble_two_component_linearization(prof, p, 0.0, omega, 1.0, Part::R);
  PowerParams pp = one_component(omega, 1.0, 0, 2.0 * p);
  auto scalar = assemble_one_component_linearization(prof, pp, Part::R, 1);
  auto repB = spectrum(lR, 6, 1e-8);
  auto repS = spectrum(scalar, 3, 1e-8);
  for (int i = 0; i < 3; ++i) {
    CHECK(repB.eigenvalues[2 * i] == doctest::Approx(repS.eigenvalues[i]).epsilon(1e-9));
    CHECK(repB.eigenvalues[2 * i + 1] == doctest::Approx(repS.eigenvalues[i]).epsilon(1e-9));
  }
}

TEST_CASE("epsilon family: definiteness table, kernel at eps = 1") {
  const double p = 2.5, geff = 0.5;
  const double zt = default_zero_tol(1.0, kDesk.spacing());

  CHECK(morse_index(assemble_epsilon_operator(0.5, 0, geff, p, kDesk), zt) ==
        std::pair<int, int>{0, 0});
  CHECK(morse_index(assemble_epsilon_operator(1.5, 0, geff, p, kDesk), zt) ==
        std::pair<int, int>{1, 0});
  CHECK(morse_index(assemble_epsilon_operator(2.0 * p - 1.0, 0, geff, p, kDesk), zt).first == 1);

  // eps = 1: kernel direction is the rescaled profile
  auto l1 = assemble_epsilon_operator(1.0, 0, geff, p, kDesk);
  auto rep = spectrum(l1, 1, zt, true);
  CHECK(rep.n_negative == 0);
  CHECK(rep.kernel_dim == 1);
  const GridField psi = unit_frequency_profile(geff, 0, p, kDesk);
  Eigen::VectorXd packed = l1.pack(psi);
  packed.normalize();
  CHECK(std::abs(packed.dot(rep.eigenvectors.col(0))) >= 1.0 - 1e-6);

  // full space, gamma < 0, k = 0: N - k negative directions, matching the
  // one-component table; a 2-edge graph reproduces the line value 2
  CHECK(morse_index(assemble_epsilon_operator(2.0 * p - 1.0, 0, -geff, p, kDesk), zt).first == 3);
  const StarGraph g2 = make_graph(2, 30.0, 3001);
  CHECK(morse_index(assemble_epsilon_operator(2.0 * p - 1.0, 0, -geff, p, g2), zt).first == 2);

  // symmetric-subspace counts at eps = 2p-1: two negative directions for
  // k = 1, gamma > 0, one for gamma < 0
  auto sym_pos = assemble_epsilon_operator_symmetric(2.0 * p - 1.0, 1, geff, p, kDesk);
  auto sym_neg = assemble_epsilon_operator_symmetric(2.0 * p - 1.0, 1, -geff, p, kDesk);
  CHECK(morse_index(sym_pos, zt).first == 2);
  CHECK(morse_index(sym_neg, zt).first == 1);
}

TEST_CASE("index scaling invariance between L-minus and the epsilon family") {
  const double p = 2.5, omega = 4.0;
  const double zt = default_zero_tol(omega, kDesk.spacing());
  for (double b : {0.3, 0.9, 1.2, 2.0, 3.0}) {
    const GridField prof = two_component_profile(omega, 1.0, b, p, 0, kDesk).u;
    auto minus = assemble_plus_minus(prof, p, b, omega, 1.0).second;
    const double eps = (2.0 * p - 1.0 - b) / (b + 1.0);
    auto le = assemble_epsilon_operator(eps, 0, 1.0 / std::sqrt(omega), p, kDesk);
    CHECK(morse_index(minus, zt).first ==
          morse_index(le, default_zero_tol(1.0, kDesk.spacing())).first);
  }
}

TEST_CASE("<s(eps), Psi> decreases on (1, 2p-1)") {
  const double p = 2.5, geff = 0.5;
  const GridField psi = unit_frequency_profile(geff, 0, p, kDesk);
  double prev = std::numeric_limits<double>::max();
  for (double eps : {1.2, 1.8, 2.4, 3.0, 3.6}) {
    auto le = assemble_epsilon_operator(eps, 0, geff, p, kDesk);
    const Eigen::VectorXd s = solve_shifted(le, 0.0, -le.pack(psi));
    const double val = le.pack(psi).dot(s);
    CHECK(val > 0.0);
    CHECK(val < prev);
    prev = val;
  }
}

TEST_CASE("rotation linearization: kernel, Morse count, scalar decomposition") {
  const double w0 = 3.0, w1 = 1.0;
  const GridField prof = nls_profile_family(w0 - w1, 1.0, 0, 4.0, 1.0, kDesk);
  auto rot = assemble_rotation_linearization(w0, w1, prof, 1.0, kDesk);
  const double zt = default_zero_tol(w0 - w1, kDesk.spacing());
  const auto [n, kd] = morse_index(rot, zt);
  CHECK(n == 1);
  CHECK(kd == 1);

  // kernel direction is the quadruplet (Phi, 0, 0, -Phi)
  auto rep = spectrum(rot, 3, zt, true);
  const GridField zero = GridField::zero(kDesk);
  GridField neg(kDesk, -prof.values());
  Eigen::VectorXd expected = rot.pack({&prof, &zero, &zero, &neg});
  expected.normalize();
  int kernel_col = 0;
  for (size_t i = 0; i < rep.eigenvalues.size(); ++i)
    if (std::abs(rep.eigenvalues[i]) <= zt) kernel_col = static_cast<int>(i);
  CHECK(std::abs(expected.dot(rep.eigenvectors.col(kernel_col))) >= 1.0 - 1e-6);

  // spectrum equals the union of the four scalar operators acting on
  // h1R+h2I (twice), h1R-h2I, and h1I+h2R
  auto scalar_op = [&](double shift, double coeff) {
    return OperatorMatrix::build(kDesk, 1.0, 1, BlockStructure::Scalar, [&](int e, int i) {
      Eigen::MatrixXd m(1, 1);
      const double phi = std::abs(prof.values()(i, e));
      m(0, 0) = shift - coeff * phi * phi;
      return m;
    });
  };
  auto s_plus = scalar_op(w0 + w1, 1.0);
  auto s_minus = scalar_op(w0 - w1, 1.0);
  auto s_triple = scalar_op(w0 - w1, 3.0);
  auto repR = spectrum(rot, 10, 1e-8);
  std::vector<double> merged;
  for (auto* op : {&s_plus, &s_plus, &s_minus, &s_triple}) {
    auto r = spectrum(*op, 10, 1e-8);
    merged.insert(merged.end(), r.eigenvalues.begin(), r.eigenvalues.end());
  }
  std::sort(merged.begin(), merged.end());
  for (int i = 0; i < 10; ++i) CHECK(std::abs(repR.eigenvalues[i] - merged[i]) < 1e-8);
}

TEST_CASE("spectrum report: dense and bisection paths agree, counts partition") {
  const StarGraph g = make_graph(3, 20.0, 201); // small: dense path available
  const auto pp = one_component(4.0, 1.0, 1);
  const GridField prof = nls_profile_family(4.0, 1.0, 1, 4.0, 1.0, g);
  auto op = assemble_one_component_linearization(prof, pp, Part::R, 1);
  auto dense = spectrum(op, 8, 1e-6, false, /*dense_threshold=*/4000);
  auto sturm = spectrum(op, 8, 1e-6, false, /*dense_threshold=*/0);
  for (int i = 0; i < 8; ++i)
    CHECK(dense.eigenvalues[i] == doctest::Approx(sturm.eigenvalues[i]).epsilon(1e-10));
  CHECK(dense.n_negative == sturm.n_negative);
  CHECK(dense.kernel_dim == sturm.kernel_dim);

  int positive = 0, negative = 0, kernel = 0;
  for (double lam : sturm.eigenvalues) {
    if (lam < -sturm.zero_tol) ++negative;
    else if (lam > sturm.zero_tol) ++positive;
    else ++kernel;
  }
  CHECK(negative + kernel + positive == static_cast<int>(sturm.eigenvalues.size()));

  // identity-shifted Kirchhoff Laplacian stays above the shift
  auto shifted = OperatorMatrix::build(g, 0.0, 1, BlockStructure::Scalar, [](int, int) {
    Eigen::MatrixXd m(1, 1);
    m(0, 0) = 2.0;
    return m;
  });
  CHECK(spectrum(shifted, 1, 1e-8).eigenvalues[0] >= 2.0 - 1e-10);
}

TEST_CASE("morse_index on a positive-definite operator") {
  auto op = OperatorMatrix::build(kDesk, 0.0, 1, BlockStructure::Scalar, [](int, int) {
    Eigen::MatrixXd m(1, 1);
    m(0, 0) = 1.0;
    return m;
  });
  CHECK(morse_index(op, 1e-8) == std::pair<int, int>{0, 0});
}

TEST_CASE("instability spectrum: stable and unstable one-component cases") {
  const double zt = default_zero_tol(4.0, kDesk.spacing());
  for (int k : {0, 1}) {
    const auto pp = one_component(4.0, 1.0, k);
    const GridField prof = nls_profile_family(4.0, 1.0, k, 4.0, 1.0, kDesk);
    auto lr = assemble_one_component_linearization(prof, pp, Part::R, 1);
    auto li = assemble_one_component_linearization(prof, pp, Part::I, 1);
    const int bound = grillakis_lower_bound(lr, li, zt);
    CHECK(bound == k);
    InstabilityOptions opts;
    opts.zero_tol = zt;
    auto rep = instability_eigenvalues(lr, li, 1e-3, opts);
    CHECK(static_cast<int>(rep.eigenvalues.size()) >= bound);
    if (k == 0) CHECK(rep.eigenvalues.empty());
    if (k == 1) {
      REQUIRE(rep.eigenvalues.size() == 1);
      CHECK(rep.eigenvalues[0].real() > 1.0);
      CHECK(rep.eigenvalues[0].imag() == 0.0);
    }
  }
}

TEST_CASE("instability: structured route matches the dense general eigensolver") {
  const StarGraph g = make_graph(3, 20.0, 141);
  const auto pp = one_component(4.0, 1.0, 1);
  const GridField prof = nls_profile_family(4.0, 1.0, 1, 4.0, 1.0, g);
  auto lr = assemble_one_component_linearization(prof, pp, Part::R, 1);
  auto li = assemble_one_component_linearization(prof, pp, Part::I, 1);
  const double zt = default_zero_tol(4.0, g.spacing());
  InstabilityOptions dense_opts;
  dense_opts.dense_threshold = 10000;
  dense_opts.zero_tol = zt;
  InstabilityOptions pencil_opts;
  pencil_opts.dense_threshold = 0;
  pencil_opts.zero_tol = zt;
  auto rd = instability_eigenvalues(lr, li, 1e-3, dense_opts);
  auto rp = instability_eigenvalues(lr, li, 1e-3, pencil_opts);
  REQUIRE(rd.eigenvalues.size() == rp.eigenvalues.size());
  for (size_t i = 0; i < rd.eigenvalues.size(); ++i)
    CHECK(rd.eigenvalues[i].real() == doctest::Approx(rp.eigenvalues[i].real()).epsilon(1e-6));
}

TEST_CASE("instability modes satisfy the block eigenproblem") {
  const auto pp = one_component(4.0, 1.0, 1);
  const GridField prof = nls_profile_family(4.0, 1.0, 1, 4.0, 1.0, kDesk);
  auto lr = assemble_one_component_linearization(prof, pp, Part::R, 1);
  auto li = assemble_one_component_linearization(prof, pp, Part::I, 1);
  InstabilityOptions opts;
  opts.zero_tol = default_zero_tol(4.0, kDesk.spacing());
  opts.want_modes = true;
  auto rep = instability_eigenvalues(lr, li, 1e-3, opts);
  REQUIRE(rep.eigenvalues.size() == 1);
  const double lam = rep.eigenvalues[0].real();
  const Eigen::VectorXd w1 = lr.pack(rep.modes_w1[0][0]);
  const Eigen::VectorXd w2 = lr.pack(rep.modes_w2[0][0]);
  CHECK((lr.chain().apply(w1) + lam * w2).norm() < 1e-8);
  CHECK((li.chain().apply(w2) - lam * w1).norm() < 1e-3); // kernel defect is O(h^2)
}

TEST_CASE("Grillakis bound: positive-definite LR, two-component gamma < 0") {
  auto pd = OperatorMatrix::build(kDesk, 0.0, 1, BlockStructure::Scalar, [](int, int) {
    Eigen::MatrixXd m(1, 1);
    m(0, 0) = 4.0;
    return m;
  });
  const auto pp = one_component(4.0, 1.0, 0);
  const GridField prof = nls_profile_family(4.0, 1.0, 0, 4.0, 1.0, kDesk);
  auto li = assemble_one_component_linearization(prof, pp, Part::I, 1);
  CHECK(grillakis_lower_bound(pd, li, default_zero_tol(4.0, kDesk.spacing())) == 0);

  // two-component, 0 < b < p-1, gamma < 0, k = 0: bound N - k - 1 = 2
  const double p = 2.5, b = 0.5;
  const GridField prof2 = two_component_profile(4.0, -1.0, b, p, 0, kDesk).u;
  auto lR = assemble_two_component_linearization(prof2, p, b, 4.0, -1.0, Part::R);
  auto lI = assemble_two_component_linearization(prof2, p, b, 4.0, -1.0, Part::I);
  CHECK(grillakis_lower_bound(lR, lI, default_zero_tol(4.0, kDesk.spacing())) == 2);
}

TEST_CASE("Hessian signature and the mass-derivative cross check") {
  const double p = 2.5, omega = 4.0;
  for (double b : {0.5, 2.5}) {
    const GridField prof = two_component_profile(omega, 1.0, b, p, 0, kDesk).u;
    const auto rep = hessian_two_component(prof, p, b, omega, 1.0);
    CHECK(rep.p_positive == (b > p - 1.0 ? 1 : 2));
    CHECK(rep.phi_h_plus > 0.0); // 2 <= p < 3
    if (b > p - 1.0)
      CHECK(rep.phi_h_minus < 0.0);
    else
      CHECK(rep.phi_h_minus > 0.0);

    // <Phi, h_+> = (1/2) d/domega ||Phi||_2^2
    auto builder = [&](double w) { return two_component_profile(w, 1.0, b, p, 0, kDesk).u; };
    const double dm = mass_derivative(builder, omega, 1e-4);
    CHECK(rep.phi_h_plus == doctest::Approx(0.5 * dm).epsilon(1e-3));
  }
  const GridField prof = two_component_profile(omega, 1.0, 1.5, p, 0, kDesk).u;
  CHECK_THROWS_AS(hessian_two_component(prof, p, p - 1.0, omega, 1.0), ValidationError);

  // p > 3, b > p-1: the mass derivative flips sign, no positive directions
  const double p2 = 3.5;
  const GridField prof2 = two_component_profile(omega, 1.0, 3.0, p2, 0, kDesk).u;
  const auto rep2 = hessian_two_component(prof2, p2, 3.0, omega, 1.0);
  CHECK(rep2.phi_h_plus < 0.0);
  CHECK(rep2.p_positive == 0);
}

TEST_CASE("mass derivative: cubic identity and the q=8 sign change") {
  auto builder4 = [&](double w) { return nls_profile_family(w, 1.0, 0, 4.0, 1.0, kDesk); };
  CHECK(mass_derivative(builder4, 0.16, 1e-5) == doctest::Approx(3.0 / 0.4).epsilon(1e-4));
  CHECK_THROWS_AS(mass_derivative(builder4, 1.0 / 9.0, 1e-3), ValidationError);

  auto builder8 = [&](double w) { return nls_profile_family(w, 1.0, 0, 8.0, 1.0, kDesk); };
  const double w1 = mass_derivative_sign_change(builder8, 0.112, 5.0, 1e-3);
  CHECK(mass_derivative(builder8, w1 - 0.05, 1e-5) > 0.0);
  CHECK(mass_derivative(builder8, w1 + 0.05, 1e-5) < 0.0);

  // two-component, p < 3: mass ~ omega^{(3-p)/(2p-2)}, derivative positive
  auto builder_tc = [&](double w) { return two_component_profile(w, 0.0, 0.5, 2.5, 0, kDesk).u; };
  const double m1 = std::pow(lp_norm(builder_tc(2.0), 2.0), 2);
  const double m2 = std::pow(lp_norm(builder_tc(4.0), 2.0), 2);
  CHECK(m2 / m1 == doctest::Approx(std::pow(2.0, (3.0 - 2.5) / 3.0)).epsilon(1e-6));
  CHECK(mass_derivative(builder_tc, 3.0, 1e-4) > 0.0);
}

TEST_CASE("essential-spectrum surrogate: bound-state count stabilizes in L") {
  const auto pp = one_component(4.0, 1.0, 1);
  std::vector<int> counts;
  for (double L : {20.0, 30.0, 45.0}) {
    const StarGraph g = make_graph(3, L, static_cast<int>(std::lround(L / 0.01)) + 1);
    const GridField prof = nls_profile_family(4.0, 1.0, 1, 4.0, 1.0, g);
    auto l1r = assemble_one_component_linearization(prof, pp, Part::R, 1);
    counts.push_back(count_below(l1r, 0.9 * 4.0));
  }
  CHECK(counts[0] == counts[1]);
  CHECK(counts[1] == counts[2]);
}
