#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>

#include "graphnls/operators.hpp"
#include "spectra_detail.hpp"

namespace graphnls {

namespace detail {

namespace {

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& x) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
  return qr.householderQ() * Eigen::MatrixXd::Identity(x.rows(), x.cols());
}

} // namespace

std::vector<Cluster> bisect_lowest(const RealStarChain& chain, int n_lowest) {
  std::vector<Cluster> out;
  if (n_lowest <= 0) return out;
  n_lowest = std::min(n_lowest, chain.dimension());

  const auto [glo, ghi] = chain.gershgorin();
  const double scale = std::max({std::abs(glo), std::abs(ghi), 1.0});
  const double width_tol = 1e-14 * scale;
  const double lo = glo - 1e-6 * scale;

  // Upper bracket: the smallest tau with at least n_lowest eigenvalues below.
  double hi = ghi + 1e-6 * scale;
  {
    double a = lo, b = hi;
    for (int it = 0; it < 60 && (b - a) > 1e3 * width_tol; ++it) {
      const double mid = 0.5 * (a + b);
      if (chain.inertia(mid) >= n_lowest)
        b = mid;
      else
        a = mid;
    }
    hi = b + 1e3 * width_tol;
  }

  struct Interval {
    double lo, hi;
    int clo, chi;
  };
  std::vector<Interval> stack{{lo, hi, 0, chain.inertia(hi)}};
  int emitted = 0;
  while (!stack.empty() && emitted < n_lowest) {
    const Interval iv = stack.back();
    stack.pop_back();
    if (iv.chi == iv.clo) continue;
    if (iv.hi - iv.lo <= width_tol) {
      out.push_back({0.5 * (iv.lo + iv.hi), iv.chi - iv.clo});
      emitted += iv.chi - iv.clo;
      continue;
    }
    const double mid = 0.5 * (iv.lo + iv.hi);
    const int cm = chain.inertia(mid);
    // Left half processed first.
    stack.push_back({mid, iv.hi, cm, iv.chi});
    stack.push_back({iv.lo, mid, iv.clo, cm});
  }
  return out;
}

RealStarChain::Factorization factor_with_retry(const RealStarChain& chain, double shift,
                                               double scale) {
  double off = 0.0;
  for (int attempt = 0; attempt < 6; ++attempt) {
    try {
      return chain.factor(shift + off);
    } catch (const ValidationError&) {
      off = (off == 0.0) ? 1e-11 * scale : 10.0 * off;
    }
  }
  throw ConvergenceError("eigensolver: could not factor shifted chain");
}

ClusterPairs cluster_eigenpairs(const RealStarChain& chain, const Cluster& cluster,
                                unsigned seed) {
  const int n = chain.dimension();
  const int m = cluster.multiplicity;
  const auto [glo, ghi] = chain.gershgorin();
  const double scale = std::max({std::abs(glo), std::abs(ghi), 1.0});

  const double shift = cluster.value + 1e-10 * scale;
  const auto fac = factor_with_retry(chain, shift, scale);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd x(n, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) x(i, j) = gauss(rng);
  x = orthonormalize(x);

  Eigen::MatrixXd ax(n, m);
  Eigen::MatrixXd h(m, m);
  double res = std::numeric_limits<double>::max();
  for (int iter = 0; iter < 40; ++iter) {
    for (int j = 0; j < m; ++j) x.col(j) = fac.solve(x.col(j));
    x = orthonormalize(x);
    for (int j = 0; j < m; ++j) ax.col(j) = chain.apply(x.col(j));
    h.noalias() = x.transpose() * ax;
    res = (ax - x * h).colwise().norm().maxCoeff();
    if (res <= 1e-11 * scale) break;
  }
  if (res > 1e-8 * scale)
    throw ConvergenceError("inverse iteration did not converge (residual " +
                           std::to_string(res) + ")");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  ClusterPairs pairs;
  pairs.values = es.eigenvalues();
  pairs.vectors = x * es.eigenvectors();
  return pairs;
}

} // namespace detail

SpectrumReport spectrum(const OperatorMatrix& op, int n_lowest, double zero_tol,
                        bool want_eigenvectors, int dense_threshold) {
  SpectrumReport rep;
  rep.zero_tol = zero_tol;
  const auto& chain = op.chain();
  n_lowest = std::min(n_lowest, op.dimension());

  if (op.dimension() <= dense_threshold) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(chain.dense());
    if (es.info() != Eigen::Success)
      throw ConvergenceError("dense eigensolver failed to converge");
    const auto& lam = es.eigenvalues();
    rep.eigenvalues.assign(lam.data(), lam.data() + n_lowest);
    if (want_eigenvectors) rep.eigenvectors = es.eigenvectors().leftCols(n_lowest);
    for (int i = 0; i < lam.size(); ++i) {
      if (lam(i) < -zero_tol) ++rep.n_negative;
      if (std::abs(lam(i)) <= zero_tol) ++rep.kernel_dim;
    }
    return rep;
  }

  const auto clusters = detail::bisect_lowest(chain, n_lowest);
  if (want_eigenvectors) {
    int total = 0;
    for (const auto& c : clusters) total += c.multiplicity;
    rep.eigenvectors.resize(op.dimension(), std::min(total, n_lowest));
  }
  int col = 0;
  unsigned seed = 0x5eed;
  for (const auto& c : clusters) {
    if (want_eigenvectors) {
      const auto pairs = detail::cluster_eigenpairs(chain, c, seed++);
      for (int j = 0; j < c.multiplicity && col < rep.eigenvectors.cols(); ++j, ++col) {
        rep.eigenvalues.push_back(pairs.values(j));
        rep.eigenvectors.col(col) = pairs.vectors.col(j);
      }
    } else {
      for (int j = 0; j < c.multiplicity; ++j) rep.eigenvalues.push_back(c.value);
    }
  }
  if (static_cast<int>(rep.eigenvalues.size()) > n_lowest) rep.eigenvalues.resize(n_lowest);
  std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end());

  rep.n_negative = chain.inertia(-zero_tol);
  rep.kernel_dim = chain.inertia(zero_tol) - rep.n_negative;
  return rep;
}

std::pair<int, int> morse_index(const OperatorMatrix& op, double zero_tol) {
  const int neg = op.chain().inertia(-zero_tol);
  const int below = op.chain().inertia(zero_tol);
  return {neg, below - neg};
}

int count_below(const OperatorMatrix& op, double tau) { return op.chain().inertia(tau); }

Eigen::VectorXd solve_shifted(const OperatorMatrix& op, double shift, const Eigen::VectorXd& rhs) {
  const auto [lo, hi] = op.chain().gershgorin();
  const double scale = std::max({std::abs(lo), std::abs(hi), 1.0});
  return detail::factor_with_retry(op.chain(), shift, scale).solve(rhs);
}

GridField refine_stationary_profile(const GridField& initial, double omega, double gamma,
                                    double coeff, double power, int max_newton) {
  const StarGraph& g = initial.graph();
  OperatorMatrix lap = assemble_delta_laplacian(g, gamma);
  const Eigen::VectorXd w = lap.point_weights();
  Eigen::VectorXd x = lap.pack(initial);

  auto field_values = [&](const Eigen::VectorXd& coords) {
    Eigen::VectorXd u(coords.size());
    for (int i = 0; i < coords.size(); ++i) u(i) = coords(i) / std::sqrt(w(i));
    return u;
  };
  for (int it = 0; it < max_newton; ++it) {
    const Eigen::VectorXd u = field_values(x);
    Eigen::VectorXd res = lap.chain().apply(x);
    for (int i = 0; i < x.size(); ++i)
      res(i) += omega * x(i) - coeff * std::pow(std::abs(u(i)), power - 2.0) * x(i);
    if (res.norm() <= 1e-13 * std::max(1.0, x.norm())) break;

    // Jacobian: -Delta_gamma + omega - coeff (power-1) |u|^{power-2}
    GridField current = lap.unpack(x)[0];
    auto jac = OperatorMatrix::build(g, gamma, 1, BlockStructure::Scalar, [&](int e, int i) {
      Eigen::MatrixXd m(1, 1);
      const double phi = std::abs(current.values()(i, e));
      m(0, 0) = omega - coeff * (power - 1.0) * std::pow(phi, power - 2.0);
      return m;
    });
    x -= solve_shifted(jac, 0.0, res);
  }
  return lap.unpack(x)[0];
}

} // namespace graphnls
