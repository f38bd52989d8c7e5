#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>

#include "graphnls/operators.hpp"
#include "spectra_detail.hpp"

namespace graphnls {

namespace {

struct KernelInfo {
  int dim = 0;
  Eigen::MatrixXd basis; // orthonormal columns, symmetrized coords
  double max_abs_eigenvalue = 0.0;
};

KernelInfo detect_kernel(const OperatorMatrix& li, double zero_tol) {
  if (li.chain().inertia(-zero_tol) != 0)
    throw ConvergenceError("instability: LI has eigenvalues below -zero_tol, expected LI >= 0");
  const int dim = li.chain().inertia(zero_tol);
  KernelInfo info;
  info.dim = dim;
  if (dim == 0) return info;
  const auto rep = spectrum(li, dim, zero_tol, /*want_eigenvectors=*/true);
  info.basis = rep.eigenvectors.leftCols(dim);
  for (int j = 0; j < dim; ++j)
    info.max_abs_eigenvalue = std::max(info.max_abs_eigenvalue, std::abs(rep.eigenvalues[j]));
  return info;
}

// Symmetric pencil block [[LR, lambda I], [lambda I, -LI]] in chain form;
// the two groups keep their own Laplacian bonds (opposite signs).
RealStarChain make_pencil(const RealStarChain& lr, const RealStarChain& li, double lambda) {
  const int s = lr.block_size();
  RealStarChain t(lr.num_edges(), lr.chain_length(), 2 * s);
  auto fill_block = [&](Eigen::MatrixXd& dst, const Eigen::MatrixXd& ar,
                        const Eigen::MatrixXd& ai) {
    dst.setZero();
    dst.topLeftCorner(s, s) = ar;
    dst.bottomRightCorner(s, s) = -ai;
    dst.topRightCorner(s, s).diagonal().setConstant(lambda);
    dst.bottomLeftCorner(s, s).diagonal().setConstant(lambda);
  };
  fill_block(t.vertex_block(), lr.vertex_block(), li.vertex_block());
  for (int e = 0; e < lr.num_edges(); ++e) {
    t.vertex_bond(e).head(s) = lr.vertex_bond(e);
    t.vertex_bond(e).tail(s) = -li.vertex_bond(e);
    for (int i = 0; i < lr.chain_length(); ++i) {
      fill_block(t.diag(e, i), lr.diag(e, i), li.diag(e, i));
      if (i + 1 < lr.chain_length()) {
        t.bond(e, i).head(s) = lr.bond(e, i);
        t.bond(e, i).tail(s) = -li.bond(e, i);
      }
    }
  }
  return t;
}

// Expands a kernel basis of LI into the pencil coordinates (second group).
Eigen::MatrixXd lift_kernel(const Eigen::MatrixXd& q, int s) {
  const int points = static_cast<int>(q.rows()) / s;
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(2 * q.rows(), q.cols());
  for (int p = 0; p < points; ++p)
    z.block(2 * s * p + s, 0, s, q.cols()) = q.block(s * p, 0, s, q.cols());
  return z;
}

// Counts real eigenvalues above `lambda` of the hard-deflated pencil
// P LR P w = -lambda^2 (P LI^{-1} P) w on ker(LI)^perp. Both deflations are
// realized as penalty borders: adding rho Q Q^T to LR (pushing the kernel
// directions out of the LR block entirely) and to LI (regularizing the
// inverse); by Haynsworth the inertia of the bordered matrix
// [[T0(lambda), Z], [Z^T, D]] splits into chain inertia plus the small
// border Schur complement.
class RealEigCounter {
public:
  RealEigCounter(const OperatorMatrix& lr, const OperatorMatrix& li, const KernelInfo& kernel,
                 double scale)
      : lr_(lr), li_(li), scale_(scale), kappa_(kernel.dim) {
    if (kernel.dim > 0) {
      const double rho = 1e8 * scale;
      const Eigen::MatrixXd lifted = lift_kernel(kernel.basis, lr.block_size());
      const int n2 = static_cast<int>(lifted.rows());
      z_ = Eigen::MatrixXd::Zero(n2, 2 * kernel.dim);
      // first kappa columns penalize the LR block (first component group)
      for (int p = 0; p < n2 / (2 * lr.block_size()); ++p)
        z_.block(2 * lr.block_size() * p, 0, lr.block_size(), kernel.dim) =
            std::sqrt(rho) *
            kernel.basis.block(lr.block_size() * p, 0, lr.block_size(), kernel.dim);
      z_.rightCols(kernel.dim) = std::sqrt(rho) * lifted;
      d_signs_ = Eigen::VectorXd::Ones(2 * kernel.dim);
      d_signs_.head(kernel.dim).setConstant(-1.0); // -I border adds rho QQ^T to LR
    }
  }

  int operator()(double lambda) const {
    const RealStarChain t = make_pencil(lr_.chain(), li_.chain(), lambda);
    int count = t.inertia(0.0) - li_.dimension();
    if (kappa_ > 0) {
      const auto fac = detail::factor_with_retry(t, 0.0, scale_);
      Eigen::MatrixXd w(z_.rows(), z_.cols());
      for (int j = 0; j < z_.cols(); ++j) w.col(j) = fac.solve(z_.col(j));
      Eigen::MatrixXd s_border = -z_.transpose() * w;
      s_border.diagonal() += d_signs_;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s_border);
      for (int j = 0; j < s_border.rows(); ++j)
        if (es.eigenvalues()(j) < 0.0) ++count;
      count -= kappa_; // n_-(D) of the border block
    }
    return count;
  }

  const Eigen::MatrixXd& border() const { return z_; }
  const Eigen::VectorXd& border_signs() const { return d_signs_; }

private:
  const OperatorMatrix& lr_;
  const OperatorMatrix& li_;
  double scale_;
  int kappa_ = 0;
  Eigen::MatrixXd z_;
  Eigen::VectorXd d_signs_;
};

// Null direction of the deflated pencil at an isolated real eigenvalue, by
// inverse iteration with a Woodbury correction for the penalty borders.
Eigen::VectorXd pencil_null_vector(const RealStarChain& t, const Eigen::MatrixXd& z,
                                   const Eigen::VectorXd& d_signs, double scale, unsigned seed) {
  const double sigma = 1e-9 * scale;
  const auto fac = detail::factor_with_retry(t, sigma, scale);

  Eigen::MatrixXd w;
  Eigen::FullPivLU<Eigen::MatrixXd> border_lu;
  if (z.cols() > 0) {
    w.resize(z.rows(), z.cols());
    for (int j = 0; j < z.cols(); ++j) w.col(j) = fac.solve(z.col(j));
    Eigen::MatrixXd small = -z.transpose() * w;
    small.diagonal() += d_signs;
    border_lu.compute(small);
  }
  auto solve_deflated = [&](const Eigen::VectorXd& r) {
    Eigen::VectorXd y = fac.solve(r);
    if (z.cols() > 0) y += w * border_lu.solve(z.transpose() * y);
    return y;
  };

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd x(t.dimension());
  for (int i = 0; i < x.size(); ++i) x(i) = gauss(rng);
  x.normalize();
  for (int iter = 0; iter < 8; ++iter) {
    x = solve_deflated(x);
    x.normalize();
  }
  return x;
}

std::vector<double> locate_drops(const RealEigCounter& count, double lo, double hi, int clo,
                                 int chi) {
  std::vector<double> found;
  struct Interval {
    double lo, hi;
    int clo, chi;
  };
  std::vector<Interval> stack{{lo, hi, clo, chi}};
  while (!stack.empty()) {
    const Interval iv = stack.back();
    stack.pop_back();
    const int drops = iv.clo - iv.chi; // count is nonincreasing in lambda
    if (drops <= 0) continue;
    if (iv.hi - iv.lo <= 1e-9 * std::max(1.0, iv.hi)) {
      const double lam = 0.5 * (iv.lo + iv.hi);
      for (int j = 0; j < drops; ++j) found.push_back(lam);
      continue;
    }
    const double mid = 0.5 * (iv.lo + iv.hi);
    const int cm = count(mid);
    stack.push_back({mid, iv.hi, cm, iv.chi});
    stack.push_back({iv.lo, mid, iv.clo, cm});
  }
  std::sort(found.begin(), found.end());
  return found;
}

void check_compatible(const OperatorMatrix& lr, const OperatorMatrix& li) {
  if (!lr.graph().same_grid(li.graph()) || lr.block_size() != li.block_size())
    throw ValidationError("instability: LR and LI must share grid and block structure");
}

} // namespace

InstabilityReport instability_eigenvalues(const OperatorMatrix& lr, const OperatorMatrix& li,
                                          double tol, const InstabilityOptions& opts) {
  check_compatible(lr, li);
  const double h = lr.graph().spacing();
  const double zero_tol = (opts.zero_tol > 0.0) ? opts.zero_tol : 100.0 * h * h;

  InstabilityReport rep;
  rep.grillakis_bound = grillakis_lower_bound(lr, li, zero_tol);

  const KernelInfo kernel = detect_kernel(li, zero_tol);
  const auto [rlo, rhi] = lr.chain().gershgorin();
  const auto [ilo, ihi] = li.chain().gershgorin();
  const double scale = std::max({std::abs(rlo), rhi, std::abs(ilo), ihi, 1.0});

  if (2 * lr.dimension() <= opts.dense_threshold) {
    // Dense route: deflate ker(LI) by explicit projection and run the general
    // eigensolver on the full block matrix.
    const int n = lr.dimension();
    Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(n, n);
    if (kernel.dim > 0) proj -= kernel.basis * kernel.basis.transpose();
    const Eigen::MatrixXd ar = proj * lr.dense() * proj;
    const Eigen::MatrixXd ai = proj * li.dense() * proj;
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    block.topRightCorner(n, n) = ai;
    block.bottomLeftCorner(n, n) = -ar;
    Eigen::EigenSolver<Eigen::MatrixXd> es(block);
    if (es.info() != Eigen::Success)
      throw ConvergenceError("instability: dense eigensolver failed");
    std::vector<int> picked;
    for (int j = 0; j < 2 * n; ++j)
      if (es.eigenvalues()(j).real() > tol) picked.push_back(j);
    std::sort(picked.begin(), picked.end(), [&](int a, int b) {
      return es.eigenvalues()(a).real() > es.eigenvalues()(b).real();
    });
    for (int j : picked) {
      rep.eigenvalues.push_back(es.eigenvalues()(j));
      if (opts.want_modes) {
        const auto vec = es.eigenvectors().col(j);
        Eigen::VectorXd w1 = vec.head(n).real();
        Eigen::VectorXd w2 = vec.tail(n).real();
        const double norm = std::sqrt(w1.squaredNorm() + w2.squaredNorm());
        rep.modes_w1.push_back(lr.unpack(w1 / norm));
        rep.modes_w2.push_back(lr.unpack(w2 / norm));
      }
    }
    return rep;
  }

  // Structured route: with LI >= 0 every unstable eigenvalue is real, located
  // by bisection on the inertia of the bordered pencil.
  const RealEigCounter counter(lr, li, kernel, scale);
  double cap = opts.lambda_cap;
  if (cap <= 0.0) cap = 1.1 * std::sqrt(std::max(-rlo, tol * tol) * std::max(ihi, 1.0));
  const int c_lo = counter(tol);
  const int c_hi = counter(cap);
  const auto lambdas = locate_drops(counter, tol, cap, c_lo, c_hi);

  for (auto it = lambdas.rbegin(); it != lambdas.rend(); ++it) {
    const double lam = *it;
    rep.eigenvalues.emplace_back(lam, 0.0);
    if (opts.want_modes) {
      const RealStarChain t = make_pencil(lr.chain(), li.chain(), lam);
      const Eigen::VectorXd x =
          pencil_null_vector(t, counter.border(), counter.border_signs(), scale, 0xabcd);
      const int s = lr.block_size();
      const int points = lr.dimension() / s;
      Eigen::VectorXd w1(lr.dimension());
      for (int p = 0; p < points; ++p) w1.segment(s * p, s) = x.segment(2 * s * p, s);
      if (kernel.dim > 0) w1 -= kernel.basis * (kernel.basis.transpose() * w1);
      Eigen::VectorXd w2 = -lr.chain().apply(w1) / lam;
      const double norm = std::sqrt(w1.squaredNorm() + w2.squaredNorm());
      rep.modes_w1.push_back(lr.unpack(w1 / norm));
      rep.modes_w2.push_back(lr.unpack(w2 / norm));
    }
  }
  return rep;
}

int grillakis_lower_bound(const OperatorMatrix& lr, const OperatorMatrix& li, double zero_tol) {
  check_compatible(lr, li);
  const KernelInfo kernel = detect_kernel(li, zero_tol);
  const auto [rlo, rhi] = lr.chain().gershgorin();
  const double scale = std::max({std::abs(rlo), std::abs(rhi), 1.0});

  const double tau = -zero_tol;
  int count = lr.chain().inertia(tau);
  if (kernel.dim > 0) {
    const auto fac = detail::factor_with_retry(lr.chain(), tau, scale);
    Eigen::MatrixXd x(lr.dimension(), kernel.dim);
    for (int j = 0; j < kernel.dim; ++j) x.col(j) = fac.solve(kernel.basis.col(j));
    const Eigen::MatrixXd g = -kernel.basis.transpose() * x;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    for (int j = 0; j < kernel.dim; ++j)
      if (es.eigenvalues()(j) < 0.0) ++count;
    count -= kernel.dim;
  }
  // n(P LI^{-1} P) vanishes because LI is nonnegative away from its kernel;
  // detect_kernel has already enforced that.
  return count;
}

HessianReport hessian_two_component(const GridField& profile, double p, double b, double omega,
                                    double gamma) {
  if (std::abs(b - (p - 1.0)) < 1e-8)
    throw ValidationError("hessian: b = p-1 makes the minus block singular");
  auto [l_plus, l_minus] = assemble_plus_minus(profile, p, b, omega, gamma);

  GridField neg_phi(profile.graph(), -profile.values());
  const Eigen::VectorXd rhs = l_plus.pack(neg_phi);
  const Eigen::VectorXd phi_coords = l_plus.pack(profile);

  const auto [plo, phi_g] = l_plus.chain().gershgorin();
  const double scale = std::max({std::abs(plo), std::abs(phi_g), 1.0});
  const Eigen::VectorXd h_plus = detail::factor_with_retry(l_plus.chain(), 0.0, scale).solve(rhs);
  const Eigen::VectorXd h_minus =
      detail::factor_with_retry(l_minus.chain(), 0.0, scale).solve(rhs);

  HessianReport rep;
  rep.phi_h_plus = phi_coords.dot(h_plus);
  rep.phi_h_minus = phi_coords.dot(h_minus);
  const double a = 0.25 * (rep.phi_h_plus + rep.phi_h_minus);
  const double c = 0.25 * (rep.phi_h_plus - rep.phi_h_minus);
  rep.d2 << a, c, c, a;
  rep.det = a * a - c * c;
  rep.trace = 2.0 * a;
  rep.p_positive = (a + c > 0.0 ? 1 : 0) + (a - c > 0.0 ? 1 : 0);
  return rep;
}

double mass_derivative(const std::function<GridField(double)>& profile_builder, double omega,
                       double delta_omega) {
  if (!(delta_omega > 0.0)) throw ValidationError("mass_derivative: delta_omega must be positive");
  const double hi = std::pow(lp_norm(profile_builder(omega + delta_omega), 2.0), 2);
  const double lo = std::pow(lp_norm(profile_builder(omega - delta_omega), 2.0), 2);
  return (hi - lo) / (2.0 * delta_omega);
}

double mass_derivative_sign_change(const std::function<GridField(double)>& profile_builder,
                                   double lo, double hi, double tol) {
  const double step = 0.25 * tol;
  auto deriv = [&](double w) { return mass_derivative(profile_builder, w, step); };
  double flo = deriv(lo), fhi = deriv(hi);
  if (flo * fhi > 0.0)
    throw ValidationError("mass_derivative_sign_change: no sign change in bracket");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double fm = deriv(mid);
    if (flo * fm <= 0.0) {
      hi = mid;
      fhi = fm;
    } else {
      lo = mid;
      flo = fm;
    }
  }
  return 0.5 * (lo + hi);
}

} // namespace graphnls
