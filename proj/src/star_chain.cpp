#include "graphnls/star_chain.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

namespace graphnls {

namespace {

double magnitude(double x) { return std::abs(x); }
double magnitude(const std::complex<double>& x) { return std::abs(x); }

// Inertia of a small symmetric block, with pivot clamping: eigenvalues of
// magnitude below pivmin count as negative and are replaced by -pivmin, so a
// shift landing exactly on a spectrum point cannot break the recurrence.
struct SmallPivot {
  explicit SmallPivot(int s) : es(s), inv(s, s) {}
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  Eigen::MatrixXd inv;
  int negatives = 0;

  void process(const Eigen::MatrixXd& d, double pivmin) {
    negatives = 0;
    if (d.rows() == 1) {
      double x = d(0, 0);
      if (std::abs(x) < pivmin) x = -pivmin;
      if (x < 0.0) negatives = 1;
      inv(0, 0) = 1.0 / x;
      return;
    }
    es.compute(d);
    Eigen::VectorXd lam = es.eigenvalues();
    for (int j = 0; j < lam.size(); ++j) {
      if (std::abs(lam(j)) < pivmin) lam(j) = -pivmin;
      if (lam(j) < 0.0) ++negatives;
    }
    inv.noalias() = es.eigenvectors() * lam.cwiseInverse().asDiagonal() *
                    es.eigenvectors().transpose();
  }
};

} // namespace

template <class Scalar>
typename StarChain<Scalar>::Vector StarChain<Scalar>::apply(const Vector& x) const {
  const int s = block_size_;
  Vector y = Vector::Zero(dimension());
  y.head(s).noalias() = vertex_block_ * x.head(s);
  for (int e = 0; e < num_edges_; ++e) {
    const int first = offset(e, 0);
    y.head(s).array() += vertex_bond_[e].array() * x.segment(first, s).array();
    y.segment(first, s).array() += vertex_bond_[e].array() * x.head(s).array();
    for (int i = 0; i < chain_length_; ++i) {
      const int at = offset(e, i);
      y.segment(at, s).noalias() += diag(e, i) * x.segment(at, s);
      if (i + 1 < chain_length_) {
        const Diag& b = bond(e, i);
        y.segment(at, s).array() += b.array() * x.segment(at + s, s).array();
        y.segment(at + s, s).array() += b.array() * x.segment(at, s).array();
      }
    }
  }
  return y;
}

template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> StarChain<Scalar>::dense() const {
  const int s = block_size_;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> a =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(dimension(), dimension());
  a.topLeftCorner(s, s) = vertex_block_;
  for (int e = 0; e < num_edges_; ++e) {
    const int first = offset(e, 0);
    a.block(0, first, s, s).diagonal() += vertex_bond_[e];
    a.block(first, 0, s, s).diagonal() += vertex_bond_[e];
    for (int i = 0; i < chain_length_; ++i) {
      const int at = offset(e, i);
      a.block(at, at, s, s) = diag(e, i);
      if (i + 1 < chain_length_) {
        a.block(at, at + s, s, s).diagonal() += bond(e, i);
        a.block(at + s, at, s, s).diagonal() += bond(e, i);
      }
    }
  }
  return a;
}

template <class Scalar>
std::pair<double, double> StarChain<Scalar>::gershgorin() const {
  const int s = block_size_;
  double lo = std::numeric_limits<double>::max();
  double hi = std::numeric_limits<double>::lowest();
  auto visit = [&](const SmallMatrix& d, const Diag* couplings, int n_couplings) {
    for (int r = 0; r < s; ++r) {
      double center = 0.0, radius = 0.0;
      for (int j = 0; j < n_couplings; ++j) radius += magnitude(couplings[j](r));
      for (int c = 0; c < s; ++c) {
        if (r == c)
          center = std::real(d(r, c));
        else
          radius += magnitude(d(r, c));
      }
      lo = std::min(lo, center - radius);
      hi = std::max(hi, center + radius);
    }
  };
  visit(vertex_block_, vertex_bond_.data(), num_edges_);
  std::vector<Diag> local;
  for (int e = 0; e < num_edges_; ++e)
    for (int i = 0; i < chain_length_; ++i) {
      local.clear();
      local.push_back(i == 0 ? vertex_bond_[e] : bond(e, i - 1));
      if (i + 1 < chain_length_) local.push_back(bond(e, i));
      visit(diag(e, i), local.data(), static_cast<int>(local.size()));
    }
  return {lo, hi};
}

template <class Scalar>
int StarChain<Scalar>::inertia(double tau) const {
  if constexpr (!std::is_same_v<Scalar, double>) {
    throw ValidationError("inertia: only defined for real symmetric chains");
  } else {
    const int s = block_size_;
    const auto bounds = gershgorin();
    const double scale = std::max({std::abs(bounds.first), std::abs(bounds.second), 1.0});
    const double pivmin = 1e-18 * scale;

    SmallPivot pivot(s);
    Eigen::MatrixXd d(s, s), prev_inv(s, s), vertex(s, s);
    int count = 0;
    vertex = vertex_block_;
    vertex.diagonal().array() -= tau;
    for (int e = 0; e < num_edges_; ++e) {
      for (int i = chain_length_ - 1; i >= 0; --i) {
        d = diag(e, i);
        d.diagonal().array() -= tau;
        if (i + 1 < chain_length_) {
          const Diag& t = bond(e, i);
          d.noalias() -= t.asDiagonal() * prev_inv * t.asDiagonal();
        }
        pivot.process(d, pivmin);
        count += pivot.negatives;
        prev_inv = pivot.inv;
      }
      const Diag& c = vertex_bond_[e];
      vertex.noalias() -= c.asDiagonal() * prev_inv * c.asDiagonal();
    }
    pivot.process(vertex, pivmin);
    return count + pivot.negatives;
  }
}

template <class Scalar>
typename StarChain<Scalar>::Factorization StarChain<Scalar>::factor(Scalar shift) const {
  const int s = block_size_;
  Factorization f;
  f.chain = this;
  f.shift = shift;
  f.inv_pivot.resize(diag_.size());

  const auto bounds = gershgorin();
  const double scale = std::max({std::abs(bounds.first), std::abs(bounds.second), 1.0});

  SmallMatrix d(s, s), vertex(s, s);
  Eigen::PartialPivLU<SmallMatrix> lu(s);
  auto invert = [&](const SmallMatrix& m) -> SmallMatrix {
    lu.compute(m);
    const double det_mag = magnitude(lu.determinant());
    if (!(det_mag > std::pow(1e-18 * scale, s)))
      throw ValidationError("StarChain::factor: singular pivot (shift on an eigenvalue?)");
    return lu.inverse();
  };

  vertex = vertex_block_;
  vertex.diagonal().array() -= shift;
  for (int e = 0; e < num_edges_; ++e) {
    for (int i = chain_length_ - 1; i >= 0; --i) {
      d = diag(e, i);
      d.diagonal().array() -= shift;
      if (i + 1 < chain_length_) {
        const Diag& t = bond(e, i);
        d.noalias() -=
            t.asDiagonal() * f.inv_pivot[static_cast<size_t>(e) * chain_length_ + i + 1] *
            t.asDiagonal();
      }
      f.inv_pivot[static_cast<size_t>(e) * chain_length_ + i] = invert(d);
    }
    const Diag& c = vertex_bond_[e];
    vertex.noalias() -=
        c.asDiagonal() * f.inv_pivot[static_cast<size_t>(e) * chain_length_] * c.asDiagonal();
  }
  f.inv_vertex = invert(vertex);
  return f;
}

template <class Scalar>
typename StarChain<Scalar>::Vector StarChain<Scalar>::Factorization::solve(
    const Vector& rhs) const {
  const StarChain& a = *chain;
  const int s = a.block_size();
  const int m = a.chain_length();
  Vector y = rhs;

  // Sweep chain ends toward the vertex, then back out.
  for (int e = 0; e < a.num_edges(); ++e) {
    for (int i = m - 1; i > 0; --i) {
      const auto& inv = inv_pivot[static_cast<size_t>(e) * m + i];
      y.segment(a.offset(e, i - 1), s).array() -=
          a.bond(e, i - 1).array() * (inv * y.segment(a.offset(e, i), s)).array();
    }
    const auto& inv = inv_pivot[static_cast<size_t>(e) * m];
    y.head(s).array() -=
        a.vertex_bond(e).array() * (inv * y.segment(a.offset(e, 0), s)).array();
  }

  Vector x(rhs.size());
  x.head(s).noalias() = inv_vertex * y.head(s);
  for (int e = 0; e < a.num_edges(); ++e) {
    for (int i = 0; i < m; ++i) {
      Vector seg = y.segment(a.offset(e, i), s);
      if (i == 0)
        seg.array() -= a.vertex_bond(e).array() * x.head(s).array();
      else
        seg.array() -= a.bond(e, i - 1).array() * x.segment(a.offset(e, i - 1), s).array();
      x.segment(a.offset(e, i), s).noalias() = inv_pivot[static_cast<size_t>(e) * m + i] * seg;
    }
  }
  return x;
}

template class StarChain<double>;
template class StarChain<std::complex<double>>;

} // namespace graphnls
