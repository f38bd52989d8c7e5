#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "graphnls/errors.hpp"

namespace graphnls {

// Matrix with the sparsity of a discretized star graph: one s x s vertex
// block, and per edge a chain of m point blocks (s x s) coupled to their
// neighbours by diagonal s x s blocks. The vertex couples to the first point
// of every chain, again diagonally.
//
// Unknown layout: [vertex block | edge 0 points 0..m-1 | edge 1 ... ],
// component index fastest within a point.
template <class Scalar>
class StarChain {
public:
  using SmallMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Diag = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>; // diagonal coupling block

  StarChain() = default;
  StarChain(int num_edges, int chain_length, int block_size)
      : num_edges_(num_edges), chain_length_(chain_length), block_size_(block_size),
        vertex_block_(SmallMatrix::Zero(block_size, block_size)),
        diag_(static_cast<size_t>(num_edges) * chain_length,
              SmallMatrix::Zero(block_size, block_size)),
        bond_(static_cast<size_t>(num_edges) * (chain_length - 1), Diag::Zero(block_size)),
        vertex_bond_(num_edges, Diag::Zero(block_size)) {}

  int num_edges() const { return num_edges_; }
  int chain_length() const { return chain_length_; }
  int block_size() const { return block_size_; }
  int num_points() const { return 1 + num_edges_ * chain_length_; }
  int dimension() const { return block_size_ * num_points(); }

  SmallMatrix& vertex_block() { return vertex_block_; }
  const SmallMatrix& vertex_block() const { return vertex_block_; }
  SmallMatrix& diag(int edge, int i) { return diag_[static_cast<size_t>(edge) * chain_length_ + i]; }
  const SmallMatrix& diag(int edge, int i) const {
    return diag_[static_cast<size_t>(edge) * chain_length_ + i];
  }
  // Diagonal coupling between points i and i+1 of an edge.
  Diag& bond(int edge, int i) { return bond_[static_cast<size_t>(edge) * (chain_length_ - 1) + i]; }
  const Diag& bond(int edge, int i) const {
    return bond_[static_cast<size_t>(edge) * (chain_length_ - 1) + i];
  }
  Diag& vertex_bond(int edge) { return vertex_bond_[edge]; }
  const Diag& vertex_bond(int edge) const { return vertex_bond_[edge]; }

  // Offset of a point block in the assembled vector: the vertex sits at 0.
  int offset(int edge, int i) const { return block_size_ * (1 + edge * chain_length_ + i); }

  Vector apply(const Vector& x) const;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> dense() const;

  // Crude lower/upper bounds on the spectrum (Gershgorin over point blocks).
  std::pair<double, double> gershgorin() const;

  // Number of eigenvalues strictly below tau (symmetric real chains only),
  // by Sylvester inertia of the block LDL^T elimination running from the far
  // end of every chain into the vertex. Near-singular pivots are clamped to
  // a tiny negative value, as in classical Sturm bisection codes.
  int inertia(double tau) const;

  // Block elimination of (A - shift I) in the same order, kept for repeated
  // solves. No pivoting across blocks; singular pivots surface as
  // ValidationError.
  struct Factorization {
    const StarChain* chain = nullptr;
    Scalar shift = Scalar(0);
    std::vector<SmallMatrix> inv_pivot; // per chain point
    SmallMatrix inv_vertex;
    Vector solve(const Vector& rhs) const;
  };
  Factorization factor(Scalar shift) const;

private:
  int num_edges_ = 0;
  int chain_length_ = 0;
  int block_size_ = 0;
  SmallMatrix vertex_block_;
  std::vector<SmallMatrix> diag_;
  std::vector<Diag> bond_;
  std::vector<Diag> vertex_bond_;
};

using RealStarChain = StarChain<double>;
using ComplexStarChain = StarChain<std::complex<double>>;

} // namespace graphnls
