#pragma once

#include <vector>

#include "graphnls/star_chain.hpp"

namespace graphnls::detail {

struct Cluster {
  double value = 0.0;
  int multiplicity = 0;
};

// The n_lowest smallest eigenvalues of a symmetric chain, isolated by Sturm
// bisection on the inertia; clusters narrower than the resolution width are
// reported with their multiplicity.
std::vector<Cluster> bisect_lowest(const RealStarChain& chain, int n_lowest);

struct ClusterPairs {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors; // orthonormal columns
};

// Block inverse iteration with Rayleigh-Ritz refinement around an isolated
// cluster.
ClusterPairs cluster_eigenpairs(const RealStarChain& chain, const Cluster& cluster,
                                unsigned seed);

// Factors chain at `shift`, retrying with slightly perturbed shifts when the
// elimination hits a singular pivot.
RealStarChain::Factorization factor_with_retry(const RealStarChain& chain, double shift,
                                               double scale);

} // namespace graphnls::detail
