#pragma once

// Brute-force reference implementations. They deliberately share no code with
// the main computation paths (Gram matrix + cyclic Jacobi instead of SVD,
// counting ranks instead of sorting, an explicit double loop instead of the
// summed-unit-vector identity) and are meant for tests and value derivation.

#include <Eigen/Core>

#include <span>
#include <vector>

namespace ctxgeo::oracle {

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
std::vector<double> jacobi_eigenvalues(Eigen::MatrixXd symmetric, double tolerance = 1e-15,
                                       int max_sweeps = 100);

/// lambda_max / sum(lambda) of the Gram matrix on the smaller side of m.
double oracle_mev(const Eigen::MatrixXd& m);

/// Pearson over ranks computed as 1 + #{less} + (#{equal} - 1) / 2.
double oracle_spearman(std::span<const double> xs, std::span<const double> ys);

/// Mean of cos(c_j, c_k) over all ordered pairs j != k.
double oracle_pairwise_mean_cos(const Eigen::MatrixXd& m);

/// Unit u maximizing sum_j dot(u, c_j)^2 for d = 2 or 3, found by a polar or
/// spherical grid refined around the best cell. The sign is arbitrary.
Eigen::VectorXd grid_principal_direction(const Eigen::MatrixXd& m);

struct PartitionOptimum {
  double inertia = 0.0;
  double purity = 0.0;
};

/// Minimum within-cluster sum of squares over every partition of the columns
/// of `points` into exactly k nonempty groups, and the purity of that partition
/// against `labels`. Exponential; intended for N <= 10.
PartitionOptimum best_partition(const Eigen::MatrixXd& points, const std::vector<int>& labels, int k);

}  // namespace ctxgeo::oracle
