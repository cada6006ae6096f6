#ifndef HERGM_SPECTRAL_HPP
#define HERGM_SPECTRAL_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "hergm/graph.hpp"

namespace hergm {

struct KmeansResult {
    std::vector<std::size_t> labels;
    Eigen::MatrixXd centers;  ///< K x dim
    double wcss = 0;
};

/// Lloyd's algorithm from k-means++ starts; the best of `restarts` runs by
/// within-cluster sum of squares is returned. A cluster that loses all its
/// points is re-seeded at the point farthest from its current center, unless
/// every point sits on its center, in which case it stays empty.
KmeansResult kmeans(const Eigen::MatrixXd& points, std::size_t K, std::size_t restarts, std::size_t max_iter,
                    std::uint64_t seed);

struct Eigenpairs {
    Eigen::VectorXd values;   ///< ordered by decreasing |value|
    Eigen::MatrixXd vectors;  ///< n x count, unit columns
};

/// The `count` adjacency eigenpairs of largest magnitude. Dense solver for
/// small graphs, block subspace iteration otherwise. Every column is signed
/// so that its largest-magnitude entry is positive.
Eigenpairs leading_eigenpairs(const Graph& g, std::size_t count);

struct ScoreControls {
    std::size_t K = 2;
    double truncation = 0;  ///< T_n; 0 means log(n)
    std::size_t restarts = 20;
    std::size_t max_iter = 100;
    std::uint64_t seed = 1;

    void validate() const;
};

/// n x (K-1) matrix of entrywise ratios eta_{k+1}(i) / eta_1(i) clipped to
/// [-T, T]. Where eta_1(i) vanishes the entry is sign(eta_{k+1}(i)) * T, or 0
/// if the numerator vanishes too.
Eigen::MatrixXd score_ratios(const Eigen::MatrixXd& vectors, double truncation);

/// SCORE: k-means on the eigenvector ratio rows.
Partition score_cluster(const Graph& g, const ScoreControls& controls);

/// Baseline without the degree correction: k-means on the raw rows of the K
/// leading eigenvectors.
Partition eigenvector_cluster(const Graph& g, const ScoreControls& controls);

}  // namespace hergm

#endif
