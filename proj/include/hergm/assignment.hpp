#ifndef HERGM_ASSIGNMENT_HPP
#define HERGM_ASSIGNMENT_HPP

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "hergm/graph.hpp"

namespace hergm {

/// Hungarian algorithm. For a rows x cols weight matrix with rows <= cols,
/// returns the column matched to each row so that the total weight is
/// maximal; columns are used at most once.
std::vector<std::size_t> max_weight_assignment(const Eigen::MatrixXd& weights);

/// Fraction of nodes misassigned under the best matching of estimated to
/// true labels.
double misclustering_rate(const Partition& est, const Partition& truth);

/// Renames the labels of `est` to agree as far as possible with `reference`.
/// The result has max(K_est, K_ref) clusters.
Partition relabel_to(const Partition& est, const Partition& reference);

}  // namespace hergm

#endif
