#include "hergm/assignment.hpp"

#include <algorithm>
#include <limits>

#include "hergm/errors.hpp"

namespace hergm {

std::vector<std::size_t> max_weight_assignment(const Eigen::MatrixXd& weights) {
    const auto rows = static_cast<std::size_t>(weights.rows());
    const auto cols = static_cast<std::size_t>(weights.cols());
    if (rows > cols)
        throw validation_error("assignment needs rows <= cols");
    if (rows == 0)
        return {};
    // Shortest augmenting path with potentials on the cost -w (1-based,
    // column 0 is the virtual source).
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(rows + 1, 0), v(cols + 1, 0);
    std::vector<std::size_t> match(cols + 1, 0), way(cols + 1, 0);
    for (std::size_t i = 1; i <= rows; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(cols + 1, inf);
        std::vector<char> used(cols + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = match[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= cols; ++j) {
                if (used[j])
                    continue;
                const double cur = -weights(Eigen::Index(i0 - 1), Eigen::Index(j - 1)) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= cols; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<std::size_t> out(rows);
    for (std::size_t j = 1; j <= cols; ++j)
        if (match[j])
            out[match[j] - 1] = j - 1;
    return out;
}

namespace {

Eigen::MatrixXd contingency(const Partition& a, const Partition& b, std::size_t size) {
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(Eigen::Index(size), Eigen::Index(size));
    for (node_t v = 0; v < a.num_nodes(); ++v)
        c(Eigen::Index(a[v]), Eigen::Index(b[v])) += 1;
    return c;
}

}  // namespace

double misclustering_rate(const Partition& est, const Partition& truth) {
    if (est.num_nodes() != truth.num_nodes())
        throw validation_error("misclustering_rate: partitions cover " + std::to_string(est.num_nodes()) +
                               " and " + std::to_string(truth.num_nodes()) + " nodes");
    const std::size_t size = std::max(est.num_clusters(), truth.num_clusters());
    const auto c = contingency(est, truth, size);
    const auto match = max_weight_assignment(c);
    double agree = 0;
    for (std::size_t k = 0; k < size; ++k)
        agree += c(Eigen::Index(k), Eigen::Index(match[k]));
    return 1.0 - agree / double(est.num_nodes());
}

Partition relabel_to(const Partition& est, const Partition& reference) {
    if (est.num_nodes() != reference.num_nodes())
        throw validation_error("relabel_to: partitions differ in size");
    const std::size_t size = std::max(est.num_clusters(), reference.num_clusters());
    const auto match = max_weight_assignment(contingency(est, reference, size));
    std::vector<std::size_t> a(est.num_nodes());
    for (node_t v = 0; v < a.size(); ++v)
        a[v] = match[est[v]];
    return Partition(std::move(a), size);
}

}  // namespace hergm
