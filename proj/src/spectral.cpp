#include "hergm/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hergm/errors.hpp"
#include "hergm/rng.hpp"

namespace hergm {

namespace {

struct Lloyd {
    std::vector<std::size_t> labels;
    Eigen::MatrixXd centers;
    double wcss;
};

Lloyd lloyd_run(const Eigen::MatrixXd& x, std::size_t K, std::size_t max_iter, Rng& rng) {
    const auto n = static_cast<std::size_t>(x.rows());
    const auto dim = x.cols();
    Eigen::MatrixXd centers(Eigen::Index(K), dim);

    // k-means++ seeding.
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    std::size_t pick = rng.below(n);
    for (std::size_t k = 0; k < K; ++k) {
        centers.row(Eigen::Index(k)) = x.row(Eigen::Index(pick));
        double total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], (x.row(Eigen::Index(i)) - centers.row(Eigen::Index(k))).squaredNorm());
            total += d2[i];
        }
        if (k + 1 == K)
            break;
        if (total <= 0) {
            pick = rng.below(n);
            continue;
        }
        double u = rng.uniform() * total;
        pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            u -= d2[i];
            if (u < 0) {
                pick = i;
                break;
            }
        }
    }

    std::vector<std::size_t> labels(n, K);
    for (std::size_t it = 0; it < max_iter; ++it) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double bd = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < K; ++k) {
                const double d = (x.row(Eigen::Index(i)) - centers.row(Eigen::Index(k))).squaredNorm();
                if (d < bd) {
                    bd = d;
                    best = k;
                }
            }
            if (labels[i] != best) {
                labels[i] = best;
                changed = true;
            }
        }
        std::vector<std::size_t> count(K, 0);
        Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(Eigen::Index(K), dim);
        for (std::size_t i = 0; i < n; ++i) {
            ++count[labels[i]];
            sum.row(Eigen::Index(labels[i])) += x.row(Eigen::Index(i));
        }
        for (std::size_t k = 0; k < K; ++k) {
            if (count[k] > 0) {
                centers.row(Eigen::Index(k)) = sum.row(Eigen::Index(k)) / double(count[k]);
                continue;
            }
            std::size_t far = 0;
            double fd = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = (x.row(Eigen::Index(i)) - centers.row(Eigen::Index(labels[i]))).squaredNorm();
                if (d > fd) {
                    fd = d;
                    far = i;
                }
            }
            if (fd > 0) {
                centers.row(Eigen::Index(k)) = x.row(Eigen::Index(far));
                labels[far] = k;
                changed = true;
            }
        }
        if (!changed)
            break;
    }
    double wcss = 0;
    for (std::size_t i = 0; i < n; ++i)
        wcss += (x.row(Eigen::Index(i)) - centers.row(Eigen::Index(labels[i]))).squaredNorm();
    return {std::move(labels), std::move(centers), wcss};
}

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
    Eigen::Index arg;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0)
        v = -v;
}

Eigen::MatrixXd multiply(const Graph& g, const Eigen::MatrixXd& q) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(q.rows(), q.cols());
    for (node_t v = 0; v < g.num_nodes(); ++v)
        for (node_t w : g.neighbors(v))
            out.row(Eigen::Index(v)) += q.row(Eigen::Index(w));
    return out;
}

constexpr std::size_t kDenseLimit = 1500;

}  // namespace

KmeansResult kmeans(const Eigen::MatrixXd& points, std::size_t K, std::size_t restarts, std::size_t max_iter,
                    std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(points.rows());
    if (K == 0 || K > n)
        throw validation_error("kmeans: need 1 <= K <= number of points (K=" + std::to_string(K) +
                               ", points=" + std::to_string(n) + ")");
    if (restarts == 0 || max_iter == 0)
        throw validation_error("kmeans: restarts and max_iter must be positive");
    KmeansResult best;
    best.wcss = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < restarts; ++r) {
        Rng rng(derive_seed(seed, {r}));
        auto run = lloyd_run(points, K, max_iter, rng);
        if (run.wcss < best.wcss) {
            best.labels = std::move(run.labels);
            best.centers = std::move(run.centers);
            best.wcss = run.wcss;
        }
    }
    return best;
}

Eigenpairs leading_eigenpairs(const Graph& g, std::size_t count) {
    const std::size_t n = g.num_nodes();
    if (count == 0 || count > n)
        throw validation_error("leading_eigenpairs: need 1 <= count <= n");
    Eigenpairs out;
    if (n <= kDenseLimit) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(Eigen::Index(n), Eigen::Index(n));
        for (const auto& d : g.edge_list())
            a(Eigen::Index(d.i), Eigen::Index(d.j)) = a(Eigen::Index(d.j), Eigen::Index(d.i)) = 1;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
        if (es.info() != Eigen::Success)
            throw numerical_error("adjacency eigendecomposition failed");
        std::vector<Eigen::Index> order(n);
        std::iota(order.begin(), order.end(), 0);
        const auto& ev = es.eigenvalues();
        std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
            if (std::abs(ev[x]) != std::abs(ev[y]))
                return std::abs(ev[x]) > std::abs(ev[y]);
            return ev[x] > ev[y];
        });
        out.values.resize(Eigen::Index(count));
        out.vectors.resize(Eigen::Index(n), Eigen::Index(count));
        for (std::size_t k = 0; k < count; ++k) {
            out.values[Eigen::Index(k)] = ev[order[k]];
            out.vectors.col(Eigen::Index(k)) = es.eigenvectors().col(order[k]);
        }
    } else {
        const std::size_t block = std::min(n, count + 8);
        Rng rng(0x5c0e);
        Eigen::MatrixXd q(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(block));
        for (Eigen::Index i = 0; i < q.size(); ++i)
            q.data()[i] = rng.normal();
        double norm_a = 0;
        for (node_t v = 0; v < n; ++v)
            norm_a = std::max(norm_a, double(g.degree(v)));
        norm_a = std::max(norm_a, 1.0);
        Eigen::VectorXd theta;
        Eigen::MatrixXd ritz;
        for (int it = 0; it < 5000; ++it) {
            Eigen::HouseholderQR<Eigen::MatrixXd> qr(multiply(g, q));
            q = qr.householderQ() * Eigen::MatrixXd::Identity(Eigen::Index(n), Eigen::Index(block));
            const Eigen::MatrixXd aq = multiply(g, q);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(q.transpose() * aq);
            std::vector<Eigen::Index> order(block);
            std::iota(order.begin(), order.end(), 0);
            const auto& ev = small.eigenvalues();
            std::stable_sort(order.begin(), order.end(),
                             [&](Eigen::Index x, Eigen::Index y) { return std::abs(ev[x]) > std::abs(ev[y]); });
            Eigen::MatrixXd vecs(static_cast<Eigen::Index>(block), static_cast<Eigen::Index>(block));
            theta.resize(Eigen::Index(block));
            for (std::size_t k = 0; k < block; ++k) {
                vecs.col(Eigen::Index(k)) = small.eigenvectors().col(order[k]);
                theta[Eigen::Index(k)] = ev[order[k]];
            }
            q = q * vecs;
            ritz = q.leftCols(Eigen::Index(count));
            const Eigen::MatrixXd resid =
                multiply(g, ritz) - ritz * theta.head(Eigen::Index(count)).asDiagonal();
            if (resid.colwise().norm().maxCoeff() <= 1e-10 * norm_a)
                break;
        }
        out.values = theta.head(Eigen::Index(count));
        out.vectors = ritz;
    }
    for (std::size_t k = 0; k < count; ++k)
        fix_sign(out.vectors.col(Eigen::Index(k)));
    return out;
}

void ScoreControls::validate() const {
    if (K < 2)
        throw validation_error("SCORE needs K >= 2");
    if (truncation < 0 || !std::isfinite(truncation))
        throw validation_error("SCORE truncation must be positive (0 selects log n)");
    if (restarts == 0 || max_iter == 0)
        throw validation_error("SCORE k-means restarts and iteration cap must be positive");
}

Eigen::MatrixXd score_ratios(const Eigen::MatrixXd& vectors, double truncation) {
    const auto n = vectors.rows();
    const auto cols = vectors.cols() - 1;
    const double scale = vectors.col(0).cwiseAbs().maxCoeff();
    const double tiny = 1e-12 * (scale > 0 ? scale : 1.0);
    Eigen::MatrixXd r(n, cols);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double lead = vectors(i, 0);
        for (Eigen::Index k = 0; k < cols; ++k) {
            const double num = vectors(i, k + 1);
            double v;
            if (std::abs(lead) > tiny)
                v = num / lead;
            else if (std::abs(num) > tiny)
                v = std::copysign(truncation, num);
            else
                v = 0;
            r(i, k) = std::clamp(v, -truncation, truncation);
        }
    }
    return r;
}

Partition score_cluster(const Graph& g, const ScoreControls& controls) {
    controls.validate();
    const std::size_t n = g.num_nodes();
    if (n < controls.K)
        throw validation_error("SCORE needs at least K=" + std::to_string(controls.K) + " nodes, got " +
                               std::to_string(n));
    const double t = controls.truncation > 0 ? controls.truncation : std::log(double(n));
    const auto pairs = leading_eigenpairs(g, controls.K);
    const Eigen::MatrixXd r = score_ratios(pairs.vectors, t);
    auto km = kmeans(r, controls.K, controls.restarts, controls.max_iter, controls.seed);
    return Partition(std::move(km.labels), controls.K);
}

Partition eigenvector_cluster(const Graph& g, const ScoreControls& controls) {
    controls.validate();
    if (g.num_nodes() < controls.K)
        throw validation_error("spectral clustering needs at least K nodes");
    const auto pairs = leading_eigenpairs(g, controls.K);
    auto km = kmeans(pairs.vectors, controls.K, controls.restarts, controls.max_iter, controls.seed);
    return Partition(std::move(km.labels), controls.K);
}

}  // namespace hergm
