#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "hergm/assignment.hpp"
#include "hergm/spectral.hpp"
#include "oracles.hpp"

using namespace hergm;

namespace {

// Best agreement over all K! label maps.
double brute_rate(const Partition& est, const Partition& truth) {
    const std::size_t size = std::max(est.num_clusters(), truth.num_clusters());
    std::vector<std::size_t> perm(size);
    std::iota(perm.begin(), perm.end(), 0);
    std::size_t best = 0;
    do {
        std::size_t agree = 0;
        for (node_t v = 0; v < est.num_nodes(); ++v)
            agree += perm[est[v]] == truth[v];
        best = std::max(best, agree);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return 1.0 - double(best) / double(est.num_nodes());
}

Partition random_partition(std::size_t n, std::size_t K, std::mt19937_64& rng) {
    std::vector<std::size_t> a(n);
    for (auto& x : a)
        x = rng() % K;
    return Partition(a, K);
}

Graph planted(std::size_t half, double p_in, double p_out, std::mt19937_64& rng) {
    std::bernoulli_distribution in(p_in), out(p_out);
    Graph g(2 * half);
    for (node_t i = 0; i < 2 * half; ++i)
        for (node_t j = i + 1; j < 2 * half; ++j)
            if ((i < half) == (j < half) ? in(rng) : out(rng))
                g.add_edge(i, j);
    return g;
}

Graph cliques(std::size_t count, std::size_t size) {
    Graph g(count * size);
    for (std::size_t c = 0; c < count; ++c)
        for (node_t i = 0; i < size; ++i)
            for (node_t j = i + 1; j < size; ++j)
                g.add_edge(c * size + i, c * size + j);
    return g;
}

}  // namespace

TEST_CASE("Hungarian assignment equals brute force") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-5, 10);
    for (std::size_t k = 1; k <= 6; ++k)
        for (int rep = 0; rep < 20; ++rep) {
            Eigen::MatrixXd w(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
            for (Eigen::Index i = 0; i < w.size(); ++i)
                w.data()[i] = rep % 2 ? std::floor(u(rng)) : u(rng);
            auto match = max_weight_assignment(w);
            double got = 0;
            for (std::size_t r = 0; r < k; ++r)
                got += w(Eigen::Index(r), Eigen::Index(match[r]));
            std::vector<std::size_t> perm(k);
            std::iota(perm.begin(), perm.end(), 0);
            double best = -1e300;
            do {
                double s = 0;
                for (std::size_t r = 0; r < k; ++r)
                    s += w(Eigen::Index(r), Eigen::Index(perm[r]));
                best = std::max(best, s);
            } while (std::next_permutation(perm.begin(), perm.end()));
            CHECK(got == doctest::Approx(best).epsilon(1e-12));
            auto sorted = match;
            std::sort(sorted.begin(), sorted.end());
            CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
        }
    Eigen::MatrixXd wide(2, 4);
    wide << 1, 5, 0, 0, 0, 6, 3, 0;
    auto m = max_weight_assignment(wide);
    CHECK(m == std::vector<std::size_t>{1, 2});
}

TEST_CASE("misclustering rate") {
    auto truth = Partition::contiguous({20, 20, 20});
    CHECK(misclustering_rate(truth, truth) == 0.0);
    std::vector<std::size_t> swapped(60);
    for (node_t v = 0; v < 60; ++v)
        swapped[v] = (truth[v] + 1) % 3;
    CHECK(misclustering_rate(Partition(swapped, 3), truth) == 0.0);
    auto one = truth.assignments();
    one[5] = 2;
    CHECK(misclustering_rate(Partition(one, 3), truth) == doctest::Approx(1.0 / 60).epsilon(1e-15));
    CHECK_THROWS_AS(misclustering_rate(Partition::contiguous({3}), truth), validation_error);

    std::mt19937_64 rng(42);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t ka = 1 + rng() % 6, kb = 1 + rng() % 6;
        auto a = random_partition(25, ka, rng), b = random_partition(25, kb, rng);
        const double r = misclustering_rate(a, b);
        CHECK(r == doctest::Approx(brute_rate(a, b)).epsilon(1e-12));
        CHECK(r == doctest::Approx(misclustering_rate(b, a)).epsilon(1e-12));
        // Largest overlap bound.
        std::size_t largest = 0;
        for (std::size_t k = 0; k < kb; ++k)
            for (std::size_t l = 0; l < ka; ++l) {
                std::size_t c = 0;
                for (node_t v = 0; v < 25; ++v)
                    c += a[v] == l && b[v] == k;
                largest = std::max(largest, c);
            }
        CHECK(r <= double(25 - largest) / 25 + 1e-12);
        auto rel = relabel_to(a, b);
        CHECK(misclustering_rate(rel, b) == doctest::Approx(r).epsilon(1e-12));
        std::size_t agree = 0;
        for (node_t v = 0; v < 25; ++v)
            agree += rel[v] == b[v];
        CHECK(1.0 - double(agree) / 25 == doctest::Approx(r).epsilon(1e-12));
    }
}

TEST_CASE("k-means") {
    Eigen::MatrixXd pairs(4, 2);
    pairs << 0, 0, 0.1, 0, 10, 10, 10.1, 10;
    auto km = kmeans(pairs, 2, 5, 100, 1);
    CHECK(km.labels[0] == km.labels[1]);
    CHECK(km.labels[2] == km.labels[3]);
    CHECK(km.labels[0] != km.labels[2]);
    CHECK(km.wcss == doctest::Approx(0.01));

    Eigen::MatrixXd same = Eigen::MatrixXd::Ones(5, 2);
    auto flat = kmeans(same, 3, 3, 10, 2);
    CHECK(flat.wcss == 0.0);
    CHECK(flat.labels.size() == 5);
    CHECK_THROWS_AS(kmeans(same, 6, 1, 10, 1), validation_error);

    std::mt19937_64 rng(43);
    std::normal_distribution<double> z;
    Eigen::MatrixXd mix(90, 2);
    for (Eigen::Index i = 0; i < 90; ++i) {
        const double cx = double(i % 3) * 3;
        mix(i, 0) = cx + z(rng);
        mix(i, 1) = z(rng);
    }
    auto fit = kmeans(mix, 3, 10, 100, 3);
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(3, 2);
        std::vector<int> lab(90), count(3, 0);
        for (int i = 0; i < 90; ++i) {
            lab[i] = int(rng() % 3);
            centers.row(lab[i]) += mix.row(i);
            ++count[lab[i]];
        }
        double wcss = 0;
        for (int i = 0; i < 90; ++i)
            wcss += (mix.row(i) - centers.row(lab[i]) / std::max(count[lab[i]], 1)).squaredNorm();
        CHECK(fit.wcss <= wcss);
    }
    auto again = kmeans(mix, 3, 10, 100, 3);
    CHECK(again.labels == fit.labels);
}

TEST_CASE("leading eigenpairs") {
    std::mt19937_64 rng(44);
    auto small = planted(30, 0.3, 0.05, rng);
    auto big = planted(800, 0.02, 0.004, rng);
    for (const Graph* g : {&small, &big}) {
        auto pairs = leading_eigenpairs(*g, 3);
        double norm_a = 0;
        for (node_t v = 0; v < g->num_nodes(); ++v)
            norm_a = std::max(norm_a, double(g->degree(v)));
        for (Eigen::Index k = 0; k < 3; ++k) {
            const Eigen::VectorXd x = pairs.vectors.col(k);
            Eigen::VectorXd ax = Eigen::VectorXd::Zero(x.size());
            for (node_t v = 0; v < g->num_nodes(); ++v)
                for (node_t w : g->neighbors(v))
                    ax[Eigen::Index(v)] += x[Eigen::Index(w)];
            CHECK((ax - pairs.values[k] * x).norm() <= 1e-8 * norm_a);
            CHECK(x.norm() == doctest::Approx(1.0).epsilon(1e-10));
            if (k > 0)
                CHECK(std::abs(pairs.values[k]) <= std::abs(pairs.values[k - 1]) + 1e-12);
        }
        CHECK(pairs.values[0] > 0);
        CHECK(pairs.vectors.col(0).minCoeff() >= -1e-12);
    }
    // Subspace iteration agrees with the dense values on the big graph.
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(1600, 1600);
    for (const auto& d : big.edge_list())
        a(Eigen::Index(d.i), Eigen::Index(d.j)) = a(Eigen::Index(d.j), Eigen::Index(d.i)) = 1;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    Eigen::VectorXd ev = es.eigenvalues();
    std::sort(ev.data(), ev.data() + ev.size(), [](double x, double y) { return std::abs(x) > std::abs(y); });
    auto pairs = leading_eigenpairs(big, 3);
    for (Eigen::Index k = 0; k < 3; ++k)
        CHECK(pairs.values[k] == doctest::Approx(ev[k]).epsilon(1e-9));
}

TEST_CASE("SCORE ratio matrix") {
    Eigen::MatrixXd v(4, 3);
    v << 0.5, 0.1, -4, 0.25, 0.5, 0.0, 0.0, 0.3, -0.2, 0.0, 0.0, 0.0;
    auto r = score_ratios(v, 2.0);
    CHECK(r(0, 0) == doctest::Approx(0.2));
    CHECK(r(0, 1) == -2.0);
    CHECK(r(1, 0) == 2.0);
    CHECK(r(1, 1) == 0.0);
    CHECK(r(2, 0) == 2.0);
    CHECK(r(2, 1) == -2.0);
    CHECK(r(3, 0) == 0.0);
    std::mt19937_64 rng(45);
    auto pairs = leading_eigenpairs(planted(40, 0.2, 0.05, rng), 3);
    auto big = score_ratios(pairs.vectors, std::log(80.0));
    CHECK(big.cwiseAbs().maxCoeff() <= std::log(80.0));
}

TEST_CASE("SCORE clustering") {
    ScoreControls c;
    c.K = 2;
    auto two = cliques(2, 10);
    CHECK(misclustering_rate(score_cluster(two, c), Partition::contiguous({10, 10})) == 0.0);
    c.K = 3;
    CHECK(misclustering_rate(score_cluster(cliques(3, 8), c), Partition::contiguous({8, 8, 8})) == 0.0);

    c.K = 2;
    std::mt19937_64 rng(46);
    const auto truth = Partition::contiguous({50, 50});
    double total = 0;
    for (int rep = 0; rep < 20; ++rep)
        total += misclustering_rate(score_cluster(planted(50, 0.3, 0.05, rng), c), truth);
    CHECK(total / 20 < 0.05);

    // Output invariant, up to labels, under node relabeling.
    auto g = planted(50, 0.25, 0.06, rng);
    std::vector<node_t> perm(100);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Graph h(100);
    for (const auto& d : g.edge_list())
        h.add_edge(perm[d.i], perm[d.j]);
    auto pg = score_cluster(g, c), ph = score_cluster(h, c);
    std::vector<std::size_t> back(100);
    for (node_t v = 0; v < 100; ++v)
        back[v] = ph[perm[v]];
    CHECK(misclustering_rate(Partition(back, 2), pg) == 0.0);

    CHECK_THROWS_AS(score_cluster(Graph(1), c), validation_error);
    c.K = 1;
    CHECK_THROWS_AS(score_cluster(two, c), validation_error);
}

TEST_CASE("SCORE handles degree heterogeneity") {
    // Degree-corrected blocks: p_ij = w_i w_j B(block_i, block_j) with a few hubs.
    // The comparison with raw eigenvectors is reported only.
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> u(0, 1);
    const std::size_t half = 100;
    const auto truth = Partition::contiguous({half, half});
    double score_total = 0, naive_total = 0;
    ScoreControls c;
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<double> w(2 * half);
        for (auto& x : w)
            x = u(rng) < 0.1 ? 1.0 : 0.25;
        Graph g(2 * half);
        for (node_t i = 0; i < 2 * half; ++i)
            for (node_t j = i + 1; j < 2 * half; ++j)
                if (u(rng) < w[i] * w[j] * (truth[i] == truth[j] ? 0.9 : 0.2))
                    g.add_edge(i, j);
        score_total += misclustering_rate(score_cluster(g, c), truth);
        naive_total += misclustering_rate(eigenvector_cluster(g, c), truth);
    }
    MESSAGE("SCORE " << score_total / 10 << " vs raw eigenvectors " << naive_total / 10);
    CHECK(score_total / 10 < 0.15);
}
