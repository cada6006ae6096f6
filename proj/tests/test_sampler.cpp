#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "hergm/sampler.hpp"

using namespace hergm;

namespace {

ThetaVector theta_of(std::initializer_list<double> v) {
    ThetaVector t(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v)
        t[i++] = x;
    return t;
}

// Monte-Carlo standard error of a chain average from 50 batch means.
double batch_means_se(const Eigen::VectorXd& x) {
    const Eigen::Index batches = 50, len = x.size() / batches;
    Eigen::VectorXd means(batches);
    for (Eigen::Index b = 0; b < batches; ++b)
        means[b] = x.segment(b * len, len).mean();
    const double var = (means.array() - means.mean()).square().sum() / double(batches - 1);
    return std::sqrt(var / double(batches));
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size()); }

}  // namespace

TEST_CASE("edges-only chains are calibrated to expit(theta)") {
    auto spec = StatisticSpec::parse("edges");
    for (double p : {0.5, 0.05}) {
        SamplerControls sc;
        sc.burnin_sweeps = 10;
        sc.thin_sweeps = 1;
        sc.n_samples = 2000;
        sc.seed = 17;
        auto res = gibbs_sample(30, spec, theta_of({logit(p)}), sc);
        // Dyads are independent across sweeps in this model, so the density
        // trace is an i.i.d. sample of Binomial(435, p)/435.
        const double se = std::sqrt(p * (1 - p) / 435.0 / 2000.0);
        CHECK(std::abs(mean_of(res.density_trace) - p) < 3 * se);
        CHECK(res.graphs.size() == 2000);
    }
    CHECK(logit(0.05) == doctest::Approx(-2.944).epsilon(1e-3));
}

TEST_CASE("identical seeds give identical chains") {
    auto spec = StatisticSpec::parse("edges,gwesp(0.5),kstar(2)");
    SamplerControls sc;
    sc.burnin_sweeps = 20;
    sc.n_samples = 30;
    sc.thin_sweeps = 2;
    sc.seed = 5;
    auto a = gibbs_sample(12, spec, theta_of({-1.5, 0.3, -0.05}), sc);
    auto b = gibbs_sample(12, spec, theta_of({-1.5, 0.3, -0.05}), sc);
    CHECK(a.stats == b.stats);
    CHECK(a.graphs == b.graphs);
    sc.seed = 6;
    auto c = gibbs_sample(12, spec, theta_of({-1.5, 0.3, -0.05}), sc);
    CHECK_FALSE(a.stats == c.stats);
}

TEST_CASE("degenerate chains are flagged") {
    SamplerControls sc;
    sc.burnin_sweeps = 5;
    sc.n_samples = 3;
    auto empty = gibbs_sample(10, StatisticSpec::parse("edges"), theta_of({-12}), sc);
    CHECK(empty.degenerate);
    auto full = gibbs_sample(10, StatisticSpec::parse("edges"), theta_of({12}), sc);
    CHECK(full.degenerate);
    auto mid = gibbs_sample(10, StatisticSpec::parse("edges"), theta_of({0}), sc);
    CHECK_FALSE(mid.degenerate);
}

TEST_CASE("sampler input validation") {
    SamplerControls sc;
    CHECK_THROWS_AS(gibbs_sample(5, StatisticSpec::parse("edges,triangles"), theta_of({1}), sc), validation_error);
    CHECK_THROWS_AS(gibbs_sample(5, StatisticSpec::parse("edges"), theta_of({std::numeric_limits<double>::infinity()}), sc),
                    validation_error);
    sc.n_samples = 0;
    CHECK_THROWS_AS(gibbs_sample(5, StatisticSpec::parse("edges"), theta_of({0}), sc), validation_error);
}

TEST_CASE("exact distribution") {
    SUBCASE("uniform on three nodes") {
        auto d = exact_distribution(3, StatisticSpec::parse("edges"), theta_of({0}));
        REQUIRE(d.probabilities.size() == 8);
        for (double p : d.probabilities)
            CHECK(p == doctest::Approx(0.125).epsilon(1e-14));
        CHECK(d.log_partition == doctest::Approx(3 * std::log(2.0)));
        CHECK(d.mean[0] == doctest::Approx(1.5));
    }
    SUBCASE("rejections") {
        CHECK_THROWS_AS(exact_distribution(3, StatisticSpec::parse("edges"),
                                           theta_of({std::numeric_limits<double>::infinity()})),
                        validation_error);
        CHECK_THROWS_AS(exact_distribution(8, StatisticSpec::parse("edges"), theta_of({0})), validation_error);
    }
    SUBCASE("probabilities normalize and match brute force") {
        auto spec = StatisticSpec::parse("edges,triangles");
        auto theta = theta_of({-1.0, 0.3});
        auto d = exact_distribution(5, spec, theta);
        REQUIRE(d.probabilities.size() == 1024);
        CHECK(std::accumulate(d.probabilities.begin(), d.probabilities.end(), 0.0) ==
              doctest::Approx(1.0).epsilon(1e-10));
        double z = 0;
        std::vector<double> w(1024);
        for (std::uint64_t c = 0; c < 1024; ++c) {
            auto g = graph_from_code(5, c);
            CHECK(graph_code(g) == c);
            w[c] = std::exp(-1.0 * double(g.num_edges()) + 0.3 * double(triangles(g)));
            z += w[c];
        }
        for (std::uint64_t c = 0; c < 1024; ++c)
            CHECK(d.probabilities[c] == doctest::Approx(w[c] / z).epsilon(1e-12));
        CHECK(d.log_partition == doctest::Approx(std::log(z)).epsilon(1e-12));
    }
}

TEST_CASE("Gibbs law matches enumeration at n=5") {
    auto spec = StatisticSpec::parse("edges,triangles");
    auto theta = theta_of({-1.0, 0.3});
    auto exact = exact_distribution(5, spec, theta);
    SamplerControls sc;
    sc.burnin_sweeps = 100;
    sc.thin_sweeps = 1;
    sc.n_samples = 100000;
    sc.seed = 2024;
    auto res = gibbs_sample(5, spec, theta, sc);
    std::vector<double> freq(1024, 0.0);
    for (const auto& g : res.graphs)
        freq[graph_code(g)] += 1.0 / double(sc.n_samples);
    double tv = 0;
    for (std::size_t c = 0; c < 1024; ++c)
        tv += 0.5 * std::abs(freq[c] - exact.probabilities[c]);
    CHECK(tv < 0.05);
    for (Eigen::Index t = 0; t < 2; ++t) {
        const double m = res.stats.col(t).mean();
        CHECK(std::abs(m - exact.mean[t]) < 3 * batch_means_se(res.stats.col(t)));
    }
}

TEST_CASE("HERGM between ties") {
    auto make = [](double p) {
        HergmSpec hs;
        for (int k = 0; k < 3; ++k)
            hs.clusters.push_back(BlockModel{8, StatisticSpec::parse("edges,gwesp(0.5)"), theta_of({-1.0, 0.3}), std::nullopt});
        hs.between_p = p;
        return hs;
    };
    SamplerControls sc;
    sc.burnin_sweeps = 20;
    auto none = simulate_hergm(make(0.0), sc);
    CHECK(between_edge_counts(none.graph, none.truth).edges == 0);
    auto all = simulate_hergm(make(1.0), sc);
    auto c = between_edge_counts(all.graph, all.truth);
    CHECK(c.edges == c.dyads);
    CHECK(c.dyads == 3 * 64);

    HergmSpec bad = make(1.5);
    CHECK_THROWS_AS(simulate_hergm(bad, sc), validation_error);
}

TEST_CASE("HERGM blocks are independent across replications") {
    HergmSpec hs;
    hs.clusters.push_back(BlockModel{10, StatisticSpec::parse("edges,gwesp(0.5)"), theta_of({-1.5, 0.4}), std::nullopt});
    hs.clusters.push_back(BlockModel{10, StatisticSpec::parse("edges,gwesp(0.5)"), theta_of({-1.5, 0.8}), std::nullopt});
    hs.between_p = 0.05;
    const int reps = 2000;
    std::vector<double> a, b;
    for (int r = 0; r < reps; ++r) {
        SamplerControls sc;
        sc.burnin_sweeps = 30;
        sc.seed = derive_seed(77, {std::uint64_t(r)});
        auto draw = simulate_hergm(hs, sc);
        a.push_back(double(within_subgraph(draw.graph, draw.truth, 0).graph.num_edges()));
        b.push_back(double(within_subgraph(draw.graph, draw.truth, 1).graph.num_edges()));
    }
    const double ma = mean_of(a), mb = mean_of(b);
    double sab = 0, saa = 0, sbb = 0;
    for (int r = 0; r < reps; ++r) {
        sab += (a[r] - ma) * (b[r] - mb);
        saa += (a[r] - ma) * (a[r] - ma);
        sbb += (b[r] - mb) * (b[r] - mb);
    }
    const double corr = sab / std::sqrt(saa * sbb);
    CHECK(std::abs(corr) < 0.1);

    // Per-cluster streams: same master seed reproduces the network.
    SamplerControls sc;
    sc.burnin_sweeps = 30;
    sc.seed = 8;
    CHECK(simulate_hergm(hs, sc).graph == simulate_hergm(hs, sc).graph);
}
