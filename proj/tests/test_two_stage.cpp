#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hergm/gof.hpp"
#include "hergm/rng.hpp"
#include "hergm/two_stage.hpp"
#include "oracles.hpp"

using namespace hergm;

namespace {

ThetaVector theta_of(std::initializer_list<double> v) {
    ThetaVector t(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v)
        t[i++] = x;
    return t;
}

Graph bernoulli_graph(std::size_t n, double p, std::uint64_t seed) {
    Rng rng(seed);
    Graph g(n);
    for (node_t i = 0; i < n; ++i)
        for (node_t j = i + 1; j < n; ++j)
            if (rng.bernoulli(p))
                g.add_edge(i, j);
    return g;
}

HergmDraw three_block_draw(std::uint64_t seed) {
    const auto spec = StatisticSpec::parse("edges,gwesp(0.5)");
    HergmSpec h;
    for (int k = 0; k < 3; ++k)
        h.clusters.push_back(BlockModel{12, spec, theta_of({-1.5, 0.4}), std::nullopt});
    h.between_p = 0.03;
    SamplerControls sc;
    sc.burnin_sweeps = 500;
    sc.seed = seed;
    return simulate_hergm(h, sc);
}

ErgmFit fixed_fit(const StatisticSpec& spec, ThetaVector theta) {
    return ErgmFit{spec, std::move(theta), Eigen::VectorXd(), FitMethod::Mple, FitDiagnostics{}, 0};
}

}  // namespace

TEST_CASE("stage two on a given partition equals per-cluster fits") {
    const auto draw = three_block_draw(11);
    const auto spec = StatisticSpec::parse("edges,gwesp(0.5)");
    TwoStageControls c;
    c.stage1 = Stage1Method::Given;
    c.given = draw.truth;
    c.seed = 5;
    c.mcmle.sample_size = 400;
    c.mcmle.max_sample_size = 1600;

    for (FitMethod method : {FitMethod::Mple, FitMethod::Mcmle}) {
        c.method = method;
        const auto fit = two_stage_fit(draw.graph, 3, spec, c);
        REQUIRE(fit.clusters.size() == 3);
        for (std::size_t k = 0; k < 3; ++k) {
            const auto sub = within_subgraph(draw.graph, draw.truth, k).graph;
            McmleControls mc = c.mcmle;
            mc.seed = cluster_seed(5, k);
            const auto direct = method == FitMethod::Mple ? mple(sub, spec) : mcmle(sub, spec, std::nullopt, mc);
            REQUIRE(fit.clusters[k].fit);
            CHECK(fit.clusters[k].size == 12);
            CHECK((fit.clusters[k].fit->theta - direct.theta).norm() == 0.0);
        }
        const auto counts = between_edge_counts(draw.graph, draw.truth);
        REQUIRE(fit.between);
        CHECK(fit.between->p_hat == doctest::Approx(double(counts.edges) / double(counts.dyads)).epsilon(1e-14));
        CHECK(fit.between->dyads == 3 * 144);
    }
}

TEST_CASE("K = 1 has no between component") {
    const auto g = bernoulli_graph(15, 0.3, 3);
    TwoStageControls c;
    c.stage1 = Stage1Method::Score;
    c.method = FitMethod::Mple;
    const auto fit = two_stage_fit(g, 1, StatisticSpec::parse("edges"), c);
    CHECK(fit.partition.num_clusters() == 1);
    CHECK_FALSE(fit.between);
    REQUIRE(fit.clusters[0].fit);
    CHECK(fit.clusters[0].fit->theta[0] == doctest::Approx(logit(g.density())).epsilon(1e-8));
}

TEST_CASE("clusters that cannot be fitted are reported unavailable") {
    Graph g(8);
    for (node_t i = 0; i < 5; ++i)
        for (node_t j = i + 1; j < 5; ++j)
            if ((i + j) % 2 == 1)
                g.add_edge(i, j);
    g.add_edge(5, 6);
    g.add_edge(4, 7);
    const Partition p({0, 0, 0, 0, 0, 1, 1, 2}, 3);
    TwoStageControls c;
    c.method = FitMethod::Mple;
    const auto fit = stage_two(g, p, StatisticSpec::parse("edges"), c);
    CHECK(fit.clusters[0].fit);
    // two nodes with their only dyad present: complete block
    CHECK_FALSE(fit.clusters[1].fit);
    CHECK_FALSE(fit.clusters[1].unavailable_reason.empty());
    CHECK_FALSE(fit.clusters[2].fit);
    CHECK(fit.clusters[2].unavailable_reason.find("nodes") != std::string::npos);
    CHECK(fit.between);
}

TEST_CASE("given partition must match K") {
    TwoStageControls c;
    c.stage1 = Stage1Method::Given;
    c.given = Partition({0, 1, 0, 1}, 2);
    CHECK_THROWS_AS(two_stage_fit(Graph(4), 3, StatisticSpec::parse("edges"), c), validation_error);
    c.given.reset();
    CHECK_THROWS_AS(two_stage_fit(Graph(4), 2, StatisticSpec::parse("edges"), c), validation_error);
    CHECK_THROWS_AS(parse_stage1_method("kmeans"), validation_error);
}

TEST_CASE("HERGM likelihood factorizes over blocks and between dyads") {
    // Two blocks of three nodes; 15 dyads, all 2^15 graphs enumerated with
    // the joint sufficient statistics and normalized by brute force.
    const auto spec = StatisticSpec::parse("edges,triangles");
    const Partition p({0, 1, 0, 1, 1, 0}, 2);
    TwoStageFit fit;
    fit.spec = spec;
    fit.partition = p;
    fit.clusters = {ClusterFit{3, fixed_fit(spec, theta_of({-0.4, 0.9})), ""},
                    ClusterFit{3, fixed_fit(spec, theta_of({0.3, -1.2})), ""}};
    fit.between = DensityEstimate{0.2, 0, 0, 9};

    const std::size_t n = 6, m = 15;
    std::vector<std::pair<node_t, node_t>> dyads;
    for (node_t i = 0; i < n; ++i)
        for (node_t j = i + 1; j < n; ++j)
            dyads.emplace_back(i, j);
    const auto A = p.members(0), B = p.members(1);
    auto block_stats = [&](const Graph& g, const std::vector<node_t>& nodes) {
        double e = 0, t = 0;
        for (std::size_t a = 0; a < 3; ++a)
            for (std::size_t b = a + 1; b < 3; ++b)
                e += g.has_edge(nodes[a], nodes[b]);
        t = g.has_edge(nodes[0], nodes[1]) && g.has_edge(nodes[1], nodes[2]) && g.has_edge(nodes[0], nodes[2]);
        return std::pair{e, t};
    };
    std::vector<double> logw(std::size_t(1) << m);
    std::vector<Graph> graphs;
    for (std::size_t code = 0; code < logw.size(); ++code) {
        Graph g(n);
        double between = 0;
        for (std::size_t b = 0; b < m; ++b)
            if (code >> b & 1) {
                g.add_edge(dyads[b].first, dyads[b].second);
                between += p[dyads[b].first] != p[dyads[b].second];
            }
        const auto [ea, ta] = block_stats(g, A);
        const auto [eb, tb] = block_stats(g, B);
        logw[code] = -0.4 * ea + 0.9 * ta + 0.3 * eb - 1.2 * tb + between * std::log(0.2 / 0.8);
        if (code % 997 == 0)
            graphs.push_back(std::move(g));
    }
    double mx = *std::max_element(logw.begin(), logw.end()), s = 0;
    for (double w : logw)
        s += std::exp(w - mx);
    const double log_z = mx + std::log(s);

    std::size_t idx = 0;
    for (std::size_t code = 0; code < logw.size(); code += 997, ++idx) {
        CAPTURE(code);
        CHECK(hergm_exact_log_likelihood(graphs[idx], fit) == doctest::Approx(logw[code] - log_z).epsilon(1e-10));
    }
}

TEST_CASE("two-stage fit JSON round trip") {
    const auto draw = three_block_draw(4);
    TwoStageControls c;
    c.stage1 = Stage1Method::Given;
    c.given = draw.truth;
    c.method = FitMethod::Mple;
    auto fit = two_stage_fit(draw.graph, 3, StatisticSpec::parse("edges,gwesp(0.5)"), c);
    fit.clusters[1].fit.reset();
    fit.clusters[1].unavailable_reason = "test";
    const auto back = two_stage_from_json(nlohmann::json::parse(to_json(fit).dump()));
    CHECK(to_json(back) == to_json(fit));
    CHECK(back.partition.assignments() == fit.partition.assignments());
    CHECK_FALSE(back.clusters[1].fit);
    CHECK(back.clusters[2].fit->theta.isApprox(fit.clusters[2].fit->theta, 0));
    CHECK_THROWS_AS(two_stage_from_json(nlohmann::json::parse("{\"spec\":\"edges\"}")), validation_error);
}

TEST_CASE("type 7 quantiles") {
    CHECK(quantile({1, 2, 3, 4}, 0.25) == doctest::Approx(1.75));
    CHECK(quantile({4, 1, 3, 2}, 0.5) == doctest::Approx(2.5));
    CHECK(quantile({7}, 0.975) == 7);
    CHECK(quantile({0, 10}, 0.025) == doctest::Approx(0.25));
    CHECK(quantile({0, 10}, 1.0) == 10);
    CHECK_THROWS_AS(quantile({}, 0.5), validation_error);
}

TEST_CASE("network distributions") {
    Graph path(5);
    for (node_t i = 0; i + 1 < 4; ++i)
        path.add_edge(i, i + 1);  // 0-1-2-3, node 4 isolated
    CHECK(degree_distribution(path) == std::vector<double>{1, 2, 2, 0, 0});
    CHECK(esp_distribution(path) == std::vector<double>{3, 0, 0, 0});
    CHECK(geodesic_distribution(path) == std::vector<double>{3, 2, 1, 0, 4});

    Graph k4(4);
    for (node_t i = 0; i < 4; ++i)
        for (node_t j = i + 1; j < 4; ++j)
            k4.add_edge(i, j);
    CHECK(esp_distribution(k4) == std::vector<double>{0, 0, 6});
    CHECK(geodesic_distribution(k4) == std::vector<double>{6, 0, 0, 0});

    // Geodesics against all-pairs Floyd-Warshall on random graphs.
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto g = bernoulli_graph(14, 0.12, s);
        const std::size_t n = g.num_nodes();
        const double inf = 1e9;
        std::vector<std::vector<double>> d(n, std::vector<double>(n, inf));
        for (node_t i = 0; i < n; ++i) {
            d[i][i] = 0;
            for (node_t j : g.neighbors(i))
                d[i][j] = 1;
        }
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
        std::vector<double> h(n, 0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                h[d[i][j] >= inf ? n - 1 : std::size_t(d[i][j]) - 1] += 1;
        CHECK(geodesic_distribution(g) == h);
    }
}

TEST_CASE("model terms panel") {
    const auto draw = three_block_draw(2);
    const auto spec = StatisticSpec::parse("edges,gwesp(0.5)");
    const ModelTerms terms{spec, draw.truth};
    const auto labels = terms.labels();
    const auto values = terms.evaluate(draw.graph);
    REQUIRE(labels.size() == 7);
    REQUIRE(values.size() == 7);
    CHECK(labels.back() == "between:edges");
    const auto s1 = stat_vector(within_subgraph(draw.graph, draw.truth, 1).graph, spec);
    CHECK(values[2] == s1[0]);
    CHECK(values[3] == s1[1]);
    CHECK(values[6] == double(between_edge_counts(draw.graph, draw.truth).edges));

    const ModelTerms whole{spec, Partition(std::vector<std::size_t>(36, 0), 1)};
    CHECK(whole.labels().size() == 2);
}

TEST_CASE("GOF of the generating model covers the observed network") {
    // Bernoulli(0.2) graphs checked against the true edges-only model.
    const auto spec = StatisticSpec::parse("edges");
    const auto fit = fixed_fit(spec, theta_of({logit(0.2)}));
    GofControls c = default_gof_controls();
    c.n_sim = 200;
    c.sampler.burnin_sweeps = 50;
    c.sampler.thin_sweeps = 2;
    double degree = 0, geodesic = 0, model = 0;
    const int reps = 20;
    for (int r = 0; r < reps; ++r) {
        const auto g = bernoulli_graph(30, 0.2, 100 + std::uint64_t(r));
        c.seed = std::uint64_t(r) + 1;
        const auto rep = gof_ergm(g, fit, c);
        CHECK(rep.n_sim == 200);
        CHECK(rep.panel("degree").observed.size() == 30);
        degree += rep.panel("degree").coverage;
        geodesic += rep.panel("geodesic").coverage;
        model += rep.panel("model").coverage;
    }
    CHECK(degree / reps > 0.85);
    CHECK(geodesic / reps > 0.85);
    CHECK(model / reps > 0.85);
    CHECK_THROWS_AS(gof_ergm(Graph(30), fit, GofControls{0, 1, {}}), validation_error);
    CHECK_THROWS_AS(GofReport{}.panel("none"), validation_error);
}

TEST_CASE("HERGM GOF flags clusters simulated as Bernoulli") {
    const auto draw = three_block_draw(8);
    TwoStageControls c;
    c.stage1 = Stage1Method::Given;
    c.given = draw.truth;
    c.method = FitMethod::Mple;
    auto fit = two_stage_fit(draw.graph, 3, StatisticSpec::parse("edges,gwesp(0.5)"), c);
    fit.clusters[0].fit.reset();
    fit.clusters[0].unavailable_reason = "test";
    GofControls gc = default_gof_controls();
    gc.n_sim = 30;
    gc.sampler.burnin_sweeps = 100;
    gc.sampler.thin_sweeps = 2;
    const auto rep = gof_two_stage(draw.graph, fit, gc);
    REQUIRE(rep.flags.size() == 1);
    CHECK(rep.flags[0].find("cluster 0") != std::string::npos);
    CHECK(rep.panels.size() == 4);
    const auto again = gof_two_stage(draw.graph, fit, gc);
    std::ostringstream a, b;
    write_gof_csv(rep, a);
    write_gof_csv(again, b);
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("panel,bin,observed,lower,median,upper,in_support\n", 0) == 0);
}

TEST_CASE("LSM simulation matches the link probabilities") {
    LsmSummary s;
    s.positions = Eigen::MatrixXd(4, 2);
    s.positions << 0, 0, 1, 0, 0, 2, 3, 3;
    s.beta0 = 1.0;
    s.beta1 = 0.8;
    const auto nets = simulate_lsm(s, 20000, 9);
    Eigen::MatrixXd freq = Eigen::MatrixXd::Zero(4, 4);
    for (const auto& g : nets)
        for (const auto& d : g.edge_list())
            freq(Eigen::Index(d.i), Eigen::Index(d.j)) += 1.0 / 20000;
    for (Eigen::Index i = 0; i < 4; ++i)
        for (Eigen::Index j = i + 1; j < 4; ++j) {
            const double p = expit(1.0 - 0.8 * (s.positions.row(i) - s.positions.row(j)).norm());
            CHECK(std::abs(freq(i, j) - p) < 4 * std::sqrt(p * (1 - p) / 20000));
        }
    const auto rep = gof_lsm(nets[0], s, ModelTerms{StatisticSpec::parse("edges"), Partition({0, 0, 1, 1}, 2)},
                             GofControls{50, 3, {}});
    CHECK(rep.model == "lsm");
    CHECK(rep.panel("model").labels.size() == 3);
}
