#include "hergm/two_stage.hpp"

#include <cmath>

#include "hergm/errors.hpp"
#include "hergm/parallel.hpp"
#include "hergm/rng.hpp"
#include "hergm/sampler.hpp"

namespace hergm {

std::string to_string(Stage1Method m) {
    switch (m) {
    case Stage1Method::Lsm: return "lsm";
    case Stage1Method::Score: return "score";
    case Stage1Method::Given: return "given";
    }
    return "given";
}

Stage1Method parse_stage1_method(const std::string& s) {
    if (s == "lsm" || s == "LSM")
        return Stage1Method::Lsm;
    if (s == "score" || s == "SCORE")
        return Stage1Method::Score;
    if (s == "given")
        return Stage1Method::Given;
    throw validation_error("unknown stage-1 method '" + s + "' (expected lsm, score or given)");
}

std::uint64_t stage1_seed(std::uint64_t master) { return derive_seed(master, {1}); }
std::uint64_t cluster_seed(std::uint64_t master, std::size_t k) { return derive_seed(master, {2, k}); }

TwoStageFit stage_two(const Graph& g, const Partition& partition, const StatisticSpec& spec,
                      const TwoStageControls& controls) {
    check_compatible(g, partition);
    TwoStageFit out;
    out.spec = spec;
    out.method = controls.method;
    out.partition = partition;
    out.seed = controls.seed;
    const std::size_t K = partition.num_clusters();
    out.clusters.resize(K);

    parallel_for(K, [&](std::size_t k) {
        ClusterFit& cf = out.clusters[k];
        cf.size = partition.members(k).size();
        if (cf.size < spec.min_nodes()) {
            cf.unavailable_reason = "cluster has " + std::to_string(cf.size) + " nodes; spec '" + spec.to_string() +
                                    "' needs at least " + std::to_string(spec.min_nodes());
            return;
        }
        const auto sub = within_subgraph(g, partition, k);
        try {
            spec.check_nodes(cf.size);
            if (controls.method == FitMethod::Mple) {
                cf.fit = mple(sub.graph, spec);
            } else {
                McmleControls mc = controls.mcmle;
                mc.seed = cluster_seed(controls.seed, k);
                cf.fit = mcmle(sub.graph, spec, std::nullopt, mc);
            }
        } catch (const std::exception& e) {
            cf.fit.reset();
            cf.unavailable_reason = e.what();
        }
    });
    if (K >= 2 && between_edge_counts(g, partition).dyads > 0)
        out.between = between_density_mle(g, partition);
    return out;
}

TwoStageFit two_stage_fit(const Graph& g, std::size_t K, const StatisticSpec& spec, const TwoStageControls& controls) {
    if (K == 0)
        throw validation_error("two-stage fit needs K >= 1");
    std::optional<LsmSummary> lsm;
    Partition partition = Partition({0}, 1);
    switch (controls.stage1) {
    case Stage1Method::Given:
        if (!controls.given)
            throw validation_error("stage 1 'given' needs a partition");
        if (controls.given->num_clusters() != K)
            throw validation_error("given partition has " + std::to_string(controls.given->num_clusters()) +
                                   " clusters, expected K=" + std::to_string(K));
        partition = *controls.given;
        break;
    case Stage1Method::Score: {
        if (K == 1) {
            partition = Partition(std::vector<std::size_t>(g.num_nodes(), 0), 1);
            break;
        }
        ScoreControls sc = controls.score;
        sc.K = K;
        sc.seed = stage1_seed(controls.seed);
        partition = score_cluster(g, sc);
        break;
    }
    case Stage1Method::Lsm: {
        auto post = lsm_mcmc(g, K, controls.dim, controls.priors, controls.lsm, stage1_seed(controls.seed));
        partition = map_membership(post);
        lsm = post.summary;
        break;
    }
    }
    TwoStageFit out = stage_two(g, partition, spec, controls);
    out.stage1 = controls.stage1;
    out.lsm = std::move(lsm);
    return out;
}

double hergm_exact_log_likelihood(const Graph& g, const TwoStageFit& fit) {
    check_compatible(g, fit.partition);
    double ll = 0;
    for (std::size_t k = 0; k < fit.partition.num_clusters(); ++k) {
        const auto& cf = fit.clusters.at(k);
        if (cf.size < 2)
            continue;
        if (!cf.fit)
            throw validation_error("cluster " + std::to_string(k) + " has no fit");
        if (cf.size > 6)
            throw validation_error("exact block likelihood needs clusters of at most 6 nodes");
        const auto sub = within_subgraph(g, fit.partition, k);
        ExactModel model(cf.size, fit.spec);
        const auto d = model.evaluate(cf.fit->theta, false);
        ll += cf.fit->theta.dot(stat_vector(sub.graph, fit.spec)) - d.log_partition;
    }
    if (fit.between) {
        const auto c = between_edge_counts(g, fit.partition);
        const double p = fit.between->p_hat;
        const double e = double(c.edges), m = double(c.dyads);
        if (e > 0)
            ll += e * std::log(p);
        if (m - e > 0)
            ll += (m - e) * std::log1p(-p);
    }
    return ll;
}

nlohmann::json to_json(const TwoStageFit& fit) {
    nlohmann::json j;
    j["spec"] = fit.spec.to_string();
    j["stage1"] = to_string(fit.stage1);
    j["method"] = to_string(fit.method);
    j["seed"] = fit.seed;
    j["K"] = fit.partition.num_clusters();
    j["partition"] = fit.partition.assignments();
    auto clusters = nlohmann::json::array();
    for (const auto& cf : fit.clusters) {
        nlohmann::json c;
        c["size"] = cf.size;
        if (cf.fit)
            c["fit"] = to_json(*cf.fit);
        else
            c["unavailable"] = cf.unavailable_reason;
        clusters.push_back(c);
    }
    j["clusters"] = clusters;
    if (fit.between)
        j["between"] = {{"p_hat", fit.between->p_hat},
                        {"std_error", fit.between->std_error},
                        {"edges", fit.between->edges},
                        {"dyads", fit.between->dyads}};
    else
        j["between"] = nullptr;
    if (fit.lsm)
        j["lsm"] = to_json(*fit.lsm);
    return j;
}

TwoStageFit two_stage_from_json(const nlohmann::json& j) {
    try {
        TwoStageFit fit;
        fit.spec = StatisticSpec::parse(j.at("spec").get<std::string>());
        fit.stage1 = parse_stage1_method(j.at("stage1").get<std::string>());
        fit.method = parse_fit_method(j.at("method").get<std::string>());
        fit.seed = j.at("seed").get<std::uint64_t>();
        fit.partition = Partition(j.at("partition").get<std::vector<std::size_t>>(), j.at("K").get<std::size_t>());
        for (const auto& c : j.at("clusters")) {
            ClusterFit cf;
            cf.size = c.at("size").get<std::size_t>();
            if (c.contains("fit"))
                cf.fit = ergm_fit_from_json(c.at("fit"));
            else
                cf.unavailable_reason = c.at("unavailable").get<std::string>();
            fit.clusters.push_back(std::move(cf));
        }
        if (fit.clusters.size() != fit.partition.num_clusters())
            throw validation_error("fit lists " + std::to_string(fit.clusters.size()) + " clusters for K=" +
                                   std::to_string(fit.partition.num_clusters()));
        const auto& b = j.at("between");
        if (!b.is_null())
            fit.between = DensityEstimate{b.at("p_hat").get<double>(), b.at("std_error").get<double>(),
                                          b.at("edges").get<std::size_t>(), b.at("dyads").get<std::size_t>()};
        if (j.contains("lsm"))
            fit.lsm = lsm_summary_from_json(j.at("lsm"));
        return fit;
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(std::string("malformed two-stage fit: ") + e.what());
    }
}

}  // namespace hergm
