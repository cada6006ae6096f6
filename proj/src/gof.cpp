#include "hergm/gof.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "hergm/errors.hpp"
#include "hergm/format.hpp"
#include "hergm/parallel.hpp"
#include "hergm/rng.hpp"

namespace hergm {

const GofPanel& GofReport::panel(const std::string& name) const {
    for (const auto& p : panels)
        if (p.name == name)
            return p;
    throw validation_error("GOF report has no panel '" + name + "'");
}

std::vector<double> degree_distribution(const Graph& g) {
    std::vector<double> h(g.num_nodes(), 0);
    for (node_t v = 0; v < g.num_nodes(); ++v)
        h[g.degree(v)] += 1;
    return h;
}

std::vector<double> esp_distribution(const Graph& g) {
    if (g.num_nodes() < 2)
        return {};
    std::vector<double> h(g.num_nodes() - 1, 0);
    for (const auto& d : g.edge_list())
        h[shared_partners(g, d)] += 1;
    return h;
}

std::vector<double> geodesic_distribution(const Graph& g) {
    const std::size_t n = g.num_nodes();
    if (n < 2)
        return {};
    std::vector<double> h(n, 0);  // distances 1..n-1, then unreachable
    std::vector<std::size_t> dist(n);
    std::deque<node_t> queue;
    const std::size_t unseen = std::numeric_limits<std::size_t>::max();
    for (node_t s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), unseen);
        dist[s] = 0;
        queue.assign(1, s);
        while (!queue.empty()) {
            const node_t v = queue.front();
            queue.pop_front();
            for (node_t w : g.neighbors(v))
                if (dist[w] == unseen) {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
        }
        for (node_t t = s + 1; t < n; ++t)
            h[dist[t] == unseen ? n - 1 : dist[t] - 1] += 1;
    }
    return h;
}

std::vector<std::string> ModelTerms::labels() const {
    std::vector<std::string> out;
    const auto sizes = partition.cluster_sizes();
    for (std::size_t k = 0; k < partition.num_clusters(); ++k) {
        if (sizes[k] < spec.min_nodes())
            continue;
        for (std::size_t t = 0; t < spec.size(); ++t)
            out.push_back(partition.num_clusters() == 1 ? spec[t].name()
                                                        : "c" + std::to_string(k) + ":" + spec[t].name());
    }
    if (partition.num_clusters() > 1)
        out.push_back("between:edges");
    return out;
}

std::vector<double> ModelTerms::evaluate(const Graph& g) const {
    std::vector<double> out;
    const auto sizes = partition.cluster_sizes();
    for (std::size_t k = 0; k < partition.num_clusters(); ++k) {
        if (sizes[k] < spec.min_nodes())
            continue;
        const auto s = stat_vector(within_subgraph(g, partition, k).graph, spec);
        out.insert(out.end(), s.data(), s.data() + s.size());
    }
    if (partition.num_clusters() > 1)
        out.push_back(double(between_edge_counts(g, partition).edges));
    return out;
}

double quantile(std::vector<double> values, double prob) {
    if (values.empty())
        throw validation_error("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double h = (double(values.size()) - 1) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= values.size())
        return values.back();
    return values[lo] + (h - double(lo)) * (values[lo + 1] - values[lo]);
}

namespace {

GofPanel make_panel(std::string name, std::vector<std::string> labels, const std::vector<double>& observed,
                    const std::vector<std::vector<double>>& sims, bool all_bins) {
    GofPanel p;
    p.name = std::move(name);
    p.labels = std::move(labels);
    p.observed = observed;
    const std::size_t bins = observed.size();
    std::size_t support = 0, inside = 0;
    std::vector<double> column(sims.size());
    for (std::size_t b = 0; b < bins; ++b) {
        for (std::size_t s = 0; s < sims.size(); ++s)
            column[s] = b < sims[s].size() ? sims[s][b] : 0.0;
        const double lo = quantile(column, 0.025), mid = quantile(column, 0.5), hi = quantile(column, 0.975);
        p.lower.push_back(lo);
        p.median.push_back(mid);
        p.upper.push_back(hi);
        const bool used = all_bins || observed[b] > 0 || hi > 0;
        p.in_support.push_back(used);
        if (used) {
            ++support;
            inside += lo <= observed[b] && observed[b] <= hi;
        }
    }
    p.coverage = support ? double(inside) / double(support) : 1.0;
    return p;
}

std::vector<std::string> numbered(std::size_t count, std::size_t first) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(std::to_string(first + i));
    return out;
}

}  // namespace

GofReport gof(const Graph& g, const NetworkSimulator& simulate, const ModelTerms& terms, std::size_t n_sim,
              std::uint64_t seed, std::string model) {
    if (n_sim == 0)
        throw validation_error("GOF needs n_sim >= 1");
    check_compatible(g, terms.partition);
    const auto sims = simulate(n_sim, seed);
    if (sims.size() != n_sim)
        throw numerical_error("GOF simulator returned " + std::to_string(sims.size()) + " networks, expected " +
                              std::to_string(n_sim));
    std::vector<std::vector<double>> deg(n_sim), esp(n_sim), geo(n_sim), mod(n_sim);
    parallel_for(n_sim, [&](std::size_t s) {
        deg[s] = degree_distribution(sims[s]);
        esp[s] = esp_distribution(sims[s]);
        geo[s] = geodesic_distribution(sims[s]);
        mod[s] = terms.evaluate(sims[s]);
    });

    GofReport r;
    r.model = std::move(model);
    r.n_sim = n_sim;
    r.seed = seed;
    const std::size_t n = g.num_nodes();
    r.panels.push_back(make_panel("degree", numbered(n, 0), degree_distribution(g), deg, false));
    r.panels.push_back(make_panel("esp", numbered(n > 1 ? n - 1 : 0, 0), esp_distribution(g), esp, false));
    auto geo_labels = numbered(n > 1 ? n - 1 : 0, 1);
    if (n > 1)
        geo_labels.push_back("inf");
    r.panels.push_back(make_panel("geodesic", std::move(geo_labels), geodesic_distribution(g), geo, false));
    r.panels.push_back(make_panel("model", terms.labels(), terms.evaluate(g), mod, true));
    return r;
}

GofControls default_gof_controls() {
    GofControls c;
    c.sampler.burnin_sweeps = 1000;
    c.sampler.thin_sweeps = 10;
    return c;
}

GofReport gof_two_stage(const Graph& g, const TwoStageFit& fit, const GofControls& controls) {
    check_compatible(g, fit.partition);
    std::vector<BlockModel> blocks;
    std::vector<std::string> flags;
    for (std::size_t k = 0; k < fit.partition.num_clusters(); ++k) {
        const auto& cf = fit.clusters.at(k);
        BlockModel b;
        b.n = cf.size;
        if (cf.fit) {
            b.spec = cf.fit->spec;
            b.theta = cf.fit->theta;
        } else {
            const auto sub = within_subgraph(g, fit.partition, k).graph;
            b.bernoulli = sub.num_nodes() > 1 ? sub.density() : 0.0;
            if (cf.size > 1)
                flags.push_back("cluster " + std::to_string(k) + " simulated as Bernoulli(" +
                                format_double(*b.bernoulli) + "): " + cf.unavailable_reason);
        }
        blocks.push_back(std::move(b));
    }
    const double p = fit.between ? fit.between->p_hat : 0.0;
    SamplerControls sc = controls.sampler;
    NetworkSimulator sim = [&](std::size_t count, std::uint64_t seed) {
        sc.seed = seed;
        return simulate_hergm_on(fit.partition, blocks, p, sc, count);
    };
    auto r = gof(g, sim, ModelTerms{fit.spec, fit.partition}, controls.n_sim, controls.seed, "hergm");
    r.flags = std::move(flags);
    return r;
}

GofReport gof_ergm(const Graph& g, const ErgmFit& fit, const GofControls& controls) {
    SamplerControls sc = controls.sampler;
    NetworkSimulator sim = [&](std::size_t count, std::uint64_t seed) {
        sc.seed = seed;
        sc.n_samples = count;
        sc.keep_graphs = true;
        return gibbs_sample(g.num_nodes(), fit.spec, fit.theta, sc).graphs;
    };
    const Partition whole(std::vector<std::size_t>(g.num_nodes(), 0), 1);
    return gof(g, sim, ModelTerms{fit.spec, whole}, controls.n_sim, controls.seed, "ergm");
}

std::vector<Graph> simulate_lsm(const LsmSummary& lsm, std::size_t count, std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(lsm.positions.rows());
    if (n == 0)
        throw validation_error("LSM summary has no positions");
    std::vector<double> prob;
    prob.reserve(n * (n - 1) / 2);
    for (node_t i = 0; i < n; ++i)
        for (node_t j = i + 1; j < n; ++j) {
            const double d = (lsm.positions.row(Eigen::Index(i)) - lsm.positions.row(Eigen::Index(j))).norm();
            prob.push_back(expit(lsm.beta0 - lsm.beta1 * d));
        }
    std::vector<Graph> out(count, Graph(n));
    parallel_for(count, [&](std::size_t s) {
        Rng rng(derive_seed(seed, {s}));
        std::size_t idx = 0;
        for (node_t i = 0; i < n; ++i)
            for (node_t j = i + 1; j < n; ++j)
                if (rng.bernoulli(prob[idx++]))
                    out[s].add_edge(i, j);
    });
    return out;
}

GofReport gof_lsm(const Graph& g, const LsmSummary& lsm, const ModelTerms& terms, const GofControls& controls) {
    if (std::size_t(lsm.positions.rows()) != g.num_nodes())
        throw validation_error("LSM summary covers " + std::to_string(lsm.positions.rows()) + " nodes, graph has " +
                               std::to_string(g.num_nodes()));
    NetworkSimulator sim = [&](std::size_t count, std::uint64_t seed) { return simulate_lsm(lsm, count, seed); };
    return gof(g, sim, terms, controls.n_sim, controls.seed, "lsm");
}

void write_gof_csv(const GofReport& r, std::ostream& out) {
    out << "panel,bin,observed,lower,median,upper,in_support\n";
    for (const auto& p : r.panels)
        for (std::size_t b = 0; b < p.observed.size(); ++b)
            out << p.name << ',' << p.labels[b] << ',' << format_double(p.observed[b]) << ','
                << format_double(p.lower[b]) << ',' << format_double(p.median[b]) << ',' << format_double(p.upper[b])
                << ',' << (p.in_support[b] ? 1 : 0) << '\n';
}

void write_gof_summary(const GofReport& r, std::ostream& out) {
    out << "panel,coverage,support_bins\n";
    for (const auto& p : r.panels)
        out << p.name << ',' << format_double(p.coverage) << ','
            << std::count(p.in_support.begin(), p.in_support.end(), true) << '\n';
}

}  // namespace hergm
