#include "hergm/sampler.hpp"

#include <cmath>
#include <map>

#include "hergm/parallel.hpp"

namespace hergm {

double expit(double x) {
    if (x >= 0)
        return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double logit(double p) { return std::log(p / (1.0 - p)); }

void SamplerControls::validate() const {
    if (n_samples == 0)
        throw validation_error("sampler: n_samples must be positive");
    if (thin_sweeps == 0)
        throw validation_error("sampler: thin_sweeps must be positive");
}

void check_theta(const StatisticSpec& spec, const ThetaVector& theta) {
    if (static_cast<std::size_t>(theta.size()) != spec.size())
        throw validation_error("theta has " + std::to_string(theta.size()) + " entries but spec '" +
                               spec.to_string() + "' has " + std::to_string(spec.size()) + " terms");
    for (Eigen::Index i = 0; i < theta.size(); ++i)
        if (!std::isfinite(theta[i]))
            throw validation_error("theta entries must be finite");
}

namespace {

std::vector<DyadIndex> canonical_dyads(std::size_t n) {
    std::vector<DyadIndex> d;
    d.reserve(num_dyads(n));
    for (node_t i = 0; i < n; ++i)
        for (node_t j = i + 1; j < n; ++j)
            d.emplace_back(i, j);
    return d;
}

class GibbsChain {
public:
    GibbsChain(Graph start, const StatisticSpec& spec, const ThetaVector& theta, std::uint64_t seed)
        : g_(std::move(start)), spec_(spec), theta_(theta), rng_(seed), dyads_(canonical_dyads(g_.num_nodes())),
          change_(spec.size()) {}

    Rng& rng() { return rng_; }
    const Graph& graph() const { return g_; }

    void sweep() {
        for (const auto& d : dyads_) {
            change_statistics(g_, d, spec_, change_);
            double eta = 0;
            for (std::size_t t = 0; t < change_.size(); ++t)
                eta += theta_[static_cast<Eigen::Index>(t)] * change_[t];
            g_.set_edge(d, rng_.bernoulli(expit(eta)));
        }
    }

private:
    Graph g_;
    const StatisticSpec& spec_;
    const ThetaVector& theta_;
    Rng rng_;
    std::vector<DyadIndex> dyads_;
    std::vector<double> change_;
};

Graph erdos_renyi(std::size_t n, double p, Rng& rng) {
    Graph g(n);
    for (node_t i = 0; i < n; ++i)
        for (node_t j = i + 1; j < n; ++j)
            if (rng.bernoulli(p))
                g.add_edge(i, j);
    return g;
}

}  // namespace

GibbsResult gibbs_sample_from(Graph start, const StatisticSpec& spec, const ThetaVector& theta,
                              const SamplerControls& controls) {
    check_theta(spec, theta);
    controls.validate();
    spec.check_nodes(start.num_nodes());
    GibbsChain chain(std::move(start), spec, theta, controls.seed);
    for (std::size_t s = 0; s < controls.burnin_sweeps; ++s)
        chain.sweep();

    GibbsResult out;
    out.stats.resize(static_cast<Eigen::Index>(controls.n_samples), static_cast<Eigen::Index>(spec.size()));
    out.density_trace.reserve(controls.n_samples);
    if (controls.keep_graphs)
        out.graphs.reserve(controls.n_samples);
    for (std::size_t k = 0; k < controls.n_samples; ++k) {
        for (std::size_t s = 0; s < controls.thin_sweeps; ++s)
            chain.sweep();
        out.stats.row(static_cast<Eigen::Index>(k)) = stat_vector(chain.graph(), spec).transpose();
        out.density_trace.push_back(chain.graph().density());
        if (controls.keep_graphs)
            out.graphs.push_back(chain.graph());
    }
    const double last = out.density_trace.back();
    out.degenerate = num_dyads(chain.graph().num_nodes()) > 0 && (last < 0.01 || last > 0.99);
    return out;
}

GibbsResult gibbs_sample(std::size_t n, const StatisticSpec& spec, const ThetaVector& theta,
                         const SamplerControls& controls) {
    check_theta(spec, theta);
    const int e = spec.find(TermKind::Edges);
    const double p0 = e >= 0 ? expit(theta[e]) : 0.5;
    // Initial state has its own stream so the chain stream is unaffected by n.
    Rng init(derive_seed(controls.seed, {0}));
    return gibbs_sample_from(erdos_renyi(n, p0, init), spec, theta, controls);
}

// ---------------------------------------------------------------------------
// HERGM

void HergmSpec::validate() const {
    if (clusters.empty())
        throw validation_error("HERGM spec needs at least one cluster");
    if (!(between_p >= 0.0 && between_p <= 1.0))
        throw validation_error("between_p must lie in [0, 1]");
    for (std::size_t k = 0; k < clusters.size(); ++k) {
        const auto& b = clusters[k];
        if (b.n == 0)
            throw validation_error("cluster " + std::to_string(k) + " has no nodes");
        if (b.bernoulli) {
            if (!(*b.bernoulli >= 0.0 && *b.bernoulli <= 1.0))
                throw validation_error("cluster " + std::to_string(k) + ": Bernoulli density outside [0,1]");
        } else {
            check_theta(b.spec, b.theta);
        }
    }
}

std::vector<Graph> simulate_hergm_on(const Partition& partition, const std::vector<BlockModel>& blocks,
                                     double between_p, const SamplerControls& controls, std::size_t count) {
    HergmSpec hs{blocks, between_p};
    hs.validate();
    if (blocks.size() != partition.num_clusters())
        throw validation_error("HERGM model has " + std::to_string(blocks.size()) + " blocks but partition has " +
                               std::to_string(partition.num_clusters()) + " clusters");
    if (count == 0)
        throw validation_error("number of simulated networks must be positive");
    const auto sizes = partition.cluster_sizes();
    for (std::size_t k = 0; k < blocks.size(); ++k)
        if (blocks[k].n != sizes[k])
            throw validation_error("block " + std::to_string(k) + " size does not match the partition");

    const std::size_t K = blocks.size();
    std::vector<std::vector<Graph>> block_draws(K);
    parallel_for(K, [&](std::size_t k) {
        const auto& b = blocks[k];
        const std::uint64_t seed = derive_seed(controls.seed, {1, k});
        if (b.n < 2) {
            block_draws[k].assign(count, Graph(b.n));
            return;
        }
        if (b.bernoulli) {
            Rng rng(seed);
            for (std::size_t s = 0; s < count; ++s)
                block_draws[k].push_back(erdos_renyi(b.n, *b.bernoulli, rng));
            return;
        }
        SamplerControls c = controls;
        c.seed = seed;
        c.n_samples = count;
        c.keep_graphs = true;
        block_draws[k] = gibbs_sample(b.n, b.spec, b.theta, c).graphs;
    });

    std::vector<std::vector<node_t>> members(K);
    for (std::size_t k = 0; k < K; ++k)
        members[k] = partition.members(k);

    Rng between(derive_seed(controls.seed, {2}));
    std::vector<Graph> out;
    out.reserve(count);
    const std::size_t n = partition.num_nodes();
    for (std::size_t s = 0; s < count; ++s) {
        Graph g(n);
        for (std::size_t k = 0; k < K; ++k)
            for (const auto& d : block_draws[k][s].edge_list())
                g.add_edge(members[k][d.i], members[k][d.j]);
        for (node_t i = 0; i < n; ++i)
            for (node_t j = i + 1; j < n; ++j)
                if (partition[i] != partition[j] && between.bernoulli(between_p))
                    g.add_edge(i, j);
        out.push_back(std::move(g));
    }
    return out;
}

HergmDraw simulate_hergm(const HergmSpec& spec, const SamplerControls& controls) {
    spec.validate();
    std::vector<std::size_t> sizes;
    for (const auto& b : spec.clusters)
        sizes.push_back(b.n);
    auto truth = Partition::contiguous(sizes);
    auto graphs = simulate_hergm_on(truth, spec.clusters, spec.between_p, controls, 1);
    return {std::move(graphs.front()), std::move(truth)};
}

// ---------------------------------------------------------------------------
// Exact enumeration

Graph graph_from_code(std::size_t n, std::uint64_t code) {
    Graph g(n);
    std::size_t b = 0;
    for (node_t i = 0; i < n; ++i)
        for (node_t j = i + 1; j < n; ++j, ++b)
            if ((code >> b) & 1u)
                g.add_edge(i, j);
    return g;
}

std::uint64_t graph_code(const Graph& g) {
    std::uint64_t code = 0;
    std::size_t b = 0;
    const std::size_t n = g.num_nodes();
    if (num_dyads(n) > 63)
        throw validation_error("graph too large for a dyad code");
    for (node_t i = 0; i < n; ++i)
        for (node_t j = i + 1; j < n; ++j, ++b)
            if (g.has_edge(DyadIndex(i, j)))
                code |= std::uint64_t{1} << b;
    return code;
}

ExactModel::ExactModel(std::size_t n, StatisticSpec spec) : n_(n), spec_(std::move(spec)) {
    const std::size_t m = num_dyads(n);
    if (n == 0 || m > 21)
        throw validation_error("exact enumeration supports at most 21 dyads (n <= 7); got n=" + std::to_string(n));
    spec_.check_nodes(n);
    const auto dyads = canonical_dyads(n);
    const std::uint64_t total = std::uint64_t{1} << m;
    code_to_row_.resize(total);

    std::map<std::vector<double>, std::uint32_t> index;
    std::vector<std::vector<double>> rows;
    // Gray-code walk: consecutive graphs differ by one dyad.
    Graph g(n);
    std::uint64_t code = 0;
    for (std::uint64_t step = 0; step < total; ++step) {
        if (step > 0) {
            const int bit = std::countr_zero(step);
            g.toggle(dyads[static_cast<std::size_t>(bit)]);
            code ^= std::uint64_t{1} << bit;
        }
        const StatVector s = stat_vector(g, spec_);
        std::vector<double> key(s.data(), s.data() + s.size());
        auto [it, inserted] = index.emplace(key, static_cast<std::uint32_t>(rows.size()));
        if (inserted) {
            rows.push_back(key);
            counts_.push_back(0);
        }
        counts_[it->second] += 1;
        code_to_row_[code] = it->second;
    }
    distinct_.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(spec_.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t t = 0; t < spec_.size(); ++t)
            distinct_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(t)) = rows[r][t];
}

ExactModel::Distribution ExactModel::evaluate(const ThetaVector& theta, bool with_probabilities) const {
    check_theta(spec_, theta);
    const Eigen::VectorXd eta = distinct_ * theta;
    const double top = eta.maxCoeff();
    Eigen::VectorXd w(eta.size());
    double z = 0;
    for (Eigen::Index r = 0; r < eta.size(); ++r) {
        w[r] = counts_[static_cast<std::size_t>(r)] * std::exp(eta[r] - top);
        z += w[r];
    }
    w /= z;  // probability mass of each distinct statistic value

    Distribution d;
    d.log_partition = top + std::log(z);
    d.mean = distinct_.transpose() * w;
    const Eigen::MatrixXd centered = distinct_.rowwise() - d.mean.transpose();
    d.covariance = centered.transpose() * w.asDiagonal() * centered;
    if (with_probabilities) {
        d.probabilities.resize(code_to_row_.size());
        for (std::size_t c = 0; c < code_to_row_.size(); ++c)
            d.probabilities[c] = std::exp(eta[code_to_row_[c]] - d.log_partition);
    }
    return d;
}

ExactModel::Distribution exact_distribution(std::size_t n, const StatisticSpec& spec, const ThetaVector& theta) {
    check_theta(spec, theta);
    return ExactModel(n, spec).evaluate(theta);
}

}  // namespace hergm
