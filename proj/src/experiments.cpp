#include "hergm/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>

#include "hergm/assignment.hpp"
#include "hergm/format.hpp"
#include "hergm/parallel.hpp"
#include "hergm/rng.hpp"

namespace hergm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_of(const std::vector<double>& v) {
    return v.empty() ? kNaN : std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

double sd_of(const std::vector<double>& v) {
    if (v.size() < 2)
        return kNaN;
    const double m = mean_of(v);
    double ss = 0;
    for (double x : v)
        ss += (x - m) * (x - m);
    return std::sqrt(ss / double(v.size() - 1));
}

StatisticSpec read_spec(const ConfigReader& r, const std::string& key, const StatisticSpec& fallback) {
    if (!r.has(key)) {
        r.get<std::string>(key, "");
        return fallback;
    }
    try {
        return StatisticSpec::parse(r.get<std::string>(key));
    } catch (const validation_error& e) {
        throw validation_error("config field '" + r.field(key) + "': " + e.what());
    }
}

template <class F>
auto field_checked(const ConfigReader& r, const std::string& key, F&& parse) {
    try {
        return parse(r.get<std::string>(key));
    } catch (const validation_error& e) {
        throw validation_error("config field '" + r.field(key) + "': " + e.what());
    }
}

}  // namespace

// ---- misrate ---------------------------------------------------------------

void MisrateConfig::validate() const {
    if (n_grid.empty() || t_grid.empty())
        throw validation_error("misrate experiment needs non-empty n_grid and t_grid");
    if (replications == 0)
        throw validation_error("misrate experiment needs replications >= 1");
    if (K == 0)
        throw validation_error("misrate experiment needs K >= 1");
    if (spec.size() != 3)
        throw validation_error("misrate spec must have three terms (edges and two transitivity terms), got '" +
                               spec.to_string() + "'");
    for (std::size_t n : n_grid)
        if (n < spec.min_nodes())
            throw validation_error("n_per_cluster " + std::to_string(n) + " is below what '" + spec.to_string() +
                                   "' needs");
    if (!(between_p >= 0 && between_p <= 1))
        throw validation_error("between_p must lie in [0, 1]");
    lsm.validate();
}

const MisrateCell& MisrateResult::cell(std::size_t n, double t) const {
    for (const auto& c : cells)
        if (c.n_per_cluster == n && c.transitivity == t)
            return c;
    throw validation_error("no misrate cell n=" + std::to_string(n) + " t=" + format_double(t));
}

MisrateConfig read_misrate_config(const ConfigReader& r) {
    MisrateConfig c;
    r.get<std::string>("experiment", "misrate");
    c.n_grid = r.get<std::vector<std::size_t>>("n_grid", c.n_grid);
    c.t_grid = r.get<std::vector<double>>("t_grid", c.t_grid);
    c.replications = r.get<std::size_t>("replications", c.replications);
    c.K = r.get<std::size_t>("K", c.K);
    c.base_edges = r.get<double>("base_edges", c.base_edges);
    c.between_p = r.get<double>("between_p", c.between_p);
    c.spec = read_spec(r, "spec", c.spec);
    if (r.has("stage1"))
        c.stage1 = field_checked(r, "stage1", parse_stage1_method);
    if (c.stage1 == Stage1Method::Given)
        throw validation_error("config field '" + r.field("stage1") + "' must be lsm or score");
    c.dim = r.get<std::size_t>("dim", c.dim);
    c.lsm = read_lsm_controls(r.child("lsm"), c.lsm);
    c.score = read_score_controls(r.child("score"), c.score);
    c.sampler = read_sampler(r.child("sampler"), c.sampler);
    c.seed = r.get<std::uint64_t>("seed", c.seed);
    r.finish();
    c.validate();
    return c;
}

namespace {

std::uint64_t misrate_seed(const MisrateConfig& c, std::size_t n, double t, std::size_t rep) {
    return derive_seed(c.seed, {n, std::bit_cast<std::uint64_t>(t), rep});
}

}  // namespace

HergmDraw misrate_network(const MisrateConfig& c, std::size_t n, double t, std::size_t rep) {
    HergmSpec h;
    h.between_p = c.between_p;
    ThetaVector theta(3);
    theta << c.base_edges, t, t;
    for (std::size_t k = 0; k < c.K; ++k)
        h.clusters.push_back(BlockModel{n, c.spec, theta, std::nullopt});
    SamplerControls sc = c.sampler;
    sc.seed = derive_seed(misrate_seed(c, n, t, rep), {0});
    return simulate_hergm(h, sc);
}

MisrateResult misrate_experiment(const MisrateConfig& c) {
    c.validate();
    MisrateResult out;
    for (std::size_t n : c.n_grid)
        for (double t : c.t_grid)
            for (std::size_t rep = 0; rep < c.replications; ++rep)
                out.rows.push_back(MisrateRow{n, t, rep, kNaN});

    parallel_for(out.rows.size(), [&](std::size_t i) {
        auto& row = out.rows[i];
        const auto draw = misrate_network(c, row.n_per_cluster, row.transitivity, row.replication);
        const std::uint64_t s1 = derive_seed(misrate_seed(c, row.n_per_cluster, row.transitivity, row.replication), {1});
        Partition est = Partition(std::vector<std::size_t>(draw.graph.num_nodes(), 0), 1);
        if (c.K > 1) {
            if (c.stage1 == Stage1Method::Lsm) {
                est = map_membership(lsm_mcmc(draw.graph, c.K, c.dim, LsmPriors{}, c.lsm, s1));
            } else {
                ScoreControls sc = c.score;
                sc.K = c.K;
                sc.seed = s1;
                est = score_cluster(draw.graph, sc);
            }
        }
        row.rate = misclustering_rate(est, draw.truth);
    });

    for (std::size_t i = 0; i < out.rows.size(); i += c.replications) {
        std::vector<double> rates;
        for (std::size_t r = 0; r < c.replications; ++r)
            rates.push_back(out.rows[i + r].rate);
        out.cells.push_back(MisrateCell{out.rows[i].n_per_cluster, out.rows[i].transitivity, mean_of(rates),
                                        sd_of(rates), c.replications});
    }
    return out;
}

// ---- sensitivity -----------------------------------------------------------

SensitivityConfig::SensitivityConfig() {
    ThetaVector theta(3);
    theta << -2.0, 0.5, 0.5;
    for (int k = 0; k < 2; ++k)
        hergm.clusters.push_back(BlockModel{30, spec, theta, std::nullopt});
    hergm.between_p = 0.05;
    gof_sampler.burnin_sweeps = 1000;
    gof_sampler.thin_sweeps = 10;
}

void SensitivityConfig::validate() const {
    hergm.validate();
    for (const auto& b : hergm.clusters)
        if (!b.bernoulli && b.spec.to_string() != spec.to_string())
            throw validation_error("sensitivity blocks must use the fit spec '" + spec.to_string() + "', got '" +
                                   b.spec.to_string() + "'");
    if (rho_grid.empty())
        throw validation_error("sensitivity experiment needs a non-empty rho_grid");
    for (double r : rho_grid)
        if (!(r >= 0 && r <= 1))
            throw validation_error("rho values must lie in [0, 1], got " + format_double(r));
    if (replications == 0)
        throw validation_error("sensitivity experiment needs replications >= 1");
}

SensitivityConfig read_sensitivity_config(const ConfigReader& r) {
    SensitivityConfig c;
    r.get<std::string>("experiment", "sensitivity");
    c.spec = read_spec(r, "spec", c.spec);
    if (r.has("hergm"))
        c.hergm = read_hergm_spec(r.child("hergm"));
    else
        for (auto& b : c.hergm.clusters)
            b.spec = c.spec;
    c.rho_grid = r.get<std::vector<double>>("rho_grid", c.rho_grid);
    c.replications = r.get<std::size_t>("replications", c.replications);
    if (r.has("method"))
        c.method = field_checked(r, "method", parse_fit_method);
    c.mcmle = read_mcmle_controls(r.child("mcmle"), c.mcmle);
    c.sampler = read_sampler(r.child("sampler"), c.sampler);
    c.gof_nsim = r.get<std::size_t>("gof_nsim", c.gof_nsim);
    c.gof_sampler = read_sampler(r.child("gof_sampler"), c.gof_sampler);
    c.seed = r.get<std::uint64_t>("seed", c.seed);
    r.finish();
    c.validate();
    return c;
}

Partition flip_labels(const Partition& truth, double rho, std::uint64_t seed) {
    const std::size_t n = truth.num_nodes(), K = truth.num_clusters();
    auto labels = truth.assignments();
    if (K < 2)
        return truth;
    const auto m = static_cast<std::size_t>(std::llround(rho * double(n)));
    std::vector<node_t> order(n);
    std::iota(order.begin(), order.end(), node_t(0));
    Rng rng(seed);
    for (std::size_t i = 0; i < m; ++i) {
        std::swap(order[i], order[i + rng.below(n - i)]);
        const node_t v = order[i];
        const auto shift = 1 + rng.below(K - 1);
        labels[v] = (labels[v] + shift) % K;
    }
    return Partition(labels, K);
}

SensitivityResult sensitivity_experiment(const SensitivityConfig& c) {
    c.validate();
    const std::size_t R = c.rho_grid.size();
    std::vector<std::vector<SensitivityRow>> slots(c.replications * R);

    std::vector<std::optional<HergmDraw>> draws(c.replications);
    parallel_for(c.replications, [&](std::size_t rep) {
        SamplerControls sc = c.sampler;
        sc.seed = derive_seed(derive_seed(c.seed, {rep}), {0});
        draws[rep] = simulate_hergm(c.hergm, sc);
    });

    parallel_for(slots.size(), [&](std::size_t job) {
        const std::size_t rep = job / R, ri = job % R;
        const double rho = c.rho_grid[ri];
        const std::uint64_t rep_seed = derive_seed(c.seed, {rep});
        const auto& draw = *draws[rep];
        const auto flipped = flip_labels(draw.truth, rho, derive_seed(rep_seed, {1, ri}));
        const auto labels = relabel_to(flipped, draw.truth);

        TwoStageControls tc;
        tc.method = c.method;
        tc.mcmle = c.mcmle;
        tc.seed = derive_seed(rep_seed, {2});
        auto fit = stage_two(draw.graph, labels, c.spec, tc);
        fit.stage1 = Stage1Method::Given;

        auto& rows = slots[job];
        auto add = [&](std::string cluster, std::string quantity, double value) {
            rows.push_back(SensitivityRow{rho, rep, std::move(cluster), std::move(quantity), value});
        };
        add("all", "misrate", misclustering_rate(labels, draw.truth));
        for (std::size_t k = 0; k < draw.truth.num_clusters(); ++k) {
            const auto& truth_block = c.hergm.clusters[k];
            const ClusterFit* cf = k < fit.clusters.size() ? &fit.clusters[k] : nullptr;
            add(std::to_string(k), "size", cf ? double(cf->size) : 0.0);
            for (std::size_t t = 0; t < c.spec.size(); ++t) {
                const std::string term = c.spec[t].name();
                const double est = cf && cf->fit ? cf->fit->theta[Eigen::Index(t)] : kNaN;
                add(std::to_string(k), "theta:" + term, est);
                add(std::to_string(k), "bias:" + term,
                    truth_block.bernoulli ? kNaN : est - truth_block.theta[Eigen::Index(t)]);
            }
        }
        const double p = fit.between ? fit.between->p_hat : kNaN;
        add("between", "p_hat", p);
        add("between", "bias:p_hat", p - c.hergm.between_p);
        if (c.gof_nsim > 0) {
            GofControls gc;
            gc.n_sim = c.gof_nsim;
            gc.seed = derive_seed(rep_seed, {3});
            gc.sampler = c.gof_sampler;
            const auto rep_gof = gof_two_stage(draw.graph, fit, gc);
            for (const auto& panel : rep_gof.panels)
                add("all", "coverage:" + panel.name, panel.coverage);
        }
    });

    SensitivityResult out;
    for (std::size_t ri = 0; ri < R; ++ri)
        for (std::size_t rep = 0; rep < c.replications; ++rep)
            for (auto& row : slots[rep * R + ri])
                out.rows.push_back(std::move(row));

    // Summary keyed by (rho, cluster, quantity) in first-appearance order.
    std::map<std::tuple<std::size_t, std::string, std::string>, std::size_t> index;
    std::vector<std::vector<double>> values;
    for (const auto& row : out.rows) {
        const auto ri = std::size_t(std::find(c.rho_grid.begin(), c.rho_grid.end(), row.rho) - c.rho_grid.begin());
        auto key = std::make_tuple(ri, row.cluster, row.quantity);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, out.summary.size()).first;
            out.summary.push_back(SensitivitySummaryRow{row.rho, row.cluster, row.quantity, kNaN, kNaN, 0});
            values.emplace_back();
        }
        if (std::isfinite(row.value))
            values[it->second].push_back(row.value);
    }
    for (std::size_t i = 0; i < out.summary.size(); ++i) {
        auto& s = out.summary[i];
        s.count = values[i].size();
        s.mean = mean_of(values[i]);
        std::vector<double> a;
        for (double v : values[i])
            a.push_back(std::abs(v));
        s.mean_abs = mean_of(a);
    }
    return out;
}

// ---- SCORE -----------------------------------------------------------------

void ScoreExperimentConfig::validate() const {
    if (scenarios.empty())
        throw validation_error("score experiment needs at least one scenario");
    if (replications == 0)
        throw validation_error("score experiment needs replications >= 1");
    for (const auto& s : scenarios) {
        if (s.kind != "planted" && s.kind != "dcsbm")
            throw validation_error("scenario '" + s.name + "': kind must be planted or dcsbm");
        if (s.sizes.size() < 2)
            throw validation_error("scenario '" + s.name + "' needs at least two blocks");
        for (double p : {s.p_in, s.p_out})
            if (!(p >= 0 && p <= 1))
                throw validation_error("scenario '" + s.name + "': probabilities must lie in [0, 1]");
        if (!(s.hub_fraction >= 0 && s.hub_fraction <= 1) || !(s.hub_weight >= 0) || !(s.base_weight >= 0))
            throw validation_error("scenario '" + s.name + "': invalid degree weights");
    }
    score.validate();
}

const ScoreSummaryRow& ScoreExperimentResult::find(const std::string& scenario, const std::string& method) const {
    for (const auto& s : summary)
        if (s.scenario == scenario && s.method == method)
            return s;
    throw validation_error("no score summary for " + scenario + "/" + method);
}

ScoreExperimentConfig read_score_config(const ConfigReader& r) {
    ScoreExperimentConfig c;
    r.get<std::string>("experiment", "score");
    for (const auto& s : r.children("scenarios")) {
        ScoreScenario sc;
        sc.name = s.get<std::string>("name");
        sc.kind = s.get<std::string>("kind", sc.kind);
        sc.sizes = s.get<std::vector<std::size_t>>("sizes", sc.sizes);
        sc.p_in = s.get<double>("p_in", sc.p_in);
        sc.p_out = s.get<double>("p_out", sc.p_out);
        sc.hub_fraction = s.get<double>("hub_fraction", sc.hub_fraction);
        sc.hub_weight = s.get<double>("hub_weight", sc.hub_weight);
        sc.base_weight = s.get<double>("base_weight", sc.base_weight);
        s.finish();
        c.scenarios.push_back(std::move(sc));
    }
    c.replications = r.get<std::size_t>("replications", c.replications);
    c.score = read_score_controls(r.child("score"), c.score);
    c.seed = r.get<std::uint64_t>("seed", c.seed);
    r.finish();
    c.validate();
    return c;
}

Graph score_network(const ScoreScenario& s, std::uint64_t seed) {
    const auto truth = Partition::contiguous(s.sizes);
    const std::size_t n = truth.num_nodes();
    Rng rng(seed);
    std::vector<double> w(n, 1.0);
    if (s.kind == "dcsbm")
        for (auto& x : w)
            x = rng.uniform() < s.hub_fraction ? s.hub_weight : s.base_weight;
    Graph g(n);
    for (node_t i = 0; i < n; ++i)
        for (node_t j = i + 1; j < n; ++j)
            if (rng.bernoulli(std::min(1.0, w[i] * w[j] * (truth[i] == truth[j] ? s.p_in : s.p_out))))
                g.add_edge(i, j);
    return g;
}

ScoreExperimentResult score_experiment(const ScoreExperimentConfig& c) {
    c.validate();
    const std::size_t S = c.scenarios.size(), R = c.replications;
    std::vector<double> score_rate(S * R), naive_rate(S * R);
    parallel_for(S * R, [&](std::size_t job) {
        const std::size_t s = job / R, rep = job % R;
        const auto& sc = c.scenarios[s];
        const auto truth = Partition::contiguous(sc.sizes);
        const auto g = score_network(sc, derive_seed(c.seed, {s, rep, 0}));
        ScoreControls ctl = c.score;
        ctl.K = sc.sizes.size();
        ctl.seed = derive_seed(c.seed, {s, rep, 1});
        score_rate[job] = misclustering_rate(score_cluster(g, ctl), truth);
        naive_rate[job] = misclustering_rate(eigenvector_cluster(g, ctl), truth);
    });
    ScoreExperimentResult out;
    for (std::size_t s = 0; s < S; ++s) {
        for (const auto& [method, rates] : {std::pair{"score", &score_rate}, std::pair{"eigenvector", &naive_rate}}) {
            std::vector<double> v(rates->begin() + long(s * R), rates->begin() + long((s + 1) * R));
            for (std::size_t rep = 0; rep < R; ++rep)
                out.rows.push_back(ScoreRow{c.scenarios[s].name, rep, method, v[rep]});
            out.summary.push_back(ScoreSummaryRow{c.scenarios[s].name, method, mean_of(v), sd_of(v), R});
        }
    }
    return out;
}

// ---- CSV -------------------------------------------------------------------

void write_csv(const MisrateResult& r, std::ostream& rows, std::ostream* summary) {
    rows << "n_per_cluster,transitivity,replication,rate\n";
    for (const auto& x : r.rows)
        rows << x.n_per_cluster << ',' << format_double(x.transitivity) << ',' << x.replication << ','
             << format_double(x.rate) << '\n';
    if (!summary)
        return;
    *summary << "n_per_cluster,transitivity,mean_rate,sd_rate,replications\n";
    for (const auto& x : r.cells)
        *summary << x.n_per_cluster << ',' << format_double(x.transitivity) << ',' << format_double(x.mean_rate)
                 << ',' << format_double(x.sd_rate) << ',' << x.replications << '\n';
}

void write_csv(const SensitivityResult& r, std::ostream& rows, std::ostream* summary) {
    rows << "rho,replication,cluster,quantity,value\n";
    for (const auto& x : r.rows)
        rows << format_double(x.rho) << ',' << x.replication << ',' << x.cluster << ',' << x.quantity << ','
             << format_double(x.value) << '\n';
    if (!summary)
        return;
    *summary << "rho,cluster,quantity,mean,mean_abs,count\n";
    for (const auto& x : r.summary)
        *summary << format_double(x.rho) << ',' << x.cluster << ',' << x.quantity << ',' << format_double(x.mean)
                 << ',' << format_double(x.mean_abs) << ',' << x.count << '\n';
}

void write_csv(const ScoreExperimentResult& r, std::ostream& rows, std::ostream* summary) {
    rows << "scenario,replication,method,rate\n";
    for (const auto& x : r.rows)
        rows << x.scenario << ',' << x.replication << ',' << x.method << ',' << format_double(x.rate) << '\n';
    if (!summary)
        return;
    *summary << "scenario,method,mean_rate,sd_rate,replications\n";
    for (const auto& x : r.summary)
        *summary << x.scenario << ',' << x.method << ',' << format_double(x.mean_rate) << ','
                 << format_double(x.sd_rate) << ',' << x.replications << '\n';
}

}  // namespace hergm
