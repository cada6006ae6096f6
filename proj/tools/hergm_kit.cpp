// hergm-kit: simulate, cluster, fit, check and experiment with HERGMs.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hergm/config.hpp"
#include "hergm/experiments.hpp"
#include "hergm/format.hpp"
#include "hergm/gof.hpp"
#include "hergm/parallel.hpp"
#include "hergm/svg.hpp"
#include "hergm/two_stage.hpp"
#include "hergm/version.hpp"

using namespace hergm;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

std::ofstream open_file(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw validation_error("cannot open '" + path + "' for writing");
    return out;
}

void write_json(const nlohmann::json& j, const std::string& path) {
    auto out = open_file(path);
    out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw validation_error("cannot open '" + path + "' for reading");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw validation_error("'" + path + "' is not valid JSON: " + e.what());
    }
}

std::vector<double> parse_theta(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size())
                throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw validation_error("--theta: '" + tok + "' is not a number");
        }
    }
    return out;
}

void write_stats_csv(const StatisticSpec& spec, const Eigen::MatrixXd& stats, std::ostream& out) {
    out << "sample";
    for (std::size_t t = 0; t < spec.size(); ++t)
        out << ',' << spec[t].name();
    out << '\n';
    for (Eigen::Index r = 0; r < stats.rows(); ++r) {
        out << r;
        for (Eigen::Index c = 0; c < stats.cols(); ++c)
            out << ',' << format_double(stats(r, c));
        out << '\n';
    }
}

// ---- option groups shared by several commands ------------------------------

struct LsmOptions {
    std::size_t dim = 2;
    LsmControls controls;
    bool no_intercept = false;

    void add(CLI::App* app) {
        app->add_option("--dim", dim, "latent dimension")->capture_default_str();
        app->add_option("--burnin", controls.burnin, "LSM burn-in iterations")->capture_default_str();
        app->add_option("--samples", controls.samples, "LSM retained draws")->capture_default_str();
        app->add_option("--thin", controls.thin, "LSM thinning")->capture_default_str();
        app->add_flag("--no-intercept", no_intercept, "drop beta0 from the LSM");
    }
    LsmControls resolved() const {
        LsmControls c = controls;
        c.intercept = !no_intercept;
        return c;
    }
};

struct McmleOptions {
    McmleControls controls;

    void add(CLI::App* app) {
        app->add_option("--mc-size", controls.sample_size, "MCMLE sample size")->capture_default_str();
        app->add_option("--mc-max-size", controls.max_sample_size, "MCMLE sample size cap")->capture_default_str();
        app->add_option("--mc-burnin", controls.burnin_sweeps, "MCMLE burn-in sweeps")->capture_default_str();
        app->add_option("--mc-thin", controls.thin_sweeps, "MCMLE thinning sweeps")->capture_default_str();
        app->add_option("--mc-iterations", controls.max_iterations, "MCMLE iteration cap")->capture_default_str();
    }
};

// ---- simulate --------------------------------------------------------------

struct SimulateHergmArgs {
    std::string config, out, truth, stats_out;
    std::optional<std::uint64_t> seed;
};

void cmd_simulate_hergm(const SimulateHergmArgs& a) {
    auto r = ConfigReader::load(a.config);
    const auto spec = read_hergm_spec(r.child("hergm"));
    SamplerControls sc = read_sampler(r.child("sampler"), SamplerControls{});
    sc.seed = r.get<std::uint64_t>("seed", 1);
    r.finish();
    if (a.seed)
        sc.seed = *a.seed;
    const auto draw = simulate_hergm(spec, sc);

    write_edge_list(draw.graph, a.out);
    write_partition(draw.truth, a.truth.empty() ? a.out + ".truth.csv" : a.truth);
    auto stats = open_file(a.stats_out.empty() ? a.out + ".stats.csv" : a.stats_out);
    stats << "cluster,term,value\n";
    for (std::size_t k = 0; k < spec.clusters.size(); ++k) {
        const auto& b = spec.clusters[k];
        const auto sub = within_subgraph(draw.graph, draw.truth, k).graph;
        if (b.bernoulli) {
            stats << k << ",edges," << sub.num_edges() << '\n';
            continue;
        }
        const auto s = stat_vector(sub, b.spec);
        for (std::size_t t = 0; t < b.spec.size(); ++t)
            stats << k << ',' << b.spec[t].name() << ',' << format_double(s[Eigen::Index(t)]) << '\n';
    }
    if (spec.clusters.size() > 1)
        stats << "between,edges," << between_edge_counts(draw.graph, draw.truth).edges << '\n';
    std::cerr << "simulated " << draw.graph.num_nodes() << " nodes, " << draw.graph.num_edges() << " edges\n";
}

struct SimulateErgmArgs {
    std::size_t n = 0;
    std::string stats, theta, out, stats_out;
    SamplerControls sampler;
    bool all = false;
};

void cmd_simulate_ergm(SimulateErgmArgs a) {
    const auto spec = StatisticSpec::parse(a.stats);
    const auto theta = theta_from_list(parse_theta(a.theta));
    a.sampler.keep_graphs = true;
    const auto res = gibbs_sample(a.n, spec, theta, a.sampler);
    write_edge_list(res.graphs.back(), a.out);
    if (a.all)
        for (std::size_t i = 0; i < res.graphs.size(); ++i)
            write_edge_list(res.graphs[i], a.out + "." + std::to_string(i));
    auto stats = open_file(a.stats_out.empty() ? a.out + ".stats.csv" : a.stats_out);
    write_stats_csv(spec, res.stats, stats);
    if (res.degenerate)
        std::cerr << "warning: chain ended near an empty or complete graph\n";
    std::cerr << "final sample: " << res.graphs.back().num_edges() << " edges, density "
              << format_double(res.graphs.back().density()) << '\n';
}

// ---- cluster ---------------------------------------------------------------

struct ClusterArgs {
    std::string graph, out, posterior, positions;
    std::size_t K = 2;
    std::uint64_t seed = 1;
    LsmOptions lsm;
    ScoreControls score;
};

void cmd_cluster_lsm(const ClusterArgs& a) {
    const auto g = read_edge_list(a.graph);
    const auto post = lsm_mcmc(g, a.K, a.lsm.dim, LsmPriors{}, a.lsm.resolved(), a.seed);
    const auto p = map_membership(post);
    write_partition(p, a.out);
    if (!a.posterior.empty())
        write_json(to_json(post), a.posterior);
    if (!a.positions.empty()) {
        auto out = open_file(a.positions);
        write_positions(post.summary, p, out);
    }
    for (const auto& w : post.warnings)
        std::cerr << "warning: " << w << '\n';
    std::cerr << "acceptance: positions " << format_double(post.acceptance.z) << ", beta0 "
              << format_double(post.acceptance.beta0) << ", beta1 " << format_double(post.acceptance.beta1) << '\n';
}

void cmd_cluster_score(const ClusterArgs& a) {
    const auto g = read_edge_list(a.graph);
    ScoreControls c = a.score;
    c.K = a.K;
    c.seed = a.seed;
    write_partition(score_cluster(g, c), a.out);
}

// ---- fit -------------------------------------------------------------------

struct FitArgs {
    std::string graph, stats, stage1 = "lsm", method = "mcmle", partition, out;
    std::size_t K = 2;
    std::uint64_t seed = 1;
    LsmOptions lsm;
    McmleOptions mcmle;
    ScoreControls score;
};

void cmd_fit_twostage(const FitArgs& a) {
    const auto g = read_edge_list(a.graph);
    TwoStageControls c;
    c.stage1 = parse_stage1_method(a.stage1);
    c.method = parse_fit_method(a.method);
    c.dim = a.lsm.dim;
    c.lsm = a.lsm.resolved();
    c.mcmle = a.mcmle.controls;
    c.score = a.score;
    c.seed = a.seed;
    if (c.stage1 == Stage1Method::Given) {
        if (a.partition.empty())
            throw validation_error("--stage1 given needs --partition");
        c.given = read_partition(a.partition);
    }
    const auto fit = two_stage_fit(g, a.K, StatisticSpec::parse(a.stats), c);
    write_json(to_json(fit), a.out);
    for (std::size_t k = 0; k < fit.clusters.size(); ++k)
        if (!fit.clusters[k].fit)
            std::cerr << "cluster " << k << " unavailable: " << fit.clusters[k].unavailable_reason << '\n';
}

void cmd_fit_ergm(const FitArgs& a) {
    const auto g = read_edge_list(a.graph);
    const auto spec = StatisticSpec::parse(a.stats);
    const auto method = parse_fit_method(a.method);
    McmleControls mc = a.mcmle.controls;
    mc.seed = a.seed;
    const auto fit = method == FitMethod::Mple ? mple(g, spec) : mcmle(g, spec, std::nullopt, mc);
    write_json(to_json(fit), a.out);
    if (!fit.diagnostics.converged)
        std::cerr << "warning: fit did not converge\n";
}

// ---- gof -------------------------------------------------------------------

struct GofArgs {
    std::string graph, fit, model = "auto", out, summary, svg;
    std::size_t nsim = 100;
    std::uint64_t seed = 1;
    SamplerControls sampler;
};

void cmd_gof(const GofArgs& a) {
    if (a.nsim == 0)
        throw validation_error("--nsim must be at least 1");
    const auto g = read_edge_list(a.graph);
    const auto j = read_json(a.fit);
    GofControls c;
    c.n_sim = a.nsim;
    c.seed = a.seed;
    c.sampler = a.sampler;
    const bool two_stage = j.is_object() && j.contains("clusters");
    GofReport report;
    if (a.model == "ergm" || (a.model == "auto" && !two_stage)) {
        if (two_stage)
            throw validation_error("--model ergm needs a single-ERGM fit file");
        report = gof_ergm(g, ergm_fit_from_json(j), c);
    } else if (a.model == "lsm") {
        if (!two_stage)
            throw validation_error("--model lsm needs a two-stage fit with an LSM stage 1");
        const auto fit = two_stage_from_json(j);
        if (!fit.lsm)
            throw validation_error("fit file has no LSM summary (stage 1 was " + to_string(fit.stage1) + ")");
        report = gof_lsm(g, *fit.lsm, ModelTerms{fit.spec, fit.partition}, c);
    } else if (a.model == "hergm" || a.model == "auto") {
        if (!two_stage)
            throw validation_error("--model hergm needs a two-stage fit file");
        report = gof_two_stage(g, two_stage_from_json(j), c);
    } else {
        throw validation_error("--model must be auto, hergm, ergm or lsm");
    }
    {
        auto out = open_file(a.out);
        write_gof_csv(report, out);
    }
    if (!a.summary.empty()) {
        auto out = open_file(a.summary);
        write_gof_summary(report, out);
    }
    if (!a.svg.empty()) {
        auto out = open_file(a.svg);
        plot_gof(report, out);
    }
    for (const auto& f : report.flags)
        std::cerr << "flag: " << f << '\n';
    for (const auto& p : report.panels)
        std::cerr << p.name << " coverage " << format_double(p.coverage) << '\n';
}

// ---- experiment ------------------------------------------------------------

struct ExperimentArgs {
    std::string config, out, summary, svg;
    std::optional<std::uint64_t> seed;
};

template <class Config, class Read, class Run, class Plot>
void run_experiment(const ExperimentArgs& a, Read read, Run run, Plot plot) {
    auto r = ConfigReader::load(a.config);
    Config c = read(r);
    if (a.seed)
        c.seed = *a.seed;
    const auto result = run(c);
    auto out = open_file(a.out);
    if (a.summary.empty()) {
        write_csv(result, out, nullptr);
    } else {
        auto summary = open_file(a.summary);
        write_csv(result, out, &summary);
    }
    if (!a.svg.empty()) {
        auto svg = open_file(a.svg);
        plot(result, svg);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-stage estimation of hierarchical exponential random graph models"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    std::optional<std::size_t> threads;
    app.add_option("--threads", threads, "worker threads (default: HERGMKIT_THREADS, else all cores)")
        ->check(CLI::PositiveNumber);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "draw networks");
    simulate->require_subcommand(1);
    SimulateHergmArgs sh;
    auto* sim_hergm = simulate->add_subcommand("hergm", "HERGM from a JSON config");
    sim_hergm->add_option("--config", sh.config, "config with hergm, sampler and seed")->required();
    sim_hergm->add_option("--seed", sh.seed, "overrides the config seed");
    sim_hergm->add_option("--out", sh.out, "edge list")->required();
    sim_hergm->add_option("--truth", sh.truth, "true partition CSV (default <out>.truth.csv)");
    sim_hergm->add_option("--stats-out", sh.stats_out, "per-cluster statistics CSV (default <out>.stats.csv)");

    SimulateErgmArgs se;
    auto* sim_ergm = simulate->add_subcommand("ergm", "single ERGM by Gibbs sampling");
    sim_ergm->add_option("--n", se.n, "number of nodes")->required();
    sim_ergm->add_option("--stats", se.stats, "statistic spec, e.g. edges,gwesp(0.5)")->required();
    sim_ergm->add_option("--theta", se.theta, "comma-separated coefficients")->required()->allow_extra_args(false);
    sim_ergm->add_option("--seed", se.sampler.seed)->capture_default_str();
    sim_ergm->add_option("--burnin", se.sampler.burnin_sweeps, "burn-in sweeps")->capture_default_str();
    sim_ergm->add_option("--thin", se.sampler.thin_sweeps, "sweeps between samples")->capture_default_str();
    sim_ergm->add_option("--samples", se.sampler.n_samples, "retained samples")->capture_default_str();
    sim_ergm->add_option("--out", se.out, "edge list of the last sample")->required();
    sim_ergm->add_option("--stats-out", se.stats_out, "statistics CSV (default <out>.stats.csv)");
    sim_ergm->add_flag("--all", se.all, "also write every sample as <out>.<i>");

    // cluster
    auto* cluster = app.add_subcommand("cluster", "stage 1 membership");
    cluster->require_subcommand(1);
    ClusterArgs ca;
    auto* cl_lsm = cluster->add_subcommand("lsm", "latent position cluster model");
    auto* cl_score = cluster->add_subcommand("score", "spectral clustering on eigenvector ratios");
    for (auto* sub : {cl_lsm, cl_score}) {
        sub->add_option("--graph", ca.graph, "edge list")->required();
        sub->add_option("--K", ca.K, "number of clusters")->required();
        sub->add_option("--seed", ca.seed)->capture_default_str();
        sub->add_option("--out", ca.out, "partition CSV")->required();
    }
    ca.lsm.add(cl_lsm);
    cl_lsm->add_option("--posterior", ca.posterior, "posterior summary JSON");
    cl_lsm->add_option("--positions", ca.positions, "posterior-mean positions CSV");
    cl_score->add_option("--restarts", ca.score.restarts, "k-means restarts")->capture_default_str();
    cl_score->add_option("--truncation", ca.score.truncation, "ratio threshold (0: log n)")->capture_default_str();

    // fit
    auto* fit = app.add_subcommand("fit", "estimate");
    fit->require_subcommand(1);
    FitArgs fa;
    auto* fit_two = fit->add_subcommand("twostage", "stage 1 clustering, then per-cluster ERGMs");
    auto* fit_ergm = fit->add_subcommand("ergm", "one ERGM for the whole network");
    for (auto* sub : {fit_two, fit_ergm}) {
        sub->add_option("--graph", fa.graph, "edge list")->required();
        sub->add_option("--stats", fa.stats, "statistic spec")->required();
        sub->add_option("--method", fa.method, "mple or mcmle")->capture_default_str();
        sub->add_option("--seed", fa.seed)->capture_default_str();
        sub->add_option("--out", fa.out, "fit JSON")->required();
        fa.mcmle.add(sub);
    }
    fit_two->add_option("--K", fa.K, "number of clusters")->required();
    fit_two->add_option("--stage1", fa.stage1, "lsm, score or given")->capture_default_str();
    fit_two->add_option("--partition", fa.partition, "partition CSV for --stage1 given");
    fa.lsm.add(fit_two);

    // gof
    GofArgs ga;
    auto* gof_cmd = app.add_subcommand("gof", "goodness of fit by simulation");
    gof_cmd->add_option("--graph", ga.graph, "edge list")->required();
    gof_cmd->add_option("--fit", ga.fit, "fit JSON from fit twostage or fit ergm")->required();
    gof_cmd->add_option("--model", ga.model, "auto, hergm, ergm or lsm")->capture_default_str();
    gof_cmd->add_option("--nsim", ga.nsim, "simulated networks")->capture_default_str();
    gof_cmd->add_option("--seed", ga.seed)->capture_default_str();
    ga.sampler.burnin_sweeps = default_gof_controls().sampler.burnin_sweeps;
    ga.sampler.thin_sweeps = default_gof_controls().sampler.thin_sweeps;
    gof_cmd->add_option("--burnin", ga.sampler.burnin_sweeps, "simulator burn-in sweeps")->capture_default_str();
    gof_cmd->add_option("--thin", ga.sampler.thin_sweeps, "sweeps between simulated networks")
        ->capture_default_str();
    gof_cmd->add_option("--out", ga.out, "envelope CSV")->required();
    gof_cmd->add_option("--summary", ga.summary, "coverage CSV");
    gof_cmd->add_option("--svg", ga.svg, "envelope plot");

    // experiment
    auto* experiment = app.add_subcommand("experiment", "simulation studies");
    experiment->require_subcommand(1);
    ExperimentArgs ea;
    auto* ex_mis = experiment->add_subcommand("misrate", "stage-1 mis-clustering over n and transitivity");
    auto* ex_sens = experiment->add_subcommand("sensitivity", "stage 2 on corrupted memberships");
    auto* ex_score = experiment->add_subcommand("score", "SCORE against raw eigenvectors");
    for (auto* sub : {ex_mis, ex_sens, ex_score}) {
        sub->add_option("--config", ea.config, "experiment JSON")->required();
        sub->add_option("--seed", ea.seed, "overrides the config seed");
        sub->add_option("--out", ea.out, "per-replication CSV")->required();
        sub->add_option("--summary", ea.summary, "per-cell summary CSV");
        sub->add_option("--svg", ea.svg, "plot of the summary");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n" << "run with --help for usage\n";
        return kExitValidation;
    }

    try {
        if (threads) {
            set_thread_count(*threads);
        } else if (const char* env = std::getenv("HERGMKIT_THREADS")) {
            char* end = nullptr;
            const long v = std::strtol(env, &end, 10);
            if (end == env || *end != '\0' || v < 1)
                throw validation_error(std::string("HERGMKIT_THREADS must be a positive integer, got '") + env + "'");
            set_thread_count(std::size_t(v));
        }

        if (sim_hergm->parsed())
            cmd_simulate_hergm(sh);
        else if (sim_ergm->parsed())
            cmd_simulate_ergm(se);
        else if (cl_lsm->parsed())
            cmd_cluster_lsm(ca);
        else if (cl_score->parsed())
            cmd_cluster_score(ca);
        else if (fit_two->parsed())
            cmd_fit_twostage(fa);
        else if (fit_ergm->parsed())
            cmd_fit_ergm(fa);
        else if (gof_cmd->parsed())
            cmd_gof(ga);
        else if (ex_mis->parsed())
            run_experiment<MisrateConfig>(ea, read_misrate_config, misrate_experiment,
                                          [](const MisrateResult& r, std::ostream& o) { plot_misrate(r, o); });
        else if (ex_sens->parsed())
            run_experiment<SensitivityConfig>(
                ea, read_sensitivity_config, sensitivity_experiment,
                [](const SensitivityResult& r, std::ostream& o) { plot_sensitivity(r, o); });
        else if (ex_score->parsed())
            run_experiment<ScoreExperimentConfig>(
                ea, read_score_config, score_experiment,
                [](const ScoreExperimentResult& r, std::ostream& o) { plot_score(r, o); });
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
