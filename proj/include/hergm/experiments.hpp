#ifndef HERGM_EXPERIMENTS_HPP
#define HERGM_EXPERIMENTS_HPP

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "hergm/config.hpp"
#include "hergm/gof.hpp"
#include "hergm/two_stage.hpp"

namespace hergm {

/// Mis-clustering rate of stage 1 on simulated HERGMs whose K equal clusters
/// share theta = (base_edges, t, t) for the transitivity level t.
struct MisrateConfig {
    std::vector<std::size_t> n_grid{10, 20, 40};
    std::vector<double> t_grid{0.2, 0.5, 1.0};
    std::size_t replications = 20;
    std::size_t K = 3;
    double base_edges = -2.9444389791664403;  // logit(0.05)
    double between_p = 0.05;
    StatisticSpec spec = StatisticSpec::parse("edges,gwdsp(0.5),gwesp(0.5)");
    Stage1Method stage1 = Stage1Method::Lsm;
    std::size_t dim = 2;
    LsmControls lsm;
    ScoreControls score;
    SamplerControls sampler;
    std::uint64_t seed = 1;

    void validate() const;
};

struct MisrateRow {
    std::size_t n_per_cluster;
    double transitivity;
    std::size_t replication;
    double rate;
};

struct MisrateCell {
    std::size_t n_per_cluster;
    double transitivity;
    double mean_rate;
    double sd_rate;
    std::size_t replications;
};

struct MisrateResult {
    std::vector<MisrateRow> rows;    ///< n-major, then t, then replication
    std::vector<MisrateCell> cells;  ///< same order, one per (n, t)

    const MisrateCell& cell(std::size_t n, double t) const;
};

MisrateConfig read_misrate_config(const ConfigReader& r);
/// The network of one replication and its ground truth.
HergmDraw misrate_network(const MisrateConfig& c, std::size_t n, double t, std::size_t rep);
MisrateResult misrate_experiment(const MisrateConfig& c);

/// Stage 2 on a corrupted truth: a rho fraction of the nodes get a uniformly
/// chosen different label. Every rho uses the same networks and the same
/// stage-2 and GOF seeds, so differences across rho come from the labels.
struct SensitivityConfig {
    HergmSpec hergm;  ///< every ERGM block must use `spec`
    StatisticSpec spec = StatisticSpec::parse("edges,gwdsp(0.5),gwesp(0.5)");
    std::vector<double> rho_grid{0.0, 0.05, 0.1, 0.2, 0.3, 0.5, 1.0};
    std::size_t replications = 10;
    FitMethod method = FitMethod::Mple;
    McmleControls mcmle;
    SamplerControls sampler;
    std::size_t gof_nsim = 50;  ///< 0 skips the GOF columns
    SamplerControls gof_sampler;
    std::uint64_t seed = 1;

    SensitivityConfig();
    void validate() const;
};

/// Long format. cluster is a block index, "between" or "all". Quantities:
/// theta:<term> and bias:<term> per block, size per block, p_hat and
/// bias:p_hat for between, misrate and coverage:<panel> for all. Missing
/// values (unavailable fits) are NaN.
struct SensitivityRow {
    double rho;
    std::size_t replication;
    std::string cluster;
    std::string quantity;
    double value;
};

struct SensitivitySummaryRow {
    double rho;
    std::string cluster;
    std::string quantity;
    double mean;
    double mean_abs;
    std::size_t count;  ///< replications with a finite value
};

struct SensitivityResult {
    std::vector<SensitivityRow> rows;
    std::vector<SensitivitySummaryRow> summary;
};

SensitivityConfig read_sensitivity_config(const ConfigReader& r);
/// Labels of `truth` with round(rho * n) nodes moved to another cluster.
Partition flip_labels(const Partition& truth, double rho, std::uint64_t seed);
SensitivityResult sensitivity_experiment(const SensitivityConfig& c);

/// SCORE against k-means on the raw leading eigenvectors.
struct ScoreScenario {
    std::string name;
    std::string kind = "planted";  ///< planted | dcsbm
    std::vector<std::size_t> sizes{50, 50};
    double p_in = 0.3, p_out = 0.05;
    /// dcsbm: tie probability w_i w_j p, w = hub_weight for a hub_fraction
    /// of the nodes and base_weight otherwise.
    double hub_fraction = 0.1, hub_weight = 1.0, base_weight = 0.25;
};

struct ScoreExperimentConfig {
    std::vector<ScoreScenario> scenarios;
    std::size_t replications = 20;
    ScoreControls score;
    std::uint64_t seed = 1;

    void validate() const;
};

struct ScoreRow {
    std::string scenario;
    std::size_t replication;
    std::string method;  ///< score | eigenvector
    double rate;
};

struct ScoreSummaryRow {
    std::string scenario;
    std::string method;
    double mean_rate;
    double sd_rate;
    std::size_t replications;
};

struct ScoreExperimentResult {
    std::vector<ScoreRow> rows;
    std::vector<ScoreSummaryRow> summary;

    const ScoreSummaryRow& find(const std::string& scenario, const std::string& method) const;
};

ScoreExperimentConfig read_score_config(const ConfigReader& r);
Graph score_network(const ScoreScenario& s, std::uint64_t seed);
ScoreExperimentResult score_experiment(const ScoreExperimentConfig& c);

void write_csv(const MisrateResult& r, std::ostream& rows, std::ostream* summary);
void write_csv(const SensitivityResult& r, std::ostream& rows, std::ostream* summary);
void write_csv(const ScoreExperimentResult& r, std::ostream& rows, std::ostream* summary);

}  // namespace hergm

#endif
