#ifndef HERGM_SAMPLER_HPP
#define HERGM_SAMPLER_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "hergm/graph.hpp"
#include "hergm/rng.hpp"
#include "hergm/stats.hpp"

namespace hergm {

using ThetaVector = Eigen::VectorXd;

/// One sweep visits every dyad once, in canonical order.
struct SamplerControls {
    std::size_t burnin_sweeps = 2000;
    std::size_t n_samples = 1;
    std::size_t thin_sweeps = 10;
    std::uint64_t seed = 1;
    bool keep_graphs = true;

    void validate() const;
};

struct GibbsResult {
    std::vector<Graph> graphs;       ///< empty unless keep_graphs
    Eigen::MatrixXd stats;           ///< one row per retained sample
    std::vector<double> density_trace;
    bool degenerate = false;         ///< last retained density < 0.01 or > 0.99
};

double expit(double x);
double logit(double p);

void check_theta(const StatisticSpec& spec, const ThetaVector& theta);

/// Full-conditional Gibbs sampling from P(y) proportional to exp(theta' S(y)).
/// The chain starts from an Erdos-Renyi draw at density expit(theta_edges),
/// or 0.5 when the spec has no edges term.
GibbsResult gibbs_sample(std::size_t n, const StatisticSpec& spec, const ThetaVector& theta,
                         const SamplerControls& controls);

/// Same chain, started from a given graph.
GibbsResult gibbs_sample_from(Graph start, const StatisticSpec& spec, const ThetaVector& theta,
                              const SamplerControls& controls);

/// Within-cluster model of one HERGM block: an ERGM, or i.i.d. Bernoulli ties
/// (used for blocks that could not be fitted).
struct BlockModel {
    std::size_t n = 0;
    StatisticSpec spec = StatisticSpec({Term::edges()});
    ThetaVector theta = ThetaVector::Zero(1);
    std::optional<double> bernoulli;
};

struct HergmSpec {
    std::vector<BlockModel> clusters;
    double between_p = 0.05;

    void validate() const;
};

struct HergmDraw {
    Graph graph;
    Partition truth;
};

/// Ground-truth partition is contiguous: cluster 0 holds nodes 0..n_0-1, etc.
/// `controls.n_samples` is ignored; one network is produced.
HergmDraw simulate_hergm(const HergmSpec& spec, const SamplerControls& controls);

/// Draws `count` networks whose clusters follow `partition`; block k of the
/// model is placed on partition.members(k). Within-block chains run once per
/// cluster and are thinned between networks.
std::vector<Graph> simulate_hergm_on(const Partition& partition, const std::vector<BlockModel>& blocks,
                                     double between_p, const SamplerControls& controls, std::size_t count);

/// Exhaustive enumeration of all graphs on n nodes (C(n,2) <= 21).
/// Graph codes map bit b to the b-th dyad in canonical order.
class ExactModel {
public:
    ExactModel(std::size_t n, StatisticSpec spec);

    struct Distribution {
        std::vector<double> probabilities;  ///< indexed by graph code
        double log_partition = 0;           ///< psi(theta)
        StatVector mean;                    ///< mu(theta) = E[S(Y)]
        Eigen::MatrixXd covariance;
    };

    Distribution evaluate(const ThetaVector& theta, bool with_probabilities = true) const;

    std::size_t num_nodes() const { return n_; }
    std::size_t num_graphs() const { return code_to_row_.size(); }
    /// Distinct statistic vectors and how many graphs attain each.
    const Eigen::MatrixXd& distinct_stats() const { return distinct_; }
    const std::vector<double>& multiplicities() const { return counts_; }
    std::size_t row_of(std::uint64_t code) const { return code_to_row_[code]; }

private:
    std::size_t n_;
    StatisticSpec spec_;
    Eigen::MatrixXd distinct_;
    std::vector<double> counts_;
    std::vector<std::uint32_t> code_to_row_;
};

ExactModel::Distribution exact_distribution(std::size_t n, const StatisticSpec& spec, const ThetaVector& theta);

Graph graph_from_code(std::size_t n, std::uint64_t code);
std::uint64_t graph_code(const Graph& g);

}  // namespace hergm

#endif
