#ifndef HERGM_TWO_STAGE_HPP
#define HERGM_TWO_STAGE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hergm/fit.hpp"
#include "hergm/graph.hpp"
#include "hergm/lsm.hpp"
#include "hergm/spectral.hpp"
#include "hergm/stats.hpp"

namespace hergm {

enum class Stage1Method { Lsm, Score, Given };

std::string to_string(Stage1Method m);
Stage1Method parse_stage1_method(const std::string& s);

struct TwoStageControls {
    Stage1Method stage1 = Stage1Method::Lsm;
    FitMethod method = FitMethod::Mcmle;
    std::size_t dim = 2;
    LsmPriors priors;
    LsmControls lsm;
    ScoreControls score;  ///< K is taken from the call
    McmleControls mcmle;  ///< seed is replaced by a per-cluster seed
    std::optional<Partition> given;
    std::uint64_t seed = 1;
};

struct ClusterFit {
    std::size_t size = 0;
    std::optional<ErgmFit> fit;  ///< empty when the cluster could not be fitted
    std::string unavailable_reason;
};

struct TwoStageFit {
    StatisticSpec spec = StatisticSpec({Term::edges()});
    Stage1Method stage1 = Stage1Method::Given;
    FitMethod method = FitMethod::Mcmle;
    Partition partition = Partition({0}, 1);
    std::optional<LsmSummary> lsm;
    std::vector<ClusterFit> clusters;
    std::optional<DensityEstimate> between;  ///< empty for K = 1
    std::uint64_t seed = 0;
};

/// Seed stream used for stage 1 and for the fit of cluster k.
std::uint64_t stage1_seed(std::uint64_t master);
std::uint64_t cluster_seed(std::uint64_t master, std::size_t k);

/// Stage 1 (LSM MAP membership, SCORE, or the given partition) followed by
/// independent ERGM fits on every within-cluster subgraph and the binomial
/// between-cluster estimate. A cluster smaller than the spec requires, or
/// whose fit fails numerically, is reported unavailable with the reason.
TwoStageFit two_stage_fit(const Graph& g, std::size_t K, const StatisticSpec& spec, const TwoStageControls& controls);

/// Stage 2 alone on a fixed partition.
TwoStageFit stage_two(const Graph& g, const Partition& partition, const StatisticSpec& spec,
                      const TwoStageControls& controls);

/// log P(y) under the fitted HERGM: exact block log-likelihoods from
/// enumeration (every cluster must have at most 6 nodes) plus the
/// between-cluster binomial term.
double hergm_exact_log_likelihood(const Graph& g, const TwoStageFit& fit);

nlohmann::json to_json(const TwoStageFit& fit);
TwoStageFit two_stage_from_json(const nlohmann::json& j);

}  // namespace hergm

#endif
