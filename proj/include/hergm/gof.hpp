#ifndef HERGM_GOF_HPP
#define HERGM_GOF_HPP

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hergm/fit.hpp"
#include "hergm/graph.hpp"
#include "hergm/lsm.hpp"
#include "hergm/sampler.hpp"
#include "hergm/two_stage.hpp"

namespace hergm {

/// One diagnostic: observed values against pointwise 2.5% / 97.5%
/// simulation quantiles.
struct GofPanel {
    std::string name;
    std::vector<std::string> labels;
    std::vector<double> observed, lower, median, upper;
    std::vector<bool> in_support;  ///< bins that enter the coverage
    double coverage = 0;
};

struct GofReport {
    std::string model;
    std::size_t n_sim = 0;
    std::uint64_t seed = 0;
    std::vector<GofPanel> panels;   ///< degree, esp, geodesic, model
    std::vector<std::string> flags;

    const GofPanel& panel(const std::string& name) const;
};

/// Node-degree counts for degree 0..n-1.
std::vector<double> degree_distribution(const Graph& g);
/// Edge counts by shared partners 0..n-2.
std::vector<double> esp_distribution(const Graph& g);
/// Dyad counts by geodesic distance 1..n-1, then unreachable.
std::vector<double> geodesic_distribution(const Graph& g);

/// Model-statistics panel: the within-cluster statistics of every cluster
/// followed by the number of between-cluster edges (omitted for K = 1).
struct ModelTerms {
    StatisticSpec spec = StatisticSpec({Term::edges()});
    Partition partition = Partition({0}, 1);

    std::vector<std::string> labels() const;
    std::vector<double> evaluate(const Graph& g) const;
};

/// Draws `count` networks from a fitted model with the given seed.
using NetworkSimulator = std::function<std::vector<Graph>(std::size_t count, std::uint64_t seed)>;

/// Linear-interpolation sample quantile (type 7).
double quantile(std::vector<double> values, double prob);

/// Coverage of a panel counts the bins where the observed value is positive
/// or the upper envelope is; all-zero bins say nothing about fit.
GofReport gof(const Graph& g, const NetworkSimulator& simulate, const ModelTerms& terms, std::size_t n_sim,
              std::uint64_t seed, std::string model);

struct GofControls {
    std::size_t n_sim = 100;
    std::uint64_t seed = 1;
    SamplerControls sampler;  ///< burn-in and thinning of the HERGM simulator
};

GofControls default_gof_controls();

/// HERGM with the fitted partition, within-cluster estimates and between
/// density. Clusters without a fit are simulated as Bernoulli blocks at
/// their observed density and flagged.
GofReport gof_two_stage(const Graph& g, const TwoStageFit& fit, const GofControls& controls);

/// Single ERGM over the whole network.
GofReport gof_ergm(const Graph& g, const ErgmFit& fit, const GofControls& controls);

/// Latent position model at its posterior-mean positions and coefficients.
GofReport gof_lsm(const Graph& g, const LsmSummary& lsm, const ModelTerms& terms, const GofControls& controls);

/// Independent draws of the latent position model.
std::vector<Graph> simulate_lsm(const LsmSummary& lsm, std::size_t count, std::uint64_t seed);

/// CSV panel,bin,observed,lower,median,upper,in_support.
void write_gof_csv(const GofReport& r, std::ostream& out);
/// CSV panel,coverage,support_bins.
void write_gof_summary(const GofReport& r, std::ostream& out);

}  // namespace hergm

#endif
