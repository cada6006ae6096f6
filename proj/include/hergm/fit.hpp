#ifndef HERGM_FIT_HPP
#define HERGM_FIT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hergm/graph.hpp"
#include "hergm/sampler.hpp"
#include "hergm/stats.hpp"

namespace hergm {

enum class FitMethod { Mple, Mcmle };

std::string to_string(FitMethod m);
FitMethod parse_fit_method(const std::string& s);

struct FitDiagnostics {
    std::size_t iterations = 0;
    double gradient_norm = 0;
    std::size_t mc_sample_size = 0;        ///< 0 for MPLE
    StatVector mean_value;                 ///< estimated mu(theta_hat); empty for MPLE
    double effective_sample_size = 0;      ///< importance-weight ESS of the last MCMLE sample
    bool degenerate = false;
    bool converged = false;
    std::vector<double> step_sizes;        ///< |theta_{t+1} - theta_t| per outer iteration
};

struct ErgmFit {
    StatisticSpec spec;
    ThetaVector theta;
    Eigen::VectorXd std_errors;
    FitMethod method = FitMethod::Mple;
    FitDiagnostics diagnostics;
    std::uint64_t seed = 0;
};

/// Maximum pseudo-likelihood: logistic regression of every dyad's state on
/// its change statistics, solved by Newton-Raphson.
///
/// Throws numerical_error for an empty or complete graph, a rank-deficient
/// design (a term with no variation across dyads) or separation, where the
/// estimate diverges; the message carries the divergence direction.
ErgmFit mple(const Graph& g, const StatisticSpec& spec);

struct McmleControls {
    std::size_t sample_size = 1000;
    std::size_t max_sample_size = 16000;
    std::size_t burnin_sweeps = 200;
    std::size_t thin_sweeps = 5;
    std::size_t max_iterations = 50;
    double trust_radius = 1.0;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Monte-Carlo MLE by importance sampling around the current iterate
/// (Geyer-Thompson). Each outer step samples from P_theta_t starting at the
/// observed graph, moves to the maximizer of the approximated log-likelihood
/// ratio inside the trust radius, and stops once every component of the
/// sampled mean statistic is within 3 Monte-Carlo standard errors of the
/// observed statistic. Starts from the MPLE unless theta0 is given.
ErgmFit mcmle(const Graph& g, const StatisticSpec& spec, std::optional<ThetaVector> theta0,
              const McmleControls& controls);

struct DensityEstimate {
    double p_hat = 0;
    double std_error = 0;
    std::size_t edges = 0;
    std::size_t dyads = 0;
};

/// Binomial MLE of the between-cluster tie probability.
DensityEstimate between_density_mle(const Graph& g, const Partition& p);

nlohmann::json to_json(const ErgmFit& fit);
ErgmFit ergm_fit_from_json(const nlohmann::json& j);

}  // namespace hergm

#endif
