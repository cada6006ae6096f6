#ifndef HERGM_LSM_HPP
#define HERGM_LSM_HPP

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hergm/graph.hpp"

namespace hergm {

/// Hyper-parameters of the latent position cluster model.
///
///   beta ~ MVN(beta_mean, beta_cov)   (beta0, beta1) with intercept, else beta1
///   lambda ~ Dirichlet(nu)
///   mu_k ~ MVN(0, omega2 I)
///   sigma2_k ~ sigma0_sq * Inv-chi^2(alpha)
struct LsmPriors {
    Eigen::VectorXd beta_mean;  ///< empty: (0, 1) or (1)
    Eigen::MatrixXd beta_cov;   ///< empty: 10 I
    std::vector<double> nu;     ///< empty: 3 for every component
    double omega2 = 4.0;
    double sigma0_sq = 0.1;
    double alpha = 3.0;

    /// Fills the defaults that depend on K and the intercept, then checks.
    LsmPriors resolved(std::size_t K, bool intercept) const;
    void validate(std::size_t K, bool intercept) const;
};

struct LsmControls {
    std::size_t burnin = 5000;
    std::size_t samples = 2000;
    std::size_t thin = 5;
    bool intercept = true;
    std::size_t tune_interval = 50;  ///< proposal scales adapt every this many burn-in iterations
    double target_acceptance = 0.25;

    void validate() const;
};

struct LsmState {
    Eigen::MatrixXd z;  ///< n x d
    double beta0 = 0;
    double beta1 = 1;
    Eigen::VectorXd lambda;
    Eigen::MatrixXd mu;  ///< K x d
    Eigen::VectorXd sigma2;
    std::vector<std::size_t> m;
    double log_posterior = 0;
};

struct LsmAcceptance {
    double z = 0;
    double beta0 = 0;
    double beta1 = 0;
};

/// Posterior means on the identified scale: positions are rescaled so that
/// sqrt(mean |z_i|^2) = 1, with beta1, mu and sigma2 transformed to leave
/// the likelihood and mixture unchanged.
struct LsmSummary {
    Eigen::MatrixXd positions;
    double beta0 = 0;
    double beta1 = 0;
    bool intercept = true;
    Eigen::VectorXd lambda;
    Eigen::MatrixXd mu;
    Eigen::VectorXd sigma2;
    Eigen::MatrixXd membership;  ///< n x K, rows sum to 1
};

struct LsmPosterior {
    std::vector<LsmState> draws;  ///< aligned to `reference` and relabeled
    Eigen::MatrixXd membership;   ///< n x K averaged membership probabilities
    Eigen::MatrixXd reference;    ///< alignment target (initial configuration)
    std::size_t map_draw = 0;     ///< index of the highest log-posterior draw
    LsmAcceptance acceptance;
    std::vector<std::string> warnings;
    LsmSummary summary;
};

/// logit P(y_ij = 1) = beta0 - beta1 |z_i - z_j|, summed over unordered pairs.
double lsm_log_likelihood(const Graph& g, const Eigen::MatrixXd& z, double beta0, double beta1);

/// Membership probabilities lambda_k phi(z_i; mu_k, sigma2_k I) normalized
/// over k, one row per node.
Eigen::MatrixXd membership_probabilities(const Eigen::MatrixXd& z, const Eigen::VectorXd& lambda,
                                         const Eigen::MatrixXd& mu, const Eigen::VectorXd& sigma2);
Eigen::MatrixXd membership_probabilities(const LsmState& s);

/// Classical multidimensional scaling of geodesic distances, centered.
/// Pairs in different components get distance (largest finite distance + 1).
Eigen::MatrixXd init_positions(const Graph& g, std::size_t d);

struct RigidMotion {
    Eigen::MatrixXd rotation;     ///< d x d orthogonal
    Eigen::RowVectorXd from_mean;
    Eigen::RowVectorXd to_mean;

    Eigen::MatrixXd apply(const Eigen::MatrixXd& points) const;
};

/// Rotation/reflection plus translation taking z closest to reference in
/// Frobenius norm.
RigidMotion procrustes_fit(const Eigen::MatrixXd& z, const Eigen::MatrixXd& reference);
Eigen::MatrixXd procrustes_align(const Eigen::MatrixXd& z, const Eigen::MatrixXd& reference);

/// Bayesian fit of the latent position cluster model by Metropolis-within-
/// Gibbs. Positions and (beta0, log beta1) move by random-walk Metropolis
/// with proposal scales tuned during burn-in; memberships, weights, means
/// and variances are drawn from their full conditionals. Retained draws are
/// aligned to the initial configuration and relabeled to agree with the
/// highest-posterior draw.
LsmPosterior lsm_mcmc(const Graph& g, std::size_t K, std::size_t d, const LsmPriors& priors,
                      const LsmControls& controls, std::uint64_t seed);

/// Highest-probability component per node; ties go to the lowest index.
Partition map_membership(const Eigen::MatrixXd& membership);
Partition map_membership(const LsmPosterior& post);

nlohmann::json to_json(const LsmSummary& s);
LsmSummary lsm_summary_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LsmPosterior& post);

/// CSV `node,x1..xd,cluster` of the summary positions.
void write_positions(const LsmSummary& s, const Partition& p, std::ostream& out);

}  // namespace hergm

#endif
