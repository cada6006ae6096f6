#include "hergm/fit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "hergm/json_util.hpp"

namespace hergm {

std::string to_string(FitMethod m) { return m == FitMethod::Mple ? "MPLE" : "MCMLE"; }

FitMethod parse_fit_method(const std::string& s) {
    if (s == "mple" || s == "MPLE")
        return FitMethod::Mple;
    if (s == "mcmle" || s == "MCMLE")
        return FitMethod::Mcmle;
    throw validation_error("unknown fit method '" + s + "' (expected mple or mcmle)");
}

namespace {

constexpr double kDivergenceNorm = 50.0;
constexpr double kCertainLogit = 15.0;

std::string describe_direction(const StatisticSpec& spec, const Eigen::VectorXd& v) {
    std::ostringstream os;
    const Eigen::VectorXd u = v.normalized();
    os << "(";
    for (std::size_t t = 0; t < spec.size(); ++t)
        os << (t ? ", " : "") << spec[t].name() << "=" << u[static_cast<Eigen::Index>(t)];
    os << ")";
    return os.str();
}

// Dyads grouped by identical change-statistic rows.
struct LogisticDesign {
    Eigen::MatrixXd x;         // distinct rows
    Eigen::VectorXd trials;    // dyads per row
    Eigen::VectorXd successes; // edges per row
};

LogisticDesign build_design(const Graph& g, const StatisticSpec& spec) {
    std::map<std::vector<double>, std::pair<double, double>> rows;
    std::vector<double> c(spec.size());
    const std::size_t n = g.num_nodes();
    for (node_t i = 0; i < n; ++i)
        for (node_t j = i + 1; j < n; ++j) {
            DyadIndex d(i, j);
            change_statistics(g, d, spec, c);
            auto& r = rows[c];
            r.first += 1;
            r.second += g.has_edge(d) ? 1 : 0;
        }
    LogisticDesign out;
    const auto R = static_cast<Eigen::Index>(rows.size());
    out.x.resize(R, static_cast<Eigen::Index>(spec.size()));
    out.trials.resize(R);
    out.successes.resize(R);
    Eigen::Index r = 0;
    for (const auto& [key, val] : rows) {
        for (std::size_t t = 0; t < key.size(); ++t)
            out.x(r, static_cast<Eigen::Index>(t)) = key[t];
        out.trials[r] = val.first;
        out.successes[r] = val.second;
        ++r;
    }
    return out;
}

double log1pexp(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double logistic_loglik(const LogisticDesign& d, const Eigen::VectorXd& theta) {
    const Eigen::VectorXd eta = d.x * theta;
    double ll = 0;
    for (Eigen::Index r = 0; r < eta.size(); ++r)
        ll += d.successes[r] * eta[r] - d.trials[r] * log1pexp(eta[r]);
    return ll;
}

}  // namespace

ErgmFit mple(const Graph& g, const StatisticSpec& spec) {
    spec.check_nodes(g.num_nodes());
    const std::size_t m = num_dyads(g.num_nodes());
    if (m == 0)
        throw validation_error("MPLE needs at least two nodes");
    if (g.num_edges() == 0)
        throw numerical_error("MPLE does not exist for an empty graph (edges coefficient diverges to -inf)");
    if (g.num_edges() == m)
        throw numerical_error("MPLE does not exist for a complete graph (edges coefficient diverges to +inf)");

    const auto design = build_design(g, spec);
    const auto p = static_cast<Eigen::Index>(spec.size());
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(p);
    if (int e = spec.find(TermKind::Edges); e >= 0)
        theta[e] = logit(g.density());

    ErgmFit fit{spec, theta, Eigen::VectorXd::Zero(p), FitMethod::Mple, {}, 0};
    double ll = logistic_loglik(design, theta);
    Eigen::MatrixXd info(p, p);
    for (std::size_t it = 1; it <= 100; ++it) {
        const Eigen::VectorXd eta = design.x * theta;
        Eigen::VectorXd resid(eta.size()), w(eta.size());
        for (Eigen::Index r = 0; r < eta.size(); ++r) {
            const double pr = expit(eta[r]);
            resid[r] = design.successes[r] - design.trials[r] * pr;
            w[r] = design.trials[r] * pr * (1 - pr);
        }
        const Eigen::VectorXd grad = design.x.transpose() * resid;
        info = design.x.transpose() * w.asDiagonal() * design.x;
        fit.diagnostics.iterations = it;
        fit.diagnostics.gradient_norm = grad.norm();
        if (grad.norm() < 1e-8) {
            fit.diagnostics.converged = true;
            break;
        }
        if (theta.norm() > kDivergenceNorm)
            throw numerical_error("MPLE does not exist (separation): estimate diverges along " +
                                  describe_direction(spec, theta));
        Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= 1e-12 * info.norm())
            throw numerical_error("MPLE design is rank deficient or separated for spec '" + spec.to_string() +
                                  "' (some term has no variation across dyads)");
        Eigen::VectorXd step = ldlt.solve(grad);
        double scale = 1.0;
        Eigen::VectorXd next = theta + step;
        double ll_next = logistic_loglik(design, next);
        while (ll_next < ll - 1e-12 * std::abs(ll) && scale > 1e-6) {
            scale *= 0.5;
            next = theta + scale * step;
            ll_next = logistic_loglik(design, next);
        }
        fit.diagnostics.step_sizes.push_back((next - theta).norm());
        theta = next;
        ll = ll_next;
    }
    // Under (quasi-)separation the gradient can vanish numerically while some
    // rows are fitted as certain; no finite maximizer exists in that case.
    double max_eta = 0;
    {
        const Eigen::VectorXd eta = design.x * theta;
        for (Eigen::Index r = 0; r < eta.size(); ++r) {
            const bool pure = design.successes[r] == 0 || design.successes[r] == design.trials[r];
            if (pure)
                max_eta = std::max(max_eta, std::abs(eta[r]));
        }
    }
    if (!fit.diagnostics.converged || max_eta > kCertainLogit) {
        if (theta.norm() > 0.5 * kDivergenceNorm || max_eta > kCertainLogit)
            throw numerical_error("MPLE does not exist (separation): estimate diverges along " +
                                  describe_direction(spec, theta));
    }
    fit.theta = theta;
    const Eigen::MatrixXd cov = info.inverse();
    for (Eigen::Index t = 0; t < p; ++t)
        fit.std_errors[t] = std::sqrt(std::max(0.0, cov(t, t)));
    return fit;
}

// ---------------------------------------------------------------------------
// MCMLE

void McmleControls::validate() const {
    if (sample_size < 2 || max_sample_size < sample_size)
        throw validation_error("mcmle: need 2 <= sample_size <= max_sample_size");
    if (thin_sweeps == 0 || max_iterations == 0)
        throw validation_error("mcmle: thin_sweeps and max_iterations must be positive");
    if (!(trust_radius > 0))
        throw validation_error("mcmle: trust_radius must be positive");
}

namespace {

// Normalized importance weights exp(delta' D_s) / sum.
Eigen::VectorXd importance_weights(const Eigen::MatrixXd& diff, const Eigen::VectorXd& delta) {
    Eigen::VectorXd a = diff * delta;
    const double top = a.maxCoeff();
    Eigen::VectorXd w = (a.array() - top).exp();
    return w / w.sum();
}

double log_mean_exp(const Eigen::MatrixXd& diff, const Eigen::VectorXd& delta) {
    Eigen::VectorXd a = diff * delta;
    const double top = a.maxCoeff();
    return top + std::log((a.array() - top).exp().mean());
}

Eigen::MatrixXd weighted_covariance(const Eigen::MatrixXd& x, const Eigen::VectorXd& w, Eigen::VectorXd& mean) {
    mean = x.transpose() * w;
    const Eigen::MatrixXd c = x.rowwise() - mean.transpose();
    return c.transpose() * w.asDiagonal() * c;
}

// Minimizes log mean exp(delta' D) over |delta| <= radius, where D holds
// sampled minus observed statistics; its negative approximates
// l(theta_t + delta) - l(theta_t).
Eigen::VectorXd importance_step(const Eigen::MatrixXd& diff, double radius) {
    const auto p = diff.cols();
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(p);
    double f = log_mean_exp(diff, delta);
    for (int it = 0; it < 100; ++it) {
        const Eigen::VectorXd w = importance_weights(diff, delta);
        Eigen::VectorXd grad;
        Eigen::MatrixXd hess = weighted_covariance(diff, w, grad);
        if (grad.norm() < 1e-10)
            break;
        hess.diagonal().array() += 1e-10 * (1.0 + hess.diagonal().array().abs());
        Eigen::VectorXd step = -hess.ldlt().solve(grad);
        if (!step.allFinite())
            step = -grad;
        double scale = 1.0;
        Eigen::VectorXd next = delta + step;
        double f_next = log_mean_exp(diff, next);
        while (!(f_next <= f) && scale > 1e-8) {
            scale *= 0.5;
            next = delta + scale * step;
            f_next = log_mean_exp(diff, next);
        }
        if (next.norm() > radius) {
            // Walk from the current point to the sphere along the step.
            const Eigen::VectorXd s = next - delta;
            const double a = s.squaredNorm(), b = 2 * delta.dot(s), c = delta.squaredNorm() - radius * radius;
            const double tau = (-b + std::sqrt(std::max(0.0, b * b - 4 * a * c))) / (2 * a);
            return delta + tau * s;
        }
        const bool stalled = f - f_next < 1e-14 * (1 + std::abs(f));
        delta = next;
        f = f_next;
        if (stalled)
            break;
    }
    return delta;
}

bool outside_sample_range(const Eigen::MatrixXd& diff) {
    for (Eigen::Index t = 0; t < diff.cols(); ++t) {
        const double lo = diff.col(t).minCoeff(), hi = diff.col(t).maxCoeff();
        if (lo > 0 || hi < 0)
            return true;
    }
    return false;
}

}  // namespace

namespace {

// MPLE, or where the pseudo-likelihood is separated although the graph is
// neither empty nor complete, the Bernoulli fit with the other terms at 0.
ThetaVector mcmle_start(const Graph& g, const StatisticSpec& spec) {
    try {
        return mple(g, spec).theta;
    } catch (const numerical_error&) {
        const std::size_t m = num_dyads(g.num_nodes());
        if (g.num_edges() == 0 || g.num_edges() == m)
            throw;
        ThetaVector theta = ThetaVector::Zero(static_cast<Eigen::Index>(spec.size()));
        for (std::size_t t = 0; t < spec.size(); ++t)
            if (spec[t].kind == TermKind::Edges)
                theta[static_cast<Eigen::Index>(t)] = logit(g.density());
        return theta;
    }
}

}  // namespace

ErgmFit mcmle(const Graph& g, const StatisticSpec& spec, std::optional<ThetaVector> theta0,
              const McmleControls& controls) {
    controls.validate();
    spec.check_nodes(g.num_nodes());
    ThetaVector theta = theta0 ? *theta0 : mcmle_start(g, spec);
    check_theta(spec, theta);
    const StatVector observed = stat_vector(g, spec);
    const auto p = static_cast<Eigen::Index>(spec.size());

    ErgmFit fit{spec, theta, Eigen::VectorXd::Zero(p), FitMethod::Mcmle, {}, controls.seed};
    std::size_t m = controls.sample_size;
    Eigen::MatrixXd diff;
    Eigen::VectorXd delta;
    bool degenerate = false;
    for (std::size_t it = 1; it <= controls.max_iterations; ++it) {
        SamplerControls sc;
        sc.burnin_sweeps = controls.burnin_sweeps;
        sc.thin_sweeps = controls.thin_sweeps;
        sc.n_samples = m;
        sc.seed = derive_seed(controls.seed, {it});
        sc.keep_graphs = false;
        const auto sample = gibbs_sample_from(g, spec, theta, sc);
        degenerate = sample.degenerate;
        diff = sample.stats.rowwise() - observed.transpose();

        const Eigen::VectorXd mean = diff.colwise().mean();
        const Eigen::VectorXd sd =
            ((diff.rowwise() - mean.transpose()).array().square().colwise().sum() / double(m - 1)).sqrt();
        bool close = true;
        for (Eigen::Index t = 0; t < p; ++t)
            close = close && std::abs(mean[t]) <= 3.0 * sd[t] / std::sqrt(double(m));

        delta = importance_step(diff, controls.trust_radius);
        const Eigen::VectorXd w = importance_weights(diff, delta);
        const double ess = 1.0 / w.squaredNorm();
        fit.diagnostics.iterations = it;
        fit.diagnostics.mc_sample_size = m;
        fit.diagnostics.effective_sample_size = ess;
        fit.diagnostics.step_sizes.push_back(delta.norm());
        theta += delta;
        if (close) {
            fit.diagnostics.converged = true;
            break;
        }
        if (ess < double(m) / 10.0)
            m = std::min(2 * m, controls.max_sample_size);
    }
    if (!fit.diagnostics.converged && outside_sample_range(diff))
        throw numerical_error("MCMLE failed: observed statistics lie outside every sampled network's statistics "
                              "(importance weights degenerate); increase the MC sample size or the iteration budget");

    fit.theta = theta;
    const Eigen::VectorXd w = importance_weights(diff, delta);
    Eigen::VectorXd mean_diff;
    const Eigen::MatrixXd cov = weighted_covariance(diff, w, mean_diff);
    fit.diagnostics.mean_value = observed + mean_diff;
    fit.diagnostics.gradient_norm = mean_diff.norm();
    fit.diagnostics.degenerate = degenerate;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(cov);
    if (lu.isInvertible()) {
        const Eigen::MatrixXd inv = lu.inverse();
        for (Eigen::Index t = 0; t < p; ++t)
            fit.std_errors[t] = std::sqrt(std::max(0.0, inv(t, t)));
    } else {
        fit.std_errors.setConstant(std::numeric_limits<double>::quiet_NaN());
    }
    return fit;
}

// ---------------------------------------------------------------------------

DensityEstimate between_density_mle(const Graph& g, const Partition& p) {
    if (p.num_clusters() < 2)
        throw validation_error("between-cluster density needs K >= 2");
    const auto c = between_edge_counts(g, p);
    if (c.dyads == 0)
        throw validation_error("partition has no between-cluster dyads");
    DensityEstimate e;
    e.edges = c.edges;
    e.dyads = c.dyads;
    e.p_hat = static_cast<double>(c.edges) / static_cast<double>(c.dyads);
    e.std_error = std::sqrt(e.p_hat * (1 - e.p_hat) / static_cast<double>(c.dyads));
    return e;
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const ErgmFit& fit) {
    nlohmann::json d = {
        {"iterations", fit.diagnostics.iterations},
        {"gradient_norm", fit.diagnostics.gradient_norm},
        {"mc_sample_size", fit.diagnostics.mc_sample_size},
        {"effective_sample_size", fit.diagnostics.effective_sample_size},
        {"mean_value", vector_to_json(fit.diagnostics.mean_value)},
        {"degenerate", fit.diagnostics.degenerate},
        {"converged", fit.diagnostics.converged},
        {"step_sizes", fit.diagnostics.step_sizes},
    };
    return {
        {"spec", fit.spec.to_string()},
        {"theta_hat", vector_to_json(fit.theta)},
        {"std_errors", vector_to_json(fit.std_errors)},
        {"method", to_string(fit.method)},
        {"seed", fit.seed},
        {"diagnostics", d},
    };
}

ErgmFit ergm_fit_from_json(const nlohmann::json& j) {
    try {
        ErgmFit fit{StatisticSpec::parse(j.at("spec").get<std::string>()),
                    vector_from_json(j.at("theta_hat")),
                    vector_from_json(j.at("std_errors")),
                    parse_fit_method(j.at("method").get<std::string>()),
                    {},
                    j.value("seed", std::uint64_t{0})};
        check_theta(fit.spec, fit.theta);
        if (j.contains("diagnostics")) {
            const auto& d = j.at("diagnostics");
            fit.diagnostics.iterations = d.value("iterations", std::size_t{0});
            fit.diagnostics.gradient_norm = d.value("gradient_norm", 0.0);
            fit.diagnostics.mc_sample_size = d.value("mc_sample_size", std::size_t{0});
            fit.diagnostics.effective_sample_size = d.value("effective_sample_size", 0.0);
            if (d.contains("mean_value"))
                fit.diagnostics.mean_value = vector_from_json(d.at("mean_value"));
            fit.diagnostics.degenerate = d.value("degenerate", false);
            fit.diagnostics.converged = d.value("converged", false);
            fit.diagnostics.step_sizes = d.value("step_sizes", std::vector<double>{});
        }
        return fit;
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(std::string("malformed ERGM fit JSON: ") + e.what());
    }
}

}  // namespace hergm
