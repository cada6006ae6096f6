#include "hergm/lsm.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include "hergm/assignment.hpp"
#include "hergm/errors.hpp"
#include "hergm/format.hpp"
#include "hergm/json_util.hpp"
#include "hergm/rng.hpp"
#include "hergm/spectral.hpp"

namespace hergm {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

double log1pexp(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double pair_ll(bool y, double eta) { return (y ? eta : 0.0) - log1pexp(eta); }

double log_normal_iso(const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& mean, double var) {
    const double d = double(x.size());
    return -0.5 * d * (kLog2Pi + std::log(var)) - 0.5 * (x - mean).squaredNorm() / var;
}

void fix_column_signs(Eigen::MatrixXd& m) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
        Eigen::Index arg;
        if (m.col(k).cwiseAbs().maxCoeff(&arg) > 0 && m(arg, k) < 0)
            m.col(k) = -m.col(k);
    }
}

std::vector<std::vector<double>> geodesics(const Graph& g) {
    const std::size_t n = g.num_nodes();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> dist(n, std::vector<double>(n, inf));
    std::deque<node_t> queue;
    for (node_t s = 0; s < n; ++s) {
        auto& row = dist[s];
        row[s] = 0;
        queue.assign(1, s);
        while (!queue.empty()) {
            const node_t v = queue.front();
            queue.pop_front();
            for (node_t w : g.neighbors(v))
                if (row[w] == inf) {
                    row[w] = row[v] + 1;
                    queue.push_back(w);
                }
        }
    }
    return dist;
}

// Best label map from a draw's components to the reference labels.
std::vector<std::size_t> relabeling(const Eigen::MatrixXd& probs, const std::vector<std::size_t>& reference,
                                    std::size_t K) {
    Eigen::MatrixXd score = Eigen::MatrixXd::Zero(Eigen::Index(K), Eigen::Index(K));
    for (Eigen::Index i = 0; i < probs.rows(); ++i)
        score.col(Eigen::Index(reference[std::size_t(i)])) += probs.row(i).transpose();
    return max_weight_assignment(score);
}

class Chain {
public:
    Chain(const Graph& g, std::size_t K, std::size_t d, const LsmPriors& priors, const LsmControls& controls,
          std::uint64_t seed)
        : g_(g), n_(g.num_nodes()), K_(K), d_(d), pr_(priors), c_(controls), rng_(derive_seed(seed, {0})) {
        adj_.assign(n_ * n_, 0);
        for (const auto& e : g.edge_list())
            adj_[e.i * n_ + e.j] = adj_[e.j * n_ + e.i] = 1;
        beta_prec_ = pr_.beta_cov.inverse();
        initialize(seed);
    }

    double log_beta_prior(double b0, double b1) const {
        Eigen::VectorXd b(pr_.beta_mean.size());
        if (c_.intercept)
            b << b0, b1;
        else
            b << b1;
        const Eigen::VectorXd r = b - pr_.beta_mean;
        return -0.5 * r.dot(beta_prec_ * r);
    }

    void run(LsmPosterior& out) {
        std::size_t acc_z = 0, try_z = 0, acc_b0 = 0, try_b0 = 0, acc_b1 = 0, try_b1 = 0;
        std::size_t win_z = 0, win_tz = 0, win_b0 = 0, win_tb0 = 0, win_b1 = 0, win_tb1 = 0;
        const std::size_t total = c_.burnin + c_.samples * c_.thin;
        for (std::size_t it = 1; it <= total; ++it) {
            const bool burn = it <= c_.burnin;
            std::size_t az = 0;
            for (node_t i = 0; i < n_; ++i)
                az += update_position(i);
            const bool a0 = c_.intercept && update_beta0();
            const bool a1 = update_beta1();
            update_mixture();
            if (burn) {
                win_z += az;
                win_tz += n_;
                win_b0 += a0;
                win_tb0 += c_.intercept;
                win_b1 += a1;
                win_tb1 += 1;
                if (it % c_.tune_interval == 0) {
                    adapt(s_z_, win_z, win_tz);
                    adapt(s_b0_, win_b0, win_tb0);
                    adapt(s_b1_, win_b1, win_tb1);
                    win_z = win_tz = win_b0 = win_tb0 = win_b1 = win_tb1 = 0;
                }
                continue;
            }
            acc_z += az;
            try_z += n_;
            acc_b0 += a0;
            try_b0 += c_.intercept;
            acc_b1 += a1;
            try_b1 += 1;
            if ((it - c_.burnin) % c_.thin == 0)
                retain(out);
        }
        out.acceptance.z = try_z ? double(acc_z) / double(try_z) : 0;
        out.acceptance.beta0 = try_b0 ? double(acc_b0) / double(try_b0) : 0;
        out.acceptance.beta1 = try_b1 ? double(acc_b1) / double(try_b1) : 0;
        auto warn = [&](const char* name, double rate, bool used) {
            if (used && (rate < 0.1 || rate > 0.6)) {
                std::ostringstream os;
                os << "acceptance rate for " << name << " is " << rate << ", outside [0.1, 0.6]";
                out.warnings.push_back(os.str());
            }
        };
        warn("positions", out.acceptance.z, n_ > 1);
        warn("beta0", out.acceptance.beta0, c_.intercept);
        warn("beta1", out.acceptance.beta1, true);
    }

    const Eigen::MatrixXd& reference() const { return reference_; }

private:
    bool edge(node_t i, node_t j) const { return adj_[i * n_ + j] != 0; }

    void adapt(double& scale, std::size_t acc, std::size_t tried) {
        if (tried == 0)
            return;
        const double rate = double(acc) / double(tried);
        scale = std::clamp(scale * std::exp(2.0 * (rate - c_.target_acceptance)), 1e-4, 1e2);
    }

    void initialize(std::uint64_t seed) {
        z_ = init_positions(g_, d_);
        const double rms = std::sqrt(z_.squaredNorm() / double(n_));
        if (rms > 1e-12) {
            z_ /= rms;
        } else {
            // No geometry to start from: small deterministic jitter.
            Rng jitter(derive_seed(seed, {2}));
            for (Eigen::Index i = 0; i < z_.size(); ++i)
                z_.data()[i] = 0.1 * jitter.normal();
        }
        reference_ = z_;

        dist_.resize(Eigen::Index(n_), Eigen::Index(n_));
        for (node_t i = 0; i < n_; ++i)
            for (node_t j = 0; j < n_; ++j)
                dist_(Eigen::Index(i), Eigen::Index(j)) = (z_.row(Eigen::Index(i)) - z_.row(Eigen::Index(j))).norm();
        init_beta();
        ll_.resize(Eigen::Index(n_), Eigen::Index(n_));
        refresh_ll(beta0_, beta1_, ll_);

        auto km = kmeans(z_, K_, 10, 100, derive_seed(seed, {1}));
        m_ = km.labels;
        mu_ = km.centers;
        lambda_.resize(Eigen::Index(K_));
        sigma2_.resize(Eigen::Index(K_));
        std::vector<std::size_t> count(K_, 0);
        Eigen::VectorXd ss = Eigen::VectorXd::Zero(Eigen::Index(K_));
        for (node_t i = 0; i < n_; ++i) {
            ++count[m_[i]];
            ss[Eigen::Index(m_[i])] += (z_.row(Eigen::Index(i)) - mu_.row(Eigen::Index(m_[i]))).squaredNorm();
        }
        double norm = 0;
        for (std::size_t k = 0; k < K_; ++k)
            norm += double(count[k]) + pr_.nu[k];
        for (std::size_t k = 0; k < K_; ++k) {
            const auto kk = Eigen::Index(k);
            lambda_[kk] = (double(count[k]) + pr_.nu[k]) / norm;
            sigma2_[kk] = count[k] > 1 ? std::max(ss[kk] / double(d_ * count[k]), 0.01) : pr_.sigma0_sq;
        }
    }

    // Logistic fit of ties on initial distances.
    void init_beta() {
        double b0 = 0, b1 = 1;
        for (int it = 0; it < 50; ++it) {
            double g0 = 0, g1 = 0, h00 = 0, h01 = 0, h11 = 0;
            for (node_t i = 0; i < n_; ++i)
                for (node_t j = i + 1; j < n_; ++j) {
                    const double dd = dist_(Eigen::Index(i), Eigen::Index(j));
                    const double p = 1.0 / (1.0 + std::exp(-(b0 - b1 * dd)));
                    const double r = (edge(i, j) ? 1.0 : 0.0) - p, w = p * (1 - p);
                    g0 += r;
                    g1 -= r * dd;
                    h00 += w;
                    h01 -= w * dd;
                    h11 += w * dd * dd;
                }
            h00 += 1e-6;
            h11 += 1e-6;
            double s0 = 0, s1 = 0;
            if (c_.intercept) {
                const double det = h00 * h11 - h01 * h01;
                if (!(det > 0))
                    break;
                s0 = (h11 * g0 - h01 * g1) / det;
                s1 = (h00 * g1 - h01 * g0) / det;
            } else {
                s1 = g1 / h11;
            }
            const double scale = std::min(1.0, 5.0 / std::max(std::abs(s0) + std::abs(s1), 1e-300));
            b0 += scale * s0;
            b1 += scale * s1;
            if (!std::isfinite(b0) || !std::isfinite(b1)) {
                b0 = 0;
                b1 = 1;
                break;
            }
            if (std::abs(s0) + std::abs(s1) < 1e-8)
                break;
        }
        beta0_ = c_.intercept ? b0 : 0.0;
        beta1_ = std::clamp(b1, 0.05, 50.0);
        if (!std::isfinite(beta0_))
            beta0_ = 0;
    }

    double refresh_ll(double b0, double b1, Eigen::MatrixXd& ll) const {
        double total = 0;
        for (node_t i = 0; i < n_; ++i) {
            ll(Eigen::Index(i), Eigen::Index(i)) = 0;
            for (node_t j = i + 1; j < n_; ++j) {
                const double v = pair_ll(edge(i, j), b0 - b1 * dist_(Eigen::Index(i), Eigen::Index(j)));
                ll(Eigen::Index(i), Eigen::Index(j)) = ll(Eigen::Index(j), Eigen::Index(i)) = v;
                total += v;
            }
        }
        return total;
    }

    double total_ll() const {
        double t = 0;
        for (node_t i = 0; i < n_; ++i)
            for (node_t j = i + 1; j < n_; ++j)
                t += ll_(Eigen::Index(i), Eigen::Index(j));
        return t;
    }

    bool update_position(node_t i) {
        if (n_ < 2)
            return false;
        const auto ii = Eigen::Index(i);
        Eigen::RowVectorXd prop = z_.row(ii);
        for (std::size_t k = 0; k < d_; ++k)
            prop[Eigen::Index(k)] += s_z_ * rng_.normal();
        row_dist_.resize(Eigen::Index(n_));
        row_ll_.resize(Eigen::Index(n_));
        double delta = 0;
        for (node_t j = 0; j < n_; ++j) {
            if (j == i) {
                row_dist_[Eigen::Index(j)] = 0;
                row_ll_[Eigen::Index(j)] = 0;
                continue;
            }
            const double dd = (prop - z_.row(Eigen::Index(j))).norm();
            const double v = pair_ll(edge(i, j), beta0_ - beta1_ * dd);
            row_dist_[Eigen::Index(j)] = dd;
            row_ll_[Eigen::Index(j)] = v;
            delta += v - ll_(ii, Eigen::Index(j));
        }
        const auto km = Eigen::Index(m_[i]);
        delta += log_normal_iso(prop, mu_.row(km), sigma2_[km]) - log_normal_iso(z_.row(ii), mu_.row(km), sigma2_[km]);
        if (std::log(rng_.uniform()) >= delta)
            return false;
        z_.row(ii) = prop;
        dist_.row(ii) = row_dist_.transpose();
        dist_.col(ii) = row_dist_;
        ll_.row(ii) = row_ll_.transpose();
        ll_.col(ii) = row_ll_;
        return true;
    }

    bool update_beta0() {
        const double prop = beta0_ + s_b0_ * rng_.normal();
        const double cur = total_ll();
        scratch_.resize(Eigen::Index(n_), Eigen::Index(n_));
        const double next = refresh_ll(prop, beta1_, scratch_);
        const double delta = next - cur + log_beta_prior(prop, beta1_) - log_beta_prior(beta0_, beta1_);
        if (std::log(rng_.uniform()) >= delta)
            return false;
        beta0_ = prop;
        ll_.swap(scratch_);
        return true;
    }

    bool update_beta1() {
        const double prop = beta1_ * std::exp(s_b1_ * rng_.normal());
        const double cur = total_ll();
        scratch_.resize(Eigen::Index(n_), Eigen::Index(n_));
        const double next = refresh_ll(beta0_, prop, scratch_);
        const double delta = next - cur + log_beta_prior(beta0_, prop) - log_beta_prior(beta0_, beta1_) +
                             std::log(prop / beta1_);
        if (std::log(rng_.uniform()) >= delta)
            return false;
        beta1_ = prop;
        ll_.swap(scratch_);
        return true;
    }

    void update_mixture() {
        const Eigen::MatrixXd probs = membership_probabilities(z_, lambda_, mu_, sigma2_);
        std::vector<std::size_t> count(K_, 0);
        for (node_t i = 0; i < n_; ++i) {
            double u = rng_.uniform();
            std::size_t k = 0;
            for (; k + 1 < K_; ++k) {
                u -= probs(Eigen::Index(i), Eigen::Index(k));
                if (u < 0)
                    break;
            }
            m_[i] = k;
            ++count[k];
        }
        std::vector<double> post_nu(K_);
        for (std::size_t k = 0; k < K_; ++k)
            post_nu[k] = pr_.nu[k] + double(count[k]);
        const auto w = rng_.dirichlet(post_nu);
        for (std::size_t k = 0; k < K_; ++k)
            lambda_[Eigen::Index(k)] = w[k];
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(Eigen::Index(K_), Eigen::Index(d_));
        for (node_t i = 0; i < n_; ++i)
            sums.row(Eigen::Index(m_[i])) += z_.row(Eigen::Index(i));
        for (std::size_t k = 0; k < K_; ++k) {
            const auto kk = Eigen::Index(k);
            const double prec = double(count[k]) / sigma2_[kk] + 1.0 / pr_.omega2;
            const double sd = 1.0 / std::sqrt(prec);
            for (std::size_t c = 0; c < d_; ++c)
                mu_(kk, Eigen::Index(c)) = sums(kk, Eigen::Index(c)) / sigma2_[kk] / prec + sd * rng_.normal();
        }
        Eigen::VectorXd ss = Eigen::VectorXd::Zero(Eigen::Index(K_));
        for (node_t i = 0; i < n_; ++i)
            ss[Eigen::Index(m_[i])] += (z_.row(Eigen::Index(i)) - mu_.row(Eigen::Index(m_[i]))).squaredNorm();
        for (std::size_t k = 0; k < K_; ++k) {
            const auto kk = Eigen::Index(k);
            sigma2_[kk] = (pr_.sigma0_sq + ss[kk]) / rng_.chi_squared(pr_.alpha + double(d_ * count[k]));
        }
    }

    double log_posterior() const {
        double lp = total_ll() + log_beta_prior(beta0_, beta1_);
        for (node_t i = 0; i < n_; ++i) {
            const auto k = Eigen::Index(m_[i]);
            lp += std::log(lambda_[k]) + log_normal_iso(z_.row(Eigen::Index(i)), mu_.row(k), sigma2_[k]);
        }
        const Eigen::RowVectorXd origin = Eigen::RowVectorXd::Zero(Eigen::Index(d_));
        for (std::size_t k = 0; k < K_; ++k) {
            const auto kk = Eigen::Index(k);
            lp += (pr_.nu[k] - 1) * std::log(lambda_[kk]);
            lp += log_normal_iso(mu_.row(kk), origin, pr_.omega2);
            lp += -(0.5 * pr_.alpha + 1) * std::log(sigma2_[kk]) - 0.5 * pr_.sigma0_sq / sigma2_[kk];
        }
        return lp;
    }

    void retain(LsmPosterior& out) {
        LsmState s;
        s.log_posterior = log_posterior();
        const auto motion = procrustes_fit(z_, reference_);
        s.z = motion.apply(z_);
        s.mu = motion.apply(mu_);
        s.beta0 = beta0_;
        s.beta1 = beta1_;
        s.lambda = lambda_;
        s.sigma2 = sigma2_;
        s.m = m_;
        out.draws.push_back(std::move(s));
    }

    const Graph& g_;
    std::size_t n_, K_, d_;
    LsmPriors pr_;
    LsmControls c_;
    Rng rng_;
    std::vector<char> adj_;
    Eigen::MatrixXd beta_prec_;

    Eigen::MatrixXd z_, reference_, dist_, ll_, scratch_;
    Eigen::VectorXd row_dist_, row_ll_;
    double beta0_ = 0, beta1_ = 1;
    Eigen::VectorXd lambda_, sigma2_;
    Eigen::MatrixXd mu_;
    std::vector<std::size_t> m_;
    double s_z_ = 0.3, s_b0_ = 0.3, s_b1_ = 0.2;
};

}  // namespace

LsmPriors LsmPriors::resolved(std::size_t K, bool intercept) const {
    LsmPriors p = *this;
    const Eigen::Index dim = intercept ? 2 : 1;
    if (p.beta_mean.size() == 0) {
        p.beta_mean = Eigen::VectorXd::Zero(dim);
        p.beta_mean[dim - 1] = 1.0;
    }
    if (p.beta_cov.size() == 0)
        p.beta_cov = 10.0 * Eigen::MatrixXd::Identity(dim, dim);
    if (p.nu.empty())
        p.nu.assign(K, 3.0);
    p.validate(K, intercept);
    return p;
}

void LsmPriors::validate(std::size_t K, bool intercept) const {
    const Eigen::Index dim = intercept ? 2 : 1;
    if (beta_mean.size() != dim || beta_cov.rows() != dim || beta_cov.cols() != dim)
        throw validation_error("LSM beta prior must have dimension " + std::to_string(dim));
    Eigen::LLT<Eigen::MatrixXd> llt(beta_cov);
    if (llt.info() != Eigen::Success || !beta_cov.isApprox(beta_cov.transpose()))
        throw validation_error("LSM beta prior covariance must be symmetric positive definite");
    if (nu.size() != K)
        throw validation_error("LSM Dirichlet prior needs one weight per component");
    for (double v : nu)
        if (!(v > 0))
            throw validation_error("LSM Dirichlet weights must be positive");
    if (!(omega2 > 0) || !(sigma0_sq > 0) || !(alpha > 0))
        throw validation_error("LSM prior scales omega2, sigma0_sq and alpha must be positive");
}

void LsmControls::validate() const {
    if (samples == 0 || thin == 0)
        throw validation_error("LSM needs samples >= 1 and thin >= 1");
    if (tune_interval == 0)
        throw validation_error("LSM tune_interval must be positive");
    if (!(target_acceptance > 0 && target_acceptance < 1))
        throw validation_error("LSM target acceptance must lie in (0, 1)");
}

double lsm_log_likelihood(const Graph& g, const Eigen::MatrixXd& z, double beta0, double beta1) {
    const std::size_t n = g.num_nodes();
    if (std::size_t(z.rows()) != n)
        throw validation_error("position matrix has " + std::to_string(z.rows()) + " rows for " +
                               std::to_string(n) + " nodes");
    double total = 0;
    for (node_t i = 0; i < n; ++i)
        for (node_t j = i + 1; j < n; ++j)
            total += pair_ll(g.has_edge(i, j),
                             beta0 - beta1 * (z.row(Eigen::Index(i)) - z.row(Eigen::Index(j))).norm());
    return total;
}

Eigen::MatrixXd membership_probabilities(const Eigen::MatrixXd& z, const Eigen::VectorXd& lambda,
                                         const Eigen::MatrixXd& mu, const Eigen::VectorXd& sigma2) {
    const auto n = z.rows(), K = lambda.size();
    if (mu.rows() != K || sigma2.size() != K || mu.cols() != z.cols())
        throw validation_error("mixture parameters do not match K or d");
    Eigen::MatrixXd out(n, K);
    Eigen::VectorXd logw(K);
    for (Eigen::Index i = 0; i < n; ++i) {
        double top = -std::numeric_limits<double>::infinity();
        for (Eigen::Index k = 0; k < K; ++k) {
            logw[k] = lambda[k] > 0 ? std::log(lambda[k]) + log_normal_iso(z.row(i), mu.row(k), sigma2[k])
                                    : -std::numeric_limits<double>::infinity();
            top = std::max(top, logw[k]);
        }
        double sum = 0;
        for (Eigen::Index k = 0; k < K; ++k) {
            out(i, k) = std::exp(logw[k] - top);
            sum += out(i, k);
        }
        out.row(i) /= sum;
    }
    return out;
}

Eigen::MatrixXd membership_probabilities(const LsmState& s) {
    return membership_probabilities(s.z, s.lambda, s.mu, s.sigma2);
}

Eigen::MatrixXd init_positions(const Graph& g, std::size_t d) {
    if (d == 0)
        throw validation_error("latent dimension must be at least 1");
    const std::size_t n = g.num_nodes();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(Eigen::Index(n), Eigen::Index(d));
    if (n < 2)
        return out;
    auto geo = geodesics(g);
    double diameter = 0;
    for (const auto& row : geo)
        for (double v : row)
            if (std::isfinite(v))
                diameter = std::max(diameter, v);
    const auto nn = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd d2(nn, nn);
    for (node_t i = 0; i < n; ++i)
        for (node_t j = 0; j < n; ++j) {
            const double v = std::isfinite(geo[i][j]) ? geo[i][j] : diameter + 1;
            d2(Eigen::Index(i), Eigen::Index(j)) = v * v;
        }
    // B = -1/2 J D2 J.
    const Eigen::VectorXd row_mean = d2.rowwise().mean();
    const double all_mean = row_mean.mean();
    Eigen::MatrixXd b(nn, nn);
    for (Eigen::Index i = 0; i < Eigen::Index(n); ++i)
        for (Eigen::Index j = 0; j < Eigen::Index(n); ++j)
            b(i, j) = -0.5 * (d2(i, j) - row_mean[i] - row_mean[j] + all_mean);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b);
    const auto& ev = es.eigenvalues();
    const std::size_t use = std::min(d, n);
    for (std::size_t k = 0; k < use; ++k) {
        const Eigen::Index src = Eigen::Index(n - 1 - k);
        const double lam = ev[src];
        if (lam > 1e-10)
            out.col(Eigen::Index(k)) = es.eigenvectors().col(src) * std::sqrt(lam);
    }
    fix_column_signs(out);
    out.rowwise() -= out.colwise().mean();
    return out;
}

Eigen::MatrixXd RigidMotion::apply(const Eigen::MatrixXd& points) const {
    return ((points.rowwise() - from_mean) * rotation).rowwise() + to_mean;
}

RigidMotion procrustes_fit(const Eigen::MatrixXd& z, const Eigen::MatrixXd& reference) {
    if (z.rows() != reference.rows() || z.cols() != reference.cols())
        throw validation_error("procrustes: configurations differ in shape");
    RigidMotion m;
    m.from_mean = z.colwise().mean();
    m.to_mean = reference.colwise().mean();
    const Eigen::MatrixXd cross = (z.rowwise() - m.from_mean).transpose() * (reference.rowwise() - m.to_mean);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    m.rotation = svd.matrixU() * svd.matrixV().transpose();
    return m;
}

Eigen::MatrixXd procrustes_align(const Eigen::MatrixXd& z, const Eigen::MatrixXd& reference) {
    return procrustes_fit(z, reference).apply(z);
}

LsmPosterior lsm_mcmc(const Graph& g, std::size_t K, std::size_t d, const LsmPriors& priors,
                      const LsmControls& controls, std::uint64_t seed) {
    controls.validate();
    if (K == 0)
        throw validation_error("LSM needs K >= 1");
    if (d == 0)
        throw validation_error("latent dimension must be at least 1");
    if (K > g.num_nodes())
        throw validation_error("LSM needs K <= n (K=" + std::to_string(K) + ", n=" +
                               std::to_string(g.num_nodes()) + ")");
    const auto pr = priors.resolved(K, controls.intercept);

    LsmPosterior post;
    post.draws.reserve(controls.samples);
    Chain chain(g, K, d, pr, controls, seed);
    chain.run(post);
    post.reference = chain.reference();

    for (std::size_t t = 1; t < post.draws.size(); ++t)
        if (post.draws[t].log_posterior > post.draws[post.map_draw].log_posterior)
            post.map_draw = t;
    const auto reference_labels = post.draws[post.map_draw].m;

    const auto n = Eigen::Index(g.num_nodes());
    post.membership = Eigen::MatrixXd::Zero(n, Eigen::Index(K));
    LsmSummary& sm = post.summary;
    sm.intercept = controls.intercept;
    sm.positions = Eigen::MatrixXd::Zero(n, Eigen::Index(d));
    sm.lambda = Eigen::VectorXd::Zero(Eigen::Index(K));
    sm.mu = Eigen::MatrixXd::Zero(Eigen::Index(K), Eigen::Index(d));
    sm.sigma2 = Eigen::VectorXd::Zero(Eigen::Index(K));
    for (auto& s : post.draws) {
        Eigen::MatrixXd probs = membership_probabilities(s);
        const auto map = relabeling(probs, reference_labels, K);
        LsmState r = s;
        Eigen::MatrixXd permuted(n, Eigen::Index(K));
        for (std::size_t k = 0; k < K; ++k) {
            const auto from = Eigen::Index(k), to = Eigen::Index(map[k]);
            r.lambda[to] = s.lambda[from];
            r.mu.row(to) = s.mu.row(from);
            r.sigma2[to] = s.sigma2[from];
            permuted.col(to) = probs.col(from);
        }
        for (auto& label : r.m)
            label = map[label];
        s = std::move(r);
        post.membership += permuted;
        sm.positions += s.z;
        sm.beta0 += s.beta0;
        sm.beta1 += s.beta1;
        sm.lambda += s.lambda;
        sm.mu += s.mu;
        sm.sigma2 += s.sigma2;
    }
    const double count = double(post.draws.size());
    post.membership /= count;
    for (Eigen::Index i = 0; i < n; ++i)
        post.membership.row(i) /= post.membership.row(i).sum();
    sm.positions /= count;
    sm.beta0 /= count;
    sm.beta1 /= count;
    sm.lambda /= count;
    sm.mu /= count;
    sm.sigma2 /= count;
    const double rms = std::sqrt(sm.positions.squaredNorm() / double(n));
    if (rms > 0) {
        const double c = 1.0 / rms;
        sm.positions *= c;
        sm.mu *= c;
        sm.sigma2 *= c * c;
        sm.beta1 /= c;
    }
    sm.membership = post.membership;
    return post;
}

Partition map_membership(const Eigen::MatrixXd& membership) {
    const auto n = membership.rows(), K = membership.cols();
    if (n == 0 || K == 0)
        throw validation_error("map_membership: empty membership matrix");
    std::vector<std::size_t> a(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index k = 1; k < K; ++k)
            if (membership(i, k) > membership(i, best))
                best = k;
        a[std::size_t(i)] = std::size_t(best);
    }
    return Partition(std::move(a), std::size_t(K));
}

Partition map_membership(const LsmPosterior& post) { return map_membership(post.membership); }

nlohmann::json to_json(const LsmSummary& s) {
    nlohmann::json j;
    std::vector<nlohmann::json> pos, memb, mu;
    for (Eigen::Index i = 0; i < s.positions.rows(); ++i)
        pos.push_back(vector_to_json(s.positions.row(i).transpose()));
    for (Eigen::Index i = 0; i < s.membership.rows(); ++i)
        memb.push_back(vector_to_json(s.membership.row(i).transpose()));
    for (Eigen::Index k = 0; k < s.mu.rows(); ++k)
        mu.push_back(vector_to_json(s.mu.row(k).transpose()));
    j["positions"] = pos;
    j["beta0"] = s.beta0;
    j["beta1"] = s.beta1;
    j["intercept"] = s.intercept;
    j["lambda"] = vector_to_json(s.lambda);
    j["mu"] = mu;
    j["sigma2"] = vector_to_json(s.sigma2);
    j["membership"] = memb;
    return j;
}

namespace {

Eigen::MatrixXd rows_from_json(const nlohmann::json& j, const char* what) {
    if (!j.is_array() || j.empty())
        throw validation_error(std::string("LSM summary field '") + what + "' must be a non-empty array");
    std::vector<Eigen::VectorXd> rows;
    for (const auto& r : j)
        rows.push_back(vector_from_json(r));
    Eigen::MatrixXd m(Eigen::Index(rows.size()), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != m.cols())
            throw validation_error(std::string("LSM summary field '") + what + "' has ragged rows");
        m.row(Eigen::Index(i)) = rows[i].transpose();
    }
    return m;
}

}  // namespace

LsmSummary lsm_summary_from_json(const nlohmann::json& j) {
    try {
        LsmSummary s;
        s.positions = rows_from_json(j.at("positions"), "positions");
        s.beta0 = j.at("beta0").get<double>();
        s.beta1 = j.at("beta1").get<double>();
        s.intercept = j.at("intercept").get<bool>();
        s.lambda = vector_from_json(j.at("lambda"));
        s.mu = rows_from_json(j.at("mu"), "mu");
        s.sigma2 = vector_from_json(j.at("sigma2"));
        s.membership = rows_from_json(j.at("membership"), "membership");
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(std::string("malformed LSM summary: ") + e.what());
    }
}

nlohmann::json to_json(const LsmPosterior& post) {
    nlohmann::json j = to_json(post.summary);
    std::vector<std::size_t> labels = map_membership(post).assignments();
    j["map_partition"] = labels;
    j["acceptance"] = {{"positions", post.acceptance.z}, {"beta0", post.acceptance.beta0},
                       {"beta1", post.acceptance.beta1}};
    j["warnings"] = post.warnings;
    j["draws"] = post.draws.size();
    return j;
}

void write_positions(const LsmSummary& s, const Partition& p, std::ostream& out) {
    if (std::size_t(s.positions.rows()) != p.num_nodes())
        throw validation_error("positions and partition differ in size");
    out << "node";
    for (Eigen::Index k = 0; k < s.positions.cols(); ++k)
        out << ",x" << (k + 1);
    out << ",cluster\n";
    for (node_t v = 0; v < p.num_nodes(); ++v) {
        out << v;
        for (Eigen::Index k = 0; k < s.positions.cols(); ++k)
            out << ',' << format_double(s.positions(Eigen::Index(v), k));
        out << ',' << p[v] << '\n';
    }
}

}  // namespace hergm
