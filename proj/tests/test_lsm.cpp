#include <doctest.h>

#include <cmath>
#include <random>

#include "hergm/assignment.hpp"
#include "hergm/lsm.hpp"
#include "hergm/rng.hpp"

using namespace hergm;

namespace {

Graph cliques(std::size_t count, std::size_t size) {
    Graph g(count * size);
    for (std::size_t c = 0; c < count; ++c)
        for (node_t i = 0; i < size; ++i)
            for (node_t j = i + 1; j < size; ++j)
                g.add_edge(c * size + i, c * size + j);
    return g;
}

Eigen::Matrix2d rotation(double a) {
    Eigen::Matrix2d r;
    r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    return r;
}

double residual(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a - b).norm(); }

// Best residual over a rotation-angle search (plus reflection) with centroid
// matching, refined by golden-section search around the best grid angle.
double brute_procrustes(const Eigen::MatrixXd& z, const Eigen::MatrixXd& ref) {
    const Eigen::MatrixXd zc = z.rowwise() - z.colwise().mean();
    const Eigen::MatrixXd rc = ref.rowwise() - ref.colwise().mean();
    double best = 1e300;
    for (int flip = 0; flip < 2; ++flip) {
        Eigen::MatrixXd src = zc;
        if (flip)
            src.col(0) = -src.col(0);
        auto f = [&](double a) { return residual(src * rotation(a), rc); };
        const int steps = 20000;
        double arg = 0, fa = 1e300;
        for (int s = 0; s < steps; ++s) {
            const double a = 2 * M_PI * s / steps;
            if (f(a) < fa) {
                fa = f(a);
                arg = a;
            }
        }
        double lo = arg - 2 * M_PI / steps, hi = arg + 2 * M_PI / steps;
        const double g = (std::sqrt(5.0) - 1) / 2;
        for (int it = 0; it < 100; ++it) {
            const double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
            if (f(x1) < f(x2))
                hi = x2;
            else
                lo = x1;
        }
        best = std::min(best, f(0.5 * (lo + hi)));
    }
    return best;
}

LsmControls quick() {
    LsmControls c;
    c.burnin = 1000;
    c.samples = 300;
    c.thin = 2;
    return c;
}

}  // namespace

TEST_CASE("membership probabilities") {
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(1, 2);
    Eigen::VectorXd lambda(2);
    lambda << 0.5, 0.5;
    Eigen::MatrixXd mu(2, 2);
    mu << 1, 0, -1, 0;
    Eigen::VectorXd s2(2);
    s2 << 0.3, 0.3;
    auto p = membership_probabilities(z, lambda, mu, s2);
    CHECK(p(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(p(0, 1) == doctest::Approx(0.5).epsilon(1e-14));

    Eigen::VectorXd one(2);
    one << 1, 0;
    Eigen::MatrixXd far(1, 2);
    far << -50, 3;
    auto q = membership_probabilities(far, one, mu, s2);
    CHECK(q(0, 0) == 1.0);
    CHECK(q(0, 1) == 0.0);

    // z at mu_1, components 4 sigma apart: phi(0) / (phi(0) + phi(4 sigma)).
    const double sigma = 0.7;
    Eigen::MatrixXd m2(2, 2);
    m2 << 0, 0, 4 * sigma, 0;
    Eigen::VectorXd v2(2);
    v2 << sigma * sigma, sigma * sigma;
    Eigen::MatrixXd at(1, 2);
    at << 0, 0;
    const double phi0 = 1 / (2 * M_PI * sigma * sigma);
    const double phi4 = phi0 * std::exp(-0.5 * 16);
    CHECK(membership_probabilities(at, lambda, m2, v2)(0, 0) == doctest::Approx(phi0 / (phi0 + phi4)).epsilon(1e-14));

    std::mt19937_64 rng(51);
    std::normal_distribution<double> nz;
    Eigen::MatrixXd pts(40, 2);
    for (Eigen::Index i = 0; i < pts.size(); ++i)
        pts.data()[i] = 3 * nz(rng);
    Eigen::VectorXd l3(3);
    l3 << 0.2, 0.3, 0.5;
    Eigen::MatrixXd m3(3, 2);
    m3 << 0, 0, 2, 2, -3, 1;
    Eigen::VectorXd s3(3);
    s3 << 0.1, 1, 0.5;
    auto r = membership_probabilities(pts, l3, m3, s3);
    for (Eigen::Index i = 0; i < 40; ++i) {
        CHECK(r.row(i).sum() == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(r.row(i).minCoeff() >= 0);
    }
}

TEST_CASE("MAP membership") {
    Eigen::MatrixXd m(3, 2);
    m << 0.9, 0.1, 0.5, 0.5, 0.2, 0.8;
    auto p = map_membership(m);
    CHECK(p.assignments() == std::vector<std::size_t>{0, 0, 1});
    CHECK(p.num_clusters() == 2);
}

TEST_CASE("initial positions") {
    auto single = init_positions(Graph(1), 2);
    CHECK(single.rows() == 1);
    CHECK(single.norm() == 0.0);

    // Two cliques joined by one long path stretch apart.
    Graph g(22);
    for (node_t i = 0; i < 10; ++i)
        for (node_t j = i + 1; j < 10; ++j) {
            g.add_edge(i, j);
            g.add_edge(12 + i, 12 + j);
        }
    g.add_edge(9, 10);
    g.add_edge(10, 11);
    g.add_edge(11, 12);
    auto z = init_positions(g, 2);
    Eigen::RowVectorXd ca = z.topRows(10).colwise().mean(), cb = z.bottomRows(10).colwise().mean();
    double spread = 0;
    for (Eigen::Index i = 0; i < 10; ++i)
        spread = std::max({spread, (z.row(i) - ca).norm(), (z.row(12 + i) - cb).norm()});
    CHECK((ca - cb).norm() > spread);
    CHECK(z.colwise().mean().norm() < 1e-10);

    // Disconnected cliques are placed at distance diameter + 1.
    auto two = init_positions(cliques(2, 10), 2);
    Eigen::RowVectorXd a = two.topRows(10).colwise().mean(), b = two.bottomRows(10).colwise().mean();
    CHECK((a - b).norm() > 1.0);

    // Complete graph: every projected distance is at most the geodesic 1.
    auto k = init_positions(cliques(1, 20), 2);
    for (Eigen::Index i = 0; i < 20; ++i)
        for (Eigen::Index j = 0; j < 20; ++j)
            CHECK((k.row(i) - k.row(j)).norm() <= 1 + 1e-9);
    CHECK(std::sqrt(k.squaredNorm() / 20) < 0.5);
    CHECK_THROWS_AS(init_positions(g, 0), validation_error);
}

TEST_CASE("Procrustes alignment") {
    std::mt19937_64 rng(52);
    std::normal_distribution<double> nz;
    Eigen::MatrixXd ref(25, 2);
    for (Eigen::Index i = 0; i < ref.size(); ++i)
        ref.data()[i] = nz(rng);
    CHECK(residual(procrustes_align(ref, ref), ref) < 1e-12);

    Eigen::RowVector2d shift(3, -1);
    Eigen::MatrixXd moved = (ref * rotation(1.1)).rowwise() + shift;
    CHECK(residual(procrustes_align(moved, ref), ref) < 1e-10);
    Eigen::MatrixXd mirrored = moved;
    mirrored.col(1) = -mirrored.col(1);
    CHECK(residual(procrustes_align(mirrored, ref), ref) < 1e-10);

    Eigen::MatrixXd noise(25, 2);
    for (Eigen::Index i = 0; i < noise.size(); ++i)
        noise.data()[i] = 0.1 * nz(rng);
    Eigen::MatrixXd noisy = ((ref + noise) * rotation(-2.3)).rowwise() + shift;
    const double got = residual(procrustes_align(noisy, ref), ref);
    CHECK(got == doctest::Approx(brute_procrustes(noisy, ref)).epsilon(1e-6));
    CHECK(got <= noise.norm() + 1e-12);
    CHECK(got <= residual(noisy, ref));

    auto motion = procrustes_fit(noisy, ref);
    CHECK((motion.rotation.transpose() * motion.rotation - Eigen::Matrix2d::Identity()).norm() < 1e-12);
}

TEST_CASE("likelihood is invariant under rigid motions") {
    std::mt19937_64 rng(53);
    std::normal_distribution<double> nz;
    std::bernoulli_distribution coin(0.3);
    Graph g(15);
    for (node_t i = 0; i < 15; ++i)
        for (node_t j = i + 1; j < 15; ++j)
            if (coin(rng))
                g.add_edge(i, j);
    Eigen::MatrixXd z(15, 2);
    for (Eigen::Index i = 0; i < z.size(); ++i)
        z.data()[i] = nz(rng);
    const double base = lsm_log_likelihood(g, z, 0.4, 1.3);
    Eigen::MatrixXd moved = (z * rotation(0.7)).rowwise() + Eigen::RowVector2d(5, 2);
    moved.col(0) = -moved.col(0);
    CHECK(std::abs(lsm_log_likelihood(g, moved, 0.4, 1.3) - base) < 1e-10);

    // Against a direct sum over pairs.
    double direct = 0;
    for (node_t i = 0; i < 15; ++i)
        for (node_t j = i + 1; j < 15; ++j) {
            const double eta = 0.4 - 1.3 * (z.row(Eigen::Index(i)) - z.row(Eigen::Index(j))).norm();
            const double p = 1 / (1 + std::exp(-eta));
            direct += g.has_edge(i, j) ? std::log(p) : std::log(1 - p);
        }
    CHECK(base == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("Dirichlet draws have the conjugate mean") {
    Rng rng(54);
    const std::vector<double> alpha{3 + 12, 3 + 5, 3 + 0};
    const double total = 26;
    std::vector<double> mean(3, 0);
    const int reps = 20000;
    for (int r = 0; r < reps; ++r) {
        auto w = rng.dirichlet(alpha);
        CHECK(std::abs(w[0] + w[1] + w[2] - 1) < 1e-12);
        for (int k = 0; k < 3; ++k)
            mean[k] += w[k] / reps;
    }
    for (int k = 0; k < 3; ++k) {
        const double a = alpha[k] / total;
        const double sd = std::sqrt(a * (1 - a) / (total + 1) / reps);
        CHECK(std::abs(mean[k] - a) < 4 * sd);
    }
}

TEST_CASE("LSM MCMC") {
    SUBCASE("one component") {
        auto post = lsm_mcmc(cliques(2, 5), 1, 2, LsmPriors{}, quick(), 3);
        CHECK(post.membership.cols() == 1);
        for (Eigen::Index i = 0; i < post.membership.rows(); ++i)
            CHECK(post.membership(i, 0) == 1.0);
        CHECK(map_membership(post).num_clusters() == 1);
    }
    SUBCASE("two disconnected cliques are separated") {
        auto g = cliques(2, 10);
        auto post = lsm_mcmc(g, 2, 2, LsmPriors{}, quick(), 5);
        CHECK(misclustering_rate(map_membership(post), Partition::contiguous({10, 10})) == 0.0);
        CHECK(post.draws.size() == 300);
        for (const auto& s : post.draws) {
            auto p = membership_probabilities(s);
            for (Eigen::Index i = 0; i < p.rows(); ++i)
                CHECK(p.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(s.lambda.sum() == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(s.sigma2.minCoeff() > 0);
            CHECK(s.beta1 > 0);
        }
        const auto& pos = post.summary.positions;
        CHECK(std::sqrt(pos.squaredNorm() / 20) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(post.acceptance.z > 0);

        // Identical seed, identical summaries.
        auto again = lsm_mcmc(g, 2, 2, LsmPriors{}, quick(), 5);
        CHECK(again.summary.positions == pos);
        CHECK(again.membership == post.membership);
        CHECK(to_json(again).dump() == to_json(post).dump());
    }
    SUBCASE("rescaling preserves the fitted tie probabilities") {
        auto g = cliques(2, 6);
        g.add_edge(0, 6);
        auto post = lsm_mcmc(g, 2, 2, LsmPriors{}, quick(), 9);
        // beta1 * distance is scale free, so the likelihood at the raw posterior
        // mean equals the likelihood at the rescaled summary.
        Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(12, 2);
        double b1 = 0;
        for (const auto& s : post.draws) {
            raw += s.z / double(post.draws.size());
            b1 += s.beta1 / double(post.draws.size());
        }
        CHECK(lsm_log_likelihood(g, raw, post.summary.beta0, b1) ==
              doctest::Approx(lsm_log_likelihood(g, post.summary.positions, post.summary.beta0, post.summary.beta1))
                  .epsilon(1e-10));
    }
    SUBCASE("validation") {
        CHECK_THROWS_AS(lsm_mcmc(cliques(1, 3), 4, 2, LsmPriors{}, quick(), 1), validation_error);
        CHECK_THROWS_AS(lsm_mcmc(cliques(1, 3), 0, 2, LsmPriors{}, quick(), 1), validation_error);
        LsmPriors bad;
        bad.omega2 = -1;
        CHECK_THROWS_AS(lsm_mcmc(cliques(1, 3), 1, 2, bad, quick(), 1), validation_error);
        LsmPriors cov;
        cov.beta_cov = Eigen::Matrix2d::Zero();
        CHECK_THROWS_AS(lsm_mcmc(cliques(1, 3), 1, 2, cov, quick(), 1), validation_error);
    }
}

TEST_CASE("LSM summary JSON round trip") {
    auto post = lsm_mcmc(cliques(2, 4), 2, 2, LsmPriors{}, quick(), 2);
    auto j = to_json(post.summary);
    auto back = lsm_summary_from_json(j);
    CHECK(back.positions == post.summary.positions);
    CHECK(back.beta1 == post.summary.beta1);
    CHECK(to_json(back).dump() == j.dump());
    CHECK_THROWS_AS(lsm_summary_from_json(nlohmann::json::object()), validation_error);
}
