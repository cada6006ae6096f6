#ifndef HERGM_RNG_HPP
#define HERGM_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace hergm {

/// Child seed for stream `path` under `master`. Used whenever work is split
/// across clusters, replications or chains so results do not depend on the
/// order or thread the work ran on.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    bool bernoulli(double p) { return uniform() < p; }
    /// Uniform integer on [0, n).
    std::uint64_t below(std::uint64_t n);
    double normal() { return normal_(engine_); }
    double normal(double mean, double sd) { return mean + sd * normal_(engine_); }
    double gamma(double shape);
    double chi_squared(double df) { return 2.0 * gamma(0.5 * df); }
    /// Normalized independent gamma(alpha_k) draws.
    std::vector<double> dirichlet(const std::vector<double>& alpha);

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

}  // namespace hergm

#endif
