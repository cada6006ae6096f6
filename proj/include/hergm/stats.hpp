#ifndef HERGM_STATS_HPP
#define HERGM_STATS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "hergm/graph.hpp"

namespace hergm {

enum class TermKind { Edges, KStar, Triangles, Gwdsp, Gwesp, DegreeCount };

/// One sufficient statistic. `order` is k for KStar / DegreeCount, `decay`
/// the fixed geometric-weight decay for Gwdsp / Gwesp.
struct Term {
    TermKind kind;
    std::size_t order = 0;
    double decay = 0.0;

    static Term edges() { return {TermKind::Edges}; }
    static Term kstar(std::size_t k) { return {TermKind::KStar, k}; }
    static Term triangles() { return {TermKind::Triangles}; }
    static Term gwdsp(double decay) { return {TermKind::Gwdsp, 0, decay}; }
    static Term gwesp(double decay) { return {TermKind::Gwesp, 0, decay}; }
    static Term degree(std::size_t k) { return {TermKind::DegreeCount, k}; }

    std::string name() const;
    /// Smallest node count on which the term can be evaluated.
    std::size_t min_nodes() const;

    friend bool operator==(const Term&, const Term&) = default;
};

using StatVector = Eigen::VectorXd;

/// Ordered list of terms; the order fixes the coordinates of theta.
class StatisticSpec {
public:
    explicit StatisticSpec(std::vector<Term> terms);

    /// Parses the textual form, e.g. "edges,kstar(2),triangles,gwdsp(0.5)".
    static StatisticSpec parse(std::string_view text);
    std::string to_string() const;

    std::size_t size() const { return terms_.size(); }
    const std::vector<Term>& terms() const { return terms_; }
    const Term& operator[](std::size_t i) const { return terms_[i]; }

    /// Index of the first term of this kind, or -1.
    int find(TermKind kind) const;
    std::size_t min_nodes() const;
    /// True if every term is a sum of per-dyad terms (only Edges here).
    bool dyad_independent() const;
    /// Throws if some term cannot be evaluated on n nodes.
    void check_nodes(std::size_t n) const;

    friend bool operator==(const StatisticSpec&, const StatisticSpec&) = default;

private:
    std::vector<Term> terms_;
};

// Individual statistics.

std::size_t count_edges(const Graph& g);
/// Sum over nodes of C(deg, k). Requires k >= 2.
double k_stars(const Graph& g, std::size_t k);
std::uint64_t triangles(const Graph& g);
/// |N(i) & N(j)|; independent of whether {i,j} itself is an edge.
std::size_t shared_partners(const Graph& g, const DyadIndex& d);
/// esp[k] = number of edges whose endpoints have exactly k shared partners.
std::vector<std::uint64_t> esp_histogram(const Graph& g);
/// dsp[k] = number of dyads i<j (edge or not) with exactly k shared partners.
std::vector<std::uint64_t> dsp_histogram(const Graph& g);
double gwesp(const Graph& g, double decay);
double gwdsp(const Graph& g, double decay);
/// Number of nodes of degree exactly k. Requires k <= n-1.
std::size_t degree_count(const Graph& g, std::size_t k);

/// Geometric weight e^d * (1 - (1 - e^-d)^s) applied to a count of s shared partners.
double geometric_weight(double decay, std::size_t s);

StatVector stat_vector(const Graph& g, const StatisticSpec& spec);

/// S(y with d) - S(y without d), computed from local structure around d.
void change_statistics(const Graph& g, const DyadIndex& d, const StatisticSpec& spec, std::span<double> out);
StatVector change_statistics(const Graph& g, const DyadIndex& d, const StatisticSpec& spec);

}  // namespace hergm

#endif
