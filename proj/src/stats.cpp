#include "hergm/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>

#include "hergm/format.hpp"

namespace hergm {

namespace {

double binomial(std::size_t n, std::size_t k) {
    if (k > n)
        return 0.0;
    k = std::min(k, n - k);
    double r = 1.0;
    for (std::size_t t = 1; t <= k; ++t)
        r = r * static_cast<double>(n - k + t) / static_cast<double>(t);
    return std::round(r);
}

std::string trim_lower(std::string_view s) {
    std::string out;
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c)))
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
}

// Splits "name(arg)" into name and arg; arg empty when absent.
void split_call(const std::string& tok, std::string& name, std::string& arg) {
    auto open = tok.find('(');
    if (open == std::string::npos) {
        name = tok;
        arg.clear();
        return;
    }
    if (tok.back() != ')')
        throw validation_error("malformed term '" + tok + "'");
    name = tok.substr(0, open);
    arg = tok.substr(open + 1, tok.size() - open - 2);
    if (arg.empty())
        throw validation_error("empty argument in term '" + tok + "'");
}

std::size_t parse_order(const std::string& tok, const std::string& arg) {
    std::size_t k = 0;
    auto res = std::from_chars(arg.data(), arg.data() + arg.size(), k);
    if (res.ec != std::errc() || res.ptr != arg.data() + arg.size())
        throw validation_error("term '" + tok + "' needs a non-negative integer argument");
    return k;
}

double parse_decay(const std::string& tok, const std::string& arg) {
    if (arg.empty())
        return 0.5;
    double x = 0;
    auto res = std::from_chars(arg.data(), arg.data() + arg.size(), x);
    if (res.ec != std::errc() || res.ptr != arg.data() + arg.size())
        throw validation_error("term '" + tok + "' needs a numeric decay");
    return x;
}

void check_term(const Term& t) {
    switch (t.kind) {
    case TermKind::KStar:
        if (t.order < 2)
            throw validation_error("kstar order must be >= 2");
        break;
    case TermKind::Gwdsp:
    case TermKind::Gwesp:
        if (!std::isfinite(t.decay) || t.decay < 0)
            throw validation_error("decay of " + t.name() + " must be finite and non-negative");
        break;
    default:
        break;
    }
}

}  // namespace

std::string Term::name() const {
    switch (kind) {
    case TermKind::Edges: return "edges";
    case TermKind::KStar: return "kstar(" + std::to_string(order) + ")";
    case TermKind::Triangles: return "triangles";
    case TermKind::Gwdsp: return "gwdsp(" + format_double(decay) + ")";
    case TermKind::Gwesp: return "gwesp(" + format_double(decay) + ")";
    case TermKind::DegreeCount: return "degree(" + std::to_string(order) + ")";
    }
    return "?";
}

std::size_t Term::min_nodes() const {
    switch (kind) {
    case TermKind::Edges: return 2;
    case TermKind::KStar: return order + 1;
    case TermKind::Triangles:
    case TermKind::Gwdsp:
    case TermKind::Gwesp: return 3;
    case TermKind::DegreeCount: return order + 1;
    }
    return 2;
}

StatisticSpec::StatisticSpec(std::vector<Term> terms) : terms_(std::move(terms)) {
    if (terms_.empty())
        throw validation_error("statistic spec needs at least one term");
    for (const auto& t : terms_)
        check_term(t);
}

StatisticSpec StatisticSpec::parse(std::string_view text) {
    const std::string s = trim_lower(text);
    std::vector<Term> terms;
    std::size_t start = 0;
    int depth = 0;
    for (std::size_t pos = 0; pos <= s.size(); ++pos) {
        if (pos < s.size() && s[pos] == '(')
            ++depth;
        if (pos < s.size() && s[pos] == ')')
            --depth;
        if (pos < s.size() && !(s[pos] == ',' && depth == 0))
            continue;
        const std::string tok = s.substr(start, pos - start);
        start = pos + 1;
        if (tok.empty())
            throw validation_error("empty term in statistic spec '" + std::string(text) + "'");
        std::string name, arg;
        split_call(tok, name, arg);
        if (name == "edges" && arg.empty())
            terms.push_back(Term::edges());
        else if ((name == "triangles" || name == "triangle") && arg.empty())
            terms.push_back(Term::triangles());
        else if (name == "kstar" && !arg.empty())
            terms.push_back(Term::kstar(parse_order(tok, arg)));
        else if (name == "degree" && !arg.empty())
            terms.push_back(Term::degree(parse_order(tok, arg)));
        else if (name == "gwdsp")
            terms.push_back(Term::gwdsp(parse_decay(tok, arg)));
        else if (name == "gwesp")
            terms.push_back(Term::gwesp(parse_decay(tok, arg)));
        else
            throw validation_error("unknown term '" + tok + "'");
    }
    return StatisticSpec(std::move(terms));
}

std::string StatisticSpec::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (i)
            out += ',';
        out += terms_[i].name();
    }
    return out;
}

int StatisticSpec::find(TermKind kind) const {
    for (std::size_t i = 0; i < terms_.size(); ++i)
        if (terms_[i].kind == kind)
            return static_cast<int>(i);
    return -1;
}

std::size_t StatisticSpec::min_nodes() const {
    std::size_t m = 1;
    for (const auto& t : terms_)
        m = std::max(m, t.min_nodes());
    return m;
}

bool StatisticSpec::dyad_independent() const {
    return std::all_of(terms_.begin(), terms_.end(), [](const Term& t) { return t.kind == TermKind::Edges; });
}

void StatisticSpec::check_nodes(std::size_t n) const {
    for (const auto& t : terms_) {
        if ((t.kind == TermKind::KStar || t.kind == TermKind::DegreeCount) && t.order > n - 1)
            throw validation_error(t.name() + " order exceeds n-1=" + std::to_string(n - 1));
    }
}

// ---------------------------------------------------------------------------

std::size_t count_edges(const Graph& g) { return g.num_edges(); }

double k_stars(const Graph& g, std::size_t k) {
    if (k < 2)
        throw validation_error("k-star order must be >= 2");
    double total = 0;
    for (node_t v = 0; v < g.num_nodes(); ++v)
        total += binomial(g.degree(v), k);
    return total;
}

std::uint64_t triangles(const Graph& g) {
    std::uint64_t t = 0;
    for (node_t i = 0; i < g.num_nodes(); ++i)
        for (node_t j : g.neighbors(i))
            if (j > i)
                t += g.common_neighbors(i, j);
    return t / 3;
}

std::size_t shared_partners(const Graph& g, const DyadIndex& d) {
    g.check_dyad(d);
    return g.common_neighbors(d.i, d.j);
}

std::vector<std::uint64_t> esp_histogram(const Graph& g) {
    const std::size_t n = g.num_nodes();
    std::vector<std::uint64_t> h(n >= 2 ? n - 1 : 1, 0);
    for (node_t i = 0; i < n; ++i)
        for (node_t j : g.neighbors(i))
            if (j > i)
                ++h[g.common_neighbors(i, j)];
    return h;
}

std::vector<std::uint64_t> dsp_histogram(const Graph& g) {
    const std::size_t n = g.num_nodes();
    std::vector<std::uint64_t> h(n >= 2 ? n - 1 : 1, 0);
    for (node_t i = 0; i < n; ++i)
        for (node_t j = i + 1; j < n; ++j)
            ++h[g.common_neighbors(i, j)];
    return h;
}

double geometric_weight(double decay, std::size_t s) {
    if (s == 0)
        return 0.0;
    return std::exp(decay) * (1.0 - std::pow(1.0 - std::exp(-decay), static_cast<double>(s)));
}

namespace {

double weighted_histogram(const std::vector<std::uint64_t>& h, double decay) {
    double total = 0;
    for (std::size_t s = 1; s < h.size(); ++s)
        if (h[s])
            total += geometric_weight(decay, s) * static_cast<double>(h[s]);
    return total;
}

}  // namespace

double gwesp(const Graph& g, double decay) { return weighted_histogram(esp_histogram(g), decay); }

double gwdsp(const Graph& g, double decay) { return weighted_histogram(dsp_histogram(g), decay); }

std::size_t degree_count(const Graph& g, std::size_t k) {
    if (k + 1 > g.num_nodes())
        throw validation_error("degree " + std::to_string(k) + " out of range for n=" +
                               std::to_string(g.num_nodes()));
    std::size_t c = 0;
    for (node_t v = 0; v < g.num_nodes(); ++v)
        c += g.degree(v) == k;
    return c;
}

StatVector stat_vector(const Graph& g, const StatisticSpec& spec) {
    spec.check_nodes(g.num_nodes());
    StatVector s(spec.size());
    // Histograms are shared between terms of the same family.
    std::vector<std::uint64_t> esp, dsp;
    for (std::size_t t = 0; t < spec.size(); ++t) {
        const Term& term = spec[t];
        switch (term.kind) {
        case TermKind::Edges: s[t] = static_cast<double>(g.num_edges()); break;
        case TermKind::KStar: s[t] = k_stars(g, term.order); break;
        case TermKind::Triangles: s[t] = static_cast<double>(triangles(g)); break;
        case TermKind::Gwesp:
            if (esp.empty())
                esp = esp_histogram(g);
            s[t] = weighted_histogram(esp, term.decay);
            break;
        case TermKind::Gwdsp:
            if (dsp.empty())
                dsp = dsp_histogram(g);
            s[t] = weighted_histogram(dsp, term.decay);
            break;
        case TermKind::DegreeCount: s[t] = static_cast<double>(degree_count(g, term.order)); break;
        }
    }
    return s;
}

void change_statistics(const Graph& g, const DyadIndex& d, const StatisticSpec& spec, std::span<double> out) {
    g.check_dyad(d);
    const node_t i = d.i, j = d.j;
    const std::size_t present = g.has_edge(d) ? 1 : 0;
    // Degrees and partner counts below are those of the graph without d.
    const std::size_t deg_i = g.degree(i) - present;
    const std::size_t deg_j = g.degree(j) - present;
    const std::size_t sp_ij = g.common_neighbors(i, j);

    for (std::size_t t = 0; t < spec.size(); ++t) {
        const Term& term = spec[t];
        double c = 0;
        switch (term.kind) {
        case TermKind::Edges: c = 1; break;
        case TermKind::KStar:
            c = binomial(deg_i, term.order - 1) + binomial(deg_j, term.order - 1);
            break;
        case TermKind::Triangles: c = static_cast<double>(sp_ij); break;
        case TermKind::Gwesp: {
            // The new edge gains weight for its own partners; each edge to a
            // shared partner h gains one partner, worth r^s for s partners.
            const double r = 1.0 - std::exp(-term.decay);
            c = geometric_weight(term.decay, sp_ij);
            for (node_t h : g.neighbors(i)) {
                if (h == j || !g.has_edge(DyadIndex(h, j)))
                    continue;
                c += std::pow(r, static_cast<double>(g.common_neighbors(i, h) - present));
                c += std::pow(r, static_cast<double>(g.common_neighbors(j, h) - present));
            }
            break;
        }
        case TermKind::Gwdsp: {
            // Every dyad {i,h} with h a neighbor of j (and symmetrically) gains j as a partner.
            const double r = 1.0 - std::exp(-term.decay);
            for (node_t h : g.neighbors(j))
                if (h != i)
                    c += std::pow(r, static_cast<double>(g.common_neighbors(i, h) - present));
            for (node_t h : g.neighbors(i))
                if (h != j)
                    c += std::pow(r, static_cast<double>(g.common_neighbors(j, h) - present));
            break;
        }
        case TermKind::DegreeCount: {
            const std::size_t k = term.order;
            auto delta = [k](std::size_t deg) { return double(deg + 1 == k) - double(deg == k); };
            c = delta(deg_i) + delta(deg_j);
            break;
        }
        }
        out[t] = c;
    }
}

StatVector change_statistics(const Graph& g, const DyadIndex& d, const StatisticSpec& spec) {
    StatVector c(spec.size());
    change_statistics(g, d, spec, std::span<double>(c.data(), c.size()));
    return c;
}

}  // namespace hergm
