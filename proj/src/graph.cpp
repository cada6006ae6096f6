#include "hergm/graph.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace hergm {

DyadIndex::DyadIndex(node_t a, node_t b) : i(std::min(a, b)), j(std::max(a, b)) {
    if (a == b)
        throw validation_error("self-loop dyad {" + std::to_string(a) + "," + std::to_string(a) + "}");
}

Graph::Graph(std::size_t n) : n_(n), words_((n + 63) / 64) {
    if (n == 0)
        throw validation_error("graph must have at least one node");
    bits_.assign(n_ * words_, 0);
    neighbors_.resize(n_);
}

void Graph::check_node(node_t v) const {
    if (v >= n_)
        throw validation_error("node id " + std::to_string(v) + " out of range for n=" + std::to_string(n_));
}

void Graph::check_dyad(const DyadIndex& d) const {
    check_node(d.j);
}

bool Graph::has_edge(node_t a, node_t b) const {
    check_node(a);
    check_node(b);
    if (a == b)
        return false;
    return bit(a, b);
}

bool Graph::toggle(const DyadIndex& d) {
    check_dyad(d);
    const bool present = !bit(d.i, d.j);
    flip_bit(d.i, d.j);
    flip_bit(d.j, d.i);
    if (present) {
        neighbors_[d.i].push_back(d.j);
        neighbors_[d.j].push_back(d.i);
        ++edges_;
    } else {
        auto drop = [](std::vector<node_t>& v, node_t x) {
            auto it = std::find(v.begin(), v.end(), x);
            *it = v.back();
            v.pop_back();
        };
        drop(neighbors_[d.i], d.j);
        drop(neighbors_[d.j], d.i);
        --edges_;
    }
    return present;
}

void Graph::set_edge(const DyadIndex& d, bool present) {
    check_dyad(d);
    if (bit(d.i, d.j) != present)
        toggle(d);
}

std::vector<DyadIndex> Graph::edge_list() const {
    std::vector<DyadIndex> out;
    out.reserve(edges_);
    for (node_t i = 0; i < n_; ++i) {
        std::vector<node_t> nb(neighbors_[i].begin(), neighbors_[i].end());
        std::sort(nb.begin(), nb.end());
        for (node_t j : nb)
            if (j > i)
                out.emplace_back(i, j);
    }
    return out;
}

double Graph::density() const {
    const auto m = num_dyads(n_);
    return m == 0 ? 0.0 : static_cast<double>(edges_) / static_cast<double>(m);
}

// ---------------------------------------------------------------------------
// Partition

Partition::Partition(std::vector<std::size_t> assignments, std::size_t K)
    : assignments_(std::move(assignments)), K_(K) {
    if (assignments_.empty())
        throw validation_error("partition must cover at least one node");
    if (K_ == 0)
        throw validation_error("partition must have at least one cluster");
    for (std::size_t v = 0; v < assignments_.size(); ++v)
        if (assignments_[v] >= K_)
            throw validation_error("node " + std::to_string(v) + " has label " +
                                   std::to_string(assignments_[v]) + " >= K=" + std::to_string(K_));
}

Partition Partition::from_labels(const std::vector<long long>& raw) {
    std::map<long long, std::size_t> compact;
    for (auto l : raw)
        compact.emplace(l, 0);
    std::size_t next = 0;
    for (auto& [label, idx] : compact)
        idx = next++;
    std::vector<std::size_t> a(raw.size());
    for (std::size_t v = 0; v < raw.size(); ++v)
        a[v] = compact.at(raw[v]);
    return Partition(std::move(a), compact.size());
}

Partition Partition::contiguous(const std::vector<std::size_t>& sizes) {
    std::vector<std::size_t> a;
    for (std::size_t k = 0; k < sizes.size(); ++k)
        a.insert(a.end(), sizes[k], k);
    return Partition(std::move(a), sizes.size());
}

std::vector<std::size_t> Partition::cluster_sizes() const {
    std::vector<std::size_t> sizes(K_, 0);
    for (auto a : assignments_)
        ++sizes[a];
    return sizes;
}

std::vector<node_t> Partition::members(std::size_t k) const {
    std::vector<node_t> out;
    for (node_t v = 0; v < assignments_.size(); ++v)
        if (assignments_[v] == k)
            out.push_back(v);
    return out;
}

void check_compatible(const Graph& g, const Partition& p) {
    if (g.num_nodes() != p.num_nodes())
        throw validation_error("partition covers " + std::to_string(p.num_nodes()) +
                               " nodes but graph has " + std::to_string(g.num_nodes()));
}

Subgraph within_subgraph(const Graph& g, const Partition& p, std::size_t k) {
    check_compatible(g, p);
    if (k >= p.num_clusters())
        throw validation_error("cluster id " + std::to_string(k) + " >= K=" + std::to_string(p.num_clusters()));
    auto nodes = p.members(k);
    if (nodes.empty())
        throw validation_error("cluster " + std::to_string(k) + " is empty");
    std::vector<std::size_t> local(g.num_nodes(), SIZE_MAX);
    for (std::size_t a = 0; a < nodes.size(); ++a)
        local[nodes[a]] = a;
    Graph sub(nodes.size());
    for (std::size_t a = 0; a < nodes.size(); ++a)
        for (node_t w : g.neighbors(nodes[a]))
            if (local[w] != SIZE_MAX && local[w] > a)
                sub.add_edge(a, local[w]);
    return {std::move(sub), std::move(nodes)};
}

BetweenCounts between_edge_counts(const Graph& g, const Partition& p) {
    check_compatible(g, p);
    std::size_t y = 0;
    for (node_t i = 0; i < g.num_nodes(); ++i)
        for (node_t j : g.neighbors(i))
            if (j > i && p[i] != p[j])
                ++y;
    // n_B = (n^2 - sum n_k^2) / 2
    std::size_t n = g.num_nodes(), sq = 0;
    for (auto s : p.cluster_sizes())
        sq += s * s;
    return {y, (n * n - sq) / 2};
}

// ---------------------------------------------------------------------------
// I/O

namespace {

bool blank_or_comment(const std::string& line) {
    auto pos = line.find_first_not_of(" \t\r");
    return pos == std::string::npos || line[pos] == '#';
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw validation_error("cannot open '" + path + "' for reading");
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw validation_error("cannot open '" + path + "' for writing");
    return out;
}

bool parse_index(const std::string& tok, long long& out) {
    if (tok.empty())
        return false;
    std::size_t used = 0;
    try {
        out = std::stoll(tok, &used);
    } catch (const std::exception&) {
        return false;
    }
    return used == tok.size();
}

}  // namespace

Graph read_edge_list(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    long long n = -1;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank_or_comment(line))
            continue;
        std::istringstream ls(line);
        std::string key, count, extra;
        ls >> key >> count;
        if (key != "n" || !parse_index(count, n) || n < 1 || (ls >> extra))
            throw validation_error("line " + std::to_string(lineno) + ": expected header 'n <count>'");
        break;
    }
    if (n < 1)
        throw validation_error("missing header 'n <count>'");
    Graph g(static_cast<std::size_t>(n));
    while (std::getline(in, line)) {
        ++lineno;
        if (blank_or_comment(line))
            continue;
        std::istringstream ls(line);
        std::string a, b, extra;
        long long i = 0, j = 0;
        ls >> a >> b;
        if (!parse_index(a, i) || !parse_index(b, j) || (ls >> extra))
            throw validation_error("line " + std::to_string(lineno) + ": expected 'i j'");
        if (i == j)
            throw validation_error("line " + std::to_string(lineno) + ": self-loop " + a + " " + b);
        if (i < 0 || j < 0 || i >= n || j >= n)
            throw validation_error("line " + std::to_string(lineno) + ": node id out of range for n=" +
                                   std::to_string(n));
        DyadIndex d(static_cast<node_t>(i), static_cast<node_t>(j));
        if (g.has_edge(d))
            throw validation_error("line " + std::to_string(lineno) + ": duplicate edge " + a + " " + b);
        g.toggle(d);
    }
    return g;
}

Graph read_edge_list(const std::string& path) {
    auto in = open_in(path);
    return read_edge_list(in);
}

void write_edge_list(const Graph& g, std::ostream& out) {
    out << "n " << g.num_nodes() << '\n';
    for (const auto& d : g.edge_list())
        out << d.i << ' ' << d.j << '\n';
}

void write_edge_list(const Graph& g, const std::string& path) {
    auto out = open_out(path);
    write_edge_list(g, out);
}

Partition read_partition(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    std::map<long long, long long> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (!header) {
            if (line != "node,cluster")
                throw validation_error("line " + std::to_string(lineno) + ": expected header 'node,cluster'");
            header = true;
            continue;
        }
        auto comma = line.find(',');
        long long node = 0, label = 0;
        if (comma == std::string::npos || !parse_index(line.substr(0, comma), node) ||
            !parse_index(line.substr(comma + 1), label) || node < 0)
            throw validation_error("line " + std::to_string(lineno) + ": expected 'node,cluster'");
        if (!rows.emplace(node, label).second)
            throw validation_error("line " + std::to_string(lineno) + ": duplicate row for node " +
                                   std::to_string(node));
    }
    if (!header)
        throw validation_error("missing header 'node,cluster'");
    if (rows.empty())
        throw validation_error("partition file has no rows");
    std::vector<long long> labels;
    labels.reserve(rows.size());
    long long expect = 0;
    for (const auto& [node, label] : rows) {
        if (node != expect)
            throw validation_error("missing row for node " + std::to_string(expect));
        labels.push_back(label);
        ++expect;
    }
    return Partition::from_labels(labels);
}

Partition read_partition(const std::string& path) {
    auto in = open_in(path);
    return read_partition(in);
}

void write_partition(const Partition& p, std::ostream& out) {
    out << "node,cluster\n";
    for (node_t v = 0; v < p.num_nodes(); ++v)
        out << v << ',' << p[v] << '\n';
}

void write_partition(const Partition& p, const std::string& path) {
    auto out = open_out(path);
    write_partition(p, out);
}

}  // namespace hergm
