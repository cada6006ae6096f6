#ifndef HERGM_GRAPH_HPP
#define HERGM_GRAPH_HPP

#include <bit>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hergm/errors.hpp"

namespace hergm {

using node_t = std::size_t;

/// Unordered pair of distinct nodes, stored with i < j.
struct DyadIndex {
    node_t i;
    node_t j;

    DyadIndex(node_t a, node_t b);

    friend bool operator==(const DyadIndex&, const DyadIndex&) = default;
};

/// Number of unordered dyads on n nodes.
constexpr std::size_t num_dyads(std::size_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

/// Undirected binary graph on nodes 0..n-1.
///
/// Edge membership is answered from a packed bit matrix; neighbor lists are
/// kept alongside for O(deg) iteration. Both are updated together by every
/// mutation.
class Graph {
public:
    explicit Graph(std::size_t n);

    std::size_t num_nodes() const { return n_; }
    std::size_t num_edges() const { return edges_; }
    std::size_t degree(node_t v) const { return neighbors_[v].size(); }
    std::span<const node_t> neighbors(node_t v) const { return neighbors_[v]; }

    bool has_edge(node_t a, node_t b) const;
    bool has_edge(const DyadIndex& d) const { return bit(d.i, d.j); }
    /// |N(a) & N(b)| by word-parallel intersection of adjacency rows.
    std::size_t common_neighbors(node_t a, node_t b) const {
        const std::uint64_t* ra = &bits_[a * words_];
        const std::uint64_t* rb = &bits_[b * words_];
        std::size_t c = 0;
        for (std::size_t w = 0; w < words_; ++w)
            c += static_cast<std::size_t>(std::popcount(ra[w] & rb[w]));
        return c;
    }

    /// Flips presence of d. Returns true if the edge is present afterwards.
    bool toggle(const DyadIndex& d);
    void set_edge(const DyadIndex& d, bool present);
    void add_edge(node_t a, node_t b) { set_edge(DyadIndex(a, b), true); }

    void check_node(node_t v) const;
    void check_dyad(const DyadIndex& d) const;

    /// Edges in canonical (i, j) lexicographic order.
    std::vector<DyadIndex> edge_list() const;

    double density() const;

    friend bool operator==(const Graph& a, const Graph& b) {
        return a.n_ == b.n_ && a.bits_ == b.bits_;
    }

private:
    bool bit(node_t a, node_t b) const {
        return (bits_[a * words_ + b / 64] >> (b % 64)) & 1u;
    }
    void flip_bit(node_t a, node_t b) { bits_[a * words_ + b / 64] ^= std::uint64_t{1} << (b % 64); }

    std::size_t n_;
    std::size_t words_;
    std::size_t edges_ = 0;
    std::vector<std::uint64_t> bits_;
    std::vector<std::vector<node_t>> neighbors_;
};

/// Assignment of every node to one of K clusters.
class Partition {
public:
    Partition(std::vector<std::size_t> assignments, std::size_t K);

    /// Labels compacted to 0..K-1 in increasing order of the raw label.
    static Partition from_labels(const std::vector<long long>& raw);
    /// Contiguous blocks of the given sizes: block 0 first, then block 1, ...
    static Partition contiguous(const std::vector<std::size_t>& sizes);

    std::size_t num_nodes() const { return assignments_.size(); }
    std::size_t num_clusters() const { return K_; }
    std::size_t operator[](node_t v) const { return assignments_[v]; }
    const std::vector<std::size_t>& assignments() const { return assignments_; }

    std::vector<std::size_t> cluster_sizes() const;
    /// Nodes of cluster k in increasing order.
    std::vector<node_t> members(std::size_t k) const;

    friend bool operator==(const Partition&, const Partition&) = default;

private:
    std::vector<std::size_t> assignments_;
    std::size_t K_;
};

struct Subgraph {
    Graph graph;
    /// nodes[local] is the id of that node in the parent graph.
    std::vector<node_t> nodes;
};

/// Graph induced on cluster k, relabeled 0..n_k-1 in increasing parent order.
Subgraph within_subgraph(const Graph& g, const Partition& p, std::size_t k);

struct BetweenCounts {
    std::size_t edges;  ///< y_B
    std::size_t dyads;  ///< n_B
};

BetweenCounts between_edge_counts(const Graph& g, const Partition& p);

void check_compatible(const Graph& g, const Partition& p);

Graph read_edge_list(std::istream& in);
Graph read_edge_list(const std::string& path);
void write_edge_list(const Graph& g, std::ostream& out);
void write_edge_list(const Graph& g, const std::string& path);

Partition read_partition(std::istream& in);
Partition read_partition(const std::string& path);
void write_partition(const Partition& p, std::ostream& out);
void write_partition(const Partition& p, const std::string& path);

}  // namespace hergm

#endif
