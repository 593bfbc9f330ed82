#pragma once

#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hope {

using Node = std::int32_t;

/// Unordered node pair, stored with i < j.
struct Dyad {
    Node i = 0;
    Node j = 0;

    friend auto operator<=>(const Dyad&, const Dyad&) = default;
};

/// Raised when a dyad would be a self-loop.
class LoopError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Orders the endpoints. Throws LoopError when a == b.
Dyad make_dyad(Node a, Node b);

/// C(n,2).
constexpr std::size_t dyad_count(std::size_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

/// Row-major linear index of the unordered pair {i,j} among the C(n,2) dyads.
/// Throws LoopError for i == j and std::out_of_range for indices outside [0,n).
std::size_t dyad_index(Node i, Node j, std::size_t n);
std::size_t dyad_index(Dyad d, std::size_t n);

/// Inverse of dyad_index.
Dyad dyad_from_index(std::size_t index, std::size_t n);

/// Immutable per-node attributes and dyadic covariates, shared between graph copies.
struct Covariates {
    std::map<std::string, std::vector<double>> node;  // length n each
    std::map<std::string, std::vector<double>> dyad;  // n*n row-major, symmetric

    friend bool operator==(const Covariates&, const Covariates&) = default;
};

/// Undirected simple graph over nodes 0..n-1.
///
/// Adjacency is kept as one bit row per node so that shared-partner counts are
/// a popcount over ceil(n/64) words. Covariates are shared copy-on-write.
class Graph {
public:
    Graph() = default;
    explicit Graph(std::size_t n);

    std::size_t size() const noexcept { return n_; }
    std::size_t edge_count() const noexcept { return edges_; }
    std::size_t words_per_row() const noexcept { return words_; }

    bool has_edge(Node i, Node j) const;
    bool has_edge(Dyad d) const { return has_edge(d.i, d.j); }
    int degree(Node v) const { return degree_[static_cast<std::size_t>(v)]; }
    const std::vector<int>& degrees() const noexcept { return degree_; }

    void set_edge(Dyad d, bool present);
    /// Flips the state of d in place.
    void flip(Dyad d);

    std::span<const std::uint64_t> row(Node v) const {
        return {bits_.data() + static_cast<std::size_t>(v) * words_, words_};
    }

    /// Number of common neighbours of i and j.
    int shared_partners(Node i, Node j) const {
        const auto* a = bits_.data() + static_cast<std::size_t>(i) * words_;
        const auto* b = bits_.data() + static_cast<std::size_t>(j) * words_;
        int count = 0;
        for (std::size_t w = 0; w < words_; ++w) count += std::popcount(a[w] & b[w]);
        return count;
    }

    template <class F>
    void for_each_neighbor(Node v, F&& f) const {
        const auto* a = bits_.data() + static_cast<std::size_t>(v) * words_;
        for (std::size_t w = 0; w < words_; ++w)
            for (std::uint64_t x = a[w]; x != 0; x &= x - 1)
                f(static_cast<Node>(w * 64 + static_cast<std::size_t>(std::countr_zero(x))));
    }

    template <class F>
    void for_each_common_neighbor(Node i, Node j, F&& f) const {
        const auto* a = bits_.data() + static_cast<std::size_t>(i) * words_;
        const auto* b = bits_.data() + static_cast<std::size_t>(j) * words_;
        for (std::size_t w = 0; w < words_; ++w)
            for (std::uint64_t x = a[w] & b[w]; x != 0; x &= x - 1)
                f(static_cast<Node>(w * 64 + static_cast<std::size_t>(std::countr_zero(x))));
    }

    std::vector<Dyad> edges() const;

    const Covariates& covariates() const;
    std::shared_ptr<const Covariates> shared_covariates() const { return covariates_; }
    bool has_node_attribute(const std::string& name) const;
    /// Throws DataError when absent.
    const std::vector<double>& node_attribute(const std::string& name) const;
    const std::vector<double>& dyad_covariate(const std::string& name) const;
    void set_node_attribute(const std::string& name, std::vector<double> values);
    void set_dyad_covariate(const std::string& name, std::vector<double> matrix);

    friend bool operator==(const Graph& a, const Graph& b);

private:
    std::size_t n_ = 0;
    std::size_t words_ = 0;
    std::size_t edges_ = 0;
    std::vector<std::uint64_t> bits_;
    std::vector<int> degree_;
    std::shared_ptr<const Covariates> covariates_;
};

/// Copy of g with dyad d flipped.
Graph toggle(Graph g, Dyad d);

/// Set of distinct dyads of an n-node graph, in insertion order.
class DyadSet {
public:
    DyadSet() = default;
    /// Validates range and uniqueness; throws std::invalid_argument on duplicates.
    DyadSet(std::vector<Dyad> dyads, std::size_t n);

    static DyadSet all(std::size_t n);
    static DyadSet incident_to(Node v, std::size_t n);

    std::size_t size() const noexcept { return dyads_.size(); }
    bool empty() const noexcept { return dyads_.empty(); }
    std::size_t graph_size() const noexcept { return n_; }
    std::span<const Dyad> dyads() const noexcept { return dyads_; }
    auto begin() const { return dyads_.begin(); }
    auto end() const { return dyads_.end(); }
    const Dyad& operator[](std::size_t k) const { return dyads_[k]; }

    /// Byte mask over dyad_index positions.
    std::vector<std::uint8_t> mask() const;

    friend bool operator==(const DyadSet&, const DyadSet&) = default;

private:
    std::vector<Dyad> dyads_;
    std::size_t n_ = 0;
};

/// A graph whose `free` dyads have unknown (held-out) state.
struct PartialGraph {
    Graph base;
    DyadSet free;

    PartialGraph() = default;
    PartialGraph(Graph g, DyadSet f);
    explicit PartialGraph(Graph g);  // fully observed

    std::size_t observed_dyad_count() const { return dyad_count(base.size()) - free.size(); }
    /// The base graph with every free dyad cleared, so no held-out state can leak.
    Graph masked() const;
};

}  // namespace hope
