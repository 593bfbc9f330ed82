#include "hope/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hope/errors.hpp"

namespace hope {

namespace {

const Covariates& empty_covariates() {
    static const Covariates empty;
    return empty;
}

void check_node(Node v, std::size_t n) {
    if (v < 0 || static_cast<std::size_t>(v) >= n)
        throw std::out_of_range("node index " + std::to_string(v) + " outside [0," +
                                std::to_string(n) + ")");
}

}  // namespace

Dyad make_dyad(Node a, Node b) {
    if (a == b) throw LoopError("self-loop at node " + std::to_string(a));
    return a < b ? Dyad{a, b} : Dyad{b, a};
}

std::size_t dyad_index(Node i, Node j, std::size_t n) {
    check_node(i, n);
    check_node(j, n);
    const Dyad d = make_dyad(i, j);
    const auto a = static_cast<std::size_t>(d.i);
    const auto b = static_cast<std::size_t>(d.j);
    return a * n - a * (a + 1) / 2 + (b - a - 1);
}

std::size_t dyad_index(Dyad d, std::size_t n) { return dyad_index(d.i, d.j, n); }

Dyad dyad_from_index(std::size_t index, std::size_t n) {
    if (index >= dyad_count(n))
        throw std::out_of_range("dyad index " + std::to_string(index) + " outside [0," +
                                std::to_string(dyad_count(n)) + ")");
    std::size_t i = 0;
    std::size_t row = n - 1;  // dyads in row i
    while (index >= row) {
        index -= row;
        ++i;
        --row;
    }
    return {static_cast<Node>(i), static_cast<Node>(i + 1 + index)};
}

Graph::Graph(std::size_t n)
    : n_(n), words_((n + 63) / 64), bits_(n * ((n + 63) / 64), 0), degree_(n, 0) {}

bool Graph::has_edge(Node i, Node j) const {
    check_node(i, n_);
    check_node(j, n_);
    if (i == j) return false;
    const auto w = static_cast<std::size_t>(j) / 64;
    const auto b = static_cast<std::size_t>(j) % 64;
    return (bits_[static_cast<std::size_t>(i) * words_ + w] >> b) & 1U;
}

void Graph::set_edge(Dyad d, bool present) {
    if (has_edge(d) != present) flip(d);
}

void Graph::flip(Dyad d) {
    check_node(d.i, n_);
    check_node(d.j, n_);
    if (d.i == d.j) throw LoopError("self-loop at node " + std::to_string(d.i));
    const auto i = static_cast<std::size_t>(d.i);
    const auto j = static_cast<std::size_t>(d.j);
    const std::uint64_t mj = std::uint64_t{1} << (j % 64);
    const std::uint64_t mi = std::uint64_t{1} << (i % 64);
    auto& wij = bits_[i * words_ + j / 64];
    const bool was = wij & mj;
    wij ^= mj;
    bits_[j * words_ + i / 64] ^= mi;
    const int delta = was ? -1 : 1;
    degree_[i] += delta;
    degree_[j] += delta;
    edges_ = was ? edges_ - 1 : edges_ + 1;
}

std::vector<Dyad> Graph::edges() const {
    std::vector<Dyad> out;
    out.reserve(edges_);
    for (std::size_t i = 0; i < n_; ++i)
        for_each_neighbor(static_cast<Node>(i), [&](Node j) {
            if (static_cast<std::size_t>(j) > i) out.push_back({static_cast<Node>(i), j});
        });
    return out;
}

const Covariates& Graph::covariates() const {
    return covariates_ ? *covariates_ : empty_covariates();
}

bool Graph::has_node_attribute(const std::string& name) const {
    return covariates().node.count(name) != 0;
}

const std::vector<double>& Graph::node_attribute(const std::string& name) const {
    const auto& m = covariates().node;
    auto it = m.find(name);
    if (it == m.end()) throw DataError("graph has no node attribute '" + name + "'");
    return it->second;
}

const std::vector<double>& Graph::dyad_covariate(const std::string& name) const {
    const auto& m = covariates().dyad;
    auto it = m.find(name);
    if (it == m.end()) throw DataError("graph has no dyad covariate '" + name + "'");
    return it->second;
}

void Graph::set_node_attribute(const std::string& name, std::vector<double> values) {
    if (values.size() != n_)
        throw DataError("attribute '" + name + "' has " + std::to_string(values.size()) +
                        " values for " + std::to_string(n_) + " nodes");
    auto next = std::make_shared<Covariates>(covariates());
    next->node[name] = std::move(values);
    covariates_ = std::move(next);
}

void Graph::set_dyad_covariate(const std::string& name, std::vector<double> matrix) {
    if (matrix.size() != n_ * n_)
        throw DataError("dyad covariate '" + name + "' is not " + std::to_string(n_) + "x" +
                        std::to_string(n_));
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = i + 1; j < n_; ++j)
            if (matrix[i * n_ + j] != matrix[j * n_ + i])
                throw DataError("dyad covariate '" + name + "' is not symmetric at (" +
                                std::to_string(i) + "," + std::to_string(j) + ")");
    auto next = std::make_shared<Covariates>(covariates());
    next->dyad[name] = std::move(matrix);
    covariates_ = std::move(next);
}

bool operator==(const Graph& a, const Graph& b) {
    if (a.n_ != b.n_ || a.bits_ != b.bits_) return false;
    if (a.covariates_ == b.covariates_) return true;
    return a.covariates() == b.covariates();
}

Graph toggle(Graph g, Dyad d) {
    g.flip(d);
    return g;
}

DyadSet::DyadSet(std::vector<Dyad> dyads, std::size_t n) : dyads_(std::move(dyads)), n_(n) {
    std::vector<std::uint8_t> seen(dyad_count(n), 0);
    for (auto& d : dyads_) {
        d = make_dyad(d.i, d.j);
        auto k = dyad_index(d, n);
        if (seen[k])
            throw std::invalid_argument("duplicate dyad (" + std::to_string(d.i) + "," +
                                        std::to_string(d.j) + ") in dyad set");
        seen[k] = 1;
    }
}

DyadSet DyadSet::all(std::size_t n) {
    std::vector<Dyad> out;
    out.reserve(dyad_count(n));
    for (std::size_t k = 0; k < dyad_count(n); ++k) out.push_back(dyad_from_index(k, n));
    DyadSet s;
    s.dyads_ = std::move(out);
    s.n_ = n;
    return s;
}

DyadSet DyadSet::incident_to(Node v, std::size_t n) {
    check_node(v, n);
    std::vector<Dyad> out;
    for (std::size_t u = 0; u < n; ++u)
        if (static_cast<Node>(u) != v) out.push_back(make_dyad(v, static_cast<Node>(u)));
    return DyadSet(std::move(out), n);
}

std::vector<std::uint8_t> DyadSet::mask() const {
    std::vector<std::uint8_t> m(dyad_count(n_), 0);
    for (auto d : dyads_) m[dyad_index(d, n_)] = 1;
    return m;
}

PartialGraph::PartialGraph(Graph g, DyadSet f) : base(std::move(g)), free(std::move(f)) {
    if (!free.empty() && free.graph_size() != base.size())
        throw std::invalid_argument("free dyad set built for a different node count");
}

PartialGraph::PartialGraph(Graph g) : base(std::move(g)), free({}, base.size()) {}

Graph PartialGraph::masked() const {
    Graph g = base;
    for (auto d : free) g.set_edge(d, false);
    return g;
}

}  // namespace hope
