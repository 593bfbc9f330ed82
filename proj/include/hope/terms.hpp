#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "hope/graph.hpp"

namespace hope {

namespace term {

struct Edges {
    friend bool operator==(const Edges&, const Edges&) = default;
};
/// Geometrically weighted edgewise shared partners with fixed decay.
struct Gwesp {
    double decay = 0.0;
    friend bool operator==(const Gwesp&, const Gwesp&) = default;
};
/// Geometrically weighted degree with fixed decay.
struct Gwdegree {
    double decay = 0.0;
    friend bool operator==(const Gwdegree&, const Gwdegree&) = default;
};
/// Edges between nodes sharing the attribute value.
struct NodeMatch {
    std::string attr;
    friend bool operator==(const NodeMatch&, const NodeMatch&) = default;
};
/// One coordinate per kept level: edges whose endpoints both carry that level.
/// `keep` holds 1-based positions into the ascending list of observed levels;
/// absent means every level.
struct NodeMatchDiff {
    std::string attr;
    std::optional<std::vector<int>> keep;
    friend bool operator==(const NodeMatchDiff&, const NodeMatchDiff&) = default;
};
/// Sum over edges of x_i + x_j.
struct NodeCov {
    std::string attr;
    friend bool operator==(const NodeCov&, const NodeCov&) = default;
};
/// Sum over edges of a dyadic covariate.
struct EdgeCov {
    std::string matrix;
    friend bool operator==(const EdgeCov&, const EdgeCov&) = default;
};

}  // namespace term

using TermSpec = std::variant<term::Edges, term::Gwesp, term::Gwdegree, term::NodeMatch,
                              term::NodeMatchDiff, term::NodeCov, term::EdgeCov>;

/// Ordered term list; the order fixes coefficient order everywhere downstream.
struct ModelSpec {
    std::vector<TermSpec> terms;
    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// True when no term depends on other dyads' states.
bool is_dyad_independent(const ModelSpec& spec);

/// A ModelSpec resolved against a graph's covariates: attribute lookups,
/// NodeMatchDiff levels and decay weight tables are fixed here.
class Model {
public:
    /// Throws DataError when an attribute or matrix is missing or a keep level does not exist.
    Model(ModelSpec spec, const Graph& g);

    const ModelSpec& spec() const noexcept { return spec_; }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t graph_size() const noexcept { return n_; }
    const std::vector<std::string>& names() const noexcept { return names_; }
    bool dyad_independent() const noexcept { return dyad_independent_; }

    Eigen::VectorXd stats(const Graph& g) const;

    /// g(y with d on) - g(y with d off); does not depend on the current state of d.
    void change(const Graph& g, Dyad d, Eigen::Ref<Eigen::VectorXd> out) const;
    Eigen::VectorXd change(const Graph& g, Dyad d) const;

    struct Bound;  // resolved term, defined in terms.cpp

private:
    void check(const Graph& g) const;

    ModelSpec spec_;
    std::size_t n_ = 0;
    std::size_t dim_ = 0;
    bool dyad_independent_ = true;
    std::vector<std::string> names_;
    std::shared_ptr<const Covariates> covariates_;
    std::vector<std::shared_ptr<const Bound>> bound_;
};

Eigen::VectorXd suff_stats(const Graph& g, const ModelSpec& spec);
Eigen::VectorXd change_stats(const Graph& g, Dyad d, const ModelSpec& spec);

/// EP_k: edges whose endpoints have exactly k common neighbours, k = 0..n-2.
std::vector<std::size_t> ep_distribution(const Graph& g);
/// D_k: nodes of degree k, k = 0..n-1.
std::vector<std::size_t> dg_distribution(const Graph& g);

/// Sorted distinct values of a node attribute.
std::vector<double> attribute_levels(const std::vector<double>& values);

}  // namespace hope
