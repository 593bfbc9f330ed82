#include "hope/terms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "hope/errors.hpp"

namespace hope {

namespace {

enum class Kind { Edges, Gwesp, Gwdegree, NodeMatch, NodeMatchDiff, NodeCov, EdgeCov };

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

}  // namespace

struct Model::Bound {
    Kind kind = Kind::Edges;
    std::size_t offset = 0;
    std::size_t dim = 1;
    // Gwesp/Gwdegree: weight[k] = e^phi (1 - r^k), marginal[k] = r^k with r = 1 - e^-phi.
    std::vector<double> weight;
    std::vector<double> marginal;
    const std::vector<double>* x = nullptr;  // node attribute or n*n matrix
    std::vector<double> levels;               // NodeMatchDiff kept levels
};

namespace {

void decay_tables(double decay, std::size_t n, Model::Bound& b) {
    if (!(decay >= 0.0) || !std::isfinite(decay))
        throw DataError("decay must be a finite non-negative constant, got " + format_number(decay));
    const double r = 1.0 - std::exp(-decay);
    const double scale = std::exp(decay);
    b.weight.resize(n + 1);
    b.marginal.resize(n + 1);
    double rk = 1.0;  // r^0 == 1, also for r == 0
    for (std::size_t k = 0; k <= n; ++k) {
        b.marginal[k] = rk;
        b.weight[k] = scale * (1.0 - rk);
        rk *= r;
    }
}

}  // namespace

std::vector<double> attribute_levels(const std::vector<double>& values) {
    std::set<double> s(values.begin(), values.end());
    return {s.begin(), s.end()};
}

bool is_dyad_independent(const ModelSpec& spec) {
    return std::none_of(spec.terms.begin(), spec.terms.end(), [](const TermSpec& t) {
        return std::holds_alternative<term::Gwesp>(t) || std::holds_alternative<term::Gwdegree>(t);
    });
}

Model::Model(ModelSpec spec, const Graph& g)
    : spec_(std::move(spec)), n_(g.size()), covariates_(g.shared_covariates()) {
    if (!covariates_) covariates_ = std::make_shared<Covariates>();
    const Covariates& cov = *covariates_;
    auto node_attr = [&](const std::string& name) -> const std::vector<double>* {
        auto it = cov.node.find(name);
        if (it == cov.node.end()) throw DataError("model references missing node attribute '" + name + "'");
        return &it->second;
    };

    for (const auto& t : spec_.terms) {
        auto b = std::make_shared<Bound>();
        b->offset = dim_;
        std::visit(overloaded{
                       [&](const term::Edges&) {
                           b->kind = Kind::Edges;
                           names_.push_back("edges");
                       },
                       [&](const term::Gwesp& s) {
                           b->kind = Kind::Gwesp;
                           decay_tables(s.decay, n_, *b);
                           names_.push_back("gwesp.fixed." + format_number(s.decay));
                           dyad_independent_ = false;
                       },
                       [&](const term::Gwdegree& s) {
                           b->kind = Kind::Gwdegree;
                           decay_tables(s.decay, n_, *b);
                           names_.push_back("gwdeg.fixed." + format_number(s.decay));
                           dyad_independent_ = false;
                       },
                       [&](const term::NodeMatch& s) {
                           b->kind = Kind::NodeMatch;
                           b->x = node_attr(s.attr);
                           names_.push_back("nodematch." + s.attr);
                       },
                       [&](const term::NodeMatchDiff& s) {
                           b->kind = Kind::NodeMatchDiff;
                           b->x = node_attr(s.attr);
                           const auto all = attribute_levels(*b->x);
                           if (s.keep) {
                               if (s.keep->empty())
                                   throw DataError("nodematch('" + s.attr + "') keep list is empty");
                               std::vector<int> keep = *s.keep;
                               std::sort(keep.begin(), keep.end());
                               if (std::adjacent_find(keep.begin(), keep.end()) != keep.end())
                                   throw DataError("nodematch('" + s.attr + "') keep list repeats a level");
                               for (int k : keep) {
                                   if (k < 1 || static_cast<std::size_t>(k) > all.size())
                                       throw DataError("nodematch('" + s.attr + "') keep level " +
                                                       std::to_string(k) + " does not exist (" +
                                                       std::to_string(all.size()) + " levels observed)");
                                   b->levels.push_back(all[static_cast<std::size_t>(k - 1)]);
                               }
                           } else {
                               b->levels = all;
                           }
                           b->dim = b->levels.size();
                           for (double level : b->levels)
                               names_.push_back("nodematch." + s.attr + "." + format_number(level));
                       },
                       [&](const term::NodeCov& s) {
                           b->kind = Kind::NodeCov;
                           b->x = node_attr(s.attr);
                           names_.push_back("nodecov." + s.attr);
                       },
                       [&](const term::EdgeCov& s) {
                           b->kind = Kind::EdgeCov;
                           auto it = cov.dyad.find(s.matrix);
                           if (it == cov.dyad.end())
                               throw DataError("model references missing dyad covariate '" + s.matrix + "'");
                           b->x = &it->second;
                           names_.push_back("edgecov." + s.matrix);
                       },
                   },
                   t);
        dim_ += b->dim;
        bound_.push_back(std::move(b));
    }
}

void Model::check(const Graph& g) const {
    if (g.size() != n_)
        throw std::invalid_argument("model bound to " + std::to_string(n_) +
                                    " nodes applied to a graph with " + std::to_string(g.size()));
}

Eigen::VectorXd Model::stats(const Graph& g) const {
    check(g);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_));
    const auto edges = g.edges();
    for (const auto& bp : bound_) {
        const Bound& b = *bp;
        const auto o = static_cast<Eigen::Index>(b.offset);
        switch (b.kind) {
            case Kind::Edges:
                out[o] = static_cast<double>(edges.size());
                break;
            case Kind::Gwesp: {
                double s = 0;
                for (auto e : edges) s += b.weight[static_cast<std::size_t>(g.shared_partners(e.i, e.j))];
                out[o] = s;
                break;
            }
            case Kind::Gwdegree: {
                double s = 0;
                for (int d : g.degrees()) s += b.weight[static_cast<std::size_t>(d)];
                out[o] = s;
                break;
            }
            case Kind::NodeMatch: {
                const auto& x = *b.x;
                double s = 0;
                for (auto e : edges) s += x[static_cast<std::size_t>(e.i)] == x[static_cast<std::size_t>(e.j)];
                out[o] = s;
                break;
            }
            case Kind::NodeMatchDiff: {
                const auto& x = *b.x;
                for (auto e : edges) {
                    const double xi = x[static_cast<std::size_t>(e.i)];
                    if (xi != x[static_cast<std::size_t>(e.j)]) continue;
                    for (std::size_t k = 0; k < b.levels.size(); ++k)
                        if (b.levels[k] == xi) out[o + static_cast<Eigen::Index>(k)] += 1.0;
                }
                break;
            }
            case Kind::NodeCov: {
                const auto& x = *b.x;
                double s = 0;
                for (auto e : edges) s += x[static_cast<std::size_t>(e.i)] + x[static_cast<std::size_t>(e.j)];
                out[o] = s;
                break;
            }
            case Kind::EdgeCov: {
                const auto& x = *b.x;
                double s = 0;
                for (auto e : edges) s += x[static_cast<std::size_t>(e.i) * n_ + static_cast<std::size_t>(e.j)];
                out[o] = s;
                break;
            }
        }
    }
    return out;
}

void Model::change(const Graph& g, Dyad d, Eigen::Ref<Eigen::VectorXd> out) const {
    check(g);
    const auto i = static_cast<std::size_t>(d.i);
    const auto j = static_cast<std::size_t>(d.j);
    // Everything below is evaluated with d switched off.
    const int on = g.has_edge(d) ? 1 : 0;
    for (const auto& bp : bound_) {
        const Bound& b = *bp;
        const auto o = static_cast<Eigen::Index>(b.offset);
        switch (b.kind) {
            case Kind::Edges:
                out[o] = 1.0;
                break;
            case Kind::Gwesp: {
                // New edge {i,j} enters with sp(i,j) partners; each common neighbour k
                // adds one partner to edges {i,k} and {j,k}, each worth r^sp.
                double delta = b.weight[static_cast<std::size_t>(g.shared_partners(d.i, d.j))];
                g.for_each_common_neighbor(d.i, d.j, [&](Node k) {
                    const int sik = g.shared_partners(d.i, k) - on;
                    const int sjk = g.shared_partners(d.j, k) - on;
                    delta += b.marginal[static_cast<std::size_t>(sik)] + b.marginal[static_cast<std::size_t>(sjk)];
                });
                out[o] = delta;
                break;
            }
            case Kind::Gwdegree:
                out[o] = b.marginal[static_cast<std::size_t>(g.degree(d.i) - on)] +
                         b.marginal[static_cast<std::size_t>(g.degree(d.j) - on)];
                break;
            case Kind::NodeMatch:
                out[o] = (*b.x)[i] == (*b.x)[j] ? 1.0 : 0.0;
                break;
            case Kind::NodeMatchDiff: {
                const double xi = (*b.x)[i];
                const bool match = xi == (*b.x)[j];
                for (std::size_t k = 0; k < b.levels.size(); ++k)
                    out[o + static_cast<Eigen::Index>(k)] = match && b.levels[k] == xi ? 1.0 : 0.0;
                break;
            }
            case Kind::NodeCov:
                out[o] = (*b.x)[i] + (*b.x)[j];
                break;
            case Kind::EdgeCov:
                out[o] = (*b.x)[i * n_ + j];
                break;
        }
    }
}

Eigen::VectorXd Model::change(const Graph& g, Dyad d) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(dim_));
    change(g, d, out);
    return out;
}

Eigen::VectorXd suff_stats(const Graph& g, const ModelSpec& spec) { return Model(spec, g).stats(g); }

Eigen::VectorXd change_stats(const Graph& g, Dyad d, const ModelSpec& spec) {
    return Model(spec, g).change(g, d);
}

std::vector<std::size_t> ep_distribution(const Graph& g) {
    std::vector<std::size_t> ep(g.size() >= 2 ? g.size() - 1 : 1, 0);
    for (auto e : g.edges()) ++ep[static_cast<std::size_t>(g.shared_partners(e.i, e.j))];
    return ep;
}

std::vector<std::size_t> dg_distribution(const Graph& g) {
    std::vector<std::size_t> dg(std::max<std::size_t>(g.size(), 1), 0);
    for (int d : g.degrees()) ++dg[static_cast<std::size_t>(d)];
    return dg;
}

}  // namespace hope
