#pragma once

// Brute-force reference implementations used by the unit tests and the acceptance
// binary. They work from the adjacency matrix and the definitions only, and share
// no code with the library beyond Graph accessors.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "hope/graph.hpp"
#include "hope/terms.hpp"

namespace oracle {

inline std::vector<std::vector<int>> adjacency(const hope::Graph& g) {
    const auto n = g.size();
    std::vector<std::vector<int>> a(n, std::vector<int>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && g.has_edge(static_cast<hope::Node>(i), static_cast<hope::Node>(j))) a[i][j] = 1;
    return a;
}

inline double gwesp(const hope::Graph& g, double phi) {
    const auto a = adjacency(g);
    const auto n = a.size();
    double s = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if (!a[i][j]) continue;
            int sp = 0;
            for (std::size_t k = 0; k < n; ++k) sp += a[i][k] * a[j][k];
            s += std::exp(phi) * (1 - std::pow(1 - std::exp(-phi), sp));
        }
    return s;
}

inline double gwdegree(const hope::Graph& g, double phi) {
    double s = 0;
    for (const auto& row : adjacency(g)) {
        int d = 0;
        for (int x : row) d += x;
        s += std::exp(phi) * (1 - std::pow(1 - std::exp(-phi), d));
    }
    return s;
}

template <class F>
double edge_sum(const hope::Graph& g, F&& f) {
    const auto a = adjacency(g);
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j)
            if (a[i][j]) s += f(i, j);
    return s;
}

/// Every simple path between each pair, keeping the shortest ones.
inline std::vector<double> betweenness(const hope::Graph& g) {
    const auto n = g.size();
    const auto a = adjacency(g);
    std::vector<double> bc(n, 0.0);
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t t = s + 1; t < n; ++t) {
            std::vector<std::vector<std::size_t>> paths;
            std::vector<std::size_t> cur{s};
            std::vector<bool> used(n, false);
            used[s] = true;
            std::function<void(std::size_t)> dfs = [&](std::size_t v) {
                if (v == t) {
                    paths.push_back(cur);
                    return;
                }
                for (std::size_t w = 0; w < n; ++w)
                    if (!used[w] && a[v][w]) {
                        used[w] = true;
                        cur.push_back(w);
                        dfs(w);
                        cur.pop_back();
                        used[w] = false;
                    }
            };
            dfs(s);
            if (paths.empty()) continue;
            std::size_t shortest = n + 1;
            for (const auto& p : paths) shortest = std::min(shortest, p.size());
            double count = 0;
            std::vector<double> through(n, 0.0);
            for (const auto& p : paths)
                if (p.size() == shortest) {
                    ++count;
                    for (std::size_t k = 1; k + 1 < p.size(); ++k) through[p[k]] += 1;
                }
            for (std::size_t v = 0; v < n; ++v) bc[v] += through[v] / count;
        }
    return bc;
}

/// log P(y = obs) by summing exp(theta' g(y)) over all 2^C(n,2) graphs.
inline double loglik(const hope::Graph& obs, const hope::ModelSpec& spec, const Eigen::VectorXd& theta) {
    const auto n = obs.size();
    const auto D = hope::dyad_count(n);
    std::vector<double> terms;
    for (std::uint32_t m = 0; m < (1u << D); ++m) {
        hope::Graph y = obs;
        for (std::size_t k = 0; k < D; ++k) y.set_edge(hope::dyad_from_index(k, n), (m >> k) & 1u);
        terms.push_back(theta.dot(hope::suff_stats(y, spec)));
    }
    const double mx = *std::max_element(terms.begin(), terms.end());
    double s = 0;
    for (double t : terms) s += std::exp(t - mx);
    return theta.dot(hope::suff_stats(obs, spec)) - (mx + std::log(s));
}

}  // namespace oracle
