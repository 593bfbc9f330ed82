#include "hope/descriptives.hpp"

#include <cmath>

namespace hope {

Descriptives descriptives(const Graph& g) {
    Descriptives out;
    const auto n = g.size();
    out.size = n;
    out.edges = g.edge_count();
    out.density = n < 2 ? 0.0 : static_cast<double>(g.edge_count()) / static_cast<double>(dyad_count(n));
    if (n == 0) return out;

    const double nn = static_cast<double>(n);
    double sum = 0;
    for (int d : g.degrees()) {
        sum += d;
        if (d == 0) ++out.isolates;
    }
    out.mean_degree = sum / nn;
    double m2 = 0, m3 = 0;
    for (int d : g.degrees()) {
        const double c = d - out.mean_degree;
        m2 += c * c;
        m3 += c * c * c;
    }
    if (n > 1) out.sd_degree = std::sqrt(m2 / (nn - 1));
    if (n >= 3 && m2 > 0) {
        const double g1 = (m3 / nn) / std::pow(m2 / nn, 1.5);
        out.skewness_degree = g1 * std::sqrt(nn * (nn - 1)) / (nn - 2);
    }

    if (n >= 3) {
        double triangles3 = 0;  // each triangle counted once per edge
        double triples = 0;
        for (auto e : g.edges()) triangles3 += g.shared_partners(e.i, e.j);
        for (int d : g.degrees()) triples += 0.5 * d * (d - 1);
        if (triples > 0) out.transitivity = triangles3 / triples;
    }
    return out;
}

}  // namespace hope
