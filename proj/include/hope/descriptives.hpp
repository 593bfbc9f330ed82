#pragma once

#include <optional>

#include "hope/graph.hpp"

namespace hope {

struct Descriptives {
    std::size_t size = 0;
    std::size_t edges = 0;
    double density = 0.0;
    double mean_degree = 0.0;
    double sd_degree = 0.0;                 // sample SD (n-1 denominator)
    std::optional<double> skewness_degree;  // adjusted Fisher-Pearson G1; needs n >= 3 and sd > 0
    std::size_t isolates = 0;
    std::optional<double> transitivity;     // 3 * triangles / connected triples
};

Descriptives descriptives(const Graph& g);

}  // namespace hope
