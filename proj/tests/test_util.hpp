#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "hope/graph.hpp"
#include "hope/rng.hpp"

namespace testutil {

inline hope::Graph random_graph(std::size_t n, double p, hope::Rng& rng) {
    hope::Graph g(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (rng.bernoulli(p)) g.set_edge({static_cast<hope::Node>(i), static_cast<hope::Node>(j)}, true);
    return g;
}

inline hope::Graph graph_from(std::size_t n, std::initializer_list<std::pair<int, int>> edges) {
    hope::Graph g(n);
    for (auto [a, b] : edges) g.set_edge(hope::make_dyad(a, b), true);
    return g;
}

inline hope::Graph star(std::size_t n) {
    hope::Graph g(n);
    for (std::size_t v = 1; v < n; ++v) g.set_edge({0, static_cast<hope::Node>(v)}, true);
    return g;
}

inline hope::Graph complete(std::size_t n) {
    hope::Graph g(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) g.set_edge({static_cast<hope::Node>(i), static_cast<hope::Node>(j)}, true);
    return g;
}

inline hope::Graph cycle(std::size_t n) {
    hope::Graph g(n);
    for (std::size_t v = 0; v < n; ++v) g.set_edge(hope::make_dyad(static_cast<int>(v), static_cast<int>((v + 1) % n)), true);
    return g;
}

/// Temporary directory removed on destruction.
struct TempDir {
    std::filesystem::path path;
    TempDir() {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("hope_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::filesystem::path write(const std::string& name, const std::string& text) const {
        std::ofstream(path / name) << text;
        return path / name;
    }
};

}  // namespace testutil
