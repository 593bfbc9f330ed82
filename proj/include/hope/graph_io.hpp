#pragma once

#include <filesystem>
#include <optional>

#include "hope/graph.hpp"

namespace hope {

/// Reads an edgelist of whitespace-separated "i j" rows (`#` starts a comment)
/// and, optionally, a node-attribute CSV whose header names the columns and
/// whose k-th data row belongs to node k. Isolates need no row.
///
/// Throws DataError on malformed rows, duplicate edges, self-loops, indices out
/// of range, non-numeric attribute cells, or an attribute row count other than n.
Graph load_graph(const std::filesystem::path& edgelist,
                 const std::optional<std::filesystem::path>& attributes, std::size_t n,
                 int index_base = 0);

/// Reads an n x n numeric CSV (no header) into a dyad covariate on g.
void load_dyad_covariate(Graph& g, const std::string& name, const std::filesystem::path& csv);

/// Writes edges 0-based plus, if the graph has node attributes, an attribute CSV.
/// Values round-trip exactly.
void save_graph(const Graph& g, const std::filesystem::path& edgelist,
                const std::optional<std::filesystem::path>& attributes = std::nullopt);

/// Reads a dyad list in the same row format as an edgelist.
DyadSet load_dyads(const std::filesystem::path& path, std::size_t n, int index_base = 0);

}  // namespace hope
