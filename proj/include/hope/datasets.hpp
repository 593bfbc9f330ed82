#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hope/descriptives.hpp"
#include "hope/graph.hpp"

namespace hope {

/// Reference descriptive statistics of a case-study network, rounded.
struct DatasetFixture {
    std::string name;
    std::size_t n = 0;
    std::size_t edges = 0;
    double density = 0.0;
    double mean_degree = 0.0;
    double sd_degree = 0.0;
    double skewness_degree = 0.0;
    std::size_t isolates = 0;
    double transitivity = 0.0;
};

const std::vector<DatasetFixture>& dataset_fixtures();
const DatasetFixture* find_fixture(const std::string& name);

/// A dataset directory holds dataset.json:
///   {"name": "lazega", "n": 36, "index_base": 1,
///    "edges": "edges.txt", "attributes": "attributes.csv",
///    "dyad_covariates": {"name": "file.csv"}}
/// with paths relative to the directory.
struct Dataset {
    std::string name;
    Graph graph;
    std::filesystem::path dir;
};

/// Accepts the directory or its dataset.json. A "drugs" attribute coded 1..4 without a
/// "drugs_binary" column gains drugs_binary = 1 for codes 1-2 and 2 for codes 3-4.
/// Throws DataError ("dataset not installed") when the manifest is missing.
Dataset load_dataset(const std::filesystem::path& path);

/// Looks for <root>/<name>/dataset.json under $HOPE_DATA_DIR, ./data and the source tree's data/.
std::optional<std::filesystem::path> locate_dataset(const std::string& name);

struct VerifyRow {
    std::string statistic;
    std::string expected;
    std::string actual;
    double delta = 0.0;
    bool ok = false;
};

struct VerifyResult {
    std::vector<VerifyRow> rows;
    bool ok = false;
};

/// Compares all nine descriptive rows at the reference rounding (skewness within 0.05).
VerifyResult verify_dataset(const Graph& g, const DatasetFixture& fixture);
std::string format_verify(const VerifyResult& r);

}  // namespace hope
