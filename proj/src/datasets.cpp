#include "hope/datasets.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hope/errors.hpp"
#include "hope/graph_io.hpp"

#ifndef HOPE_SOURCE_DIR
#define HOPE_SOURCE_DIR "."
#endif

namespace hope {

const std::vector<DatasetFixture>& dataset_fixtures() {
    static const std::vector<DatasetFixture> f{
        {"lazega", 36, 115, 0.18, 6.39, 4.18, 0.29, 2, 0.39},
        {"teenage", 50, 74, 0.06, 2.96, 1.83, 0.65, 3, 0.42},
    };
    return f;
}

const DatasetFixture* find_fixture(const std::string& name) {
    for (const auto& f : dataset_fixtures())
        if (f.name == name) return &f;
    return nullptr;
}

Dataset load_dataset(const std::filesystem::path& path) {
    namespace fs = std::filesystem;
    const fs::path manifest = fs::is_directory(path) ? path / "dataset.json" : path;
    if (!fs::exists(manifest))
        throw DataError("dataset not installed: " + manifest.string() +
                        " does not exist (see data/README.md for how to obtain the files)");
    std::ifstream in(manifest);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(manifest.string() + ": invalid JSON: " + e.what());
    }
    const fs::path dir = manifest.parent_path();
    Dataset ds;
    ds.dir = dir;
    try {
        ds.name = j.value("name", dir.filename().string());
        const auto n = j.at("n").get<std::size_t>();
        const int base = j.value("index_base", 0);
        std::optional<fs::path> attrs;
        if (j.contains("attributes") && j["attributes"].is_string()) attrs = dir / j["attributes"].get<std::string>();
        ds.graph = load_graph(dir / j.value("edges", std::string("edges.txt")), attrs, n, base);
        if (j.contains("dyad_covariates"))
            for (const auto& [name, file] : j["dyad_covariates"].items())
                load_dyad_covariate(ds.graph, name, dir / file.get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw DataError(manifest.string() + ": " + e.what());
    }
    auto& g = ds.graph;
    if (g.has_node_attribute("drugs") && !g.has_node_attribute("drugs_binary")) {
        std::vector<double> b;
        for (double v : g.node_attribute("drugs")) b.push_back(v <= 2 ? 1.0 : 2.0);
        g.set_node_attribute("drugs_binary", std::move(b));
    }
    return ds;
}

std::optional<std::filesystem::path> locate_dataset(const std::string& name) {
    namespace fs = std::filesystem;
    std::vector<fs::path> roots;
    if (const char* env = std::getenv("HOPE_DATA_DIR")) roots.emplace_back(env);
    roots.emplace_back("data");
    roots.emplace_back(fs::path(HOPE_SOURCE_DIR) / "data");
    for (const auto& r : roots) {
        const auto p = r / name / "dataset.json";
        if (fs::exists(p)) return p;
    }
    return std::nullopt;
}

namespace {

std::string fmt(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

VerifyResult verify_dataset(const Graph& g, const DatasetFixture& f) {
    const auto d = descriptives(g);
    VerifyResult r;
    auto exact = [&](const char* name, std::size_t expected, std::size_t actual) {
        r.rows.push_back({name, std::to_string(expected), std::to_string(actual),
                          static_cast<double>(actual) - static_cast<double>(expected), expected == actual});
    };
    // A reference value rounded to `digits` decimals matches when |actual - expected| <= half a unit.
    auto rounded = [&](const char* name, double expected, std::optional<double> actual, int digits,
                       double tol = -1) {
        if (tol < 0) tol = 0.5 * std::pow(10.0, -digits) + 1e-12;
        if (!actual) {
            r.rows.push_back({name, fmt(expected, digits), "undefined", NAN, false});
            return;
        }
        const double delta = *actual - expected;
        r.rows.push_back({name, fmt(expected, digits), fmt(*actual, 4), delta, std::abs(delta) <= tol});
    };
    exact("network size", f.n, d.size);
    exact("edges", f.edges, d.edges);
    r.rows.push_back({"directed", "No", "No", 0.0, true});
    rounded("density", f.density, d.density, 2);
    rounded("mean degree", f.mean_degree, d.mean_degree, 2);
    rounded("sd degree", f.sd_degree, d.sd_degree, 2);
    rounded("skewness degree", f.skewness_degree, d.skewness_degree, 2, 0.05);
    exact("isolates", f.isolates, d.isolates);
    rounded("transitivity", f.transitivity, d.transitivity, 2);
    r.ok = true;
    for (const auto& row : r.rows) r.ok = r.ok && row.ok;
    return r;
}

std::string format_verify(const VerifyResult& r) {
    std::ostringstream o;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-18s %10s %10s %10s  %s\n", "statistic", "expected", "actual", "delta", "ok");
    o << buf;
    for (const auto& row : r.rows) {
        std::snprintf(buf, sizeof buf, "%-18s %10s %10s %10.4f  %s\n", row.statistic.c_str(), row.expected.c_str(),
                      row.actual.c_str(), row.delta, row.ok ? "yes" : "NO");
        o << buf;
    }
    o << (r.ok ? "PASS\n" : "FAIL\n");
    return o.str();
}

}  // namespace hope
