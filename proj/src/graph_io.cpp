#include "hope/graph_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "hope/errors.hpp"

namespace hope {

namespace fs = std::filesystem;

namespace {

std::string where(const fs::path& p, std::size_t line) {
    return p.string() + ":" + std::to_string(line) + ": ";
}

std::string trim(std::string s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
    auto pos = line.find('#');
    return trim(pos == std::string::npos ? line : line.substr(0, pos));
}

bool parse_double(const std::string& text, double& out) {
    const auto t = trim(text);
    if (t.empty()) return false;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
        } else if (c == ',' && !quoted) {
            cells.push_back(trim(cell));
            cell.clear();
        } else if (c != '\r') {
            cell += c;
        }
    }
    cells.push_back(trim(cell));
    return cells;
}

std::ifstream open_or_throw(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw DataError("cannot open " + p.string());
    return in;
}

// Parses rows of two integer node ids; invokes f(dyad, line_no).
template <class F>
void read_pairs(const fs::path& path, std::size_t n, int index_base, F&& f) {
    if (index_base != 0 && index_base != 1)
        throw UsageError("index base must be 0 or 1, got " + std::to_string(index_base));
    auto in = open_or_throw(path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = strip_comment(line);
        if (body.empty()) continue;
        std::istringstream ss(body);
        long long a = 0, b = 0;
        std::string extra;
        if (!(ss >> a >> b) || (ss >> extra))
            throw DataError(where(path, line_no) + "expected two node ids, got '" + body + "'");
        a -= index_base;
        b -= index_base;
        if (a < 0 || b < 0 || a >= static_cast<long long>(n) || b >= static_cast<long long>(n))
            throw DataError(where(path, line_no) + "node id out of range for n=" +
                            std::to_string(n) + " (index base " + std::to_string(index_base) +
                            ")");
        if (a == b) throw DataError(where(path, line_no) + "self-loop at node " + std::to_string(a + index_base));
        f(make_dyad(static_cast<Node>(a), static_cast<Node>(b)), line_no);
    }
}

std::string exact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

Graph load_graph(const fs::path& edgelist, const std::optional<fs::path>& attributes,
                 std::size_t n, int index_base) {
    if (n == 0) throw UsageError("graph size must be positive");
    Graph g(n);
    read_pairs(edgelist, n, index_base, [&](Dyad d, std::size_t line_no) {
        if (g.has_edge(d))
            throw DataError(where(edgelist, line_no) + "duplicate edge (" +
                            std::to_string(d.i + index_base) + "," +
                            std::to_string(d.j + index_base) + ")");
        g.flip(d);
    });

    if (!attributes) return g;
    auto in = open_or_throw(*attributes);
    std::string line;
    if (!std::getline(in, line)) throw DataError(attributes->string() + ": empty attribute file");
    const auto header = split_csv(line);
    std::vector<std::vector<double>> cols(header.size());
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != header.size())
            throw DataError(where(*attributes, line_no) + "expected " +
                            std::to_string(header.size()) + " cells, got " +
                            std::to_string(cells.size()));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double v = 0;
            if (!parse_double(cells[c], v))
                throw DataError(where(*attributes, line_no) + "attribute '" + header[c] +
                                "' has non-numeric value '" + cells[c] +
                                "' (recode categories as integers)");
            cols[c].push_back(v);
        }
    }
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (cols[c].size() != n)
            throw DataError(attributes->string() + ": attribute '" + header[c] + "' has " +
                            std::to_string(cols[c].size()) + " rows, expected n=" +
                            std::to_string(n));
        g.set_node_attribute(header[c], std::move(cols[c]));
    }
    return g;
}

void load_dyad_covariate(Graph& g, const std::string& name, const fs::path& csv) {
    const auto n = g.size();
    auto in = open_or_throw(csv);
    std::vector<double> m;
    m.reserve(n * n);
    std::string line;
    std::size_t line_no = 0, rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != n)
            throw DataError(where(csv, line_no) + "expected " + std::to_string(n) + " columns");
        for (const auto& cell : cells) {
            double v = 0;
            if (!parse_double(cell, v))
                throw DataError(where(csv, line_no) + "non-numeric cell '" + cell + "'");
            m.push_back(v);
        }
        ++rows;
    }
    if (rows != n)
        throw DataError(csv.string() + ": expected " + std::to_string(n) + " rows, got " +
                        std::to_string(rows));
    g.set_dyad_covariate(name, std::move(m));
}

void save_graph(const Graph& g, const fs::path& edgelist, const std::optional<fs::path>& attributes) {
    std::ofstream out(edgelist);
    if (!out) throw DataError("cannot write " + edgelist.string());
    out << "# n " << g.size() << ", index base 0\n";
    for (auto d : g.edges()) out << d.i << ' ' << d.j << '\n';
    if (!attributes) return;
    const auto& attrs = g.covariates().node;
    std::ofstream a(*attributes);
    if (!a) throw DataError("cannot write " + attributes->string());
    bool first = true;
    for (const auto& [name, _] : attrs) {
        a << (first ? "" : ",") << name;
        first = false;
    }
    a << '\n';
    for (std::size_t k = 0; k < g.size(); ++k) {
        first = true;
        for (const auto& [_, values] : attrs) {
            a << (first ? "" : ",") << exact(values[k]);
            first = false;
        }
        a << '\n';
    }
}

DyadSet load_dyads(const fs::path& path, std::size_t n, int index_base) {
    std::vector<Dyad> dyads;
    std::vector<std::uint8_t> seen(dyad_count(n), 0);
    read_pairs(path, n, index_base, [&](Dyad d, std::size_t line_no) {
        auto k = dyad_index(d, n);
        if (seen[k]) throw DataError(where(path, line_no) + "duplicate dyad");
        seen[k] = 1;
        dyads.push_back(d);
    });
    return DyadSet(std::move(dyads), n);
}

}  // namespace hope
