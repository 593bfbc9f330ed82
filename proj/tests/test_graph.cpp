#include <doctest.h>

#include "hope/descriptives.hpp"
#include "hope/errors.hpp"
#include "hope/graph.hpp"
#include "hope/graph_io.hpp"
#include "test_util.hpp"

using namespace hope;
using testutil::graph_from;

TEST_SUITE("graph") {

TEST_CASE("dyad index is a bijection onto [0, C(n,2))") {
    for (std::size_t n : {2u, 3u, 7u, 65u, 130u}) {
        std::size_t expect = 0;
        for (Node i = 0; i < static_cast<Node>(n); ++i)
            for (Node j = i + 1; j < static_cast<Node>(n); ++j) {
                const auto k = dyad_index(i, j, n);
                CHECK(k == expect);
                CHECK(dyad_index(j, i, n) == k);
                CHECK(dyad_from_index(k, n) == Dyad{i, j});
                ++expect;
            }
        CHECK(expect == dyad_count(n));
    }
    CHECK_THROWS_AS(dyad_index(2, 2, 5), LoopError);
    CHECK_THROWS_AS(dyad_index(0, 5, 5), std::out_of_range);
    CHECK_THROWS_AS(make_dyad(3, 3), LoopError);
}

TEST_CASE("edges, degrees and shared partners across word boundaries") {
    Graph g(130);
    g.set_edge({0, 64}, true);
    g.set_edge({0, 129}, true);
    g.set_edge({64, 129}, true);
    g.set_edge({1, 129}, true);
    CHECK(g.edge_count() == 4);
    CHECK(g.degree(129) == 3);
    CHECK(g.shared_partners(0, 64) == 1);
    CHECK(g.shared_partners(0, 1) == 1);
    g.flip({0, 64});
    CHECK_FALSE(g.has_edge(64, 0));
    CHECK(g.edge_count() == 3);
    g.set_edge({0, 129}, true);  // already present
    CHECK(g.edge_count() == 3);
    std::vector<Node> seen;
    g.for_each_neighbor(129, [&](Node v) { seen.push_back(v); });
    CHECK(seen == std::vector<Node>{0, 1, 64});
}

TEST_CASE("covariates validate shape and are shared on copy") {
    Graph g(3);
    CHECK_THROWS_AS(g.set_node_attribute("x", {1, 2}), DataError);
    g.set_node_attribute("x", {1, 2, 3});
    CHECK_THROWS_AS(g.node_attribute("y"), DataError);
    CHECK_THROWS_AS(g.set_dyad_covariate("m", {0, 1, 0, 2, 0, 0, 0, 0, 0}), DataError);  // asymmetric
    Graph h = g;
    h.set_node_attribute("x", {4, 5, 6});
    CHECK(g.node_attribute("x")[0] == 1);
    CHECK(h.node_attribute("x")[0] == 4);
}

TEST_CASE("dyad sets reject duplicates; incident_to covers n - 1 dyads") {
    CHECK_THROWS_AS(DyadSet({{0, 1}, {0, 1}}, 3), std::invalid_argument);
    const auto inc = DyadSet::incident_to(2, 5);
    CHECK(inc.size() == 4);
    for (auto d : inc) CHECK((d.i == 2 || d.j == 2));
    CHECK(DyadSet::all(6).size() == 15);
}

TEST_CASE("masked graph clears exactly the free dyads") {
    const Graph g = graph_from(4, {{0, 1}, {1, 2}, {2, 3}});
    const PartialGraph pg(g, DyadSet({{1, 2}, {0, 3}}, 4));
    const Graph m = pg.masked();
    CHECK(m.has_edge(0, 1));
    CHECK_FALSE(m.has_edge(1, 2));
    CHECK(m.has_edge(2, 3));
    CHECK(pg.observed_dyad_count() == 4);
}

TEST_CASE("edgelist loading: comments, 1-based ids, descriptive errors") {
    testutil::TempDir dir;
    const auto ok = dir.write("g.txt", "# header\n1 2\n2 3  # trailing comment\n\n3 4\n");
    const auto attrs = dir.write("a.csv", "Office,Seniority\n1,1\n2,2\n1,3\n3,4\n");
    const Graph g = load_graph(ok, attrs, 4, 1);
    CHECK(g.edge_count() == 3);
    CHECK(g.has_edge(0, 1));
    CHECK(g.node_attribute("Seniority")[3] == 4.0);

    auto message_of = [](auto&& f) {
        try {
            f();
        } catch (const DataError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    const auto loop = dir.write("loop.txt", "1 2\n3 3\n");
    CHECK(message_of([&] { load_graph(loop, std::nullopt, 4, 1); }).find(":2") != std::string::npos);
    const auto dup = dir.write("dup.txt", "1 2\n2 1\n");
    CHECK(message_of([&] { load_graph(dup, std::nullopt, 4, 1); }).find("duplicate") != std::string::npos);
    const auto range = dir.write("range.txt", "1 5\n");
    CHECK(message_of([&] { load_graph(range, std::nullopt, 4, 1); }).find("out of range") != std::string::npos);
    const auto junk = dir.write("junk.txt", "1 x\n");
    CHECK_THROWS_AS(load_graph(junk, std::nullopt, 4, 1), DataError);
    const auto short_attrs = dir.write("s.csv", "x\n1\n2\n");
    CHECK_THROWS_AS(load_graph(ok, short_attrs, 4, 1), DataError);
    const auto text_attrs = dir.write("t.csv", "x\n1\nb\n3\n4\n");
    CHECK_THROWS_AS(load_graph(ok, text_attrs, 4, 1), DataError);
    CHECK_THROWS_AS(load_graph(dir.path / "missing.txt", std::nullopt, 4, 1), DataError);
}

TEST_CASE("save/load round trip keeps edges and attributes exactly") {
    testutil::TempDir dir;
    Graph g = graph_from(5, {{0, 4}, {1, 3}, {2, 3}});
    g.set_node_attribute("w", {0.1, 1.0 / 3.0, -2.5, 1e-17, 7});
    save_graph(g, dir.path / "e.txt", dir.path / "a.csv");
    const Graph h = load_graph(dir.path / "e.txt", dir.path / "a.csv", 5, 0);
    CHECK(h == g);
}

TEST_CASE("descriptives of small graphs") {
    const auto s = descriptives(testutil::star(5));
    CHECK(s.edges == 4);
    CHECK(s.density == doctest::Approx(0.4));
    CHECK(s.mean_degree == doctest::Approx(1.6));
    CHECK(s.sd_degree == doctest::Approx(std::sqrt((2.4 * 2.4 + 4 * 0.6 * 0.6) / 4)));
    CHECK(s.transitivity.value() == doctest::Approx(0.0));
    CHECK(s.isolates == 0);
    const auto k = descriptives(testutil::complete(4));
    CHECK(k.transitivity.value() == doctest::Approx(1.0));
    CHECK_FALSE(k.skewness_degree.has_value());  // zero variance
    // Triangle plus pendant: 1 triangle, triples = 1 + 1 + 3 = 5 -> 3/5.
    const auto tp = descriptives(graph_from(5, {{0, 1}, {1, 2}, {0, 2}, {2, 3}}));
    CHECK(tp.transitivity.value() == doctest::Approx(0.6));
    CHECK(tp.isolates == 1);
    CHECK_FALSE(descriptives(Graph(2)).transitivity.has_value());
}

}  // TEST_SUITE
