#include <doctest.h>

#include <cmath>

#include "hope/errors.hpp"
#include "hope/model_parse.hpp"
#include "hope/rng.hpp"
#include "hope/terms.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace hope;

namespace {

Graph with_covariates(Graph g, Rng& rng) {
    const auto n = g.size();
    std::vector<double> office(n), seniority(n);
    std::vector<double> dist(n * n, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
        office[v] = v < 3 ? static_cast<double>(v + 1) : static_cast<double>(1 + rng.uniform_index(3));
        seniority[v] = static_cast<double>(rng.uniform_index(30)) / 3.0;
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) dist[i * n + j] = dist[j * n + i] = rng.uniform01() * 5;
    g.set_node_attribute("office", office);
    g.set_node_attribute("seniority", seniority);
    g.set_dyad_covariate("dist", dist);
    return g;
}

ModelSpec full_spec() {
    return {{term::Edges{}, term::Gwesp{0.75}, term::Gwdegree{0.8}, term::NodeMatch{"office"},
             term::NodeMatchDiff{"office", std::vector<int>{1, 3}}, term::NodeCov{"seniority"},
             term::EdgeCov{"dist"}}};
}

}  // namespace

TEST_SUITE("terms") {

TEST_CASE("statistics agree with the definitional oracle") {
    Rng rng(11);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t n = 3 + rng.uniform_index(8);
        const Graph g = with_covariates(testutil::random_graph(n, rng.uniform01(), rng), rng);
        const Model m(full_spec(), g);
        REQUIRE(m.dim() == 8);
        const auto s = m.stats(g);
        const auto& office = g.node_attribute("office");
        const auto& sen = g.node_attribute("seniority");
        const auto& dist = g.dyad_covariate("dist");
        const auto levels = attribute_levels(office);
        CHECK(s[0] == doctest::Approx(static_cast<double>(g.edge_count())));
        CHECK(s[1] == doctest::Approx(oracle::gwesp(g, 0.75)).epsilon(1e-12));
        CHECK(s[2] == doctest::Approx(oracle::gwdegree(g, 0.8)).epsilon(1e-12));
        CHECK(s[3] == oracle::edge_sum(g, [&](auto i, auto j) { return office[i] == office[j] ? 1.0 : 0.0; }));
        // keep = c(1,3): first and third observed level.
        std::size_t col = 4;
        REQUIRE(levels.size() == 3);
        for (int k : {1, 3}) {
            const double lv = levels[static_cast<std::size_t>(k - 1)];
            CHECK(s[static_cast<Eigen::Index>(col)] ==
                  oracle::edge_sum(g, [&](auto i, auto j) { return office[i] == lv && office[j] == lv ? 1.0 : 0.0; }));
            ++col;
        }
        CHECK(s[6] == doctest::Approx(oracle::edge_sum(g, [&](auto i, auto j) { return sen[i] + sen[j]; })));
        CHECK(s[7] == doctest::Approx(oracle::edge_sum(g, [&](auto i, auto j) { return dist[i * n + j]; })));
    }
}

TEST_CASE("change statistics equal differences of full statistics for every dyad") {
    Rng rng(3);
    for (int rep = 0; rep < 12; ++rep) {
        const std::size_t n = 3 + rng.uniform_index(6);
        Graph g = with_covariates(testutil::random_graph(n, rng.uniform01(), rng), rng);
        const Model m(full_spec(), g);
        for (std::size_t k = 0; k < dyad_count(n); ++k) {
            const Dyad d = dyad_from_index(k, n);
            Graph on = g, off = g;
            on.set_edge(d, true);
            off.set_edge(d, false);
            const Eigen::VectorXd expect = m.stats(on) - m.stats(off);
            const Eigen::VectorXd got = m.change(g, d);
            CHECK((expect - got).cwiseAbs().maxCoeff() < 1e-10);
        }
    }
}

TEST_CASE("EP and degree distributions") {
    const Graph g = testutil::graph_from(5, {{0, 1}, {1, 2}, {0, 2}, {2, 3}});
    const auto ep = ep_distribution(g);
    REQUIRE(ep.size() == 4);
    CHECK(ep[0] == 1);
    CHECK(ep[1] == 3);
    const auto dg = dg_distribution(g);
    CHECK(dg == std::vector<std::size_t>{1, 1, 2, 1, 0});
}

TEST_CASE("gwesp/gwdegree weights: first shared partner counts exactly once") {
    // K3: each edge has one shared partner, weight e^phi (1 - (1 - e^-phi)) = 1.
    const auto s = suff_stats(testutil::complete(3), {{term::Gwesp{1.3}, term::Gwdegree{0.4}}});
    CHECK(s[0] == doctest::Approx(3.0));
    // Degree 2 at every node: e^phi (1 - (1 - e^-phi)^2) = 2 - e^-phi.
    CHECK(s[1] == doctest::Approx(3 * (2 - std::exp(-0.4))));
}

TEST_CASE("resolution errors") {
    Graph g(4);
    g.set_node_attribute("x", {1, 1, 2, 2});
    CHECK_THROWS_AS(Model({{term::NodeCov{"missing"}}}, g), DataError);
    CHECK_THROWS_AS(Model({{term::NodeMatchDiff{"x", std::vector<int>{3}}}}, g), DataError);
    CHECK_THROWS_AS(Model({{term::EdgeCov{"nope"}}}, g), DataError);
    const Model m({{term::Edges{}, term::NodeMatchDiff{"x", std::nullopt}}}, g);
    CHECK(m.names() == std::vector<std::string>{"edges", "nodematch.x.1", "nodematch.x.2"});
    CHECK(m.dyad_independent());
    CHECK_FALSE(is_dyad_independent({{term::Edges{}, term::Gwdegree{0.5}}}));
}

TEST_CASE("formula and JSON parsing round trip") {
    const auto spec =
        parse_formula("edges + gwesp(0.75) + nodematch(\"Office\", diff=TRUE, keep=c(1,2)) + gwdegree(log(2)) + "
                      "nodecov('Seniority') + nodematch(\"Practice\") + edgecov(\"dist\")");
    REQUIRE(spec.terms.size() == 7);
    CHECK(std::get<term::Gwdegree>(spec.terms[3]).decay == doctest::Approx(std::log(2.0)));
    const auto& diff = std::get<term::NodeMatchDiff>(spec.terms[2]);
    CHECK(diff.attr == "Office");
    CHECK(*diff.keep == std::vector<int>{1, 2});
    CHECK(model_from_json(model_to_json(spec)) == spec);
    CHECK(parse_formula(to_formula(spec)) == spec);
    CHECK(parse_model_argument(model_to_json(spec).dump()) == spec);
    CHECK(parse_model_argument("edges") == ModelSpec{{term::Edges{}}});
    CHECK_THROWS_AS(parse_formula("edges + triangle"), UsageError);
    CHECK_THROWS_AS(parse_formula("edges + gwesp("), UsageError);
    CHECK_THROWS_AS(model_from_json(nlohmann::json::parse(R"([{"term":"gwesp"}])")), UsageError);
    CHECK_THROWS_AS(model_from_json(nlohmann::json::parse(R"([{"term":"kstar","k":2}])")), UsageError);
}

}  // TEST_SUITE
