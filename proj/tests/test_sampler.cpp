#include <doctest.h>

#include <cmath>
#include <map>

#include "hope/errors.hpp"
#include "hope/estimation.hpp"
#include "hope/sampler.hpp"
#include "test_util.hpp"

using namespace hope;

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::uint32_t mask_of(const Graph& g) {
    std::uint32_t m = 0;
    for (std::size_t k = 0; k < dyad_count(g.size()); ++k)
        if (g.has_edge(dyad_from_index(k, g.size()))) m |= 1u << k;
    return m;
}

// Total variation between the empirical distribution of the draws and the exact pmf.
double tv_distance(const std::vector<Graph>& draws, const std::vector<double>& pmf) {
    std::vector<double> freq(pmf.size(), 0.0);
    for (const auto& g : draws) freq[mask_of(g)] += 1.0 / static_cast<double>(draws.size());
    double tv = 0;
    for (std::size_t k = 0; k < pmf.size(); ++k) tv += std::abs(freq[k] - pmf[k]);
    return tv / 2;
}

}  // namespace

TEST_SUITE("sampler") {

TEST_CASE("theta = 0 accepts every proposal") {
    const Graph g = testutil::cycle(6);
    const ModelSpec spec{{term::Edges{}, term::Gwesp{0.5}}};
    const Model m(spec, g);
    const auto all = DyadSet::all(6);
    auto st = make_chain(g, m, all.dyads(), 5);
    for (int k = 0; k < 500; ++k) CHECK(mh_step(st, m, Eigen::VectorXd::Zero(2)));
    CHECK((st.stats - m.stats(st.graph)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("empty free set is rejected") {
    const Graph g(4);
    const ModelSpec spec{{term::Edges{}}};
    const Model m(spec, g);
    CHECK_THROWS_AS(make_chain(g, m, {}, 1), UsageError);
    CHECK_THROWS_AS(sample_conditional(PartialGraph(g), Eigen::VectorXd::Zero(1), spec, 10, {}), UsageError);
    CHECK_THROWS_AS(sample_conditional(PartialGraph(g, DyadSet::all(4)), Eigen::VectorXd::Zero(2), spec, 10, {}),
                    std::exception);
}

TEST_CASE("edge count mean under an edges-only model") {
    const Graph g(4);
    SamplerConfig cfg;
    cfg.seed = 9;
    const auto draws = sample_conditional(PartialGraph(g, DyadSet::all(4)), Eigen::VectorXd::Constant(1, -1.5),
                                          ModelSpec{{term::Edges{}}}, 40000, cfg);
    double mean = 0;
    for (const auto& d : draws) mean += static_cast<double>(d.edge_count()) / static_cast<double>(draws.size());
    CHECK(std::abs(mean - 6 * logistic(-1.5)) < 0.02);
}

TEST_CASE("uniform at theta = 0 within 3 binomial SE per graph") {
    SamplerConfig cfg;
    cfg.seed = 21;
    const auto draws = sample_conditional(PartialGraph(Graph(4), DyadSet::all(4)), Eigen::VectorXd::Zero(2),
                                          ModelSpec{{term::Edges{}, term::Gwesp{0.5}}}, 64000, cfg);
    std::vector<int> count(64, 0);
    for (const auto& d : draws) ++count[mask_of(d)];
    const double se = std::sqrt(64000.0 * (1.0 / 64) * (63.0 / 64));
    int outside = 0;
    for (int c : count) outside += std::abs(c - 1000.0) > 3 * se;
    CHECK(outside <= 1);  // 64 cells, P(|z| > 3) = 0.0027 each
}

TEST_CASE("single free dyad: empirical P(edge) matches the change-score marginal") {
    Rng rng(4);
    const Graph g = testutil::random_graph(7, 0.4, rng);
    const ModelSpec spec{{term::Edges{}, term::Gwesp{0.5}}};
    const Model m(spec, g);
    const Dyad d{1, 5};
    Eigen::VectorXd theta(2);
    theta << -1.0, 0.6;
    const double p = logistic(theta.dot(m.change(g, d)));
    SamplerConfig cfg;
    cfg.seed = 2;
    const std::size_t B = 20000;
    const auto draws = sample_conditional(PartialGraph(g, DyadSet({d}, 7)), theta, m, B, cfg);
    double hits = 0;
    for (const auto& x : draws) hits += x.has_edge(d);
    CHECK(std::abs(hits / B - p) < 4 * std::sqrt(p * (1 - p) / B));
}

TEST_CASE("draws match exhaustive enumeration (TV) for both proposals") {
    const ModelSpec spec{{term::Edges{}, term::Gwesp{0.5}}};
    Rng rng(77);
    for (auto proposal : {Proposal::UniformDyad, Proposal::TieNoTie}) {
        for (int rep = 0; rep < 3; ++rep) {
            const Graph g = testutil::random_graph(4, 0.5, rng);
            Eigen::VectorXd theta(2);
            theta << -2 + 2 * rng.uniform01(), -0.5 + 1.5 * rng.uniform01();
            const PartialGraph pg(g, DyadSet::all(4));
            const auto pmf = ExactEnumerator(pg, spec).pmf(theta);
            SamplerConfig cfg;
            cfg.seed = 100 + static_cast<std::uint64_t>(rep);
            cfg.proposal = proposal;
            cfg.thin = 30;
            const auto draws = sample_conditional(pg, theta, spec, 100000, cfg);
            CHECK(tv_distance(draws, pmf) < 0.02);
        }
    }
}

TEST_CASE("conditional draws keep observed dyads and match the conditional pmf") {
    const ModelSpec spec{{term::Edges{}, term::Gwesp{0.5}}};
    Rng rng(8);
    const Graph g = testutil::random_graph(5, 0.5, rng);
    const DyadSet free({{0, 1}, {1, 2}, {2, 4}, {0, 3}}, 5);
    const PartialGraph pg(g, free);
    Eigen::VectorXd theta(2);
    theta << -0.7, 0.4;
    SamplerConfig cfg;
    cfg.seed = 3;
    cfg.proposal = Proposal::TieNoTie;
    const auto draws = sample_conditional(pg, theta, spec, 40000, cfg);
    const auto exact = exact_conditional_pmf(pg, spec, theta);
    std::map<std::uint32_t, double> freq;
    for (const auto& x : draws) {
        std::uint32_t m = 0;
        for (std::size_t k = 0; k < dyad_count(5); ++k) {
            const Dyad d = dyad_from_index(k, 5);
            bool is_free = false;
            for (auto f : free) is_free = is_free || f == d;
            if (!is_free) REQUIRE(x.has_edge(d) == g.has_edge(d));
        }
        for (std::size_t k = 0; k < free.size(); ++k)
            if (x.has_edge(free[k])) m |= 1u << k;
        freq[m] += 1.0 / static_cast<double>(draws.size());
    }
    double tv = 0;
    for (auto [m, p] : exact) tv += std::abs(freq[m] - p);
    CHECK(tv / 2 < 0.02);
}

TEST_CASE("identical output across worker counts; chains split deterministically") {
    Rng rng(1);
    const Graph g = testutil::random_graph(12, 0.3, rng);
    const ModelSpec spec{{term::Edges{}, term::Gwesp{0.5}}};
    const Model m(spec, g);
    const PartialGraph pg(g, DyadSet::incident_to(3, 12));
    Eigen::VectorXd theta(2);
    theta << -1.2, 0.3;
    SamplerConfig cfg;
    cfg.seed = 44;
    cfg.chains = 3;
    cfg.workers = 1;
    const auto a = sample_stats(pg, theta, m, 100, cfg);
    const auto ga = sample_conditional(pg, theta, m, 100, cfg);
    cfg.workers = 3;
    const auto b = sample_stats(pg, theta, m, 100, cfg);
    const auto gb = sample_conditional(pg, theta, m, 100, cfg);
    CHECK(a == b);
    CHECK(ga == gb);
    for (std::size_t k = 0; k < ga.size(); ++k)
        CHECK((m.stats(ga[k]).transpose() - a.row(static_cast<Eigen::Index>(k))).cwiseAbs().maxCoeff() < 1e-9);
    cfg.seed = 45;
    CHECK_FALSE(sample_stats(pg, theta, m, 100, cfg) == a);
}

TEST_CASE("free dyads bookkeeping") {
    Graph g = testutil::graph_from(4, {{0, 1}, {2, 3}});
    const auto all = DyadSet::all(4);
    FreeDyads f(all.dyads(), g);
    CHECK(f.ties() == 2);
    CHECK(f.non_ties() == 4);
    g.flip({0, 2});
    f.flipped({0, 2});
    CHECK(f.ties() == 3);
    for (std::size_t k = 0; k < f.ties(); ++k) CHECK(g.has_edge(f.tie(k)));
    for (std::size_t k = 0; k < f.non_ties(); ++k) CHECK_FALSE(g.has_edge(f.non_tie(k)));
}

}  // TEST_SUITE
