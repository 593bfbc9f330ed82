#include <doctest.h>

#include <cmath>

#include "hope/errors.hpp"
#include "hope/harness.hpp"
#include "hope/report.hpp"
#include "test_util.hpp"

using namespace hope;

namespace {

void check_cover(const FoldPlan& plan, std::size_t n) {
    std::vector<int> hits(dyad_count(n), 0);
    for (const auto& f : plan.folds)
        for (auto d : f) ++hits[dyad_index(d, n)];
    const int expect = plan.node_held_out() ? 2 : 1;
    for (int h : hits) CHECK(h == expect);
}

HopeConfig small_config(std::size_t draws = 60) {
    HopeConfig cfg;
    cfg.draws = draws;
    cfg.seed = 13;
    cfg.estimator.mc_sample_size = 400;
    cfg.estimator.compute_loglik = false;
    return cfg;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("partition sizes for a 36-node graph") {
    const Graph g(36);
    const auto node = build_partition(g, Strategy::NodeHeldOut);
    CHECK(node.size() == 36);
    for (const auto& f : node.folds) CHECK(f.size() == 35);
    check_cover(node, 36);

    const auto lmo = build_partition(g, Strategy::LeaveMOut, 35, 7);
    CHECK(lmo.size() == 35);
    for (const auto& f : lmo.folds) CHECK(f.size() == 18);
    check_cover(lmo, 36);

    const auto loo = build_partition(g, Strategy::LeaveOneOut);
    CHECK(loo.size() == 630);
    check_cover(loo, 36);

    // Uneven split: sizes differ by at most one.
    const auto uneven = build_partition(Graph(10), Strategy::LeaveMOut, 7, 1);
    std::size_t lo = 100, hi = 0;
    for (const auto& f : uneven.folds) lo = std::min(lo, f.size()), hi = std::max(hi, f.size());
    CHECK(hi - lo <= 1);
    check_cover(uneven, 10);
}

TEST_CASE("partition determinism and validation") {
    const Graph g(12);
    CHECK(build_partition(g, Strategy::LeaveMOut, 5, 3).folds == build_partition(g, Strategy::LeaveMOut, 5, 3).folds);
    CHECK_FALSE(build_partition(g, Strategy::LeaveMOut, 5, 3).folds ==
                build_partition(g, Strategy::LeaveMOut, 5, 4).folds);
    CHECK_THROWS_AS(build_partition(g, Strategy::LeaveMOut, 0), UsageError);
    CHECK_THROWS_AS(build_partition(g, Strategy::LeaveMOut, 67), UsageError);
    CHECK_THROWS_AS(explicit_partition({DyadSet({{0, 1}}, 12), DyadSet({{0, 1}, {2, 3}}, 12)}, 12), UsageError);
    CHECK(strategy_from_string("node") == Strategy::NodeHeldOut);
    CHECK_THROWS_AS(strategy_from_string("kfold"), UsageError);
    const auto sub = sample_subset(12, 20, 5);
    CHECK(sub.size() == 20);
    const auto plan = build_partition(g, Strategy::LeaveOneOut, std::nullopt, 1, sub);
    CHECK(plan.size() == 20);
}

TEST_CASE("leave-M-out with M = |D| is leave-one-out") {
    const Graph g(7);
    const auto a = build_partition(g, Strategy::LeaveOneOut, std::nullopt, 9);
    const auto b = build_partition(g, Strategy::LeaveMOut, 21, 9);
    CHECK(a.folds == b.folds);
}

TEST_CASE("edges-only leave-one-out matches the closed-form expectation") {
    Rng rng(40);
    const Graph g = testutil::random_graph(14, 0.3, rng);
    const double N = 91, E = static_cast<double>(g.edge_count());
    const auto plan = build_partition(g, Strategy::LeaveOneOut);
    auto cfg = small_config(400);
    const auto rep = run_hope(g, {ModelSpec{{term::Edges{}}}}, plan, cfg);
    const auto& row = rep.models[0].row;
    // Holding out an edge leaves density (E-1)/(N-1); holding out a non-edge leaves E/(N-1).
    const double p1 = (E - 1) / (N - 1), p0 = E / (N - 1);
    const double expect = (E * p1 + (N - E) * (1 - p0)) / N;
    const double se = std::sqrt(expect * (1 - expect) / (N * 400));
    CHECK(std::abs(*row.overall_acc - expect) < 4 * se + 1e-3);
    CHECK(row.confusion.total() == static_cast<std::uint64_t>(N * 400));
    CHECK(rep.models[0].failed_folds == 0);
    // Reported TSL is the sum of per-dyad squared errors of yhat.
    double tsl = 0;
    for (auto& f : rep.models[0].folds)
        for (auto [d, yh] : f.yhat) tsl += std::pow((g.has_edge(d) ? 1.0 : 0.0) - yh, 2);
    CHECK(row.tsl == doctest::Approx(tsl));
}

TEST_CASE("exact LOO marginals for dyad-independent models") {
    Rng rng(41);
    const Graph g = testutil::random_graph(10, 0.3, rng);
    const auto plan = build_partition(g, Strategy::LeaveOneOut);
    auto cfg = small_config(30);
    cfg.exact_loo_marginals = true;
    const auto rep = run_hope(g, {ModelSpec{{term::Edges{}}}}, plan, cfg);
    const double N = 45, E = static_cast<double>(g.edge_count());
    for (const auto& f : rep.models[0].folds) {
        const auto [d, yh] = *f.yhat.begin();
        const double dens = (E - (g.has_edge(d) ? 1 : 0)) / (N - 1);
        CHECK(yh == doctest::Approx(dens).epsilon(1e-7));
    }
}

TEST_CASE("report is identical across worker counts") {
    Rng rng(42);
    const Graph g = testutil::random_graph(12, 0.3, rng);
    const auto plan = build_partition(g, Strategy::NodeHeldOut);
    const std::vector<ModelSpec> models{ModelSpec{{term::Edges{}}}, ModelSpec{{term::Edges{}, term::Gwesp{0.5}}}};
    auto cfg = small_config(40);
    const auto a = run_hope(g, models, plan, cfg);
    cfg.workers = 3;
    const auto b = run_hope(g, models, plan, cfg);
    CHECK(to_json(a, false).dump() == to_json(b, false).dump());
    // Every simulated draw preserved the observed dyads (checked inside the harness); node-held-out scaling.
    double raw = 0;
    for (const auto& f : a.models[0].folds) raw += f.tsl;
    CHECK(a.models[0].row.tsl_raw == doctest::Approx(raw));
    CHECK(a.models[0].row.tsl == doctest::Approx(raw / 2));
}

TEST_CASE("failed folds are reported, not hidden") {
    // x is nonzero only at node 4. Holding out node 4 (or node 3, its only partner) leaves the
    // nodecov statistic constant or at its minimum over the observed dyads, so those folds fail.
    Graph g = testutil::graph_from(5, {{0, 1}, {1, 2}, {0, 2}, {3, 4}});
    g.set_node_attribute("x", {0, 0, 0, 0, 1});
    const auto plan = build_partition(g, Strategy::NodeHeldOut);
    auto cfg = small_config(20);
    const auto rep = run_hope(g, {ModelSpec{{term::Edges{}, term::NodeCov{"x"}}}}, plan, cfg);
    CHECK(rep.models[0].failed_folds == 2);
    CHECK_FALSE(rep.models[0].warnings.empty());
    CHECK_FALSE(rep.warnings.empty());
}

TEST_CASE("runtime model") {
    CHECK(runtime_model(1, 35, 2.0) == doctest::Approx(70.0));
    CHECK(runtime_model(7, 35, 2.0, 1.0, 0.5) == doctest::Approx(11.5));
    CHECK_THROWS_AS(runtime_model(0, 1, 1), UsageError);
}

}  // TEST_SUITE
