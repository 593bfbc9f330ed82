#include <doctest.h>

#include <cmath>

#include "hope/errors.hpp"
#include "hope/estimation.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace hope;
using testutil::graph_from;

namespace {

double logit(double p) { return std::log(p / (1 - p)); }

// Triangle plus pendant on 4 nodes: interior MLE for [edges, gwesp(0.5)].
Graph triangle_pendant() { return graph_from(4, {{0, 1}, {1, 2}, {0, 2}, {2, 3}}); }

const ModelSpec kGw{{term::Edges{}, term::Gwesp{0.5}}};

}  // namespace

TEST_SUITE("estimation") {

TEST_CASE("edges-only MPLE is the logit of the density, with the binomial log-likelihood") {
    Rng rng(5);
    const Graph g = testutil::random_graph(20, 0.2, rng);
    const double N = 190, E = static_cast<double>(g.edge_count());
    const auto f = fit(PartialGraph(g), ModelSpec{{term::Edges{}}});
    CHECK(f.theta[0] == doctest::Approx(logit(E / N)).epsilon(1e-9));
    const double ll = E * std::log(E / N) + (N - E) * std::log(1 - E / N);
    CHECK(*f.loglik == doctest::Approx(ll).epsilon(1e-9));
    CHECK(*f.aic == doctest::Approx(-2 * ll + 2));
    CHECK(*f.bic == doctest::Approx(-2 * ll + std::log(N)));
    CHECK(f.diagnostics.loglik_method == "exact");
    CHECK(f.std_err->coeff(0) == doctest::Approx(std::sqrt(1 / (N * (E / N) * (1 - E / N)))));
}

TEST_CASE("MPLE of edges + nodematch matches the two-group closed form") {
    Rng rng(6);
    Graph g = testutil::random_graph(16, 0.3, rng);
    std::vector<double> x(16);
    for (std::size_t v = 0; v < 16; ++v) x[v] = static_cast<double>(v % 3);
    g.set_node_attribute("x", x);
    double e_same = 0, n_same = 0, e_diff = 0, n_diff = 0;
    for (std::size_t k = 0; k < dyad_count(16); ++k) {
        const Dyad d = dyad_from_index(k, 16);
        const bool same = x[static_cast<std::size_t>(d.i)] == x[static_cast<std::size_t>(d.j)];
        (same ? n_same : n_diff) += 1;
        (same ? e_same : e_diff) += g.has_edge(d);
    }
    const auto f = mple(PartialGraph(g), ModelSpec{{term::Edges{}, term::NodeMatch{"x"}}});
    CHECK(f.theta[0] == doctest::Approx(logit(e_diff / n_diff)).epsilon(1e-8));
    CHECK(f.theta[1] == doctest::Approx(logit(e_same / n_same) - logit(e_diff / n_diff)).epsilon(1e-8));
}

TEST_CASE("MPLE with held-out dyads uses only observed dyads") {
    Rng rng(7);
    const Graph g = testutil::random_graph(12, 0.3, rng);
    const auto free = DyadSet::incident_to(4, 12);
    double E = 0;
    for (std::size_t k = 0; k < dyad_count(12); ++k) {
        const Dyad d = dyad_from_index(k, 12);
        if (d.i != 4 && d.j != 4) E += g.has_edge(d);
    }
    const auto f = fit(PartialGraph(g, free), ModelSpec{{term::Edges{}}});
    CHECK(f.observed_dyads == 66 - 11);
    CHECK(f.theta[0] == doctest::Approx(logit(E / 55)).epsilon(1e-9));
}

TEST_CASE("boundary and identifiability errors") {
    const ModelSpec edges{{term::Edges{}}};
    CHECK_THROWS_AS(fit(PartialGraph(testutil::complete(3)), edges), BoundaryError);
    CHECK_THROWS_AS(fit(PartialGraph(Graph(5)), edges), BoundaryError);
    CHECK_THROWS_AS(fit(PartialGraph(testutil::complete(3)), kGw), BoundaryError);
    Graph g = testutil::cycle(6);
    g.set_node_attribute("x", std::vector<double>(6, 1.0));
    // Everyone matches: nodematch duplicates edges.
    try {
        mple(PartialGraph(g), ModelSpec{{term::Edges{}, term::NodeMatch{"x"}}});
        FAIL("expected an error");
    } catch (const BoundaryError&) {
        FAIL("rank deficiency is not a boundary problem");
    } catch (const EstimationError& e) {
        CHECK(std::string(e.what()).find("linear combination") != std::string::npos);
    }
}

TEST_CASE("BIC - AIC = p (ln N - 2)") {
    Rng rng(2);
    Graph g = testutil::random_graph(15, 0.3, rng);
    std::vector<double> x(15);
    for (std::size_t v = 0; v < 15; ++v) x[v] = static_cast<double>(v % 2);
    g.set_node_attribute("x", x);
    const PartialGraph pg(g, DyadSet({{0, 1}, {3, 9}, {2, 7}}, 15));
    const auto f = fit(pg, ModelSpec{{term::Edges{}, term::NodeMatch{"x"}, term::NodeCov{"x"}}});
    CHECK(*f.bic - *f.aic == doctest::Approx(3 * (std::log(105.0 - 3) - 2)).epsilon(1e-12));
}

TEST_CASE("exact enumerator agrees with an independent brute-force log-likelihood") {
    Rng rng(12);
    for (int rep = 0; rep < 6; ++rep) {
        const Graph g = testutil::random_graph(4 + rng.uniform_index(2), 0.5, rng);
        Eigen::VectorXd theta(2);
        theta << rng.uniform01() * 2 - 1.5, rng.uniform01() - 0.5;
        const ExactEnumerator ex(PartialGraph(g), kGw);
        CHECK(ex.loglik(theta) == doctest::Approx(oracle::loglik(g, kGw, theta)).epsilon(1e-10));
        const auto pmf = ex.pmf(theta);
        double total = 0;
        for (double p : pmf) total += p;
        CHECK(total == doctest::Approx(1.0));
        CHECK(ex.mask_of(ex.graph_from_mask(37)) == 37);
        // Score is the derivative of loglik.
        const auto sc = ex.score(theta);
        for (Eigen::Index k = 0; k < 2; ++k) {
            Eigen::VectorXd h = Eigen::VectorXd::Zero(2);
            h[k] = 1e-5;
            CHECK(sc[k] == doctest::Approx((ex.loglik(theta + h) - ex.loglik(theta - h)) / 2e-5).epsilon(1e-5));
        }
    }
}

TEST_CASE("exact MLE solves the moment equations; boundary graphs are rejected") {
    const ExactEnumerator ex(PartialGraph(triangle_pendant()), kGw);
    const auto f = ex.mle();
    CHECK(ex.score(f.theta).norm() < 1e-8);
    CHECK(f.loglik.has_value());
    CHECK_THROWS_AS(ExactEnumerator(PartialGraph(testutil::star(4)), kGw).mle(), BoundaryError);
    // Every observed dyad is an edge: the likelihood climbs to 1 along +edges, never attained.
    const PartialGraph all_on(triangle_pendant(), DyadSet({{0, 3}, {1, 3}}, 4));
    CHECK_THROWS_AS(ExactEnumerator(all_on, kGw).mle(), BoundaryError);
    CHECK_THROWS_AS(check_boundary(all_on, Model(kGw, all_on.base)), BoundaryError);
}

TEST_CASE("conditional normalizer with free dyads") {
    Rng rng(3);
    const Graph g = testutil::random_graph(5, 0.4, rng);
    const PartialGraph pg(g, DyadSet({{0, 1}, {2, 3}, {1, 4}}, 5));
    Eigen::VectorXd theta(2);
    theta << -0.4, 0.3;
    const ExactEnumerator ex(pg, kGw);
    const auto cond = exact_conditional_pmf(pg, kGw, theta);
    REQUIRE(cond.size() == 8);
    double s = 0;
    for (auto [m, p] : cond) s += p;
    CHECK(s == doctest::Approx(1.0));
    // Face-value likelihood: log sum over completions minus log kappa.
    CHECK(ex.loglik(theta) ==
          doctest::Approx(ex.log_conditional_normalizer(theta) - ex.log_normalizer(theta)).epsilon(1e-12));
}

TEST_CASE("MCMLE recovers the exact MLE on a small graph") {
    const PartialGraph pg(triangle_pendant());
    const auto exact = ExactEnumerator(pg, kGw).mle();
    EstimatorConfig cfg;
    cfg.method = Method::MCMLE;
    cfg.mc_sample_size = 50000;
    cfg.sampler.thin = 12;
    cfg.seed = 17;
    cfg.compute_loglik = false;
    const auto f = fit(pg, kGw, cfg);
    CHECK(f.diagnostics.converged);
    CHECK((f.theta - exact.theta).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("MCMLE with missing dyads targets the face-value likelihood") {
    // Triangle-rich 5-node graph with two dyads held out.
    const Graph g = graph_from(5, {{0, 1}, {1, 2}, {0, 2}, {2, 3}, {3, 4}, {2, 4}});
    const PartialGraph pg(g, DyadSet({{0, 3}, {1, 4}}, 5));
    const ExactEnumerator ex(pg, kGw);
    const auto exact = ex.mle();
    EstimatorConfig cfg;
    cfg.method = Method::MCMLE;
    cfg.mc_sample_size = 40000;
    cfg.sampler.thin = 20;
    cfg.seed = 5;
    cfg.compute_loglik = false;
    const auto f = mcmle(pg, kGw, cfg);
    CHECK((f.theta - exact.theta).cwiseAbs().maxCoeff() < 0.1);
}

TEST_CASE("path-sampled log-likelihood matches exact enumeration") {
    const Graph g = triangle_pendant();
    Eigen::VectorXd theta(2);
    theta << -1.3, 0.8;
    EstimatorConfig cfg;
    cfg.bridge_sample_size = 5000;
    cfg.sampler.thin = 12;
    cfg.seed = 8;
    const double exact = ExactEnumerator(PartialGraph(g), kGw).loglik(theta);
    CHECK(std::abs(loglik_path_sampling(theta, kGw, PartialGraph(g), cfg) - exact) < 0.05);
    const PartialGraph pg(g, DyadSet({{0, 3}, {1, 3}}, 4));
    const double exact_pg = ExactEnumerator(pg, kGw).loglik(theta);
    CHECK(std::abs(loglik_path_sampling(theta, kGw, pg, cfg) - exact_pg) < 0.05);
}

TEST_CASE("fit result JSON round trip") {
    const auto f = fit(PartialGraph(testutil::cycle(7)), ModelSpec{{term::Edges{}}});
    const auto back = fit_from_json(to_json(f));
    CHECK(back.names == f.names);
    CHECK(back.theta == f.theta);
    CHECK(*back.std_err == *f.std_err);
    CHECK(*back.aic == *f.aic);
    CHECK(back.observed_dyads == f.observed_dyads);
    CHECK(method_from_string("mcmle") == Method::MCMLE);
    CHECK_THROWS_AS(method_from_string("bayes"), UsageError);
}

}  // TEST_SUITE
