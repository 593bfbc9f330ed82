#include "hope/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <memory>
#include <mutex>
#include <thread>

#include "hope/errors.hpp"
#include "hope/model_parse.hpp"

namespace hope {

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::LeaveOneOut: return "loo";
        case Strategy::LeaveMOut: return "lmo";
        case Strategy::NodeHeldOut: return "node";
        case Strategy::Explicit: return "explicit";
    }
    return "loo";
}

Strategy strategy_from_string(const std::string& s) {
    if (s == "loo") return Strategy::LeaveOneOut;
    if (s == "lmo") return Strategy::LeaveMOut;
    if (s == "node") return Strategy::NodeHeldOut;
    if (s == "explicit") return Strategy::Explicit;
    throw UsageError("unknown strategy '" + s + "' (expected loo, lmo or node)");
}

void FoldPlan::validate(std::size_t n) const {
    if (folds.empty()) throw UsageError("fold plan is empty");
    std::vector<std::uint8_t> seen(dyad_count(n), 0);
    for (const auto& f : folds) {
        if (f.empty()) throw UsageError("fold plan contains an empty fold");
        if (f.graph_size() != n) throw UsageError("fold built for a different graph size");
        for (auto d : f) {
            auto& s = seen[dyad_index(d, n)];
            if (s && !node_held_out()) throw UsageError("folds of a leave-out plan must be disjoint");
            s = 1;
        }
    }
}

namespace {

void shuffle(std::vector<Dyad>& v, Rng& rng) {
    for (std::size_t k = v.size(); k > 1; --k) std::swap(v[k - 1], v[rng.uniform_index(k)]);
}

}  // namespace

FoldPlan build_partition(const Graph& g, Strategy strategy, std::optional<std::size_t> M, std::uint64_t seed,
                         std::optional<DyadSet> subset) {
    const std::size_t n = g.size();
    FoldPlan plan;
    plan.strategy = strategy;
    plan.seed = seed;
    plan.subset = subset;
    if (strategy == Strategy::Explicit) throw UsageError("explicit partitions are built with explicit_partition");
    if (strategy == Strategy::NodeHeldOut) {
        if (n < 2) throw UsageError("node-held-out needs at least 2 nodes");
        for (std::size_t v = 0; v < n; ++v) {
            auto inc = DyadSet::incident_to(static_cast<Node>(v), n);
            if (subset) {
                const auto keep = subset->mask();
                std::vector<Dyad> kept;
                for (auto d : inc)
                    if (keep[dyad_index(d, n)]) kept.push_back(d);
                if (kept.empty()) continue;
                inc = DyadSet(std::move(kept), n);
            }
            plan.folds.push_back(std::move(inc));
        }
        return plan;
    }
    const DyadSet source = subset ? *subset : DyadSet::all(n);
    std::vector<Dyad> pool(source.begin(), source.end());
    const std::size_t D = pool.size();
    const std::size_t m = strategy == Strategy::LeaveOneOut ? D : M.value_or(n > 1 ? n - 1 : 1);
    if (m < 1 || m > D)
        throw UsageError("fold count M = " + std::to_string(m) + " must lie in [1, " + std::to_string(D) + "]");
    Rng rng(derive_seed(seed, {0x70a27}));
    shuffle(pool, rng);
    std::size_t at = 0;
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t len = D / m + (k < D % m ? 1 : 0);
        plan.folds.emplace_back(std::vector<Dyad>(pool.begin() + static_cast<std::ptrdiff_t>(at),
                                                  pool.begin() + static_cast<std::ptrdiff_t>(at + len)),
                                n);
        at += len;
    }
    return plan;
}

FoldPlan explicit_partition(std::vector<DyadSet> folds, std::size_t n) {
    FoldPlan plan;
    plan.strategy = Strategy::Explicit;
    plan.folds = std::move(folds);
    plan.validate(n);
    return plan;
}

DyadSet sample_subset(std::size_t n, std::size_t count, std::uint64_t seed) {
    const auto all = DyadSet::all(n);
    if (count > all.size()) throw UsageError("subset larger than the dyad set");
    std::vector<Dyad> pool(all.begin(), all.end());
    Rng rng(derive_seed(seed, {0x5b5e7}));
    shuffle(pool, rng);
    pool.resize(count);
    std::sort(pool.begin(), pool.end());
    return DyadSet(std::move(pool), n);
}

void HopeConfig::validate() const {
    if (draws < 1) throw UsageError("number of draws B must be at least 1");
    if (workers < 1) throw UsageError("worker count must be at least 1");
    estimator.validate();
    sampler.validate();
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Everything one (model, fold) job accumulates before the ordered merge.
struct FoldWork {
    FoldResult result;
    ReliabilityAccumulator degree, betweenness, eigen;
    std::vector<double> deg_centralization, betw_centralization;
    std::vector<std::string> warnings;

    explicit FoldWork(const std::vector<double>& d, const std::vector<double>& b, const std::vector<double>& e)
        : degree(d), betweenness(b), eigen(e) {}
};

struct Observed {
    std::vector<double> degree, betweenness, eigen;
};

void run_fold(const Graph& g, const Model& model, const DyadSet& fold, std::size_t model_index,
              std::size_t fold_index, const HopeConfig& cfg, const std::optional<Eigen::VectorXd>& warm,
              FoldWork& w) {
    const auto t0 = Clock::now();
    auto& r = w.result;
    r.fold = fold_index;
    r.fit_seed = derive_seed(cfg.seed, {model_index, fold_index, 0});
    r.sample_seed = derive_seed(cfg.seed, {model_index, fold_index, 1});
    const PartialGraph pg(g, fold);

    EstimatorConfig est = cfg.estimator;
    est.seed = r.fit_seed;
    est.compute_loglik = false;
    est.sampler.workers = 1;
    const Method method = est.method == Method::Auto
                              ? (model.dyad_independent() ? Method::MPLE : Method::MCMLE)
                              : est.method;
    if (warm && method == Method::MPLE) est.start = warm;
    try {
        r.fit = fit(pg, model.spec(), est);
    } catch (const Error& e) {
        r.ok = false;
        r.error = e.what();
        r.seconds = seconds_since(t0);
        return;
    }
    r.fit_seconds = seconds_since(t0);
    const Eigen::VectorXd& theta = r.fit->theta;

    SamplerConfig sc = cfg.sampler;
    sc.seed = r.sample_seed;
    sc.workers = 1;

    const std::size_t n = g.size();
    const Graph masked = pg.masked();
    std::vector<std::size_t> ones(fold.size(), 0);
    const auto fixed = [&] {
        std::vector<std::uint8_t> m = fold.mask();
        for (auto& x : m) x = !x;
        return m;
    }();
    run_conditional_chains(pg, theta, model, cfg.draws, sc, [&](std::size_t, std::size_t, const ChainState& s) {
        const Graph& y = s.graph;
        // Conditioning check: observed dyads never move.
        for (std::size_t k = 0; k < dyad_count(n); ++k)
            if (fixed[k]) {
                const Dyad d = dyad_from_index(k, n);
                if (y.has_edge(d) != masked.has_edge(d))
                    throw std::logic_error("conditional draw changed an observed dyad");
            }
        for (std::size_t k = 0; k < fold.size(); ++k) {
            const bool state = y.has_edge(fold[k]);
            ones[k] += state;
            r.confusion.add(g.has_edge(fold[k]), state);
        }
        const auto deg = degree_centrality(y);
        const auto bet = betweenness_centrality(y);
        w.degree.add(deg);
        w.betweenness.add(bet);
        w.eigen.add(eigenvector_centrality(y));
        if (n >= 3) {
            w.deg_centralization.push_back(*centralization_from_scores(deg, CentralityKind::Degree));
            w.betw_centralization.push_back(*centralization_from_scores(bet, CentralityKind::Betweenness));
        }
    });

    const bool exact = cfg.exact_loo_marginals && fold.size() == 1 && model.dyad_independent();
    for (std::size_t k = 0; k < fold.size(); ++k) {
        const Dyad d = fold[k];
        const double yh = exact ? exact_marginal_change_score(masked, d, theta, model)
                                : marginal_estimate(ones[k], cfg.draws);
        r.yhat.emplace(d, yh);
        const double e = (g.has_edge(d) ? 1.0 : 0.0) - yh;
        r.tsl += e * e;
    }
    r.ok = true;
    r.seconds = seconds_since(t0);
}

}  // namespace

HopeReport run_hope(const Graph& g, const std::vector<ModelSpec>& models, const FoldPlan& plan,
                    const HopeConfig& cfg, std::vector<std::string> names) {
    const auto wall0 = Clock::now();
    cfg.validate();
    if (models.empty()) throw UsageError("no models to evaluate");
    plan.validate(g.size());

    HopeReport report;
    report.plan = plan;
    report.config = cfg;
    report.timing.workers = cfg.workers;

    std::vector<Model> bound;
    bound.reserve(models.size());
    for (const auto& spec : models) bound.emplace_back(spec, g);

    // Full-data MPLE as IRLS warm start.
    std::vector<std::optional<Eigen::VectorXd>> warm(models.size());
    if (cfg.warm_start) {
        for (std::size_t i = 0; i < models.size(); ++i) {
            try {
                EstimatorConfig c = cfg.estimator;
                c.compute_loglik = false;
                c.start.reset();
                warm[i] = mple(PartialGraph(g), models[i], c).theta;
            } catch (const Error&) {
            }
        }
    }

    Observed obs{degree_centrality(g), betweenness_centrality(g), {}};
    std::vector<std::string> obs_warn;
    obs.eigen = eigenvector_centrality(g, &obs_warn);
    for (auto& s : obs_warn) report.warnings.push_back("observed graph: " + s);

    const std::size_t M = plan.size();
    const std::size_t jobs = models.size() * M;
    std::vector<std::unique_ptr<FoldWork>> slots(jobs);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t j; (j = next++) < jobs;) {
            const std::size_t mi = j / M, fi = j % M;
            auto w = std::make_unique<FoldWork>(obs.degree, obs.betweenness, obs.eigen);
            try {
                run_fold(g, bound[mi], plan.folds[fi], mi, fi, cfg, warm[mi], *w);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
            slots[j] = std::move(w);
        }
    };
    const std::size_t threads = std::min(cfg.workers, jobs);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    const auto combine0 = Clock::now();
    const auto obs_deg_c = centralization(g, CentralityKind::Degree);
    const auto obs_bet_c = centralization(g, CentralityKind::Betweenness);
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
        ModelReport mr;
        mr.name = mi < names.size() ? names[mi] : to_formula(models[mi]);
        mr.spec = models[mi];
        ReliabilityAccumulator deg(obs.degree), bet(obs.betweenness), eig(obs.eigen);
        std::vector<double> degc, betc;
        std::vector<DyadSet> ok_folds;
        std::vector<MarginalEstimates> ok_yhat;
        for (std::size_t fi = 0; fi < M; ++fi) {
            auto& w = *slots[mi * M + fi];
            report.timing.fit_seconds += w.result.fit_seconds;
            if (!w.result.ok) {
                ++mr.failed_folds;
                mr.warnings.push_back("fold " + std::to_string(fi) + " excluded: " + w.result.error);
            } else {
                mr.row.confusion += w.result.confusion;
                deg.merge(w.degree);
                bet.merge(w.betweenness);
                eig.merge(w.eigen);
                degc.insert(degc.end(), w.deg_centralization.begin(), w.deg_centralization.end());
                betc.insert(betc.end(), w.betw_centralization.begin(), w.betw_centralization.end());
                ok_folds.push_back(plan.folds[fi]);
                ok_yhat.push_back(w.result.yhat);
            }
            mr.folds.push_back(std::move(w.result));
        }
        if (mr.failed_folds == M)
            throw EstimationError("every fold failed for model '" + mr.name + "'; first error: " + mr.folds[0].error);
        const auto acc = accuracy_from_confusion(mr.row.confusion);
        mr.row.edge_acc = acc.edge;
        mr.row.null_acc = acc.null;
        mr.row.overall_acc = acc.overall;
        const auto tsl = total_squared_loss(g, ok_folds, ok_yhat, plan.node_held_out());
        mr.row.tsl = tsl.scaled;
        mr.row.tsl_raw = tsl.raw;
        mr.row.rho_degree = deg.rho();
        mr.row.rho_betweenness = bet.rho();
        mr.row.rho_eigen = eig.rho();
        mr.row.mse_degree = deg.mse();
        mr.row.mse_betweenness = bet.mse();
        mr.row.mse_eigen = eig.mse();
        if (obs_deg_c && !degc.empty()) mr.row.rmse_deg_centralization = rmse_centralization(*obs_deg_c, degc);
        if (obs_bet_c && !betc.empty()) mr.row.rmse_betw_centralization = rmse_centralization(*obs_bet_c, betc);
        if (mr.failed_folds > 0)
            report.warnings.push_back(mr.name + ": " + std::to_string(mr.failed_folds) + " of " + std::to_string(M) +
                                      " folds excluded");
        report.models.push_back(std::move(mr));
    }
    report.timing.combine_seconds = seconds_since(combine0);
    report.timing.wall_seconds = seconds_since(wall0);
    return report;
}

double runtime_model(std::size_t cores, std::size_t folds, double fit_seconds, double partition_seconds,
                     double combine_seconds) {
    if (cores < 1) throw UsageError("core count must be at least 1");
    return partition_seconds + fit_seconds * static_cast<double>(folds) / static_cast<double>(cores) + combine_seconds;
}

}  // namespace hope
