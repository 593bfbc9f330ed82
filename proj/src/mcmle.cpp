#include <cmath>
#include <sstream>
#include <thread>

#include <Eigen/Dense>

#include "hope/errors.hpp"
#include "hope/estimation.hpp"

namespace hope {

namespace {

// Persistent chains over one dyad set; draws are gathered chain by chain so the
// result does not depend on the number of worker threads.
struct ChainGroup {
    std::vector<ChainState> chains;

    Eigen::MatrixXd draw(const Model& model, const Eigen::VectorXd& theta, std::size_t N, std::size_t burn,
                         std::size_t thin, Proposal proposal, std::size_t workers) {
        const std::size_t c_count = chains.size();
        Eigen::MatrixXd out(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(model.dim()));
        std::vector<std::size_t> offset(c_count + 1, 0);
        for (std::size_t c = 0; c < c_count; ++c)
            offset[c + 1] = offset[c] + N / c_count + (c < N % c_count ? 1 : 0);
        auto run = [&](std::size_t c) {
            auto& s = chains[c];
            advance(s, model, theta, burn, proposal);
            for (std::size_t k = offset[c]; k < offset[c + 1]; ++k) {
                advance(s, model, theta, thin, proposal);
                out.row(static_cast<Eigen::Index>(k)) = s.stats.transpose();
            }
        };
        workers = std::min(workers, c_count);
        if (workers <= 1) {
            for (std::size_t c = 0; c < c_count; ++c) run(c);
        } else {
            std::vector<std::jthread> pool;
            for (std::size_t w = 0; w < workers; ++w)
                pool.emplace_back([&, w] {
                    for (std::size_t c = w; c < c_count; c += workers) run(c);
                });
        }
        return out;
    }
};

double log_mean_exp(const Eigen::VectorXd& v) {
    return log_sum_exp(v) - std::log(static_cast<double>(v.size()));
}

struct Weighted {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    double ess = 0;
    double log_mean = 0;  // log mean exp(X delta)
};

Weighted weigh(const Eigen::MatrixXd& X, const Eigen::VectorXd& delta) {
    const Eigen::VectorXd lw = X * delta;
    Weighted r;
    r.log_mean = log_mean_exp(lw);
    Eigen::VectorXd w = (lw.array() - lw.maxCoeff()).exp();
    w /= w.sum();
    r.ess = 1.0 / w.squaredNorm();
    r.mean = X.transpose() * w;
    const Eigen::MatrixXd centered = X.rowwise() - r.mean.transpose();
    r.cov = centered.transpose() * w.asDiagonal() * centered;
    return r;
}

// Solves cov x = b, adding a ridge when cov is numerically singular.
Eigen::VectorXd robust_solve(const Eigen::MatrixXd& cov, const Eigen::VectorXd& b, bool* ridged = nullptr) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    const double top = std::max(es.eigenvalues().maxCoeff(), 1e-300);
    if (es.eigenvalues().minCoeff() > 1e-10 * top) return cov.ldlt().solve(b);
    if (ridged) *ridged = true;
    const Eigen::MatrixXd reg = cov + 1e-6 * top * Eigen::MatrixXd::Identity(cov.rows(), cov.cols());
    return reg.ldlt().solve(b);
}

struct InnerResult {
    Eigen::VectorXd delta;
    std::size_t steps = 0;
    bool ridged = false;
};

// Maximizes the importance-sampled log-likelihood ratio
//   LLR(d) = log mean exp(C d) - log mean exp(U d)   (or g_obs'd - log mean exp(U d))
// from d = 0 by scoring steps with halving. Rows of U and C are centered at a common point.
InnerResult maximize_llr(const Eigen::MatrixXd& U, const Eigen::MatrixXd* C, const Eigen::VectorXd& g_obs,
                         const EstimatorConfig& cfg) {
    const auto p = U.cols();
    const double min_ess = cfg.min_ess_fraction * static_cast<double>(U.rows());
    auto llr = [&](const Eigen::VectorXd& d, Weighted& wu, Weighted* wc) {
        wu = weigh(U, d);
        if (C) {
            *wc = weigh(*C, d);
            return wc->log_mean - wu.log_mean;
        }
        return g_obs.dot(d) - wu.log_mean;
    };
    InnerResult r;
    r.delta = Eigen::VectorXd::Zero(p);
    Weighted wu, wc;
    double cur = llr(r.delta, wu, C ? &wc : nullptr);
    for (std::size_t it = 0; it < 50; ++it) {
        const Eigen::VectorXd target = C ? wc.mean : g_obs;
        const Eigen::VectorXd grad = target - wu.mean;
        const Eigen::VectorXd dir = robust_solve(wu.cov, grad, &r.ridged);
        if (grad.dot(dir) < 1e-14) break;
        double alpha = 1.0;
        bool accepted = false;
        for (std::size_t h = 0; h <= cfg.step_halving_limit; ++h, alpha *= 0.5) {
            const Eigen::VectorXd trial = r.delta + alpha * dir;
            Weighted tu, tc;
            const double val = llr(trial, tu, C ? &tc : nullptr);
            const bool ess_ok = tu.ess >= min_ess && (!C || tc.ess >= min_ess);
            if (std::isfinite(val) && val > cur && ess_ok) {
                r.delta = trial;
                cur = val;
                wu = std::move(tu);
                if (C) wc = std::move(tc);
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        ++r.steps;
    }
    return r;
}

Eigen::VectorXd start_value(const PartialGraph& g, const ModelSpec& spec, const Model& model,
                            const EstimatorConfig& cfg, FitDiagnostics& diag) {
    if (cfg.start && static_cast<std::size_t>(cfg.start->size()) == model.dim()) return *cfg.start;
    try {
        EstimatorConfig c = cfg;
        c.compute_loglik = false;
        return mple(g, spec, c).theta;
    } catch (const EstimationError& e) {  // check_boundary already passed: pseudo-likelihood separation only
        diag.warnings.push_back(std::string("MPLE start failed (") + e.what() + "); starting from the density model");
    }
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.dim()));
    const double obs = static_cast<double>(g.observed_dyad_count());
    const double dens = std::clamp(static_cast<double>(g.masked().edge_count()) / obs, 1e-3, 1 - 1e-3);
    for (std::size_t k = 0; k < model.dim(); ++k)
        if (model.names()[k] == "edges") theta[static_cast<Eigen::Index>(k)] = std::log(dens / (1 - dens));
    return theta;
}

}  // namespace

FitResult mcmle(const PartialGraph& g, const ModelSpec& spec, const EstimatorConfig& cfg) {
    cfg.validate();
    const Model model(spec, g.base);
    const std::size_t n = g.base.size();
    const auto p = static_cast<Eigen::Index>(model.dim());
    if (g.observed_dyad_count() == 0) throw EstimationError("no observed dyads to fit");
    check_boundary(g, model);

    FitResult out;
    out.names = model.names();
    out.observed_dyads = g.observed_dyad_count();
    auto& diag = out.diagnostics;
    diag.method = "mcmle";
    diag.sample_size = cfg.mc_sample_size;

    Eigen::VectorXd theta = start_value(g, spec, model, cfg, diag);

    const bool partial = !g.free.empty();
    const Graph masked = g.masked();
    const Eigen::VectorXd g_obs = model.stats(masked);  // only used when fully observed
    const DyadSet everything = DyadSet::all(n);
    const std::size_t chains = std::max<std::size_t>(1, cfg.sampler.chains);

    ChainGroup uncond, cond;
    for (std::size_t c = 0; c < chains; ++c) {
        Rng init(derive_seed(cfg.seed, {0, c, 0}));
        uncond.chains.push_back(
            make_chain(initial_conditional_state(g, init), model, everything.dyads(), derive_seed(cfg.seed, {0, c, 1})));
        if (partial) {
            Rng cinit(derive_seed(cfg.seed, {1, c, 0}));
            cond.chains.push_back(
                make_chain(initial_conditional_state(g, cinit), model, g.free.dyads(), derive_seed(cfg.seed, {1, c, 1})));
        }
    }

    const std::size_t N = cfg.mc_sample_size;
    bool any_ridge = false;
    for (std::size_t iter = 0; iter < cfg.max_iter; ++iter) {
        const std::size_t ub = iter == 0 ? cfg.sampler.burn_in_for(everything.size()) : cfg.sampler.thin_for(everything.size()) * 4;
        Eigen::MatrixXd U = uncond.draw(model, theta, N, ub, cfg.sampler.thin_for(everything.size()),
                                        cfg.sampler.proposal, cfg.sampler.workers);
        Eigen::MatrixXd C;
        if (partial) {
            const std::size_t cb = iter == 0 ? cfg.sampler.burn_in_for(g.free.size()) : cfg.sampler.thin_for(g.free.size()) * 4;
            C = cond.draw(model, theta, N, cb, cfg.sampler.thin_for(g.free.size()), cfg.sampler.proposal,
                          cfg.sampler.workers);
        }
        // Center everything at the observed statistics for numerical stability.
        const Eigen::RowVectorXd center = partial ? Eigen::RowVectorXd(C.colwise().mean()) : Eigen::RowVectorXd(g_obs.transpose());
        U.rowwise() -= center;
        if (partial) C.rowwise() -= center;
        const Eigen::VectorXd g_c = partial ? Eigen::VectorXd(C.colwise().mean().transpose()) : Eigen::VectorXd::Zero(p);

        const Weighted wu = weigh(U, Eigen::VectorXd::Zero(p));
        const Eigen::VectorXd score = g_c - wu.mean;
        bool ridged = false;
        const Eigen::VectorXd z = robust_solve(wu.cov, score, &ridged);
        const double s = std::sqrt(std::max(0.0, score.dot(z)));
        any_ridge = any_ridge || ridged;

        const InnerResult inner = maximize_llr(U, partial ? &C : nullptr, g_c, cfg);
        any_ridge = any_ridge || inner.ridged;
        std::ostringstream tr;
        tr << "iter " << iter << ": standardized score " << s << ", theta [";
        for (Eigen::Index k = 0; k < p; ++k) tr << (k ? ", " : "") << theta[k];
        tr << "], inner steps " << inner.steps << ", |delta| " << inner.delta.norm();
        diag.trace.push_back(tr.str());

        theta += inner.delta;
        if (!theta.allFinite())
            throw EstimationError("MCMLE produced a non-finite estimate", diag.trace);

        if (s < cfg.gradient_tolerance) {
            diag.iterations = iter + 1;
            diag.gradient_norm = s;
            diag.converged = true;
            if (any_ridge)
                diag.warnings.push_back("sample covariance of the statistics was near-singular; a ridge was added");
            out.theta = theta;
            if (!partial) {
                const Weighted fin = weigh(U, inner.delta);
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fin.cov);
                if (es.eigenvalues().minCoeff() > 0)
                    out.std_err = fin.cov.inverse().diagonal().cwiseMax(0.0).cwiseSqrt();
            }
            return out;
        }
    }
    throw EstimationError("MCMLE did not converge in " + std::to_string(cfg.max_iter) +
                              " iterations (last line of the trace shows the standardized score)",
                          diag.trace);
}

namespace {

// Trapezoid or (odd point count) Simpson weights on [0,1].
std::vector<double> quadrature_weights(std::size_t K) {
    std::vector<double> w(K, 0.0);
    const double h = 1.0 / static_cast<double>(K - 1);
    if (K % 2 == 1 && K >= 3) {
        for (std::size_t k = 0; k < K; ++k) w[k] = (k == 0 || k == K - 1) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        for (auto& x : w) x *= h / 3.0;
    } else {
        for (std::size_t k = 0; k < K; ++k) w[k] = (k == 0 || k == K - 1) ? 0.5 * h : h;
    }
    return w;
}

// int_0^1 theta' E_{t theta}[g] dt with one warm-started chain over `free`.
double path_integral(const Eigen::VectorXd& theta, const Model& model, const PartialGraph& g,
                     const EstimatorConfig& cfg, std::uint64_t seed) {
    const auto K = cfg.bridge_points;
    const auto w = quadrature_weights(K);
    Rng init(derive_seed(seed, {0}));
    ChainState s = make_chain(initial_conditional_state(g, init), model, g.free.dyads(), derive_seed(seed, {1}));
    const std::size_t burn = cfg.sampler.burn_in_for(g.free.size());
    const std::size_t thin = cfg.sampler.thin_for(g.free.size());
    double total = 0;
    for (std::size_t k = 0; k < K; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(K - 1);
        const Eigen::VectorXd th = t * theta;
        advance(s, model, th, k == 0 ? burn : burn / 4 + 1, cfg.sampler.proposal);
        double acc = 0;
        for (std::size_t b = 0; b < cfg.bridge_sample_size; ++b) {
            advance(s, model, th, thin, cfg.sampler.proposal);
            acc += theta.dot(s.stats);
        }
        total += w[k] * acc / static_cast<double>(cfg.bridge_sample_size);
    }
    return total;
}

}  // namespace

double loglik_path_sampling(const Eigen::VectorXd& theta, const ModelSpec& spec, const PartialGraph& g,
                            const EstimatorConfig& cfg) {
    cfg.validate();
    const Model model(spec, g.base);
    if (static_cast<std::size_t>(theta.size()) != model.dim())
        throw UsageError("coefficient vector length does not match the model");
    const std::size_t n = g.base.size();
    const double ln2 = std::log(2.0);
    const PartialGraph all(g.masked(), DyadSet::all(n));
    const double log_kappa = static_cast<double>(dyad_count(n)) * ln2 + path_integral(theta, model, all, cfg, derive_seed(cfg.seed, {7, 0}));
    double log_cond;
    if (g.free.empty()) {
        log_cond = theta.dot(model.stats(g.base));
    } else {
        log_cond = static_cast<double>(g.free.size()) * ln2 + path_integral(theta, model, g, cfg, derive_seed(cfg.seed, {7, 1}));
    }
    return log_cond - log_kappa;
}

}  // namespace hope
