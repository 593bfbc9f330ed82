#include <cmath>

#include "hope/errors.hpp"
#include "hope/estimation.hpp"

namespace hope {

std::string to_string(Method m) {
    switch (m) {
        case Method::Auto: return "auto";
        case Method::MPLE: return "mple";
        case Method::MCMLE: return "mcmle";
        case Method::Exact: return "exact";
    }
    return "auto";
}

Method method_from_string(const std::string& s) {
    if (s == "auto") return Method::Auto;
    if (s == "mple") return Method::MPLE;
    if (s == "mcmle") return Method::MCMLE;
    if (s == "exact") return Method::Exact;
    throw UsageError("unknown estimation method '" + s + "' (expected auto, mple, mcmle or exact)");
}

void EstimatorConfig::validate() const {
    if (max_iter == 0) throw UsageError("max_iter must be positive");
    if (!(gradient_tolerance > 0)) throw UsageError("gradient tolerance must be positive");
    if (mc_sample_size < 2) throw UsageError("MC sample size must be at least 2");
    if (bridge_points < 2) throw UsageError("path sampling needs at least 2 bridge points");
    if (bridge_sample_size < 1) throw UsageError("bridge sample size must be positive");
    if (!(min_ess_fraction > 0 && min_ess_fraction <= 1)) throw UsageError("min ESS fraction must lie in (0,1]");
    sampler.validate();
}

void FitResult::set_loglik(double value, std::string method) {
    const double p = static_cast<double>(theta.size());
    loglik = value;
    aic = -2.0 * value + 2.0 * p;
    bic = -2.0 * value + p * std::log(static_cast<double>(observed_dyads));
    diagnostics.loglik_method = std::move(method);
}

nlohmann::json to_json(const FitResult& f) {
    nlohmann::json coef = nlohmann::json::array();
    for (std::size_t k = 0; k < f.names.size(); ++k) {
        nlohmann::json c{{"name", f.names[k]}, {"estimate", f.theta[static_cast<Eigen::Index>(k)]}};
        if (f.std_err) c["std_err"] = (*f.std_err)[static_cast<Eigen::Index>(k)];
        else c["std_err"] = nullptr;
        coef.push_back(std::move(c));
    }
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    const auto& d = f.diagnostics;
    return {
        {"coefficients", coef},
        {"loglik", opt(f.loglik)},
        {"aic", opt(f.aic)},
        {"bic", opt(f.bic)},
        {"observed_dyads", f.observed_dyads},
        {"diagnostics",
         {{"method", d.method},
          {"iterations", d.iterations},
          {"gradient_norm", d.gradient_norm},
          {"sample_size", d.sample_size},
          {"converged", d.converged},
          {"loglik_method", d.loglik_method},
          {"warnings", d.warnings},
          {"trace", d.trace}}},
    };
}

FitResult fit_from_json(const nlohmann::json& j) {
    FitResult f;
    const auto& coef = j.at("coefficients");
    f.theta.resize(static_cast<Eigen::Index>(coef.size()));
    bool have_se = true;
    Eigen::VectorXd se(static_cast<Eigen::Index>(coef.size()));
    for (std::size_t k = 0; k < coef.size(); ++k) {
        f.names.push_back(coef[k].at("name").get<std::string>());
        f.theta[static_cast<Eigen::Index>(k)] = coef[k].at("estimate").get<double>();
        if (coef[k].contains("std_err") && coef[k]["std_err"].is_number())
            se[static_cast<Eigen::Index>(k)] = coef[k]["std_err"].get<double>();
        else have_se = false;
    }
    if (have_se) f.std_err = se;
    auto opt = [&](const char* key) -> std::optional<double> {
        if (j.contains(key) && j[key].is_number()) return j[key].get<double>();
        return std::nullopt;
    };
    f.loglik = opt("loglik");
    f.aic = opt("aic");
    f.bic = opt("bic");
    f.observed_dyads = j.value("observed_dyads", std::size_t{0});
    if (j.contains("diagnostics")) {
        const auto& d = j["diagnostics"];
        f.diagnostics.method = d.value("method", std::string{});
        f.diagnostics.iterations = d.value("iterations", std::size_t{0});
        f.diagnostics.gradient_norm = d.value("gradient_norm", 0.0);
        f.diagnostics.sample_size = d.value("sample_size", std::size_t{0});
        f.diagnostics.converged = d.value("converged", false);
        f.diagnostics.loglik_method = d.value("loglik_method", std::string{"none"});
    }
    return f;
}

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v) {
    if (v.size() == 0) return -std::numeric_limits<double>::infinity();
    const double m = v.maxCoeff();
    if (!std::isfinite(m)) return m;
    return m + std::log((v.array() - m).exp().sum());
}

namespace {

double log1p_exp(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

double dyad_independent_loglik(const PartialGraph& g, const Model& model, const Eigen::VectorXd& theta) {
    if (!model.dyad_independent())
        throw std::invalid_argument("exact dyad-independent log-likelihood requested for a dependence model");
    const Graph y = g.masked();
    const auto mask = g.free.mask();
    Eigen::VectorXd delta(static_cast<Eigen::Index>(model.dim()));
    double ll = 0.0;
    for (std::size_t k = 0; k < dyad_count(y.size()); ++k) {
        if (!mask.empty() && mask[k]) continue;
        const Dyad d = dyad_from_index(k, y.size());
        model.change(y, d, delta);
        const double eta = theta.dot(delta);
        ll += (y.has_edge(d) ? eta : 0.0) - log1p_exp(eta);
    }
    return ll;
}

void check_boundary(const PartialGraph& g, const Model& model) {
    const Graph y = g.masked();
    const std::size_t n = y.size();
    const auto p = static_cast<Eigen::Index>(model.dim());
    const auto free_mask = g.free.mask();
    const bool fully_observed = g.free.empty();

    Eigen::VectorXd lo = Eigen::VectorXd::Zero(p), hi = Eigen::VectorXd::Zero(p), obs = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd delta(p);
    const Graph empty(n);
    for (std::size_t k = 0; k < dyad_count(n); ++k) {
        if (!free_mask.empty() && free_mask[k]) continue;
        const Dyad d = dyad_from_index(k, n);
        model.change(empty, d, delta);  // dyad-independent coordinates do not depend on the graph
        lo += delta.cwiseMin(0.0);
        hi += delta.cwiseMax(0.0);
        if (y.has_edge(d)) obs += delta;
    }

    // Coordinates of GW terms are monotone in the edge set: extremes at the empty and complete graphs.
    std::vector<bool> dependent(static_cast<std::size_t>(p), false);
    if (!model.dyad_independent()) {
        Graph complete(n);
        for (std::size_t k = 0; k < dyad_count(n); ++k) complete.flip(dyad_from_index(k, n));
        const Eigen::VectorXd s_empty = model.stats(empty);
        const Eigen::VectorXd s_full = model.stats(complete);
        const Eigen::VectorXd s_obs = model.stats(y);
        const auto& names = model.names();
        for (Eigen::Index c = 0; c < p; ++c) {
            const auto& nm = names[static_cast<std::size_t>(c)];
            if (nm.rfind("gwesp", 0) == 0 || nm.rfind("gwdeg", 0) == 0) {
                dependent[static_cast<std::size_t>(c)] = true;
                lo[c] = s_empty[c];
                hi[c] = s_full[c];
                obs[c] = s_obs[c];
            }
        }
    }

    for (Eigen::Index c = 0; c < p; ++c) {
        if (dependent[static_cast<std::size_t>(c)] && !fully_observed) continue;
        const auto& nm = model.names()[static_cast<std::size_t>(c)];
        const double tol = 1e-9 * (1.0 + std::abs(hi[c]) + std::abs(lo[c]));
        if (hi[c] - lo[c] <= tol)
            throw BoundaryError("statistic '" + nm + "' cannot vary over the observed dyads; its coefficient is not identified");
        if (std::abs(obs[c] - hi[c]) <= tol)
            throw BoundaryError("statistic '" + nm + "' is at its maximum (" + std::to_string(obs[c]) +
                                "); the MLE of its coefficient is +infinity");
        if (std::abs(obs[c] - lo[c]) <= tol)
            throw BoundaryError("statistic '" + nm + "' is at its minimum (" + std::to_string(obs[c]) +
                                "); the MLE of its coefficient is -infinity");
    }
}

FitResult fit(const PartialGraph& g, const ModelSpec& spec, const EstimatorConfig& cfg) {
    cfg.validate();
    Method m = cfg.method;
    if (m == Method::Auto) m = is_dyad_independent(spec) ? Method::MPLE : Method::MCMLE;
    FitResult out;
    switch (m) {
        case Method::Exact: out = ExactEnumerator(g, spec).mle(); return out;
        case Method::MPLE: out = mple(g, spec, cfg); break;
        default: out = mcmle(g, spec, cfg); break;
    }
    if (!cfg.compute_loglik) return out;
    const Model model(spec, g.base);
    if (model.dyad_independent()) {
        out.set_loglik(dyad_independent_loglik(g, model, out.theta), "exact");
    } else if (m == Method::MCMLE) {
        out.set_loglik(loglik_path_sampling(out.theta, spec, g, cfg), "path-sampling");
    }
    return out;
}

}  // namespace hope
