#include "hope/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "hope/errors.hpp"
#include "hope/model_parse.hpp"
#include "hope/rng.hpp"

namespace hope {

std::string format_number(std::optional<double> v, int digits) {
    if (!v || !std::isfinite(*v)) return "NA";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, *v);
    return buf;
}

const std::vector<std::string>& metric_csv_columns() {
    static const std::vector<std::string> cols{
        "model", "aic", "bic", "type", "edge_acc", "null_acc", "overall_acc", "tsl",
        "rho_degree", "rho_betweenness", "rho_eigen", "rmse_betw_centralization", "rmse_deg_centralization",
        "tsl_raw", "mse_degree", "mse_betweenness", "mse_eigen", "folds", "failed_folds", "draws"};
    return cols;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

nlohmann::json opt(const std::optional<double>& v) {
    return v && std::isfinite(*v) ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

void write_metric_csv(std::ostream& out, const std::vector<HopeReport>& reports,
                      const std::vector<std::optional<FitResult>>& full_fits) {
    const auto& cols = metric_csv_columns();
    for (std::size_t k = 0; k < cols.size(); ++k) out << (k ? "," : "") << cols[k];
    out << '\n';
    for (const auto& r : reports) {
        for (std::size_t i = 0; i < r.models.size(); ++i) {
            const auto& m = r.models[i];
            const auto& row = m.row;
            std::optional<double> aic, bic;
            if (i < full_fits.size() && full_fits[i]) aic = full_fits[i]->aic, bic = full_fits[i]->bic;
            out << csv_field(m.name) << ',' << format_number(aic) << ',' << format_number(bic) << ','
                << to_string(r.plan.strategy) << ',' << format_number(row.edge_acc) << ','
                << format_number(row.null_acc) << ',' << format_number(row.overall_acc) << ','
                << format_number(row.tsl) << ',' << format_number(row.rho_degree) << ','
                << format_number(row.rho_betweenness) << ',' << format_number(row.rho_eigen) << ','
                << format_number(row.rmse_betw_centralization) << ',' << format_number(row.rmse_deg_centralization)
                << ',' << format_number(row.tsl_raw) << ',' << format_number(row.mse_degree) << ','
                << format_number(row.mse_betweenness) << ',' << format_number(row.mse_eigen) << ','
                << r.plan.size() << ',' << m.failed_folds << ',' << r.config.draws << '\n';
        }
    }
}

void write_plot_data(std::ostream& out, const std::vector<HopeReport>& reports) {
    out << "strategy,model,fold,metric,value\n";
    for (const auto& r : reports) {
        const std::string strat = to_string(r.plan.strategy);
        for (const auto& m : r.models) {
            for (const auto& f : m.folds) {
                auto emit = [&](const std::string& metric, std::optional<double> v) {
                    out << strat << ',' << csv_field(m.name) << ',' << f.fold << ',' << csv_field(metric) << ','
                        << format_number(v, 17) << '\n';
                };
                if (!f.ok) {
                    emit("failed", 1.0);
                    continue;
                }
                const auto acc = accuracy_from_confusion(f.confusion);
                emit("edge_acc", acc.edge);
                emit("null_acc", acc.null);
                emit("overall_acc", acc.overall);
                emit("tsl_raw", f.tsl);
                emit("held_out", static_cast<double>(f.yhat.size()));
                if (f.fit)
                    for (std::size_t k = 0; k < f.fit->names.size(); ++k)
                        emit("theta." + f.fit->names[k], f.fit->theta[static_cast<Eigen::Index>(k)]);
            }
        }
    }
}

nlohmann::json to_json(const MetricRow& row) {
    return {{"edge_acc", opt(row.edge_acc)},
            {"null_acc", opt(row.null_acc)},
            {"overall_acc", opt(row.overall_acc)},
            {"tsl", row.tsl},
            {"tsl_raw", row.tsl_raw},
            {"rho_degree", opt(row.rho_degree)},
            {"rho_betweenness", opt(row.rho_betweenness)},
            {"rho_eigen", opt(row.rho_eigen)},
            {"mse_degree", row.mse_degree},
            {"mse_betweenness", row.mse_betweenness},
            {"mse_eigen", row.mse_eigen},
            {"rmse_betw_centralization", opt(row.rmse_betw_centralization)},
            {"rmse_deg_centralization", opt(row.rmse_deg_centralization)},
            {"confusion",
             {{"tp", row.confusion.tp}, {"fp", row.confusion.fp}, {"fn", row.confusion.fn}, {"tn", row.confusion.tn}}}};
}

nlohmann::json to_json(const FoldPlan& plan) {
    nlohmann::json folds = nlohmann::json::array();
    for (const auto& f : plan.folds) {
        nlohmann::json ds = nlohmann::json::array();
        for (auto d : f) ds.push_back({d.i, d.j});
        folds.push_back(std::move(ds));
    }
    nlohmann::json j{{"strategy", to_string(plan.strategy)},
                     {"seed", plan.seed},
                     {"fold_count", plan.size()},
                     {"index_base", 0},
                     {"folds", std::move(folds)}};
    if (plan.subset) {
        nlohmann::json ds = nlohmann::json::array();
        for (auto d : *plan.subset) ds.push_back({d.i, d.j});
        j["subset"] = std::move(ds);
    } else {
        j["subset"] = nullptr;
    }
    return j;
}

nlohmann::json to_json(const SamplerConfig& c) {
    return {{"burn_in", c.burn_in ? nlohmann::json(*c.burn_in) : nlohmann::json("20 per free dyad")},
            {"thin", c.thin ? nlohmann::json(*c.thin) : nlohmann::json("4 per free dyad + 1")},
            {"proposal", to_string(c.proposal)},
            {"seed", c.seed},
            {"chains", c.chains},
            {"workers", c.workers}};
}

nlohmann::json to_json(const EstimatorConfig& c) {
    return {{"method", to_string(c.method)},
            {"max_iter", c.max_iter},
            {"gradient_tolerance", c.gradient_tolerance},
            {"mc_sample_size", c.mc_sample_size},
            {"step_halving_limit", c.step_halving_limit},
            {"min_ess_fraction", c.min_ess_fraction},
            {"seed", c.seed},
            {"sampler", to_json(c.sampler)},
            {"compute_loglik", c.compute_loglik},
            {"bridge_points", c.bridge_points},
            {"bridge_sample_size", c.bridge_sample_size},
            {"irls_max_iter", c.irls_max_iter}};
}

nlohmann::json to_json(const HopeConfig& c) {
    return {{"draws", c.draws},
            {"estimator", to_json(c.estimator)},
            {"sampler", to_json(c.sampler)},
            {"seed", c.seed},
            {"workers", c.workers},
            {"exact_loo_marginals", c.exact_loo_marginals},
            {"warm_start", c.warm_start}};
}

SamplerConfig sampler_config_from_json(const nlohmann::json& j, SamplerConfig c) {
    try {
        if (j.contains("burn_in") && j["burn_in"].is_number()) c.burn_in = j["burn_in"].get<std::size_t>();
        if (j.contains("thin") && j["thin"].is_number()) c.thin = j["thin"].get<std::size_t>();
        if (j.contains("proposal")) c.proposal = proposal_from_string(j["proposal"].get<std::string>());
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("chains")) c.chains = j["chains"].get<std::size_t>();
        if (j.contains("workers")) c.workers = j["workers"].get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("invalid sampler configuration: ") + e.what());
    }
    return c;
}

EstimatorConfig estimator_config_from_json(const nlohmann::json& j, EstimatorConfig c) {
    try {
        if (j.contains("method")) c.method = method_from_string(j["method"].get<std::string>());
        if (j.contains("max_iter")) c.max_iter = j["max_iter"].get<std::size_t>();
        if (j.contains("gradient_tolerance")) c.gradient_tolerance = j["gradient_tolerance"].get<double>();
        if (j.contains("mc_sample_size")) c.mc_sample_size = j["mc_sample_size"].get<std::size_t>();
        if (j.contains("step_halving_limit")) c.step_halving_limit = j["step_halving_limit"].get<std::size_t>();
        if (j.contains("min_ess_fraction")) c.min_ess_fraction = j["min_ess_fraction"].get<double>();
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("sampler")) c.sampler = sampler_config_from_json(j["sampler"], c.sampler);
        if (j.contains("compute_loglik")) c.compute_loglik = j["compute_loglik"].get<bool>();
        if (j.contains("bridge_points")) c.bridge_points = j["bridge_points"].get<std::size_t>();
        if (j.contains("bridge_sample_size")) c.bridge_sample_size = j["bridge_sample_size"].get<std::size_t>();
        if (j.contains("irls_max_iter")) c.irls_max_iter = j["irls_max_iter"].get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("invalid estimator configuration: ") + e.what());
    }
    return c;
}

nlohmann::json to_json(const HopeReport& r, bool include_timing) {
    nlohmann::json models = nlohmann::json::array();
    for (const auto& m : r.models) {
        nlohmann::json folds = nlohmann::json::array();
        for (const auto& f : m.folds) {
            nlohmann::json yhat = nlohmann::json::array();
            for (const auto& [d, p] : f.yhat) yhat.push_back({d.i, d.j, p});
            nlohmann::json jf{{"fold", f.fold},
                              {"ok", f.ok},
                              {"error", f.error},
                              {"fit_seed", f.fit_seed},
                              {"sample_seed", f.sample_seed},
                              {"tsl_raw", f.tsl},
                              {"confusion",
                               {{"tp", f.confusion.tp},
                                {"fp", f.confusion.fp},
                                {"fn", f.confusion.fn},
                                {"tn", f.confusion.tn}}},
                              {"yhat", std::move(yhat)}};
            if (f.fit) {
                auto fj = to_json(*f.fit);
                if (!include_timing) fj["diagnostics"].erase("trace");
                jf["fit"] = std::move(fj);
            }
            if (include_timing) jf["seconds"] = f.seconds;
            folds.push_back(std::move(jf));
        }
        models.push_back({{"name", m.name},
                          {"formula", to_formula(m.spec)},
                          {"terms", model_to_json(m.spec)},
                          {"metrics", to_json(m.row)},
                          {"failed_folds", m.failed_folds},
                          {"warnings", m.warnings},
                          {"folds", std::move(folds)}});
    }
    nlohmann::json j{{"schema_version", kReportSchemaVersion},
                     {"rng_algorithm", kRngAlgorithm},
                     {"master_seed", r.config.seed},
                     {"config", to_json(r.config)},
                     {"plan", to_json(r.plan)},
                     {"tsl_scaling", r.plan.node_held_out() ? "raw / 2 (each dyad held out twice)" : "none"},
                     {"rho_denominator", "TSS / n"},
                     {"betweenness_scale", "raw pair-dependency sums, each unordered pair counted once"},
                     {"fold_fit_start",
                      r.config.warm_start ? "IRLS warm-started at the full-data MPLE; MCMLE starts at the fold MPLE"
                                          : "cold start"},
                     {"partition_shared_across_models", true},
                     {"models", std::move(models)},
                     {"warnings", r.warnings}};
    if (!include_timing) j["config"].erase("workers");  // execution detail, like timing; never changes results
    if (include_timing) {
        const auto& t = r.timing;
        const double per_fit = r.models.empty() || r.plan.size() == 0
                                   ? 0.0
                                   : t.fit_seconds / static_cast<double>(r.models.size() * r.plan.size());
        j["timing"] = {{"partition_seconds", t.partition_seconds},
                       {"fit_seconds_total", t.fit_seconds},
                       {"combine_seconds", t.combine_seconds},
                       {"wall_seconds", t.wall_seconds},
                       {"workers", t.workers},
                       {"runtime_model_seconds",
                        runtime_model(std::max<std::size_t>(1, t.workers), r.plan.size() * r.models.size(), per_fit,
                                      t.partition_seconds, t.combine_seconds)}};
    }
    return j;
}

std::string format_fit_table(const FitResult& f) {
    std::ostringstream o;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-32s %12s %10s\n", "term", "estimate", "std.err");
    o << buf;
    for (std::size_t k = 0; k < f.names.size(); ++k) {
        const auto idx = static_cast<Eigen::Index>(k);
        std::snprintf(buf, sizeof buf, "%-32s %12.4f %10s\n", f.names[k].c_str(), f.theta[idx],
                      f.std_err ? format_number((*f.std_err)[idx], 4).c_str() : "NA");
        o << buf;
    }
    o << "\nmethod: " << f.diagnostics.method << " (" << f.diagnostics.iterations << " iterations)\n";
    o << "log-likelihood: " << format_number(f.loglik, 8) << " [" << f.diagnostics.loglik_method << "]\n";
    o << "AIC: " << format_number(f.aic, 6) << "   BIC: " << format_number(f.bic, 6)
      << "   (observed dyads: " << f.observed_dyads << ")\n";
    for (const auto& w : f.diagnostics.warnings) o << "warning: " << w << '\n';
    return o.str();
}

std::string format_metric_table(const std::vector<HopeReport>& reports) {
    std::ostringstream o;
    char buf[512];
    std::snprintf(buf, sizeof buf, "%-28s %-8s %8s %8s %8s %9s %8s %8s %8s %9s %9s\n", "model", "type", "EdgeACC",
                  "NullACC", "ACC", "TSL", "rhoDeg", "rhoBetw", "rhoEig", "RMSEbetwC", "RMSEdegC");
    o << buf;
    auto f3 = [](std::optional<double> v) { return format_number(v ? std::optional<double>(std::round(*v * 1000) / 1000) : v, 6); };
    for (const auto& r : reports)
        for (const auto& m : r.models) {
            const auto& x = m.row;
            std::string name = m.name.size() > 28 ? m.name.substr(0, 25) + "..." : m.name;
            std::snprintf(buf, sizeof buf, "%-28s %-8s %8s %8s %8s %9.3f %8s %8s %8s %9s %9s\n", name.c_str(),
                          to_string(r.plan.strategy).c_str(), f3(x.edge_acc).c_str(), f3(x.null_acc).c_str(),
                          f3(x.overall_acc).c_str(), x.tsl, f3(x.rho_degree).c_str(), f3(x.rho_betweenness).c_str(),
                          f3(x.rho_eigen).c_str(), f3(x.rmse_betw_centralization).c_str(),
                          f3(x.rmse_deg_centralization).c_str());
            o << buf;
        }
    return o.str();
}

}  // namespace hope
