#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hope/estimation.hpp"
#include "hope/harness.hpp"

namespace hope {

/// Bumped whenever a CSV column or JSON key changes meaning or position.
inline constexpr int kReportSchemaVersion = 1;

/// model, aic, bic, type, edge_acc, null_acc, overall_acc, tsl, rho_degree,
/// rho_betweenness, rho_eigen, rmse_betw_centralization, rmse_deg_centralization,
/// then tsl_raw, mse_degree, mse_betweenness, mse_eigen, folds, failed_folds, draws.
const std::vector<std::string>& metric_csv_columns();

/// One row per (report, model). `full_fits[i]` supplies AIC/BIC of model i when present.
/// Undefined values are written as NA.
void write_metric_csv(std::ostream& out, const std::vector<HopeReport>& reports,
                      const std::vector<std::optional<FitResult>>& full_fits = {});

/// Long format: strategy, model, fold, metric, value. Per fold: edge_acc, null_acc,
/// overall_acc, tsl_raw, held_out, plus one theta.<name> row per coefficient.
void write_plot_data(std::ostream& out, const std::vector<HopeReport>& reports);

nlohmann::json to_json(const MetricRow& row);
nlohmann::json to_json(const FoldPlan& plan);
nlohmann::json to_json(const SamplerConfig& cfg);
nlohmann::json to_json(const EstimatorConfig& cfg);
nlohmann::json to_json(const HopeConfig& cfg);

SamplerConfig sampler_config_from_json(const nlohmann::json& j, SamplerConfig base = {});
EstimatorConfig estimator_config_from_json(const nlohmann::json& j, EstimatorConfig base = {});

/// Full report. Timing is wall-clock dependent; leave it out (which also drops the
/// worker count and per-fit traces) to compare runs.
nlohmann::json to_json(const HopeReport& report, bool include_timing = true);

/// Coefficient table with standard errors, log-likelihood, AIC and BIC.
std::string format_fit_table(const FitResult& fit);

/// Aligned text rendering of the metric table.
std::string format_metric_table(const std::vector<HopeReport>& reports);

/// "%.*g" formatting, "NA" for nullopt.
std::string format_number(std::optional<double> v, int digits = 10);

}  // namespace hope
