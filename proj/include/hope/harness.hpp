#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hope/estimation.hpp"
#include "hope/graph.hpp"
#include "hope/metrics.hpp"
#include "hope/sampler.hpp"
#include "hope/terms.hpp"

namespace hope {

enum class Strategy { LeaveOneOut, LeaveMOut, NodeHeldOut, Explicit };

std::string to_string(Strategy s);
/// Accepts loo, lmo, node, explicit.
Strategy strategy_from_string(const std::string& s);

struct FoldPlan {
    Strategy strategy = Strategy::LeaveOneOut;
    std::uint64_t seed = 1;
    std::vector<DyadSet> folds;
    /// Evaluation restricted to these dyads when set.
    std::optional<DyadSet> subset;

    std::size_t size() const { return folds.size(); }
    bool node_held_out() const { return strategy == Strategy::NodeHeldOut; }
    /// Checks disjointness (leave-out schemes) and range; throws UsageError.
    void validate(std::size_t n) const;
};

/// LeaveOneOut is LeaveMOut with M = |D|. LeaveMOut shuffles D (or the subset)
/// with the seeded generator and deals it into M chunks whose sizes differ by at
/// most one. NodeHeldOut gives n folds in node order. M defaults to n - 1.
FoldPlan build_partition(const Graph& g, Strategy strategy, std::optional<std::size_t> M = std::nullopt,
                         std::uint64_t seed = 1, std::optional<DyadSet> subset = std::nullopt);

FoldPlan explicit_partition(std::vector<DyadSet> folds, std::size_t n);

/// Uniform random subset of `count` dyads.
DyadSet sample_subset(std::size_t n, std::size_t count, std::uint64_t seed);

struct HopeConfig {
    std::size_t draws = 500;
    EstimatorConfig estimator;
    /// Burn-in/thin/proposal of the conditional draws. Seeds and chain counts
    /// are derived per fold.
    SamplerConfig sampler;
    std::uint64_t seed = 1;
    std::size_t workers = 1;
    /// Use logistic(theta' delta) as yhat for singleton folds of dyad-independent models.
    bool exact_loo_marginals = false;
    /// Start each fold's IRLS at the full-data MPLE.
    bool warm_start = true;

    void validate() const;
};

struct FoldResult {
    std::size_t fold = 0;
    bool ok = false;
    std::string error;
    std::optional<FitResult> fit;
    MarginalEstimates yhat;
    ConfusionMatrix confusion;
    double tsl = 0.0;  // this fold's raw contribution
    double seconds = 0.0;
    double fit_seconds = 0.0;
    std::uint64_t fit_seed = 0;
    std::uint64_t sample_seed = 0;
};

struct ModelReport {
    std::string name;
    ModelSpec spec;
    MetricRow row;
    std::vector<FoldResult> folds;
    std::size_t failed_folds = 0;
    std::vector<std::string> warnings;
};

struct Timing {
    double partition_seconds = 0.0;
    double fit_seconds = 0.0;  // summed over folds
    double combine_seconds = 0.0;
    double wall_seconds = 0.0;
    std::size_t workers = 1;
};

struct HopeReport {
    FoldPlan plan;
    HopeConfig config;
    std::vector<ModelReport> models;
    std::vector<std::string> warnings;
    Timing timing;
};

/// Runs the three HOPE steps for every (model, fold) pair on cfg.workers threads.
/// Throws EstimationError when every fold of some model fails.
HopeReport run_hope(const Graph& g, const std::vector<ModelSpec>& models, const FoldPlan& plan,
                    const HopeConfig& cfg, std::vector<std::string> names = {});

/// partition + fit * M / cores + combine.
double runtime_model(std::size_t cores, std::size_t folds, double fit_seconds, double partition_seconds = 0.0,
                     double combine_seconds = 0.0);

}  // namespace hope
