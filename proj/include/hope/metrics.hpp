#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hope/graph.hpp"
#include "hope/terms.hpp"

namespace hope {

/// Aggregate confusion counts of imputed vs true held-out dyad states.
struct ConfusionMatrix {
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;

    void add(bool truth, bool imputed) {
        if (truth) (imputed ? tp : fn) += 1;
        else (imputed ? fp : tn) += 1;
    }
    std::uint64_t total() const { return tp + fp + fn + tn; }
    ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
        tp += o.tp, fp += o.fp, fn += o.fn, tn += o.tn;
        return *this;
    }
    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Undefined (nullopt) when the denominator is zero.
struct Accuracies {
    std::optional<double> edge;
    std::optional<double> null;
    std::optional<double> overall;
};

Accuracies accuracy_from_confusion(const ConfusionMatrix& f);

/// (0.5 + ones) / (B + 1).
double marginal_estimate(std::size_t ones, std::size_t B);

/// logistic(theta' delta(g, d)): the exact conditional probability of d when only d is unknown.
double exact_marginal_change_score(const Graph& g, Dyad d, const Eigen::VectorXd& theta, const Model& model);

/// Estimated edge probability for each held-out dyad of one fold.
using MarginalEstimates = std::map<Dyad, double>;

struct SquaredLoss {
    double raw = 0.0;
    /// raw / 2 under node-held-out (each dyad is predicted twice), raw otherwise.
    double scaled = 0.0;
};

/// Sum over folds and their dyads of (y_obs - yhat)^2. Throws std::invalid_argument when
/// a fold dyad lacks an estimate.
SquaredLoss total_squared_loss(const Graph& obs, std::span<const DyadSet> folds,
                               std::span<const MarginalEstimates> yhat, bool node_held_out);

enum class CentralityKind { Degree, Betweenness, Eigenvector };

std::string to_string(CentralityKind k);

std::vector<double> degree_centrality(const Graph& g);

/// Brandes accumulation over unweighted shortest paths, each unordered pair counted once.
std::vector<double> betweenness_centrality(const Graph& g);

/// Principal eigenvector of the adjacency matrix, unit Euclidean norm, nonnegative.
/// Power iteration on A + I to residual 1e-10; falls back to a dense eigensolver.
/// The empty graph gives the zero vector. Warnings (empty graph, tied leading
/// eigenvalue) are appended to `warnings` when given.
std::vector<double> eigenvector_centrality(const Graph& g, std::vector<std::string>* warnings = nullptr);

std::vector<double> centrality(const Graph& g, CentralityKind kind, std::vector<std::string>* warnings = nullptr);

/// Streaming form of the reliability coefficient.
class ReliabilityAccumulator {
public:
    explicit ReliabilityAccumulator(std::vector<double> observed);

    void add(std::span<const double> simulated);
    void merge(const ReliabilityAccumulator& other);

    std::size_t count() const { return draws_; }
    /// Mean over draws and nodes of the squared deviation from the observed vector.
    double mse() const;
    /// Sum of squared deviations of the observed vector about its mean.
    double tss() const;
    /// 1 - mse / (tss / n); nullopt when tss == 0 or no draws were added.
    std::optional<double> rho() const;

private:
    std::vector<double> observed_;
    double sse_ = 0.0;
    std::size_t draws_ = 0;
};

struct Reliability {
    std::optional<double> rho;
    double mse = 0.0;
    double tss = 0.0;
};

Reliability reliability_rho(std::span<const double> observed, std::span<const std::vector<double>> sims);

/// Freeman centralization over the theoretical maximum: (n-1)(n-2) for degree,
/// (n-1)^2 (n-2) / 2 for betweenness. nullopt for n < 3.
std::optional<double> centralization(const Graph& g, CentralityKind kind);
std::optional<double> centralization_from_scores(std::span<const double> scores, CentralityKind kind);

/// sqrt(mean_k (sims[k] - observed)^2).
double rmse_centralization(double observed, std::span<const double> sims);
double rmse_centralization(const Graph& observed, std::span<const Graph> sims, CentralityKind kind);

/// One row of the metric table.
struct MetricRow {
    std::optional<double> edge_acc, null_acc, overall_acc;
    double tsl = 0.0;      // reported (scaled) value
    double tsl_raw = 0.0;
    std::optional<double> rho_degree, rho_betweenness, rho_eigen;
    double mse_degree = 0.0, mse_betweenness = 0.0, mse_eigen = 0.0;
    std::optional<double> rmse_betw_centralization, rmse_deg_centralization;
    ConfusionMatrix confusion;
};

}  // namespace hope
