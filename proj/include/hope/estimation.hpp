#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "hope/graph.hpp"
#include "hope/sampler.hpp"
#include "hope/terms.hpp"

namespace hope {

enum class Method { Auto, MPLE, MCMLE, Exact };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct EstimatorConfig {
    /// Auto: MPLE (the exact MLE) for dyad-independent models, MCMLE otherwise.
    Method method = Method::Auto;
    std::size_t max_iter = 40;
    /// Convergence when sqrt(score' Cov^-1 score) falls below this.
    double gradient_tolerance = 0.1;
    /// Draws per chain type per MCMLE iteration.
    std::size_t mc_sample_size = 2048;
    std::size_t step_halving_limit = 12;
    /// Minimum importance-sampling effective sample size, as a fraction of the sample, for an accepted step.
    double min_ess_fraction = 0.5;
    std::uint64_t seed = 1;
    /// Burn-in/thin/proposal/chains/workers of the internal chains. The seed field is ignored.
    SamplerConfig sampler;

    bool compute_loglik = true;
    /// Path sampling: equally spaced points on [0,1] (odd counts use Simpson's rule).
    std::size_t bridge_points = 21;
    std::size_t bridge_sample_size = 1000;

    /// Starting value for MPLE (IRLS) and hence for MCMLE.
    std::optional<Eigen::VectorXd> start;
    std::size_t irls_max_iter = 100;

    void validate() const;
};

struct FitDiagnostics {
    std::string method;
    std::size_t iterations = 0;
    double gradient_norm = 0.0;
    std::size_t sample_size = 0;
    bool converged = false;
    /// "exact", "pseudo", "path-sampling" or "none".
    std::string loglik_method = "none";
    std::vector<std::string> warnings;
    std::vector<std::string> trace;
};

struct FitResult {
    std::vector<std::string> names;
    Eigen::VectorXd theta;
    std::optional<Eigen::VectorXd> std_err;
    std::optional<double> loglik;
    std::optional<double> aic;
    std::optional<double> bic;
    std::size_t observed_dyads = 0;
    FitDiagnostics diagnostics;

    /// aic = -2 loglik + 2p, bic = -2 loglik + p ln(observed dyads).
    void set_loglik(double value, std::string method);
};

nlohmann::json to_json(const FitResult& fit);
FitResult fit_from_json(const nlohmann::json& j);

/// Maximum pseudo-likelihood by iteratively reweighted least squares over the
/// observed dyads, with change statistics taken on the graph whose free dyads
/// are cleared. For dyad-independent models this is the MLE and the reported
/// log-likelihood is exact.
///
/// Throws BoundaryError on (quasi-)complete separation, naming the coordinate,
/// and EstimationError when the design is rank deficient.
FitResult mple(const PartialGraph& g, const ModelSpec& spec, const EstimatorConfig& cfg = {});

/// Monte Carlo MLE of the face-value likelihood. Each iteration samples the
/// statistics unconditionally and (if dyads are free) conditionally on the
/// observed dyads at the current estimate, and maximizes the importance-sampled
/// log-likelihood ratio by Fisher scoring with step halving. Starts at the MPLE.
/// Throws EstimationError (with a per-iteration trace) when max_iter is reached.
FitResult mcmle(const PartialGraph& g, const ModelSpec& spec, const EstimatorConfig& cfg = {});

/// Dispatches on cfg.method and fills the log-likelihood when requested.
FitResult fit(const PartialGraph& g, const ModelSpec& spec, const EstimatorConfig& cfg = {});

/// Exact face-value log-likelihood of a dyad-independent model.
double dyad_independent_loglik(const PartialGraph& g, const Model& model, const Eigen::VectorXd& theta);

/// Face-value log-likelihood at theta by path sampling from theta = 0, where
/// log kappa(0) = C(n,2) ln 2 (and |free| ln 2 for the conditional normalizer).
double loglik_path_sampling(const Eigen::VectorXd& theta, const ModelSpec& spec, const PartialGraph& g,
                            const EstimatorConfig& cfg = {});

/// Throws BoundaryError when some observed statistic sits at the edge of its support
/// in a way that sends its coefficient to infinity.
void check_boundary(const PartialGraph& g, const Model& model);

/// Brute-force enumeration of every graph on n <= 6 nodes.
class ExactEnumerator {
public:
    static constexpr std::size_t kMaxNodes = 6;
    static constexpr std::size_t kMaxFree = 25;

    ExactEnumerator(const PartialGraph& g, const ModelSpec& spec);

    std::size_t dim() const { return static_cast<std::size_t>(stats_.cols()); }
    const Model& model() const { return model_; }

    /// log kappa(theta) over all graphs.
    double log_normalizer(const Eigen::VectorXd& theta) const;
    /// log of the sum over graphs agreeing with the observed dyads.
    double log_conditional_normalizer(const Eigen::VectorXd& theta) const;
    double loglik(const Eigen::VectorXd& theta) const;
    Eigen::VectorXd score(const Eigen::VectorXd& theta) const;

    /// Probability of every graph, indexed by dyad bitmask (bit k = dyad_from_index(k)).
    std::vector<double> pmf(const Eigen::VectorXd& theta) const;
    /// Probabilities of the graphs consistent with the observed dyads, by bitmask.
    std::vector<std::pair<std::uint32_t, double>> conditional_pmf(const Eigen::VectorXd& theta) const;

    /// Deterministic Newton/Fisher-scoring ascent on the exact likelihood.
    /// Throws BoundaryError when the maximizer is at infinity.
    FitResult mle(std::size_t max_iter = 200) const;

    Graph graph_from_mask(std::uint32_t mask) const;
    std::uint32_t mask_of(const Graph& g) const;

private:
    PartialGraph g_;
    Model model_;
    Eigen::MatrixXd stats_;        // 2^D x p
    std::vector<std::uint32_t> conditional_;  // masks consistent with the observed dyads

    /// lim_{t->inf} loglik(theta + t * sgn * e_c); -inf when the ray leaves the conditional support.
    double ray_limit(const Eigen::VectorXd& theta, Eigen::Index c, double sgn) const;
};

/// Exact conditional pmf of the free dyads for any n, |free| <= 25.
/// Bit k of each mask is the state of g.free[k].
std::vector<std::pair<std::uint32_t, double>> exact_conditional_pmf(const PartialGraph& g, const ModelSpec& spec,
                                                                     const Eigen::VectorXd& theta);

/// log(sum(exp(v))) without overflow.
double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v);

}  // namespace hope
