#include "hope/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include <Eigen/Dense>

namespace hope {

Accuracies accuracy_from_confusion(const ConfusionMatrix& f) {
    auto ratio = [](std::uint64_t a, std::uint64_t b) -> std::optional<double> {
        if (b == 0) return std::nullopt;
        return static_cast<double>(a) / static_cast<double>(b);
    };
    return {ratio(f.tp, f.tp + f.fn), ratio(f.tn, f.tn + f.fp), ratio(f.tp + f.tn, f.total())};
}

double marginal_estimate(std::size_t ones, std::size_t B) {
    if (B < 1) throw std::invalid_argument("marginal estimate needs at least one draw");
    return (0.5 + static_cast<double>(ones)) / (static_cast<double>(B) + 1.0);
}

double exact_marginal_change_score(const Graph& g, Dyad d, const Eigen::VectorXd& theta, const Model& model) {
    const double eta = theta.dot(model.change(g, d));
    return 1.0 / (1.0 + std::exp(-eta));
}

SquaredLoss total_squared_loss(const Graph& obs, std::span<const DyadSet> folds,
                               std::span<const MarginalEstimates> yhat, bool node_held_out) {
    if (folds.size() != yhat.size()) throw std::invalid_argument("one estimate map per fold is required");
    SquaredLoss out;
    for (std::size_t m = 0; m < folds.size(); ++m) {
        for (auto d : folds[m]) {
            auto it = yhat[m].find(d);
            if (it == yhat[m].end())
                throw std::invalid_argument("fold " + std::to_string(m) + " has no estimate for dyad (" +
                                            std::to_string(d.i) + "," + std::to_string(d.j) + ")");
            const double e = (obs.has_edge(d) ? 1.0 : 0.0) - it->second;
            out.raw += e * e;
        }
    }
    out.scaled = node_held_out ? out.raw / 2.0 : out.raw;
    return out;
}

std::string to_string(CentralityKind k) {
    switch (k) {
        case CentralityKind::Degree: return "degree";
        case CentralityKind::Betweenness: return "betweenness";
        case CentralityKind::Eigenvector: return "eigenvector";
    }
    return "degree";
}

std::vector<double> degree_centrality(const Graph& g) {
    std::vector<double> c(g.size());
    for (std::size_t v = 0; v < g.size(); ++v) c[v] = g.degree(static_cast<Node>(v));
    return c;
}

std::vector<double> betweenness_centrality(const Graph& g) {
    const std::size_t n = g.size();
    std::vector<double> cb(n, 0.0), sigma(n), delta(n);
    std::vector<int> dist(n);
    std::vector<Node> stack;
    std::vector<std::vector<Node>> pred(n);
    std::deque<Node> queue;
    stack.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        stack.clear();
        for (std::size_t v = 0; v < n; ++v) {
            pred[v].clear();
            sigma[v] = 0;
            dist[v] = -1;
            delta[v] = 0;
        }
        sigma[s] = 1;
        dist[s] = 0;
        queue.push_back(static_cast<Node>(s));
        while (!queue.empty()) {
            const Node v = queue.front();
            queue.pop_front();
            stack.push_back(v);
            g.for_each_neighbor(v, [&](Node w) {
                if (dist[w] < 0) {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if (dist[w] == dist[v] + 1) {
                    sigma[w] += sigma[v];
                    pred[w].push_back(v);
                }
            });
        }
        while (!stack.empty()) {
            const Node w = stack.back();
            stack.pop_back();
            for (Node v : pred[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            if (static_cast<std::size_t>(w) != s) cb[w] += delta[w];
        }
    }
    for (auto& x : cb) x /= 2.0;  // every unordered pair was visited from both ends
    return cb;
}

std::vector<double> eigenvector_centrality(const Graph& g, std::vector<std::string>* warnings) {
    const std::size_t n = g.size();
    std::vector<double> out(n, 0.0);
    if (g.edge_count() == 0) {
        if (warnings) warnings->push_back("eigenvector centrality of an edgeless graph is the zero vector");
        return out;
    }
    const auto N = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, N);
    for (auto d : g.edges()) A(d.i, d.j) = A(d.j, d.i) = 1.0;

    auto residual = [&](const Eigen::VectorXd& c) {
        const Eigen::VectorXd Ac = A * c;
        return (Ac - c.dot(Ac) * c).norm();
    };

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    const auto& ev = es.eigenvalues();
    const double top = ev[N - 1];
    Eigen::Index mult = 0;
    for (Eigen::Index k = N - 1; k >= 0 && top - ev[k] < 1e-9 * std::max(1.0, top); --k) ++mult;
    if (mult > 1 && warnings)
        warnings->push_back("leading adjacency eigenvalue has multiplicity " + std::to_string(mult) +
                            "; eigenvector centrality is not unique");

    // Start from the all-ones vector projected on the leading eigenspace (the
    // limit of power iteration from ones), then polish by power iteration on
    // A + I; the shift removes the -lambda_max oscillation of bipartite parts.
    const Eigen::MatrixXd V = es.eigenvectors().rightCols(mult);
    Eigen::VectorXd c = V * (V.transpose() * Eigen::VectorXd::Ones(N));
    if (c.norm() < 1e-12) c = es.eigenvectors().col(N - 1);
    c /= c.norm();
    for (int it = 0; it < 1000 && residual(c) >= 1e-10; ++it) {
        Eigen::VectorXd next = A * c + c;
        c = next / next.norm();
    }
    if (c.sum() < 0) c = -c;
    for (std::size_t v = 0; v < n; ++v) out[v] = std::abs(c[static_cast<Eigen::Index>(v)]) < 1e-15 ? 0.0 : c[static_cast<Eigen::Index>(v)];
    return out;
}

std::vector<double> centrality(const Graph& g, CentralityKind kind, std::vector<std::string>* warnings) {
    switch (kind) {
        case CentralityKind::Degree: return degree_centrality(g);
        case CentralityKind::Betweenness: return betweenness_centrality(g);
        case CentralityKind::Eigenvector: return eigenvector_centrality(g, warnings);
    }
    return {};
}

ReliabilityAccumulator::ReliabilityAccumulator(std::vector<double> observed) : observed_(std::move(observed)) {}

void ReliabilityAccumulator::add(std::span<const double> simulated) {
    if (simulated.size() != observed_.size()) throw std::invalid_argument("centrality vector length mismatch");
    for (std::size_t i = 0; i < observed_.size(); ++i) {
        const double e = simulated[i] - observed_[i];
        sse_ += e * e;
    }
    ++draws_;
}

void ReliabilityAccumulator::merge(const ReliabilityAccumulator& other) {
    sse_ += other.sse_;
    draws_ += other.draws_;
}

double ReliabilityAccumulator::mse() const {
    if (draws_ == 0 || observed_.empty()) return 0.0;
    return sse_ / (static_cast<double>(draws_) * static_cast<double>(observed_.size()));
}

double ReliabilityAccumulator::tss() const {
    if (observed_.empty()) return 0.0;
    double mean = 0;
    for (double x : observed_) mean += x;
    mean /= static_cast<double>(observed_.size());
    double t = 0;
    for (double x : observed_) t += (x - mean) * (x - mean);
    return t;
}

std::optional<double> ReliabilityAccumulator::rho() const {
    const double t = tss();
    if (draws_ == 0 || !(t > 1e-12 * std::max(1.0, static_cast<double>(observed_.size())))) return std::nullopt;
    return 1.0 - mse() / (t / static_cast<double>(observed_.size()));
}

Reliability reliability_rho(std::span<const double> observed, std::span<const std::vector<double>> sims) {
    ReliabilityAccumulator acc({observed.begin(), observed.end()});
    for (const auto& s : sims) acc.add(s);
    return {acc.rho(), acc.mse(), acc.tss()};
}

std::optional<double> centralization_from_scores(std::span<const double> scores, CentralityKind kind) {
    const double n = static_cast<double>(scores.size());
    if (scores.size() < 3) return std::nullopt;
    const double mx = *std::max_element(scores.begin(), scores.end());
    double sum = 0;
    for (double s : scores) sum += mx - s;
    switch (kind) {
        case CentralityKind::Degree: return sum / ((n - 1) * (n - 2));
        case CentralityKind::Betweenness: return sum / ((n - 1) * (n - 1) * (n - 2) / 2.0);
        case CentralityKind::Eigenvector: break;
    }
    throw std::invalid_argument("centralization is defined for degree and betweenness only");
}

std::optional<double> centralization(const Graph& g, CentralityKind kind) {
    if (g.size() < 3) return std::nullopt;
    const auto s = centrality(g, kind);
    return centralization_from_scores(s, kind);
}

double rmse_centralization(double observed, std::span<const double> sims) {
    if (sims.empty()) throw std::invalid_argument("RMSE needs at least one simulated graph");
    double s = 0;
    for (double x : sims) s += (x - observed) * (x - observed);
    return std::sqrt(s / static_cast<double>(sims.size()));
}

double rmse_centralization(const Graph& observed, std::span<const Graph> sims, CentralityKind kind) {
    const auto obs = centralization(observed, kind);
    if (!obs) throw std::invalid_argument("centralization needs at least 3 nodes");
    std::vector<double> c;
    c.reserve(sims.size());
    for (const auto& g : sims) c.push_back(*centralization(g, kind));
    return rmse_centralization(*obs, c);
}

}  // namespace hope
