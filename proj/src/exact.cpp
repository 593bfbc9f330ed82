#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "hope/errors.hpp"
#include "hope/estimation.hpp"

namespace hope {

ExactEnumerator::ExactEnumerator(const PartialGraph& g, const ModelSpec& spec) : g_(g), model_(spec, g.base) {
    const std::size_t n = g.base.size();
    if (n > kMaxNodes)
        throw UsageError("exact enumeration supports at most " + std::to_string(kMaxNodes) + " nodes");
    const std::size_t D = dyad_count(n);
    const std::uint32_t total = std::uint32_t{1} << D;
    stats_.resize(total, static_cast<Eigen::Index>(model_.dim()));

    // Gray-code walk: one toggle per step.
    Graph y = g.base;
    for (auto d : g.base.edges()) y.set_edge(d, false);
    Eigen::VectorXd s = model_.stats(y);
    Eigen::VectorXd delta(static_cast<Eigen::Index>(model_.dim()));
    stats_.row(0) = s.transpose();
    for (std::uint32_t step = 1; step < total; ++step) {
        const auto bit = static_cast<std::size_t>(std::countr_zero(step));
        const Dyad d = dyad_from_index(bit, n);
        model_.change(y, d, delta);
        if (y.has_edge(d)) s -= delta;
        else s += delta;
        y.flip(d);
        stats_.row(step ^ (step >> 1)) = s.transpose();
    }

    const auto free = g.free.mask();
    std::uint32_t fixed_bits = 0, fixed_vals = 0;
    for (std::size_t k = 0; k < D; ++k) {
        if (!free.empty() && free[k]) continue;
        fixed_bits |= std::uint32_t{1} << k;
        if (g.base.has_edge(dyad_from_index(k, n))) fixed_vals |= std::uint32_t{1} << k;
    }
    for (std::uint32_t m = 0; m < total; ++m)
        if ((m & fixed_bits) == fixed_vals) conditional_.push_back(m);
}

double ExactEnumerator::log_normalizer(const Eigen::VectorXd& theta) const {
    return log_sum_exp(stats_ * theta);
}

double ExactEnumerator::log_conditional_normalizer(const Eigen::VectorXd& theta) const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(conditional_.size()));
    for (std::size_t k = 0; k < conditional_.size(); ++k)
        v[static_cast<Eigen::Index>(k)] = stats_.row(conditional_[k]).dot(theta);
    return log_sum_exp(v);
}

double ExactEnumerator::loglik(const Eigen::VectorXd& theta) const {
    return log_conditional_normalizer(theta) - log_normalizer(theta);
}

namespace {

struct Moments {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

template <class RowAt>
Moments moments(std::size_t count, RowAt row_at, const Eigen::VectorXd& theta) {
    const auto p = theta.size();
    Eigen::VectorXd lw(static_cast<Eigen::Index>(count));
    for (std::size_t k = 0; k < count; ++k) lw[static_cast<Eigen::Index>(k)] = row_at(k).dot(theta);
    const double lz = log_sum_exp(lw);
    Moments m{Eigen::VectorXd::Zero(p), Eigen::MatrixXd::Zero(p, p)};
    for (std::size_t k = 0; k < count; ++k) {
        const double w = std::exp(lw[static_cast<Eigen::Index>(k)] - lz);
        const Eigen::VectorXd r = row_at(k).transpose();
        m.mean += w * r;
        m.cov += w * r * r.transpose();
    }
    m.cov -= m.mean * m.mean.transpose();
    return m;
}

}  // namespace

Eigen::VectorXd ExactEnumerator::score(const Eigen::VectorXd& theta) const {
    const auto all = moments(static_cast<std::size_t>(stats_.rows()), [&](std::size_t k) { return stats_.row(static_cast<Eigen::Index>(k)); }, theta);
    const auto cond = moments(conditional_.size(), [&](std::size_t k) { return stats_.row(conditional_[k]); }, theta);
    return cond.mean - all.mean;
}

std::vector<double> ExactEnumerator::pmf(const Eigen::VectorXd& theta) const {
    const Eigen::VectorXd lw = stats_ * theta;
    const double lz = log_sum_exp(lw);
    std::vector<double> out(static_cast<std::size_t>(lw.size()));
    for (Eigen::Index k = 0; k < lw.size(); ++k) out[static_cast<std::size_t>(k)] = std::exp(lw[k] - lz);
    return out;
}

std::vector<std::pair<std::uint32_t, double>> ExactEnumerator::conditional_pmf(const Eigen::VectorXd& theta) const {
    const double lz = log_conditional_normalizer(theta);
    std::vector<std::pair<std::uint32_t, double>> out;
    out.reserve(conditional_.size());
    for (auto m : conditional_) out.emplace_back(m, std::exp(stats_.row(m).dot(theta) - lz));
    return out;
}

Graph ExactEnumerator::graph_from_mask(std::uint32_t mask) const {
    Graph y = g_.base;
    const std::size_t n = y.size();
    for (std::size_t k = 0; k < dyad_count(n); ++k) y.set_edge(dyad_from_index(k, n), (mask >> k) & 1u);
    return y;
}

std::uint32_t ExactEnumerator::mask_of(const Graph& g) const {
    std::uint32_t m = 0;
    const std::size_t n = g.size();
    for (std::size_t k = 0; k < dyad_count(n); ++k)
        if (g.has_edge(dyad_from_index(k, n))) m |= std::uint32_t{1} << k;
    return m;
}

double ExactEnumerator::ray_limit(const Eigen::VectorXd& theta, Eigen::Index c, double sgn) const {
    const auto rows = static_cast<std::size_t>(stats_.rows());
    double top = -INFINITY, top_cond = -INFINITY;
    for (std::size_t m = 0; m < rows; ++m) top = std::max(top, sgn * stats_(static_cast<Eigen::Index>(m), c));
    for (auto m : conditional_) top_cond = std::max(top_cond, sgn * stats_(m, c));
    if (top_cond < top - 1e-12) return -INFINITY;
    std::vector<double> num, den;
    for (std::size_t m = 0; m < rows; ++m) {
        const auto r = static_cast<Eigen::Index>(m);
        if (sgn * stats_(r, c) >= top - 1e-12) den.push_back(stats_.row(r).dot(theta));
    }
    for (auto m : conditional_)
        if (sgn * stats_(m, c) >= top - 1e-12) num.push_back(stats_.row(m).dot(theta));
    const auto lse = [](const std::vector<double>& v) {
        return log_sum_exp(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    };
    return lse(num) - lse(den);
}

FitResult ExactEnumerator::mle(std::size_t max_iter) const {
    const auto p = static_cast<Eigen::Index>(dim());
    const auto& names = model_.names();

    // Coordinate-wise support check: conditional extreme meeting the unconditional one.
    for (Eigen::Index c = 0; c < p; ++c) {
        double cmin = INFINITY, cmax = -INFINITY;
        for (auto m : conditional_) {
            cmin = std::min(cmin, stats_(m, c));
            cmax = std::max(cmax, stats_(m, c));
        }
        const double umin = stats_.col(c).minCoeff(), umax = stats_.col(c).maxCoeff();
        if (umax - umin < 1e-12)
            throw BoundaryError("statistic '" + names[static_cast<std::size_t>(c)] + "' is constant over all graphs");
        if (cmin >= umax - 1e-12)
            throw BoundaryError("statistic '" + names[static_cast<std::size_t>(c)] + "' is at its maximum; MLE at +infinity");
        if (cmax <= umin + 1e-12)
            throw BoundaryError("statistic '" + names[static_cast<std::size_t>(c)] + "' is at its minimum; MLE at -infinity");
    }

    FitResult out;
    out.names = names;
    out.observed_dyads = g_.observed_dyad_count();
    out.diagnostics.method = "exact";
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(p);
    double ll = loglik(theta);
    const auto all_row = [&](std::size_t k) { return stats_.row(static_cast<Eigen::Index>(k)); };
    const auto cond_row = [&](std::size_t k) { return stats_.row(conditional_[k]); };
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        const auto all = moments(static_cast<std::size_t>(stats_.rows()), all_row, theta);
        const auto cond = moments(conditional_.size(), cond_row, theta);
        const Eigen::VectorXd grad = cond.mean - all.mean;
        Eigen::MatrixXd info = all.cov - cond.cov;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(info);
        if (es.eigenvalues().minCoeff() <= 1e-12 * std::max(1.0, es.eigenvalues().maxCoeff())) info = all.cov;
        const Eigen::VectorXd step = info.ldlt().solve(grad);
        const double dec = std::sqrt(std::max(0.0, grad.dot(step)));
        std::ostringstream tr;
        tr << "exact " << iter << ": loglik " << ll << ", decrement " << dec;
        out.diagnostics.trace.push_back(tr.str());
        if (dec < 1e-10) {
            // With free dyads the likelihood need not be concave: a stationary point can sit
            // that does not beat the limit along a coordinate ray is not a finite maximum.
            for (Eigen::Index c = 0; c < p; ++c)
                for (double sgn : {1.0, -1.0}) {
                    const double lim = ray_limit(theta, c, sgn);
                    if (lim >= ll - 1e-8)
                        throw BoundaryError("statistic '" + names[static_cast<std::size_t>(c)] +
                                                "': likelihood along the " + (sgn > 0 ? "+" : "-") +
                                                " ray reaches the stationary value; MLE at infinity",
                                            out.diagnostics.trace);
                }
            out.theta = theta;
            out.diagnostics.iterations = iter;
            out.diagnostics.gradient_norm = dec;
            out.diagnostics.converged = true;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> fi(all.cov - cond.cov);
            if (fi.eigenvalues().minCoeff() > 0)
                out.std_err = (all.cov - cond.cov).inverse().diagonal().cwiseSqrt();
            out.set_loglik(ll, "exact");
            return out;
        }
        double alpha = 1.0;
        Eigen::VectorXd next = theta + step;
        double ll_next = loglik(next);
        for (int h = 0; h < 30 && !(ll_next >= ll); ++h) {
            alpha *= 0.5;
            next = theta + alpha * step;
            ll_next = loglik(next);
        }
        theta = next;
        ll = ll_next;
        if (theta.norm() > 50.0)
            throw BoundaryError("exact likelihood increases without bound (|theta| > 50); MLE at infinity",
                                out.diagnostics.trace);
    }
    throw BoundaryError("exact likelihood ascent did not converge; MLE is at or near infinity", out.diagnostics.trace);
}

std::vector<std::pair<std::uint32_t, double>> exact_conditional_pmf(const PartialGraph& g, const ModelSpec& spec,
                                                                     const Eigen::VectorXd& theta) {
    const std::size_t F = g.free.size();
    if (F > ExactEnumerator::kMaxFree)
        throw UsageError("exact conditional pmf supports at most " + std::to_string(ExactEnumerator::kMaxFree) +
                         " free dyads");
    const Model model(spec, g.base);
    Graph y = g.masked();
    const std::uint32_t total = std::uint32_t{1} << F;
    Eigen::VectorXd lw(static_cast<Eigen::Index>(total));
    Eigen::VectorXd delta(static_cast<Eigen::Index>(model.dim()));
    double cur = theta.dot(model.stats(y));
    lw[0] = cur;
    for (std::uint32_t step = 1; step < total; ++step) {
        const auto bit = static_cast<std::size_t>(std::countr_zero(step));
        const Dyad d = g.free[bit];
        model.change(y, d, delta);
        cur += (y.has_edge(d) ? -1.0 : 1.0) * theta.dot(delta);
        y.flip(d);
        lw[step ^ (step >> 1)] = cur;
    }
    const double lz = log_sum_exp(lw);
    std::vector<std::pair<std::uint32_t, double>> out(total);
    for (std::uint32_t m = 0; m < total; ++m) out[m] = {m, std::exp(lw[m] - lz)};
    return out;
}

}  // namespace hope
