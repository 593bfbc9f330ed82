#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "hope/errors.hpp"
#include "hope/estimation.hpp"

namespace hope {

namespace {

struct Design {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
};

Design build_design(const PartialGraph& g, const Model& model) {
    const Graph masked = g.masked();
    const auto n = masked.size();
    const auto free_mask = g.free.mask();
    const auto rows = static_cast<Eigen::Index>(g.observed_dyad_count());
    Design d{Eigen::MatrixXd(rows, static_cast<Eigen::Index>(model.dim())), Eigen::VectorXd(rows)};
    Eigen::VectorXd delta(static_cast<Eigen::Index>(model.dim()));
    Eigen::Index r = 0;
    for (std::size_t k = 0; k < dyad_count(n); ++k) {
        if (!free_mask.empty() && free_mask[k]) continue;
        const Dyad dy = dyad_from_index(k, n);
        model.change(masked, dy, delta);
        d.x.row(r) = delta.transpose();
        d.y[r] = masked.has_edge(dy) ? 1.0 : 0.0;
        ++r;
    }
    return d;
}

double log1p_exp(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double pseudo_loglik(const Design& d, const Eigen::VectorXd& theta) {
    const Eigen::VectorXd eta = d.x * theta;
    double ll = 0;
    for (Eigen::Index r = 0; r < eta.size(); ++r) ll += d.y[r] * eta[r] - log1p_exp(eta[r]);
    return ll;
}

}  // namespace

FitResult mple(const PartialGraph& g, const ModelSpec& spec, const EstimatorConfig& cfg) {
    const Model model(spec, g.base);
    const auto p = static_cast<Eigen::Index>(model.dim());
    if (g.observed_dyad_count() == 0) throw EstimationError("no observed dyads to fit");
    check_boundary(g, model);

    const Design d = build_design(g, model);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.x);
    qr.setThreshold(1e-10);
    if (qr.rank() < p) {
        std::string dependent;
        for (Eigen::Index k = qr.rank(); k < p; ++k) {
            if (!dependent.empty()) dependent += ", ";
            dependent += "'" + model.names()[static_cast<std::size_t>(qr.colsPermutation().indices()[k])] + "'";
        }
        throw EstimationError("pseudo-likelihood normal equations are singular: " + dependent +
                              " is a linear combination of other statistics over the observed dyads; remove that term");
    }

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(p);
    if (cfg.start && cfg.start->size() == p) theta = *cfg.start;
    const Eigen::VectorXd scale = d.x.cwiseAbs().colwise().maxCoeff().transpose().cwiseMax(1e-300);

    FitResult out;
    out.names = model.names();
    out.observed_dyads = g.observed_dyad_count();
    out.diagnostics.method = "mple";
    out.diagnostics.sample_size = static_cast<std::size_t>(d.x.rows());

    double ll = pseudo_loglik(d, theta);
    Eigen::MatrixXd info(p, p);
    bool converged = false;
    std::size_t iter = 0;
    double grad_norm = 0;
    for (; iter < cfg.irls_max_iter; ++iter) {
        const Eigen::VectorXd eta = d.x * theta;
        Eigen::VectorXd mu(eta.size()), w(eta.size());
        for (Eigen::Index r = 0; r < eta.size(); ++r) {
            mu[r] = 1.0 / (1.0 + std::exp(-eta[r]));
            w[r] = mu[r] * (1.0 - mu[r]);
        }
        const Eigen::VectorXd grad = d.x.transpose() * (d.y - mu);
        info = d.x.transpose() * w.asDiagonal() * d.x;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
        Eigen::VectorXd step = ldlt.solve(grad);
        grad_norm = std::sqrt(std::max(0.0, grad.dot(step)));
        std::ostringstream tr;
        tr << "irls " << iter << ": pseudo-loglik " << ll << ", newton decrement " << grad_norm;
        out.diagnostics.trace.push_back(tr.str());
        if (grad_norm < 1e-9) {
            converged = true;
            break;
        }
        double alpha = 1.0;
        Eigen::VectorXd next = theta + step;
        double ll_next = pseudo_loglik(d, next);
        for (std::size_t h = 0; h < cfg.step_halving_limit && !(ll_next >= ll - 1e-12); ++h) {
            alpha *= 0.5;
            next = theta + alpha * step;
            ll_next = pseudo_loglik(d, next);
        }
        theta = next;
        ll = ll_next;
        // A linear predictor beyond +-40 means fitted probabilities of exactly 0 or 1.
        Eigen::Index worst = 0;
        const double reach = (theta.cwiseAbs().cwiseProduct(scale)).maxCoeff(&worst);
        if (reach > 40.0)
            throw BoundaryError("pseudo-likelihood separation: coefficient '" +
                                    model.names()[static_cast<std::size_t>(worst)] + "' diverges",
                                out.diagnostics.trace);
    }
    if (!converged)
        throw EstimationError("IRLS did not converge in " + std::to_string(cfg.irls_max_iter) + " iterations",
                              out.diagnostics.trace);

    out.theta = theta;
    out.diagnostics.iterations = iter;
    out.diagnostics.gradient_norm = grad_norm;
    out.diagnostics.converged = true;
    {
        const Eigen::VectorXd eta = d.x * theta;
        Eigen::VectorXd w(eta.size());
        for (Eigen::Index r = 0; r < eta.size(); ++r) {
            const double m = 1.0 / (1.0 + std::exp(-eta[r]));
            w[r] = m * (1.0 - m);
        }
        info = d.x.transpose() * w.asDiagonal() * d.x;
        out.std_err = info.inverse().diagonal().cwiseMax(0.0).cwiseSqrt();
    }
    out.set_loglik(ll, model.dyad_independent() ? "exact" : "pseudo");
    return out;
}

}  // namespace hope
