#include "hope/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <cmath>
#include <thread>

#include "hope/errors.hpp"

namespace hope {

std::string to_string(Proposal p) { return p == Proposal::TieNoTie ? "tnt" : "uniform"; }

Proposal proposal_from_string(const std::string& s) {
    if (s == "uniform" || s == "UniformDyad") return Proposal::UniformDyad;
    if (s == "tnt" || s == "TieNoTie") return Proposal::TieNoTie;
    throw UsageError("unknown proposal '" + s + "' (expected uniform or tnt)");
}

void SamplerConfig::validate() const {
    if (thin && *thin == 0) throw UsageError("thin must be at least 1");
    if (chains == 0) throw UsageError("chain count must be at least 1");
    if (workers == 0) throw UsageError("worker count must be at least 1");
}

FreeDyads::FreeDyads(std::span<const Dyad> free, const Graph& g)
    : n_(g.size()), position_(dyad_count(g.size()), -1) {
    std::vector<Dyad> ties, nulls;
    for (auto d : free) (g.has_edge(d) ? ties : nulls).push_back(d);
    order_ = std::move(ties);
    ties_ = order_.size();
    order_.insert(order_.end(), nulls.begin(), nulls.end());
    for (std::size_t k = 0; k < order_.size(); ++k) {
        auto& slot = position_[dyad_index(order_[k], n_)];
        if (slot >= 0) throw std::invalid_argument("duplicate free dyad");
        slot = static_cast<std::int64_t>(k);
    }
}

void FreeDyads::flipped(Dyad d) {
    const auto idx = dyad_index(d, n_);
    const auto p = static_cast<std::size_t>(position_[idx]);
    // A tie sits in [0, ties_); moving it across the boundary keeps both blocks contiguous.
    const std::size_t target = p < ties_ ? ties_ - 1 : ties_;
    std::swap(order_[p], order_[target]);
    position_[dyad_index(order_[p], n_)] = static_cast<std::int64_t>(p);
    position_[idx] = static_cast<std::int64_t>(target);
    ties_ = p < ties_ ? ties_ - 1 : ties_ + 1;
}

ChainState make_chain(Graph start, const Model& model, std::span<const Dyad> free, std::uint64_t seed) {
    if (free.empty()) throw UsageError("no free dyads to sample: the conditioning set covers every dyad");
    ChainState s;
    s.stats = model.stats(start);
    s.free = FreeDyads(free, start);
    s.graph = std::move(start);
    s.rng = Rng(seed);
    s.delta.resize(static_cast<Eigen::Index>(model.dim()));
    return s;
}

Graph initial_conditional_state(const PartialGraph& g, Rng& rng) {
    Graph out = g.masked();
    const auto observed = g.observed_dyad_count();
    std::size_t observed_edges = out.edge_count();
    const double p = observed == 0 ? 0.5 : static_cast<double>(observed_edges) / static_cast<double>(observed);
    for (auto d : g.free) out.set_edge(d, rng.bernoulli(p));
    return out;
}

namespace {

// Probability that a tie-no-tie proposal picks from the tie block.
double tie_block_probability(std::size_t ties, std::size_t non_ties) {
    if (ties == 0) return 0.0;
    if (non_ties == 0) return 1.0;
    return 0.5;
}

}  // namespace

bool mh_step(ChainState& s, const Model& model, const Eigen::VectorXd& theta, Proposal proposal) {
    auto& free = s.free;
    const std::size_t total = free.size();
    if (total == 0) throw UsageError("no free dyads to sample");

    Dyad d;
    double log_q_ratio = 0.0;  // log q(reverse) - log q(forward)
    if (proposal == Proposal::UniformDyad) {
        d = free[static_cast<std::size_t>(s.rng.uniform_index(total))];
    } else {
        const std::size_t t = free.ties();
        const std::size_t u = free.non_ties();
        const double pt = tie_block_probability(t, u);
        if (s.rng.uniform01() < pt) {
            d = free.tie(static_cast<std::size_t>(s.rng.uniform_index(t)));
            // After removal: t-1 ties, u+1 non-ties; reverse proposal picks this non-tie.
            const double fwd = pt / static_cast<double>(t);
            const double rev = (1.0 - tie_block_probability(t - 1, u + 1)) / static_cast<double>(u + 1);
            log_q_ratio = std::log(rev) - std::log(fwd);
        } else {
            d = free.non_tie(static_cast<std::size_t>(s.rng.uniform_index(u)));
            const double fwd = (1.0 - pt) / static_cast<double>(u);
            const double rev = tie_block_probability(t + 1, u - 1) / static_cast<double>(t + 1);
            log_q_ratio = std::log(rev) - std::log(fwd);
        }
    }

    model.change(s.graph, d, s.delta);
    const bool present = s.graph.has_edge(d);
    const double sign = present ? -1.0 : 1.0;
    const double log_ratio = sign * theta.dot(s.delta) + log_q_ratio;
    ++s.proposals;
    if (log_ratio >= 0.0 || s.rng.uniform01() < std::exp(log_ratio)) {
        s.graph.flip(d);
        s.free.flipped(d);
        s.stats.noalias() += sign * s.delta;
        ++s.accepted;
        return true;
    }
    return false;
}

void advance(ChainState& s, const Model& model, const Eigen::VectorXd& theta, std::size_t steps,
             Proposal proposal) {
    for (std::size_t k = 0; k < steps; ++k) mh_step(s, model, theta, proposal);
}

void run_conditional_chains(const PartialGraph& g, const Eigen::VectorXd& theta, const Model& model,
                            std::size_t B, const SamplerConfig& cfg, const DrawVisitor& visit) {
    cfg.validate();
    if (B < 1) throw UsageError("number of draws must be at least 1");
    if (static_cast<std::size_t>(theta.size()) != model.dim())
        throw UsageError("coefficient vector has length " + std::to_string(theta.size()) +
                         ", model has " + std::to_string(model.dim()) + " statistics");
    if (g.free.empty()) throw UsageError("no free dyads to sample: the conditioning set covers every dyad");

    const std::size_t chains = std::min(cfg.chains, B);
    const std::size_t burn = cfg.burn_in_for(g.free.size());
    const std::size_t thin = cfg.thin_for(g.free.size());

    auto run_chain = [&](std::size_t c) {
        const std::size_t draws = B / chains + (c < B % chains ? 1 : 0);
        Rng init(derive_seed(cfg.seed, {c, 0}));
        ChainState s = make_chain(initial_conditional_state(g, init), model, g.free.dyads(),
                                  derive_seed(cfg.seed, {c, 1}));
        advance(s, model, theta, burn, cfg.proposal);
        for (std::size_t k = 0; k < draws; ++k) {
            advance(s, model, theta, thin, cfg.proposal);
            visit(c, k, s);
        }
    };

    const std::size_t workers = std::min(cfg.workers, chains);
    if (workers <= 1) {
        for (std::size_t c = 0; c < chains; ++c) run_chain(c);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t c; (c = next++) < chains;) {
                try {
                    run_chain(c);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

namespace {

std::vector<std::size_t> chain_offsets(std::size_t B, std::size_t chains) {
    chains = std::min(chains, B);
    std::vector<std::size_t> offset(chains + 1, 0);
    for (std::size_t c = 0; c < chains; ++c) offset[c + 1] = offset[c] + B / chains + (c < B % chains ? 1 : 0);
    return offset;
}

}  // namespace

std::vector<Graph> sample_conditional(const PartialGraph& g, const Eigen::VectorXd& theta, const Model& model,
                                      std::size_t B, const SamplerConfig& cfg) {
    std::vector<Graph> out(B);
    const auto offset = chain_offsets(B, cfg.chains);
    run_conditional_chains(g, theta, model, B, cfg, [&](std::size_t c, std::size_t k, const ChainState& s) {
        out[offset[c] + k] = s.graph;
    });
    return out;
}

std::vector<Graph> sample_conditional(const PartialGraph& g, const Eigen::VectorXd& theta, const ModelSpec& spec,
                                      std::size_t B, const SamplerConfig& cfg) {
    return sample_conditional(g, theta, Model(spec, g.base), B, cfg);
}

Eigen::MatrixXd sample_stats(const PartialGraph& g, const Eigen::VectorXd& theta, const Model& model,
                             std::size_t B, const SamplerConfig& cfg) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(B), static_cast<Eigen::Index>(model.dim()));
    const auto offset = chain_offsets(B, cfg.chains);
    run_conditional_chains(g, theta, model, B, cfg, [&](std::size_t c, std::size_t k, const ChainState& s) {
        out.row(static_cast<Eigen::Index>(offset[c] + k)) = s.stats.transpose();
    });
    return out;
}

}  // namespace hope
