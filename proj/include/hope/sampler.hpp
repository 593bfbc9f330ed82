#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hope/graph.hpp"
#include "hope/rng.hpp"
#include "hope/terms.hpp"

namespace hope {

enum class Proposal { UniformDyad, TieNoTie };

std::string to_string(Proposal p);
Proposal proposal_from_string(const std::string& s);

struct SamplerConfig {
    /// Defaults: 20 toggles per free dyad of burn-in, 4 per free dyad + 1 between draws.
    /// The default thin is odd because at theta' delta = 0 every toggle is accepted and the
    /// edge-count parity alternates; an even thin would keep every draw in one parity class.
    std::optional<std::size_t> burn_in;
    std::optional<std::size_t> thin;
    Proposal proposal = Proposal::UniformDyad;
    std::uint64_t seed = 1;
    /// Independent chains; draws are split across them in chain order.
    std::size_t chains = 1;
    /// Threads used to run the chains. Never changes the output.
    std::size_t workers = 1;

    std::size_t burn_in_for(std::size_t free_count) const { return burn_in.value_or(20 * free_count); }
    std::size_t thin_for(std::size_t free_count) const {
        return std::max<std::size_t>(1, thin.value_or(4 * free_count + 1));
    }
    void validate() const;
};

/// Free dyads split into a current-tie prefix and a non-tie suffix, O(1) per toggle.
class FreeDyads {
public:
    FreeDyads() = default;
    FreeDyads(std::span<const Dyad> free, const Graph& g);

    std::size_t size() const noexcept { return order_.size(); }
    std::size_t ties() const noexcept { return ties_; }
    std::size_t non_ties() const noexcept { return order_.size() - ties_; }
    const Dyad& operator[](std::size_t k) const { return order_[k]; }
    const Dyad& tie(std::size_t k) const { return order_[k]; }
    const Dyad& non_tie(std::size_t k) const { return order_[ties_ + k]; }
    bool contains(Dyad d) const { return position_[dyad_index(d, n_)] >= 0; }
    /// Records that d (a free dyad) changed state.
    void flipped(Dyad d);

private:
    std::size_t n_ = 0;
    std::vector<Dyad> order_;
    std::vector<std::int64_t> position_;  // by dyad index, -1 when not free
    std::size_t ties_ = 0;
};

/// One Markov chain. `stats` always equals the model statistics of `graph`.
struct ChainState {
    Graph graph;
    Eigen::VectorXd stats;
    Rng rng;
    FreeDyads free;
    Eigen::VectorXd delta;  // scratch for change statistics
    std::uint64_t proposals = 0;
    std::uint64_t accepted = 0;
};

/// Starts a chain at `start` with the given free dyads. Throws UsageError when free is empty.
ChainState make_chain(Graph start, const Model& model, std::span<const Dyad> free, std::uint64_t seed);

/// The starting point used for conditional sampling: observed dyads as given,
/// free dyads drawn independently with probability equal to the observed density.
Graph initial_conditional_state(const PartialGraph& g, Rng& rng);

/// One Metropolis-Hastings toggle proposal among the chain's free dyads.
/// Returns whether the proposal was accepted.
bool mh_step(ChainState& state, const Model& model, const Eigen::VectorXd& theta,
             Proposal proposal = Proposal::UniformDyad);

void advance(ChainState& state, const Model& model, const Eigen::VectorXd& theta, std::size_t steps,
             Proposal proposal);

/// Called once per retained draw, in (chain, draw) order per chain.
using DrawVisitor = std::function<void(std::size_t chain, std::size_t draw, const ChainState&)>;

/// Runs cfg.chains chains over the free dyads of g and visits B retained draws.
/// Draw k of the overall sequence is draw (k - offset_c) of chain c, where chains
/// receive consecutive blocks of sizes B/chains (+1 for the first B%chains).
/// The visitor may be called from several threads, but never concurrently for the same chain.
void run_conditional_chains(const PartialGraph& g, const Eigen::VectorXd& theta, const Model& model,
                            std::size_t B, const SamplerConfig& cfg, const DrawVisitor& visit);

/// Conditional simulation of the free dyads given the observed ones. Free = all
/// dyads is ordinary unconditional simulation. Every draw agrees with g on the
/// observed dyads.
std::vector<Graph> sample_conditional(const PartialGraph& g, const Eigen::VectorXd& theta,
                                      const ModelSpec& spec, std::size_t B, const SamplerConfig& cfg);
std::vector<Graph> sample_conditional(const PartialGraph& g, const Eigen::VectorXd& theta,
                                      const Model& model, std::size_t B, const SamplerConfig& cfg);

/// Same chains as sample_conditional, keeping only the statistic vectors (B x p).
Eigen::MatrixXd sample_stats(const PartialGraph& g, const Eigen::VectorXd& theta, const Model& model,
                             std::size_t B, const SamplerConfig& cfg);

}  // namespace hope
