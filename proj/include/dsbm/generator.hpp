#pragma once
// Sampling from the persistent dynamic stochastic block model: initial
// static SBM draw, Markovian label steps, and link steps that copy the
// previous snapshot with probability xi or resample from the block structure.

#include <cstdint>
#include <random>

#include "dsbm/core.hpp"

namespace dsbm {

struct GeneratorOutput {
    TemporalNetwork network;
    AssignmentSequence planted;
    ModelParams params;
    std::uint64_t seed = 0;
};

// Labels i.i.d. from the prior, then one static SBM draw. rng streams are
// derived from (seed, t=0).
std::pair<AssignmentRow, EdgeList> sample_initial(const ModelParams& params, std::uint64_t seed);

// Each node keeps its label with probability eta, otherwise resamples from
// the prior (self-transitions allowed).
AssignmentRow step_communities(const AssignmentRow& prev, double eta,
                               const std::vector<double>& prior, std::mt19937_64& rng);

// Each pair copies its previous link state with probability xi, otherwise
// redraws Bernoulli(p_{g_i g_j}). Sparse implementation: per-edge coins for
// previous edges, binomial counts of fresh edges per label-pair class placed
// uniformly among previously-absent pairs. O(edges + fresh) expected.
EdgeList step_links(const EdgeList& prev, const AssignmentRow& g_now, double xi,
                    const AffinityMatrix& affinity, std::uint64_t seed, int t);

// Full sequence: sample_initial, then T rounds of step_communities +
// step_links. Deterministic given (params, seed).
GeneratorOutput generate(const ModelParams& params, std::uint64_t seed);

}  // namespace dsbm
