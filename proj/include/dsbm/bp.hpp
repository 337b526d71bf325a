#pragma once
// Single-snapshot stochastic block model inference in the sparse regime:
// belief-propagation marginals with a mean-field treatment of non-edges, and
// EM learning of the affinity matrix on top of it.

#include <cstdint>
#include <optional>

#include "dsbm/core.hpp"

namespace dsbm {

// Compressed adjacency with reverse-edge indices for message passing.
struct Adjacency {
    int n_nodes = 0;
    std::vector<std::int32_t> offsets;    // size n+1
    std::vector<std::int32_t> neighbors;  // size 2M
    std::vector<std::int32_t> reverse;    // directed edge id of (j -> i) for each (i -> j)

    static Adjacency build(int n_nodes, const EdgeList& edges);
    int degree(int i) const { return offsets[i + 1] - offsets[i]; }
    int n_directed_edges() const { return static_cast<int>(neighbors.size()); }
};

struct BpConfig {
    int max_iterations = 500;
    double convergence_tol = 1e-6;      // max absolute message change per sweep
    double damping = 0.0;               // weight kept on the old message, in [0,1)
    double random_init_amplitude = 0.1; // multiplicative noise on the prior at init
    std::uint64_t seed = 0;
};

struct BpResult {
    Marginals marginals;
    bool converged = false;
    int iterations = 0;
    double free_energy = 0.0;            // Bethe -log Z per node
    std::vector<double> messages;        // directed-edge table, 2M * k row-major
    Adjacency adjacency;
};

// Runs asynchronous BP to a fixed point of
//   psi^{i->j}_r  propto  q_r exp(-h_r) prod_{l in di\j} sum_s c_{rs} psi^{l->i}_s
// with c_{rs} = N p_{rs} and external field h_r = (1/N) sum_l sum_s c_{sr} nu_l(s).
// Non-convergence returns converged=false with the last iterate.
BpResult bp_marginals(const EdgeList& edges, int n_nodes, const AffinityMatrix& affinity,
                      const std::vector<double>& prior, const BpConfig& config);

struct EmResult {
    AffinityMatrix affinity_hat;
    double a_hat = 0.0;
    Marginals marginals;
    AssignmentRow assignments;
    int em_iterations = 0;
    bool converged = false;
    bool bp_converged = false;
    double free_energy = 0.0;
    int restarts_used = 0;
};

// EM with BP as the E step; the M step re-estimates p_ab from posterior edge
// pair marginals over one-point pair totals. Stops on max |dp_ab| < 1e-6 or
// 50 rounds. A degenerate E step (an empty inferred group) triggers a fresh
// random init, up to 5 restarts.
EmResult em_fit(const EdgeList& edges, int n_nodes, int k, const std::vector<double>& prior,
                const std::optional<AffinityMatrix>& init_affinity, const BpConfig& config);

// Per-node argmax of the marginals, ties toward the smaller group index.
AssignmentRow map_assignments(const Marginals& marginals);

}  // namespace dsbm
