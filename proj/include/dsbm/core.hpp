#pragma once
// Core domain types for the persistent dynamic stochastic block model:
// generative parameters, planted-partition affinities, temporal edge lists,
// label sequences, and the overlap score used to compare assignments.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dsbm {

using Edge = std::pair<std::int32_t, std::int32_t>;  // undirected, first < second

// One snapshot: sorted unique edge list on nodes [0, n).
using EdgeList = std::vector<Edge>;

// Per-time node labels in [0, k).
using AssignmentRow = std::vector<int>;

struct ModelParams {
    int n_nodes = 0;                  // N
    int n_steps = 0;                  // T transitions, so T+1 snapshots
    int k = 2;                        // number of groups
    double assortativity = 0.0;       // a in [0,1]
    double mean_degree = 0.0;         // cbar, pbar = cbar/N
    double link_persistence = 0.0;    // xi
    double community_persistence = 0.0;  // eta
    std::vector<double> prior;        // length k, defaults to uniform

    // Throws std::invalid_argument on any violated invariant.
    void validate() const;

    double pbar() const { return mean_degree / n_nodes; }
    static std::vector<double> uniform_prior(int k);
};

struct AffinityMatrix {
    int k = 0;
    std::vector<double> entries;  // row-major k*k, symmetric

    double at(int a, int b) const { return entries[static_cast<std::size_t>(a) * k + b]; }
    double& at(int a, int b) { return entries[static_cast<std::size_t>(a) * k + b]; }

    static AffinityMatrix zero(int k) { return AffinityMatrix{k, std::vector<double>(static_cast<std::size_t>(k) * k, 0.0)}; }
};

struct TemporalNetwork {
    int n_nodes = 0;
    std::vector<EdgeList> snapshots;  // A^0 .. A^T

    int n_snapshots() const { return static_cast<int>(snapshots.size()); }
    std::size_t total_edges() const;
    void validate() const;
};

struct AssignmentSequence {
    std::vector<AssignmentRow> labels;  // (T+1) rows of length N

    int n_snapshots() const { return static_cast<int>(labels.size()); }
    int n_nodes() const { return labels.empty() ? 0 : static_cast<int>(labels.front().size()); }
};

// Per-node length-k probability vectors, row-major N*k.
struct Marginals {
    int n_nodes = 0;
    int k = 0;
    std::vector<double> probs;

    double at(int i, int r) const { return probs[static_cast<std::size_t>(i) * k + r]; }
    double& at(int i, int r) { return probs[static_cast<std::size_t>(i) * k + r]; }
};

// Planted-partition affinity for assortativity a at fixed mean degree:
// diagonal pbar*(1 + a(k-1)), off-diagonal pbar*(1-a), pbar = cbar/n.
// Throws std::invalid_argument if any entry would leave [0,1].
AffinityMatrix affinity_from_assortativity(double a, int k, double cbar, int n);

// Inverse of the planted-partition parametrization:
// (p_in - p_out) / (p_in + (k-1) p_out).
double assortativity_from_affinity(double p_in, double p_out, int k);

// Least-squares projection of a general k x k matrix onto planted-partition
// form: separate means of diagonal and off-diagonal entries.
std::pair<double, double> project_planted_partition(const AffinityMatrix& p);

// Assortativity of a general inferred affinity matrix via projection.
double assortativity_from_affinity(const AffinityMatrix& p);

// Normalized agreement between two label rows:
//   (N^-1 sum_i delta(a_i, b_i) - max_r q_r) / (1 - max_r q_r).
// With maximize_over_permutations the agreement term is maximized over all
// k! relabelings of `inferred` (k <= 8).
double overlap(const AssignmentRow& planted, const AssignmentRow& inferred,
               const std::vector<double>& prior, bool maximize_over_permutations);

namespace detail {
// Visits all permutations of {0..k-1} in lexicographic order.
std::vector<std::vector<int>> all_permutations(int k);
}  // namespace detail

}  // namespace dsbm
