#pragma once
// Lagged Snapshot Dynamic pipeline: independent static inference per
// snapshot, label alignment across time, persistence-parameter estimation
// from the aligned sequence, and lag correction of assignments and
// assortativity.

#include <string>

#include "dsbm/bp.hpp"
#include "dsbm/core.hpp"

namespace dsbm {

struct SnapshotSweep {
    std::vector<AssignmentRow> raw;              // per-t assignments as inferred
    std::vector<AssignmentRow> aligned;          // after sequential permutation matching
    std::vector<std::vector<int>> permutations;  // relabeling applied to each raw row
    std::vector<double> a_star;                  // per-t effective assortativity estimate
    std::vector<AffinityMatrix> affinities;
    std::vector<char> converged;                 // EM success per snapshot
};

// Empirical transition frequencies of the aligned sequence. m is indexed by
// (a, b, eps_prev, eps_now) and symmetrized over (a, b): every unordered pair
// contributes half its weight to each orientation. Total mass sums to 1.
struct TransitionCounts {
    int k = 0;
    std::vector<double> m;       // k*k*2*2
    std::vector<double> f_same;  // per-group frequency of y^t = y^{t-1} = a
    double f_diff = 0.0;         // frequency of label changes

    double& at(int a, int b, int eps_prev, int eps_now) {
        return m[((static_cast<std::size_t>(a) * k + b) * 2 + eps_prev) * 2 + eps_now];
    }
    double at(int a, int b, int eps_prev, int eps_now) const {
        return m[((static_cast<std::size_t>(a) * k + b) * 2 + eps_prev) * 2 + eps_now];
    }
};

struct LsdResult {
    double eta_hat = 0.0;
    double xi_hat = 0.0;
    int tau_star_hat = 0;
    double a_star_hat = 0.0;  // mean effective assortativity after burn-in
    double a_hat = 0.0;       // lag-corrected
    AssignmentSequence corrected_assignments;  // corrected[t] = aligned[t + tau*]
    std::vector<char> corrected_valid;         // false past the shifted horizon
    bool eta_saturated = false;
    bool xi_clamped = false;
    bool lag_exceeds_horizon = false;
    bool ok = false;
    std::string error;
    int burn_in = 0;
    double xi_hat_first_pass = 0.0;
    int tau_star_first_pass = 0;
    SnapshotSweep sweep;
    TransitionCounts counts;
};

// em_fit on every snapshot independently (seed substream per t, snapshots may
// run on several workers), then label alignment.
SnapshotSweep snapshot_sweep(const TemporalNetwork& network, int k,
                             const std::vector<double>& prior, const BpConfig& config,
                             int workers = 0);

// Sequentially permutes each row's labels to maximize agreement with the
// previous aligned row; exhaustive over k! permutations (k <= 8), ties broken
// toward the lexicographically smallest permutation.
std::pair<std::vector<AssignmentRow>, std::vector<std::vector<int>>> align_labels(
    const std::vector<AssignmentRow>& raw, int k);

// Counts over transitions t-1 -> t; a transition contributes only when
// valid_transition[t] is true (empty mask = all valid).
TransitionCounts transition_counts(const TemporalNetwork& network,
                                   const std::vector<AssignmentRow>& aligned, int k,
                                   const std::vector<char>& valid_transition = {});

// Root of the group-persistence likelihood equation. Uniform priors use the
// closed form (k f_s - 1)/(k - 1); general priors bisect. f_diff = 0 saturates
// at 1 - 1e-12.
double estimate_eta(const TransitionCounts& counts, const std::vector<double>& prior,
                    bool* saturated = nullptr);

// Bisection route for any prior; throws if the score has no sign change.
double estimate_eta_root(const TransitionCounts& counts, const std::vector<double>& prior);

// Root of the link-persistence likelihood equation for a given affinity
// matrix, found by bisection on (0, 1 - 1e-12); the score is monotone
// decreasing. Clamps to the nearer endpoint when no sign change exists.
double estimate_xi(const TransitionCounts& counts, const AffinityMatrix& affinity,
                   bool* clamped = nullptr);

// Full pipeline; see LsdResult. Requires T >= 1.
LsdResult lsd_run(const TemporalNetwork& network, int k, const std::vector<double>& prior,
                  const BpConfig& config, int workers = 0);

}  // namespace dsbm
