#pragma once
// Closed forms for single-snapshot and time-lagged inference: effective
// assortativity, its lagged extension, the optimal lag, and detectability
// lines. All pure functions of (a, xi, eta, t, tau).

#include <optional>
#include <vector>

namespace dsbm {

// Effective assortativity of the single-snapshot posterior at time t:
//   a * ( (1-xi)/(1-xi eta^2) + (xi eta^2)^t * xi (1-eta^2)/(1-xi eta^2) ).
// t = std::nullopt selects the t -> infinity limit a (1-xi)/(1-xi eta^2),
// which requires xi eta^2 < 1.
double effective_assortativity(double a, double xi, double eta, std::optional<int> t);

// Lagged effective assortativity for inferring communities at t - tau from
// the snapshot at t:
//   xi^tau * a^{t-tau} + (1-xi) eta^2 (eta^{2 tau} - xi^tau)/(eta^2 - xi) * a,
// with the removable singularity at eta^2 == xi handled by the limit branch
// tau * xi^{tau-1} (tolerance 1e-9 on |eta^2 - xi|).
double lagged_assortativity(double a, double xi, double eta, int t, int tau);

// Large-t limit of the lagged effective assortativity.
double asymptotic_lagged(double a, double xi, double eta, int tau);

// Lag-transition parameter eta^2 xi / (1 - xi); the optimal lag leaves zero
// when this exceeds 1.
double delta(double xi, double eta);

struct LagProfile {
    std::optional<int> t;        // nullopt = asymptotic
    std::vector<double> values;  // a^{(t,tau)} at a = 1, tau = 0..
    int tau_star = 0;
    double a_star = 0.0;         // max of values
    double delta = 0.0;
};

// Profile of the lagged effective assortativity over tau at a = 1 (a factors
// out of both tau* and a*/a). Finite t scans tau = 0..t; the asymptotic
// profile stops once values decay below 1e-12 while decreasing, hard-capped
// at tau = 10^4.
LagProfile optimal_lag(double xi, double eta, std::optional<int> t);

enum class ThresholdMode { Static, SingleSnapshotAsymptotic, LagCorrected };

// Assortativity threshold a_c for the requested detectability line at mean
// degree cbar. Static: cbar^{-1/2}. Single-snapshot asymptotic: smallest a
// with a (1-xi)/(1-xi eta^2) = cbar^{-1/2}. Lag-corrected: smallest a whose
// optimal-lag profile maximum reaches cbar^{-1/2}.
double detectability_threshold(double cbar, double xi, double eta, ThresholdMode mode);

}  // namespace dsbm
