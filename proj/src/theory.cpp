#include "dsbm/theory.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dsbm {

namespace {

constexpr double kEqualBranchTol = 1e-9;   // |eta^2 - xi| below this uses the limit branch
constexpr double kProfileDecayTol = 1e-12;
constexpr int kProfileHardCap = 10000;

void check_unit_interval(double x, const char* name) {
    if (x < 0.0 || x > 1.0) throw std::invalid_argument(std::string(name) + " must be in [0,1]");
}

// (eta^{2 tau} - xi^tau) / (eta^2 - xi), with the removable singularity at
// eta^2 == xi replaced by tau * xi^{tau-1}.
double persistence_ratio(double xi, double eta, int tau) {
    double e2 = eta * eta;
    if (std::abs(e2 - xi) < kEqualBranchTol) {
        if (tau == 0) return 0.0;
        return tau * std::pow(xi, tau - 1);
    }
    return (std::pow(e2, tau) - std::pow(xi, tau)) / (e2 - xi);
}

}  // namespace

double effective_assortativity(double a, double xi, double eta, std::optional<int> t) {
    check_unit_interval(xi, "xi");
    check_unit_interval(eta, "eta");
    double xe2 = xi * eta * eta;
    if (!t.has_value()) {
        if (xe2 >= 1.0) throw std::invalid_argument("xi*eta^2 = 1: frozen model has no asymptotic limit");
        return a * (1.0 - xi) / (1.0 - xe2);
    }
    if (*t < 0) throw std::invalid_argument("t must be non-negative");
    if (std::abs(1.0 - xe2) < 1e-15) return a;  // fully frozen: snapshot is the t=0 SBM
    return a * ((1.0 - xi) / (1.0 - xe2) +
                std::pow(xe2, *t) * xi * (1.0 - eta * eta) / (1.0 - xe2));
}

double lagged_assortativity(double a, double xi, double eta, int t, int tau) {
    if (tau < 0 || tau > t) throw std::invalid_argument("tau must satisfy 0 <= tau <= t");
    double base = effective_assortativity(a, xi, eta, t - tau);
    return std::pow(xi, tau) * base +
           (1.0 - xi) * eta * eta * persistence_ratio(xi, eta, tau) * a;
}

double asymptotic_lagged(double a, double xi, double eta, int tau) {
    if (tau < 0) throw std::invalid_argument("tau must be non-negative");
    double base = effective_assortativity(a, xi, eta, std::nullopt);
    return std::pow(xi, tau) * base +
           (1.0 - xi) * eta * eta * persistence_ratio(xi, eta, tau) * a;
}

double delta(double xi, double eta) {
    if (xi >= 1.0) throw std::invalid_argument("delta undefined at xi = 1");
    check_unit_interval(xi, "xi");
    check_unit_interval(eta, "eta");
    return eta * eta * xi / (1.0 - xi);
}

LagProfile optimal_lag(double xi, double eta, std::optional<int> t) {
    check_unit_interval(xi, "xi");
    check_unit_interval(eta, "eta");
    LagProfile profile;
    profile.t = t;
    profile.delta = (xi < 1.0) ? delta(xi, eta) : std::numeric_limits<double>::infinity();

    if (t.has_value()) {
        if (*t < 0) throw std::invalid_argument("t must be non-negative");
        profile.values.reserve(static_cast<std::size_t>(*t) + 1);
        for (int tau = 0; tau <= *t; ++tau)
            profile.values.push_back(lagged_assortativity(1.0, xi, eta, *t, tau));
    } else {
        double prev = asymptotic_lagged(1.0, xi, eta, 0);
        profile.values.push_back(prev);
        for (int tau = 1; tau <= kProfileHardCap; ++tau) {
            double v = asymptotic_lagged(1.0, xi, eta, tau);
            profile.values.push_back(v);
            if (v < kProfileDecayTol && v < prev) break;
            prev = v;
        }
    }

    int best = 0;
    for (int tau = 1; tau < static_cast<int>(profile.values.size()); ++tau)
        if (profile.values[static_cast<std::size_t>(tau)] >
            profile.values[static_cast<std::size_t>(best)])
            best = tau;  // ties keep the smaller lag
    profile.tau_star = best;
    profile.a_star = profile.values[static_cast<std::size_t>(best)];
    return profile;
}

double detectability_threshold(double cbar, double xi, double eta, ThresholdMode mode) {
    if (cbar <= 0.0) throw std::invalid_argument("cbar must be positive");
    double a_c = 1.0 / std::sqrt(cbar);
    switch (mode) {
        case ThresholdMode::Static:
            return a_c;
        case ThresholdMode::SingleSnapshotAsymptotic: {
            if (xi >= 1.0) throw std::invalid_argument("asymptotic threshold undefined at xi = 1");
            double eps = effective_assortativity(1.0, xi, eta, std::nullopt);
            return a_c / eps;
        }
        case ThresholdMode::LagCorrected: {
            if (xi >= 1.0) throw std::invalid_argument("asymptotic threshold undefined at xi = 1");
            double eps_star = optimal_lag(xi, eta, std::nullopt).a_star;
            return a_c / eps_star;
        }
    }
    throw std::logic_error("unreachable");
}

}  // namespace dsbm
