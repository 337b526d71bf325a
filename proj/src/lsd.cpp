#include "dsbm/lsd.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "dsbm/parallel.hpp"
#include "dsbm/rng.hpp"
#include "dsbm/theory.hpp"

namespace dsbm {

namespace {

constexpr double kEndpoint = 1e-12;  // open-interval margin for persistence roots

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

// Bernoulli likelihood of link state eps under affinity entry p.
double bernoulli(double p, int eps) { return eps ? p : 1.0 - p; }

double xi_score(double xi, const TransitionCounts& counts, const AffinityMatrix& p) {
    int k = counts.k;
    double score = 0.0;
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) {
            double p_ab = std::clamp(p.at(a, b), kEndpoint, 1.0 - kEndpoint);
            for (int ep = 0; ep < 2; ++ep)
                for (int e = 0; e < 2; ++e) {
                    double mass = counts.at(a, b, ep, e);
                    if (mass == 0.0) continue;
                    double same = (e == ep) ? 1.0 : 0.0;
                    double like = bernoulli(p_ab, e);
                    score += (same - like) / (xi * same + (1.0 - xi) * like) * mass;
                }
        }
    return score;
}

double eta_score(double eta, const TransitionCounts& counts, const std::vector<double>& prior) {
    double score = 0.0;
    for (std::size_t a = 0; a < prior.size(); ++a)
        score += (1.0 - prior[a]) / (eta + (1.0 - eta) * prior[a]) * counts.f_same[a];
    score -= counts.f_diff / (1.0 - eta);
    return score;
}

// Bisection for a strictly decreasing score with score(lo) > 0 > score(hi).
double bisect_decreasing(double lo, double hi, const std::function<double(double)>& score) {
    for (int iter = 0; iter < 200 && hi - lo > 1e-14; ++iter) {
        double mid = 0.5 * (lo + hi);
        if (score(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

std::pair<std::vector<AssignmentRow>, std::vector<std::vector<int>>> align_labels(
    const std::vector<AssignmentRow>& raw, int k) {
    if (k > 8) throw std::invalid_argument("label alignment limited to k <= 8");
    std::vector<AssignmentRow> aligned;
    std::vector<std::vector<int>> perms;
    aligned.reserve(raw.size());
    perms.reserve(raw.size());
    if (raw.empty()) return {aligned, perms};

    std::vector<int> identity(static_cast<std::size_t>(k));
    for (int r = 0; r < k; ++r) identity[static_cast<std::size_t>(r)] = r;
    aligned.push_back(raw.front());
    perms.push_back(identity);

    auto all_perms = detail::all_permutations(k);
    for (std::size_t t = 1; t < raw.size(); ++t) {
        const auto& prev = aligned.back();
        const auto& row = raw[t];
        // Agreement of "relabel row's b to perm[b]" with prev is a sum over
        // the (prev, row) pair table.
        std::vector<std::size_t> table(static_cast<std::size_t>(k) * k, 0);
        for (std::size_t i = 0; i < row.size(); ++i)
            ++table[static_cast<std::size_t>(prev[i]) * k + row[i]];
        std::size_t best_agree = 0;
        const std::vector<int>* best_perm = &all_perms.front();
        for (const auto& perm : all_perms) {  // lexicographic order; ties keep the first
            std::size_t agree = 0;
            for (int b = 0; b < k; ++b)
                agree += table[static_cast<std::size_t>(perm[static_cast<std::size_t>(b)]) * k + b];
            if (agree > best_agree) {
                best_agree = agree;
                best_perm = &perm;
            }
        }
        AssignmentRow mapped(row.size());
        for (std::size_t i = 0; i < row.size(); ++i)
            mapped[i] = (*best_perm)[static_cast<std::size_t>(row[i])];
        aligned.push_back(std::move(mapped));
        perms.push_back(*best_perm);
    }
    return {aligned, perms};
}

SnapshotSweep snapshot_sweep(const TemporalNetwork& network, int k,
                             const std::vector<double>& prior, const BpConfig& config,
                             int workers) {
    int n_snaps = network.n_snapshots();
    if (n_snaps == 0) throw std::invalid_argument("empty temporal network");

    SnapshotSweep sweep;
    sweep.raw.resize(static_cast<std::size_t>(n_snaps));
    sweep.a_star.assign(static_cast<std::size_t>(n_snaps), 0.0);
    sweep.affinities.resize(static_cast<std::size_t>(n_snaps));
    sweep.converged.assign(static_cast<std::size_t>(n_snaps), 0);

    parallel_for(n_snaps, [&](int t) {
        BpConfig snap_config = config;
        snap_config.seed = substream_seed(config.seed, 0x736e6170ULL, static_cast<std::uint64_t>(t));
        auto em = em_fit(network.snapshots[static_cast<std::size_t>(t)], network.n_nodes, k, prior,
                         std::nullopt, snap_config);
        sweep.raw[static_cast<std::size_t>(t)] = std::move(em.assignments);
        sweep.a_star[static_cast<std::size_t>(t)] = em.a_hat;
        sweep.affinities[static_cast<std::size_t>(t)] = std::move(em.affinity_hat);
        sweep.converged[static_cast<std::size_t>(t)] = em.converged ? 1 : 0;
    }, workers);

    auto [aligned, perms] = align_labels(sweep.raw, k);
    sweep.aligned = std::move(aligned);
    sweep.permutations = std::move(perms);
    return sweep;
}

TransitionCounts transition_counts(const TemporalNetwork& network,
                                   const std::vector<AssignmentRow>& aligned, int k,
                                   const std::vector<char>& valid_transition) {
    int n_snaps = network.n_snapshots();
    int n = network.n_nodes;
    if (n_snaps < 2) throw std::invalid_argument("need at least two snapshots for transitions");
    if (static_cast<int>(aligned.size()) != n_snaps)
        throw std::invalid_argument("assignment rows must cover all snapshots");

    TransitionCounts counts;
    counts.k = k;
    counts.m.assign(static_cast<std::size_t>(k) * k * 4, 0.0);
    counts.f_same.assign(static_cast<std::size_t>(k), 0.0);

    int used_transitions = 0;
    for (int t = 1; t < n_snaps; ++t) {
        if (!valid_transition.empty() && !valid_transition[static_cast<std::size_t>(t)]) continue;
        ++used_transitions;
        const auto& g = aligned[static_cast<std::size_t>(t)];
        const auto& g_prev = aligned[static_cast<std::size_t>(t - 1)];
        const auto& now = network.snapshots[static_cast<std::size_t>(t)];
        const auto& prev = network.snapshots[static_cast<std::size_t>(t - 1)];

        for (int i = 0; i < n; ++i) {
            if (g[static_cast<std::size_t>(i)] == g_prev[static_cast<std::size_t>(i)])
                counts.f_same[static_cast<std::size_t>(g[static_cast<std::size_t>(i)])] += 1.0;
            else
                counts.f_diff += 1.0;
        }

        // Group totals at time t give per-class pair counts; explicit edges
        // cover the cells with eps or eps' = 1, the 0->0 cell is the
        // complement.
        std::vector<double> group_count(static_cast<std::size_t>(k), 0.0);
        for (int label : g) group_count[static_cast<std::size_t>(label)] += 1.0;

        // The complement below needs this transition's explicit cells only,
        // not the running totals.
        std::vector<double> before(counts.m);

        auto add = [&](const Edge& e, int ep, int en, double w) {
            int a = g[static_cast<std::size_t>(e.first)];
            int b = g[static_cast<std::size_t>(e.second)];
            counts.at(a, b, ep, en) += 0.5 * w;
            counts.at(b, a, ep, en) += 0.5 * w;
        };

        // Merge the two sorted edge lists.
        std::size_t ip = 0, in = 0;
        while (ip < prev.size() || in < now.size()) {
            if (in == now.size() || (ip < prev.size() && prev[ip] < now[in])) {
                add(prev[ip], 1, 0, 1.0);
                ++ip;
            } else if (ip == prev.size() || now[in] < prev[ip]) {
                add(now[in], 0, 1, 1.0);
                ++in;
            } else {
                add(prev[ip], 1, 1, 1.0);
                ++ip;
                ++in;
            }
        }

        auto added = [&](int a, int b, int ep, int en) {
            std::size_t idx = ((static_cast<std::size_t>(a) * k + b) * 2 + ep) * 2 + en;
            return counts.m[idx] - before[idx];
        };
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b) {
                double total = (a == b)
                    ? group_count[static_cast<std::size_t>(a)] *
                          (group_count[static_cast<std::size_t>(a)] - 1.0) / 2.0
                    : group_count[static_cast<std::size_t>(a)] *
                          group_count[static_cast<std::size_t>(b)] / 2.0;
                counts.at(a, b, 0, 0) +=
                    total - added(a, b, 1, 1) - added(a, b, 1, 0) - added(a, b, 0, 1);
            }
    }
    if (used_transitions == 0) throw std::invalid_argument("no valid transitions");

    double pair_norm = static_cast<double>(used_transitions) * n * (n - 1) / 2.0;
    for (double& v : counts.m) v /= pair_norm;
    double label_norm = static_cast<double>(used_transitions) * n;
    for (double& v : counts.f_same) v /= label_norm;
    counts.f_diff /= label_norm;
    return counts;
}

double estimate_eta(const TransitionCounts& counts, const std::vector<double>& prior,
                    bool* saturated) {
    if (saturated) *saturated = false;
    if (counts.f_diff <= 0.0) {
        if (saturated) *saturated = true;
        return 1.0 - kEndpoint;
    }
    int k = static_cast<int>(prior.size());
    bool uniform = true;
    for (double q : prior) uniform = uniform && std::abs(q - 1.0 / k) < 1e-12;
    if (uniform) {
        double f_s = 0.0;
        for (double f : counts.f_same) f_s += f;
        return std::clamp((k * f_s - 1.0) / (k - 1.0), 0.0, 1.0 - kEndpoint);
    }
    return estimate_eta_root(counts, prior);
}

double estimate_eta_root(const TransitionCounts& counts, const std::vector<double>& prior) {
    if (counts.f_diff <= 0.0) return 1.0 - kEndpoint;
    auto score = [&](double eta) { return eta_score(eta, counts, prior); };
    double lo = kEndpoint, hi = 1.0 - kEndpoint;
    if (score(lo) <= 0.0 || score(hi) >= 0.0)
        throw std::runtime_error("group-persistence equation has no root in (0,1)");
    return bisect_decreasing(lo, hi, score);
}

double estimate_xi(const TransitionCounts& counts, const AffinityMatrix& affinity, bool* clamped) {
    if (clamped) *clamped = false;
    auto score = [&](double xi) { return xi_score(xi, counts, affinity); };
    double lo = 0.0, hi = 1.0 - kEndpoint;
    if (score(lo) <= 0.0) {
        if (clamped) *clamped = true;
        return 0.0;
    }
    if (score(hi) >= 0.0) {
        if (clamped) *clamped = true;
        return hi;
    }
    return bisect_decreasing(lo, hi, score);
}

namespace {

// Mean a*_t over converged snapshots past the burn-in; falls back to all
// converged snapshots when the window is empty.
double mean_a_star(const SnapshotSweep& sweep, int burn_in) {
    double sum = 0.0;
    int count = 0;
    for (std::size_t t = 0; t < sweep.a_star.size(); ++t) {
        if (!sweep.converged[t]) continue;
        if (static_cast<int>(t) < burn_in) continue;
        sum += sweep.a_star[t];
        ++count;
    }
    if (count == 0) {
        for (std::size_t t = 0; t < sweep.a_star.size(); ++t) {
            if (!sweep.converged[t]) continue;
            sum += sweep.a_star[t];
            ++count;
        }
    }
    return count > 0 ? sum / count : 0.0;
}

int burn_in_for(double xi, double eta, int horizon) {
    double rate = 1.0 - xi * eta * eta;
    int burn = (rate > 0.0) ? static_cast<int>(std::ceil(5.0 / rate)) : horizon;
    return std::min(burn, horizon / 2);
}

}  // namespace

LsdResult lsd_run(const TemporalNetwork& network, int k, const std::vector<double>& prior,
                  const BpConfig& config, int workers) {
    int horizon = network.n_snapshots() - 1;  // T
    if (horizon < 1) throw std::invalid_argument("lsd_run needs at least two snapshots");

    LsdResult result;
    result.sweep = snapshot_sweep(network, k, prior, config, workers);

    int n_failed = 0;
    std::vector<char> valid_transition(static_cast<std::size_t>(horizon) + 1, 1);
    for (int t = 0; t <= horizon; ++t) {
        if (!result.sweep.converged[static_cast<std::size_t>(t)]) ++n_failed;
    }
    for (int t = 1; t <= horizon; ++t)
        valid_transition[static_cast<std::size_t>(t)] =
            result.sweep.converged[static_cast<std::size_t>(t)] &&
            result.sweep.converged[static_cast<std::size_t>(t - 1)];
    if (2 * n_failed > horizon + 1) {
        result.error = "more than half of the snapshot fits failed";
        return result;
    }
    bool any_transition = false;
    for (int t = 1; t <= horizon; ++t) any_transition |= valid_transition[static_cast<std::size_t>(t)] != 0;
    if (!any_transition) {
        result.error = "no valid consecutive snapshot pair";
        return result;
    }

    result.counts = transition_counts(network, result.sweep.aligned, k, valid_transition);
    result.eta_hat = estimate_eta(result.counts, prior, &result.eta_saturated);

    double cbar_emp = 2.0 * static_cast<double>(network.total_edges()) /
                      (static_cast<double>(network.n_nodes) * network.n_snapshots());
    auto affinity_at = [&](double a) {
        return affinity_from_assortativity(clamp01(a), k, cbar_emp, network.n_nodes);
    };

    // First pass: xi from the raw (biased) a*, lag still unknown.
    double a_star_1 = mean_a_star(result.sweep, burn_in_for(0.0, result.eta_hat, horizon));
    result.xi_hat_first_pass = estimate_xi(result.counts, affinity_at(a_star_1));
    auto profile_1 = optimal_lag(result.xi_hat_first_pass, result.eta_hat, std::nullopt);
    result.tau_star_first_pass = profile_1.tau_star;

    // Refinement: correct a* by the first-pass lag factor, re-solve xi.
    result.burn_in = burn_in_for(result.xi_hat_first_pass, result.eta_hat, horizon);
    double a_star_2 = mean_a_star(result.sweep, result.burn_in);
    double a_mid = (profile_1.a_star > 0.0) ? a_star_2 / profile_1.a_star : a_star_2;
    result.xi_hat = estimate_xi(result.counts, affinity_at(a_mid), &result.xi_clamped);

    auto profile = optimal_lag(result.xi_hat, result.eta_hat, std::nullopt);
    result.tau_star_hat = profile.tau_star;
    if (result.tau_star_hat >= horizon) {
        result.lag_exceeds_horizon = true;
        result.tau_star_hat = horizon - 1;
    }
    result.burn_in = burn_in_for(result.xi_hat, result.eta_hat, horizon);
    result.a_star_hat = mean_a_star(result.sweep, result.burn_in);
    double eps_star = asymptotic_lagged(1.0, result.xi_hat, result.eta_hat, result.tau_star_hat);
    result.a_hat = (eps_star > 0.0) ? result.a_star_hat / eps_star : result.a_star_hat;

    // Shift assignments back: corrected g^t is the inference from snapshot
    // t + tau*.
    result.corrected_assignments.labels.resize(static_cast<std::size_t>(horizon) + 1);
    result.corrected_valid.assign(static_cast<std::size_t>(horizon) + 1, 0);
    for (int t = 0; t + result.tau_star_hat <= horizon; ++t) {
        result.corrected_assignments.labels[static_cast<std::size_t>(t)] =
            result.sweep.aligned[static_cast<std::size_t>(t + result.tau_star_hat)];
        result.corrected_valid[static_cast<std::size_t>(t)] = 1;
    }
    result.ok = true;
    return result;
}

}  // namespace dsbm
