#pragma once
// Test-only reference implementations, kept independent of the library code
// paths they check: exhaustive posteriors by enumeration, dense transition
// counting, and small random trees.

#include <cmath>
#include <random>
#include <vector>

#include "dsbm/core.hpp"
#include "dsbm/lsd.hpp"

namespace oracles {

// Exact posterior marginals by summing the full (non-sparse) likelihood
//   prod_i q_{g_i} prod_{i<j} p_{g_i g_j}^{A_ij} (1 - p_{g_i g_j})^{1-A_ij}
// over all k^N assignments. Feasible for N <= 14, k = 2.
inline dsbm::Marginals exhaustive_posterior(const dsbm::EdgeList& edges, int n,
                                            const dsbm::AffinityMatrix& p,
                                            const std::vector<double>& prior) {
    int k = p.k;
    std::vector<std::vector<char>> adjacency(static_cast<std::size_t>(n),
                                             std::vector<char>(static_cast<std::size_t>(n), 0));
    for (const auto& [i, j] : edges)
        adjacency[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
            adjacency[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = 1;

    dsbm::Marginals marginals;
    marginals.n_nodes = n;
    marginals.k = k;
    marginals.probs.assign(static_cast<std::size_t>(n) * k, 0.0);

    std::vector<int> g(static_cast<std::size_t>(n), 0);
    double total = 0.0;
    for (;;) {
        double weight = 1.0;
        for (int i = 0; i < n; ++i) {
            weight *= prior[static_cast<std::size_t>(g[static_cast<std::size_t>(i)])];
            for (int j = i + 1; j < n; ++j) {
                double pij = p.at(g[static_cast<std::size_t>(i)], g[static_cast<std::size_t>(j)]);
                weight *= adjacency[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]
                              ? pij
                              : 1.0 - pij;
            }
        }
        total += weight;
        for (int i = 0; i < n; ++i)
            marginals.at(i, g[static_cast<std::size_t>(i)]) += weight;

        int pos = n - 1;  // odometer over assignments
        while (pos >= 0 && g[static_cast<std::size_t>(pos)] == k - 1) {
            g[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
        ++g[static_cast<std::size_t>(pos)];
    }
    for (double& v : marginals.probs) v /= total;
    return marginals;
}

// Dense quadruple-loop version of the transition counts, same (a, b)
// symmetrization convention.
inline dsbm::TransitionCounts dense_transition_counts(
    const dsbm::TemporalNetwork& network, const std::vector<dsbm::AssignmentRow>& aligned,
    int k) {
    dsbm::TransitionCounts counts;
    counts.k = k;
    counts.m.assign(static_cast<std::size_t>(k) * k * 4, 0.0);
    counts.f_same.assign(static_cast<std::size_t>(k), 0.0);
    int n = network.n_nodes;
    int transitions = network.n_snapshots() - 1;

    for (int t = 1; t <= transitions; ++t) {
        const auto& g = aligned[static_cast<std::size_t>(t)];
        const auto& g_prev = aligned[static_cast<std::size_t>(t - 1)];
        for (int i = 0; i < n; ++i) {
            if (g[static_cast<std::size_t>(i)] == g_prev[static_cast<std::size_t>(i)])
                counts.f_same[static_cast<std::size_t>(g[static_cast<std::size_t>(i)])] += 1.0;
            else
                counts.f_diff += 1.0;
        }
        const auto& now = network.snapshots[static_cast<std::size_t>(t)];
        const auto& prev = network.snapshots[static_cast<std::size_t>(t - 1)];
        auto has = [](const dsbm::EdgeList& list, int i, int j) {
            return std::binary_search(list.begin(), list.end(), dsbm::Edge{i, j});
        };
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                int ep = has(prev, i, j) ? 1 : 0;
                int en = has(now, i, j) ? 1 : 0;
                int a = g[static_cast<std::size_t>(i)];
                int b = g[static_cast<std::size_t>(j)];
                counts.at(a, b, ep, en) += 0.5;
                counts.at(b, a, ep, en) += 0.5;
            }
    }
    double pair_norm = static_cast<double>(transitions) * n * (n - 1) / 2.0;
    for (double& v : counts.m) v /= pair_norm;
    double label_norm = static_cast<double>(transitions) * n;
    for (double& v : counts.f_same) v /= label_norm;
    counts.f_diff /= label_norm;
    return counts;
}

// Expected transition counts of the stationary model: labels from the
// two-node chain, previous link state from the stationary effective
// affinity, current state from the copy-or-resample law.
inline dsbm::TransitionCounts expected_transition_counts(double xi, double eta, int k,
                                                         const dsbm::AffinityMatrix& p,
                                                         double pbar) {
    dsbm::TransitionCounts counts;
    counts.k = k;
    counts.m.assign(static_cast<std::size_t>(k) * k * 4, 0.0);
    counts.f_same.assign(static_cast<std::size_t>(k), 0.0);
    double q = 1.0 / k;

    // Stationary effective affinity p^inf.
    auto p_inf = p;
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b)
            p_inf.at(a, b) = (xi * (1.0 - eta * eta) * pbar + (1.0 - xi) * p.at(a, b)) /
                             (1.0 - xi * eta * eta);

    auto chain = [&](int to, int from) { return (to == from ? eta : 0.0) + (1.0 - eta) * q; };
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b)
            for (int ap = 0; ap < k; ++ap)
                for (int bp = 0; bp < k; ++bp) {
                    double label_mass = q * q * chain(a, ap) * chain(b, bp);
                    for (int ep = 0; ep < 2; ++ep) {
                        double prev_link = ep ? p_inf.at(ap, bp) : 1.0 - p_inf.at(ap, bp);
                        for (int en = 0; en < 2; ++en) {
                            double now_link = (en == ep ? xi : 0.0) +
                                              (1.0 - xi) * (en ? p.at(a, b) : 1.0 - p.at(a, b));
                            counts.at(a, b, ep, en) += label_mass * prev_link * now_link;
                        }
                    }
                }

    for (int a = 0; a < k; ++a)
        counts.f_same[static_cast<std::size_t>(a)] = q * (eta + (1.0 - eta) * q);
    double same = 0.0;
    for (double f : counts.f_same) same += f;
    counts.f_diff = 1.0 - same;
    return counts;
}

// Uniform random labeled tree on n nodes from a Pruefer sequence.
inline dsbm::EdgeList random_tree(int n, std::mt19937_64& rng) {
    if (n == 1) return {};
    if (n == 2) return {{0, 1}};
    std::uniform_int_distribution<int> node(0, n - 1);
    std::vector<int> pruefer(static_cast<std::size_t>(n - 2));
    for (auto& v : pruefer) v = node(rng);
    std::vector<int> degree(static_cast<std::size_t>(n), 1);
    for (int v : pruefer) ++degree[static_cast<std::size_t>(v)];
    dsbm::EdgeList edges;
    for (int v : pruefer) {
        for (int leaf = 0; leaf < n; ++leaf) {
            if (degree[static_cast<std::size_t>(leaf)] == 1) {
                edges.push_back({std::min(leaf, v), std::max(leaf, v)});
                --degree[static_cast<std::size_t>(leaf)];
                --degree[static_cast<std::size_t>(v)];
                break;
            }
        }
    }
    int u = -1, v = -1;
    for (int i = 0; i < n; ++i)
        if (degree[static_cast<std::size_t>(i)] == 1) (u < 0 ? u : v) = i;
    edges.push_back({std::min(u, v), std::max(u, v)});
    std::sort(edges.begin(), edges.end());
    return edges;
}

}  // namespace oracles
