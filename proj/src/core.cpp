#include "dsbm/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dsbm {

std::vector<double> ModelParams::uniform_prior(int k) {
    return std::vector<double>(static_cast<std::size_t>(k), 1.0 / k);
}

void ModelParams::validate() const {
    if (n_nodes <= 0) throw std::invalid_argument("n_nodes must be positive");
    if (n_steps < 0) throw std::invalid_argument("n_steps must be non-negative");
    if (k < 2) throw std::invalid_argument("k must be >= 2");
    if (assortativity < 0.0 || assortativity > 1.0)
        throw std::invalid_argument("assortativity must be in [0,1]");
    if (mean_degree <= 0.0) throw std::invalid_argument("mean_degree must be positive");
    if (link_persistence < 0.0 || link_persistence > 1.0)
        throw std::invalid_argument("link_persistence must be in [0,1]");
    if (community_persistence < 0.0 || community_persistence > 1.0)
        throw std::invalid_argument("community_persistence must be in [0,1]");
    if (static_cast<int>(prior.size()) != k)
        throw std::invalid_argument("prior must have k entries");
    double sum = 0.0;
    for (double q : prior) {
        if (q < 0.0) throw std::invalid_argument("prior entries must be non-negative");
        sum += q;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("prior must sum to 1");
    // Largest affinity entry is pbar*(1 + a(k-1)) = pbar*(a k + 1 - a).
    double scale = std::max(1.0, assortativity * k + (1.0 - assortativity));
    if (pbar() * scale > 1.0 + 1e-15)
        throw std::invalid_argument("mean_degree too large: affinity entry would exceed 1");
}

std::size_t TemporalNetwork::total_edges() const {
    std::size_t m = 0;
    for (const auto& snap : snapshots) m += snap.size();
    return m;
}

void TemporalNetwork::validate() const {
    for (const auto& snap : snapshots) {
        for (const auto& [i, j] : snap) {
            if (i < 0 || j < 0 || i >= n_nodes || j >= n_nodes)
                throw std::invalid_argument("edge endpoint out of range");
            if (i >= j) throw std::invalid_argument("edges must satisfy i < j");
        }
        if (!std::is_sorted(snap.begin(), snap.end()))
            throw std::invalid_argument("snapshot edge list must be sorted");
        if (std::adjacent_find(snap.begin(), snap.end()) != snap.end())
            throw std::invalid_argument("duplicate edge in snapshot");
    }
}

AffinityMatrix affinity_from_assortativity(double a, int k, double cbar, int n) {
    if (a < 0.0 || a > 1.0) throw std::invalid_argument("assortativity must be in [0,1]");
    if (k < 2) throw std::invalid_argument("k must be >= 2");
    if (cbar <= 0.0 || n <= 0) throw std::invalid_argument("cbar and n must be positive");
    double pbar = cbar / n;
    double p_in = pbar * (1.0 + a * (k - 1));
    double p_out = pbar * (1.0 - a);
    if (p_in > 1.0 + 1e-15)
        throw std::invalid_argument("affinity entry exceeds 1: dense regime violation");
    auto m = AffinityMatrix::zero(k);
    for (int r = 0; r < k; ++r)
        for (int s = 0; s < k; ++s) m.at(r, s) = (r == s) ? p_in : p_out;
    return m;
}

double assortativity_from_affinity(double p_in, double p_out, int k) {
    if (p_in < 0.0 || p_out < 0.0) throw std::invalid_argument("affinities must be non-negative");
    double denom = p_in + (k - 1) * p_out;
    if (denom <= 0.0) throw std::invalid_argument("p_in + (k-1) p_out must be positive");
    return (p_in - p_out) / denom;
}

std::pair<double, double> project_planted_partition(const AffinityMatrix& p) {
    int k = p.k;
    double diag = 0.0, off = 0.0;
    for (int r = 0; r < k; ++r)
        for (int s = 0; s < k; ++s) (r == s ? diag : off) += p.at(r, s);
    diag /= k;
    if (k > 1) off /= static_cast<double>(k) * (k - 1);
    return {diag, off};
}

double assortativity_from_affinity(const AffinityMatrix& p) {
    auto [p_in, p_out] = project_planted_partition(p);
    return assortativity_from_affinity(p_in, p_out, p.k);
}

namespace detail {

std::vector<std::vector<int>> all_permutations(int k) {
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::vector<int>> out;
    do {
        out.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

}  // namespace detail

double overlap(const AssignmentRow& planted, const AssignmentRow& inferred,
               const std::vector<double>& prior, bool maximize_over_permutations) {
    if (planted.size() != inferred.size())
        throw std::invalid_argument("assignment rows must have equal length");
    if (planted.empty()) throw std::invalid_argument("assignment rows are empty");
    int k = static_cast<int>(prior.size());
    if (k < 1) throw std::invalid_argument("prior is empty");
    if (maximize_over_permutations && k > 8)
        throw std::invalid_argument("permutation-maximized overlap limited to k <= 8");

    const double n = static_cast<double>(planted.size());
    double q_max = *std::max_element(prior.begin(), prior.end());
    if (q_max >= 1.0) throw std::invalid_argument("max prior entry must be < 1");

    // Agreement counts per (planted, inferred) label pair; any relabeling's
    // agreement is a sum across this table.
    std::vector<std::size_t> table(static_cast<std::size_t>(k) * k, 0);
    for (std::size_t i = 0; i < planted.size(); ++i) {
        int a = planted[i], b = inferred[i];
        if (a < 0 || a >= k || b < 0 || b >= k)
            throw std::invalid_argument("label out of range for prior length");
        ++table[static_cast<std::size_t>(a) * k + b];
    }

    auto agreement = [&](const std::vector<int>& perm) {
        std::size_t agree = 0;
        for (int a = 0; a < k; ++a) agree += table[static_cast<std::size_t>(a) * k + perm[a]];
        return static_cast<double>(agree) / n;
    };

    double best;
    if (maximize_over_permutations) {
        best = -1.0;
        for (const auto& perm : detail::all_permutations(k)) best = std::max(best, agreement(perm));
    } else {
        std::vector<int> identity(static_cast<std::size_t>(k));
        std::iota(identity.begin(), identity.end(), 0);
        best = agreement(identity);
    }
    return (best - q_max) / (1.0 - q_max);
}

}  // namespace dsbm
