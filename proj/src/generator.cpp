#include "dsbm/generator.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "dsbm/rng.hpp"

namespace dsbm {

namespace {

// Stream ids within one time step.
enum : std::uint64_t { kLabelStream = 0, kEdgeCoinStream = 1, kFreshStream = 2 };

std::vector<std::vector<std::int32_t>> nodes_by_group(const AssignmentRow& g, int k) {
    std::vector<std::vector<std::int32_t>> groups(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < g.size(); ++i)
        groups[static_cast<std::size_t>(g[i])].push_back(static_cast<std::int32_t>(i));
    return groups;
}

// Uniform draw of an unordered pair from label class (a, b); a == b draws two
// distinct members.
Edge draw_class_pair(const std::vector<std::int32_t>& ga, const std::vector<std::int32_t>& gb,
                     bool same_group, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> da(0, ga.size() - 1);
    std::uniform_int_distribution<std::size_t> db(0, gb.size() - 1);
    for (;;) {
        std::int32_t i = ga[da(rng)];
        std::int32_t j = gb[db(rng)];
        if (i == j) {
            if (same_group) continue;  // distinct members required
            continue;                  // unreachable for disjoint groups
        }
        return {std::min(i, j), std::max(i, j)};
    }
}

// Fresh edges for one label class: Binomial(eligible_pairs, prob) placed
// uniformly among pairs not in `excluded` (sorted).
void place_fresh_edges(const std::vector<std::int32_t>& ga, const std::vector<std::int32_t>& gb,
                       bool same_group, double prob, const EdgeList& excluded,
                       std::int64_t excluded_in_class, EdgeList& out, std::mt19937_64& rng) {
    if (prob <= 0.0) return;
    std::int64_t total_pairs = same_group
        ? static_cast<std::int64_t>(ga.size()) * (static_cast<std::int64_t>(ga.size()) - 1) / 2
        : static_cast<std::int64_t>(ga.size()) * static_cast<std::int64_t>(gb.size());
    std::int64_t eligible = total_pairs - excluded_in_class;
    if (eligible <= 0) return;
    std::binomial_distribution<std::int64_t> binom(eligible, prob);
    std::int64_t want = binom(rng);

    auto is_excluded = [&](const Edge& e) {
        return std::binary_search(excluded.begin(), excluded.end(), e);
    };
    std::unordered_set<std::uint64_t> placed;
    placed.reserve(static_cast<std::size_t>(want) * 2);
    auto key = [](const Edge& e) {
        return (static_cast<std::uint64_t>(e.first) << 32) | static_cast<std::uint32_t>(e.second);
    };
    std::int64_t have = 0;
    while (have < want) {
        Edge e = draw_class_pair(ga, gb, same_group, rng);
        if (is_excluded(e)) continue;
        if (!placed.insert(key(e)).second) continue;
        out.push_back(e);
        ++have;
    }
}

// Static SBM edge draw given labels: binomial fresh edges per class with the
// raw affinities and no exclusions.
EdgeList sample_static_edges(const AssignmentRow& g, const AffinityMatrix& affinity,
                             std::uint64_t seed, int t) {
    int k = affinity.k;
    auto groups = nodes_by_group(g, k);
    EdgeList edges;
    EdgeList no_exclusions;
    int cls = 0;
    for (int a = 0; a < k; ++a) {
        for (int b = a; b < k; ++b, ++cls) {
            if (groups[a].empty() || groups[b].empty()) continue;
            auto rng = substream(seed, static_cast<std::uint64_t>(t), kFreshStream,
                                 static_cast<std::uint64_t>(cls));
            place_fresh_edges(groups[a], groups[b], a == b, affinity.at(a, b), no_exclusions, 0,
                              edges, rng);
        }
    }
    std::sort(edges.begin(), edges.end());
    return edges;
}

}  // namespace

std::pair<AssignmentRow, EdgeList> sample_initial(const ModelParams& params, std::uint64_t seed) {
    params.validate();
    auto rng = substream(seed, 0ULL, kLabelStream);
    auto cum = cumulative_weights(params.prior);
    AssignmentRow labels(static_cast<std::size_t>(params.n_nodes));
    for (auto& g : labels) g = draw_categorical(cum, rng);
    auto affinity = affinity_from_assortativity(params.assortativity, params.k,
                                                params.mean_degree, params.n_nodes);
    EdgeList edges = sample_static_edges(labels, affinity, seed, 0);
    return {std::move(labels), std::move(edges)};
}

AssignmentRow step_communities(const AssignmentRow& prev, double eta,
                               const std::vector<double>& prior, std::mt19937_64& rng) {
    auto cum = cumulative_weights(prior);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    AssignmentRow next(prev.size());
    for (std::size_t i = 0; i < prev.size(); ++i)
        next[i] = (unit(rng) < eta) ? prev[i] : draw_categorical(cum, rng);
    return next;
}

EdgeList step_links(const EdgeList& prev, const AssignmentRow& g_now, double xi,
                    const AffinityMatrix& affinity, std::uint64_t seed, int t) {
    int k = affinity.k;
    auto groups = nodes_by_group(g_now, k);

    // Previous edges classified under the current labels; only those can be
    // copied, everything else sees the fresh-draw probability (1-xi) p_ab.
    int n_classes = k * (k + 1) / 2;
    std::vector<EdgeList> prev_by_class(static_cast<std::size_t>(n_classes));
    auto class_index = [k](int a, int b) {
        if (a > b) std::swap(a, b);
        return a * k - a * (a - 1) / 2 + (b - a);
    };
    for (const auto& e : prev)
        prev_by_class[static_cast<std::size_t>(class_index(g_now[e.first], g_now[e.second]))]
            .push_back(e);

    EdgeList next;
    next.reserve(prev.size() + prev.size() / 4);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int cls = 0;
    for (int a = 0; a < k; ++a) {
        for (int b = a; b < k; ++b, ++cls) {
            const auto& class_prev = prev_by_class[static_cast<std::size_t>(cls)];
            double p_ab = affinity.at(a, b);

            // Copy-or-resample coin per previous edge.
            {
                auto rng = substream(seed, static_cast<std::uint64_t>(t), kEdgeCoinStream,
                                     static_cast<std::uint64_t>(cls));
                for (const auto& e : class_prev) {
                    double u = unit(rng);
                    if (u < xi || unit(rng) < p_ab) next.push_back(e);
                }
            }

            // Fresh edges among previously-absent pairs of this class.
            if (!groups[a].empty() && !groups[b].empty()) {
                auto rng = substream(seed, static_cast<std::uint64_t>(t), kFreshStream,
                                     static_cast<std::uint64_t>(cls));
                place_fresh_edges(groups[a], groups[b], a == b, (1.0 - xi) * p_ab, class_prev,
                                  static_cast<std::int64_t>(class_prev.size()), next, rng);
            }
        }
    }
    std::sort(next.begin(), next.end());
    return next;
}

GeneratorOutput generate(const ModelParams& params, std::uint64_t seed) {
    params.validate();
    GeneratorOutput out;
    out.params = params;
    out.seed = seed;
    out.network.n_nodes = params.n_nodes;

    auto affinity = affinity_from_assortativity(params.assortativity, params.k,
                                                params.mean_degree, params.n_nodes);
    auto [labels0, edges0] = sample_initial(params, seed);
    out.planted.labels.push_back(std::move(labels0));
    out.network.snapshots.push_back(std::move(edges0));

    for (int t = 1; t <= params.n_steps; ++t) {
        auto label_rng = substream(seed, static_cast<std::uint64_t>(t), kLabelStream);
        auto next_labels = step_communities(out.planted.labels.back(),
                                            params.community_persistence, params.prior, label_rng);
        auto next_edges = step_links(out.network.snapshots.back(), next_labels,
                                     params.link_persistence, affinity, seed, t);
        out.planted.labels.push_back(std::move(next_labels));
        out.network.snapshots.push_back(std::move(next_edges));
    }
    return out;
}

}  // namespace dsbm
