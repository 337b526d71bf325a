#include "dsbm/bp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dsbm/rng.hpp"

namespace dsbm {

namespace {
constexpr double kTinyFactor = 1e-12;  // below this, leave-one-out products are recomputed
}

Adjacency Adjacency::build(int n_nodes, const EdgeList& edges) {
    Adjacency adj;
    adj.n_nodes = n_nodes;
    adj.offsets.assign(static_cast<std::size_t>(n_nodes) + 1, 0);
    for (const auto& [i, j] : edges) {
        ++adj.offsets[static_cast<std::size_t>(i) + 1];
        ++adj.offsets[static_cast<std::size_t>(j) + 1];
    }
    for (int i = 0; i < n_nodes; ++i)
        adj.offsets[static_cast<std::size_t>(i) + 1] += adj.offsets[static_cast<std::size_t>(i)];
    adj.neighbors.assign(static_cast<std::size_t>(adj.offsets.back()), 0);
    adj.reverse.assign(adj.neighbors.size(), 0);
    std::vector<std::int32_t> cursor(adj.offsets.begin(), adj.offsets.end() - 1);
    for (const auto& [i, j] : edges) {
        std::int32_t ei = cursor[static_cast<std::size_t>(i)]++;
        std::int32_t ej = cursor[static_cast<std::size_t>(j)]++;
        adj.neighbors[static_cast<std::size_t>(ei)] = j;
        adj.neighbors[static_cast<std::size_t>(ej)] = i;
        adj.reverse[static_cast<std::size_t>(ei)] = ej;
        adj.reverse[static_cast<std::size_t>(ej)] = ei;
    }
    return adj;
}

namespace {

// Mutable BP state for one graph; EM reuses it across M steps so messages
// warm-start from the previous round.
class BpEngine {
public:
    BpEngine(const EdgeList& edges, int n_nodes, int k, std::vector<double> prior)
        : n_(n_nodes), k_(k), prior_(std::move(prior)), adj_(Adjacency::build(n_nodes, edges)) {
        messages_.assign(static_cast<std::size_t>(adj_.n_directed_edges()) * k_, 0.0);
        marginals_.assign(static_cast<std::size_t>(n_) * k_, 0.0);
        field_.assign(static_cast<std::size_t>(k_), 0.0);
        order_.resize(static_cast<std::size_t>(n_));
        std::iota(order_.begin(), order_.end(), 0);
    }

    void set_affinity(const AffinityMatrix& p) {
        c_.assign(static_cast<std::size_t>(k_) * k_, 0.0);
        double total = 0.0;
        for (int r = 0; r < k_; ++r)
            for (int s = 0; s < k_; ++s) {
                c_[static_cast<std::size_t>(r) * k_ + s] = n_ * p.at(r, s);
                total += p.at(r, s);
            }
        if (total <= 0.0)
            throw std::invalid_argument("affinity matrix is identically zero");
        rebuild_field();
    }

    void init_messages(double amplitude, std::mt19937_64& rng) {
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        auto fill = [&](double* row) {
            double sum = 0.0;
            for (int r = 0; r < k_; ++r) {
                double noise = (amplitude > 0.0) ? 1.0 + amplitude * unit(rng) : 1.0;
                row[r] = prior_[static_cast<std::size_t>(r)] * noise;
                sum += row[r];
            }
            for (int r = 0; r < k_; ++r) row[r] /= sum;
        };
        for (int e = 0; e < adj_.n_directed_edges(); ++e)
            fill(&messages_[static_cast<std::size_t>(e) * k_]);
        for (int i = 0; i < n_; ++i) fill(&marginals_[static_cast<std::size_t>(i) * k_]);
        rebuild_field();
    }

    // One asynchronous sweep in a fresh random order; returns the largest
    // absolute message change.
    double sweep(std::mt19937_64& rng, double damping) {
        std::shuffle(order_.begin(), order_.end(), rng);
        double max_diff = 0.0;
        for (int i : order_) max_diff = std::max(max_diff, update_node(i, damping));
        return max_diff;
    }

    int run(const BpConfig& config, std::mt19937_64& rng, double* last_diff = nullptr) {
        int iter = 0;
        double diff = 0.0;
        for (; iter < config.max_iterations; ++iter) {
            diff = sweep(rng, config.damping);
            if (diff < config.convergence_tol) {
                ++iter;
                break;
            }
        }
        if (last_diff) *last_diff = diff;
        return iter;
    }

    double free_energy() const;

    Marginals marginals() const {
        Marginals m;
        m.n_nodes = n_;
        m.k = k_;
        m.probs = marginals_;
        return m;
    }
    const std::vector<double>& messages() const { return messages_; }
    const Adjacency& adjacency() const { return adj_; }
    int k() const { return k_; }

    double c(int r, int s) const { return c_[static_cast<std::size_t>(r) * k_ + s]; }
    double marginal(int i, int r) const { return marginals_[static_cast<std::size_t>(i) * k_ + r]; }

    // Posterior mean of group occupancies.
    std::vector<double> group_mass() const {
        std::vector<double> mass(static_cast<std::size_t>(k_), 0.0);
        for (int i = 0; i < n_; ++i)
            for (int r = 0; r < k_; ++r) mass[static_cast<std::size_t>(r)] += marginal(i, r);
        return mass;
    }

    // M-step affinity update from Bethe pair marginals on edges over
    // one-point pair totals.
    AffinityMatrix m_step_affinity() const;

private:
    void rebuild_field() {
        if (c_.empty()) return;
        for (int r = 0; r < k_; ++r) field_[static_cast<std::size_t>(r)] = 0.0;
        for (int i = 0; i < n_; ++i)
            for (int s = 0; s < k_; ++s) {
                double m = marginal(i, s);
                for (int r = 0; r < k_; ++r)
                    field_[static_cast<std::size_t>(r)] += c(s, r) * m;
            }
        for (int r = 0; r < k_; ++r) field_[static_cast<std::size_t>(r)] /= n_;
    }

    // f_l(r) = sum_s c_{rs} psi^{l->i}_s for incoming message l.
    void incoming_factor(int edge_in, double* f) const {
        const double* msg = &messages_[static_cast<std::size_t>(edge_in) * k_];
        for (int r = 0; r < k_; ++r) {
            double acc = 0.0;
            const double* crow = &c_[static_cast<std::size_t>(r) * k_];
            for (int s = 0; s < k_; ++s) acc += crow[s] * msg[s];
            f[r] = acc;
        }
    }

    double update_node(int i, double damping);

    int n_;
    int k_;
    std::vector<double> prior_;
    Adjacency adj_;
    std::vector<double> c_;          // scaled affinity N * p
    std::vector<double> messages_;   // 2M x k
    std::vector<double> marginals_;  // N x k
    std::vector<double> field_;      // external field h_r
    std::vector<int> order_;
    std::vector<double> factors_;    // scratch: degree x k incoming factors
};

double BpEngine::update_node(int i, double damping) {
    int begin = adj_.offsets[static_cast<std::size_t>(i)];
    int degree = adj_.offsets[static_cast<std::size_t>(i) + 1] - begin;

    // Incoming factors, one row of k per neighbor.
    factors_.assign(static_cast<std::size_t>(degree) * k_, 0.0);
    for (int l = 0; l < degree; ++l)
        incoming_factor(adj_.reverse[static_cast<std::size_t>(begin + l)],
                        &factors_[static_cast<std::size_t>(l) * k_]);

    // Full product, renormalized along the way.
    std::vector<double> total(static_cast<std::size_t>(k_));
    double sum = 0.0;
    for (int r = 0; r < k_; ++r) {
        total[static_cast<std::size_t>(r)] =
            prior_[static_cast<std::size_t>(r)] * std::exp(-field_[static_cast<std::size_t>(r)]);
        sum += total[static_cast<std::size_t>(r)];
    }
    for (int r = 0; r < k_; ++r) total[static_cast<std::size_t>(r)] /= sum;
    for (int l = 0; l < degree; ++l) {
        sum = 0.0;
        for (int r = 0; r < k_; ++r) {
            total[static_cast<std::size_t>(r)] *= factors_[static_cast<std::size_t>(l) * k_ + r];
            sum += total[static_cast<std::size_t>(r)];
        }
        if (sum > 0.0) {
            for (int r = 0; r < k_; ++r) total[static_cast<std::size_t>(r)] /= sum;
        } else {
            for (int r = 0; r < k_; ++r)
                total[static_cast<std::size_t>(r)] = prior_[static_cast<std::size_t>(r)];
        }
    }

    // Marginal and field update.
    double* marg = &marginals_[static_cast<std::size_t>(i) * k_];
    for (int s = 0; s < k_; ++s) {
        double diff = total[static_cast<std::size_t>(s)] - marg[s];
        if (diff != 0.0)
            for (int r = 0; r < k_; ++r)
                field_[static_cast<std::size_t>(r)] += c(s, r) * diff / n_;
        marg[s] = total[static_cast<std::size_t>(s)];
    }

    // Outgoing messages by leave-one-out division.
    double max_diff = 0.0;
    std::vector<double> fresh(static_cast<std::size_t>(k_));
    for (int l = 0; l < degree; ++l) {
        const double* f = &factors_[static_cast<std::size_t>(l) * k_];
        double norm = 0.0;
        bool unstable = false;
        for (int r = 0; r < k_; ++r) {
            if (f[r] < kTinyFactor) {
                unstable = true;
                break;
            }
            fresh[static_cast<std::size_t>(r)] = total[static_cast<std::size_t>(r)] / f[r];
            norm += fresh[static_cast<std::size_t>(r)];
        }
        if (unstable || norm <= 0.0) {
            // Explicit product excluding neighbor l.
            for (int r = 0; r < k_; ++r)
                fresh[static_cast<std::size_t>(r)] = prior_[static_cast<std::size_t>(r)] *
                                                     std::exp(-field_[static_cast<std::size_t>(r)]);
            for (int l2 = 0; l2 < degree; ++l2) {
                if (l2 == l) continue;
                double s2 = 0.0;
                for (int r = 0; r < k_; ++r) {
                    fresh[static_cast<std::size_t>(r)] *=
                        factors_[static_cast<std::size_t>(l2) * k_ + r];
                    s2 += fresh[static_cast<std::size_t>(r)];
                }
                if (s2 > 0.0)
                    for (int r = 0; r < k_; ++r) fresh[static_cast<std::size_t>(r)] /= s2;
            }
            norm = 0.0;
            for (int r = 0; r < k_; ++r) norm += fresh[static_cast<std::size_t>(r)];
            if (norm <= 0.0) {
                for (int r = 0; r < k_; ++r)
                    fresh[static_cast<std::size_t>(r)] = prior_[static_cast<std::size_t>(r)];
                norm = 1.0;
            }
        }
        double* out = &messages_[static_cast<std::size_t>(begin + l) * k_];
        for (int r = 0; r < k_; ++r) {
            double value = fresh[static_cast<std::size_t>(r)] / norm;
            max_diff = std::max(max_diff, std::abs(value - out[r]));
            out[r] = (1.0 - damping) * value + damping * out[r];
        }
    }
    return max_diff;
}

double BpEngine::free_energy() const {
    // Bethe estimate of -log Z per node: node terms, edge corrections, and
    // the mean-field non-edge density term.
    double log_z_nodes = 0.0;
    std::vector<double> f(static_cast<std::size_t>(k_));
    std::vector<double> logv(static_cast<std::size_t>(k_));
    for (int i = 0; i < n_; ++i) {
        int begin = adj_.offsets[static_cast<std::size_t>(i)];
        int degree = adj_.offsets[static_cast<std::size_t>(i) + 1] - begin;
        for (int r = 0; r < k_; ++r)
            logv[static_cast<std::size_t>(r)] =
                std::log(prior_[static_cast<std::size_t>(r)]) - field_[static_cast<std::size_t>(r)];
        for (int l = 0; l < degree; ++l) {
            incoming_factor(adj_.reverse[static_cast<std::size_t>(begin + l)], f.data());
            for (int r = 0; r < k_; ++r)
                logv[static_cast<std::size_t>(r)] +=
                    (f[static_cast<std::size_t>(r)] > 0.0)
                        ? std::log(f[static_cast<std::size_t>(r)])
                        : -1e300;
        }
        double peak = *std::max_element(logv.begin(), logv.end());
        double acc = 0.0;
        for (int r = 0; r < k_; ++r) acc += std::exp(logv[static_cast<std::size_t>(r)] - peak);
        log_z_nodes += peak + std::log(acc);
    }

    double log_z_edges = 0.0;
    for (int i = 0; i < n_; ++i) {
        int begin = adj_.offsets[static_cast<std::size_t>(i)];
        int end = adj_.offsets[static_cast<std::size_t>(i) + 1];
        for (int e = begin; e < end; ++e) {
            int j = adj_.neighbors[static_cast<std::size_t>(e)];
            if (j < i) continue;  // each undirected edge once
            const double* out = &messages_[static_cast<std::size_t>(e) * k_];
            const double* in =
                &messages_[static_cast<std::size_t>(adj_.reverse[static_cast<std::size_t>(e)]) * k_];
            double z = 0.0;
            for (int r = 0; r < k_; ++r)
                for (int s = 0; s < k_; ++s) z += c(r, s) * out[r] * in[s];
            log_z_edges += (z > 0.0) ? std::log(z) : -1e300;
        }
    }

    std::vector<double> mean_marginal(static_cast<std::size_t>(k_), 0.0);
    for (int i = 0; i < n_; ++i)
        for (int r = 0; r < k_; ++r)
            mean_marginal[static_cast<std::size_t>(r)] += marginal(i, r) / n_;
    double density = 0.0;
    for (int r = 0; r < k_; ++r)
        for (int s = 0; s < k_; ++s)
            density += c(r, s) * mean_marginal[static_cast<std::size_t>(r)] *
                       mean_marginal[static_cast<std::size_t>(s)];

    return -log_z_nodes / n_ + log_z_edges / n_ + density / 2.0;
}

AffinityMatrix BpEngine::m_step_affinity() const {
    auto num = AffinityMatrix::zero(k_);
    for (int i = 0; i < n_; ++i) {
        int begin = adj_.offsets[static_cast<std::size_t>(i)];
        int end = adj_.offsets[static_cast<std::size_t>(i) + 1];
        for (int e = begin; e < end; ++e) {
            const double* out = &messages_[static_cast<std::size_t>(e) * k_];
            const double* in =
                &messages_[static_cast<std::size_t>(adj_.reverse[static_cast<std::size_t>(e)]) * k_];
            double z = 0.0;
            for (int r = 0; r < k_; ++r)
                for (int s = 0; s < k_; ++s) z += c(r, s) * out[r] * in[s];
            if (z <= 0.0) continue;
            for (int r = 0; r < k_; ++r)
                for (int s = 0; s < k_; ++s)
                    num.at(r, s) += c(r, s) * out[r] * in[s] / z;
        }
    }

    auto mass = group_mass();
    std::vector<double> self(static_cast<std::size_t>(k_) * k_, 0.0);
    for (int i = 0; i < n_; ++i)
        for (int r = 0; r < k_; ++r)
            for (int s = 0; s < k_; ++s)
                self[static_cast<std::size_t>(r) * k_ + s] += marginal(i, r) * marginal(i, s);

    auto p = AffinityMatrix::zero(k_);
    for (int r = 0; r < k_; ++r)
        for (int s = 0; s < k_; ++s) {
            double den = mass[static_cast<std::size_t>(r)] * mass[static_cast<std::size_t>(s)] -
                         self[static_cast<std::size_t>(r) * k_ + s];
            p.at(r, s) = (den > 0.0) ? std::clamp(num.at(r, s) / den, 0.0, 1.0) : 0.0;
        }
    return p;
}

}  // namespace

BpResult bp_marginals(const EdgeList& edges, int n_nodes, const AffinityMatrix& affinity,
                      const std::vector<double>& prior, const BpConfig& config) {
    if (static_cast<int>(prior.size()) != affinity.k)
        throw std::invalid_argument("prior length must match affinity size");
    BpEngine engine(edges, n_nodes, affinity.k, prior);
    engine.set_affinity(affinity);
    auto rng = substream(config.seed, 0x6270ULL);
    engine.init_messages(config.random_init_amplitude, rng);
    double diff = 0.0;
    int iterations = engine.run(config, rng, &diff);

    BpResult result;
    result.marginals = engine.marginals();
    result.converged = diff < config.convergence_tol;
    result.iterations = iterations;
    result.free_energy = engine.free_energy();
    result.messages = engine.messages();
    result.adjacency = engine.adjacency();
    return result;
}

AssignmentRow map_assignments(const Marginals& marginals) {
    AssignmentRow out(static_cast<std::size_t>(marginals.n_nodes));
    for (int i = 0; i < marginals.n_nodes; ++i) {
        int best = 0;
        for (int r = 1; r < marginals.k; ++r)
            if (marginals.at(i, r) > marginals.at(i, best)) best = r;
        out[static_cast<std::size_t>(i)] = best;
    }
    return out;
}

namespace {

// Mean hardness of the marginals: 0 at the factorized point, 1 for hard
// assignments. Below this the E step carries no group signal and the
// M step degenerates to the identity, so the fit is canonicalized to the
// flat affinity (the likelihood is flat in a there).
constexpr double kPolarizationEps = 0.05;

double marginal_polarization(const Marginals& m) {
    if (m.k < 2 || m.n_nodes == 0) return 0.0;
    double sum = 0.0;
    for (int i = 0; i < m.n_nodes; ++i) {
        double top = 0.0;
        for (int r = 0; r < m.k; ++r) top = std::max(top, m.at(i, r));
        sum += (m.k * top - 1.0) / (m.k - 1.0);
    }
    return sum / m.n_nodes;
}

}  // namespace

EmResult em_fit(const EdgeList& edges, int n_nodes, int k, const std::vector<double>& prior,
                const std::optional<AffinityMatrix>& init_affinity, const BpConfig& config) {
    constexpr int kMaxEmRounds = 50;
    constexpr double kEmTol = 1e-6;
    constexpr int kMaxRestarts = 5;

    EmResult result;
    result.affinity_hat = AffinityMatrix::zero(k);
    result.marginals.n_nodes = n_nodes;
    result.marginals.k = k;
    result.marginals.probs.assign(static_cast<std::size_t>(n_nodes) * k, 1.0 / k);
    result.assignments.assign(static_cast<std::size_t>(n_nodes), 0);
    if (edges.empty()) return result;  // no signal

    double cbar_emp = 2.0 * static_cast<double>(edges.size()) / n_nodes;
    BpEngine engine(edges, n_nodes, k, prior);

    auto finalize = [&](EmResult r) {
        if (marginal_polarization(r.marginals) < kPolarizationEps) {
            r.affinity_hat = affinity_from_assortativity(0.0, k, cbar_emp, n_nodes);
            r.a_hat = 0.0;
        }
        return r;
    };

    EmResult fallback;  // best unconverged attempt, returned if nothing converges
    bool have_fallback = false;

    for (int attempt = 0; attempt <= kMaxRestarts; ++attempt) {
        AffinityMatrix p;
        auto rng = substream(config.seed, 0x656dULL, static_cast<std::uint64_t>(attempt));
        if (init_affinity.has_value() && attempt == 0) {
            p = *init_affinity;
        } else if (attempt == kMaxRestarts) {
            // A weak init converges on structureless data instead of
            // wandering glassily, which the polarization check then
            // canonicalizes to a = 0.
            p = affinity_from_assortativity(0.1, k, cbar_emp, n_nodes);
        } else {
            std::uniform_real_distribution<double> a_init(0.25, 0.9);
            p = affinity_from_assortativity(a_init(rng), k, cbar_emp, n_nodes);
        }
        engine.set_affinity(p);
        engine.init_messages(config.random_init_amplitude, rng);

        bool degenerate = false;
        bool em_converged = false;
        int rounds = 0;
        double bp_diff = 0.0;
        for (rounds = 1; rounds <= kMaxEmRounds; ++rounds) {
            engine.run(config, rng, &bp_diff);

            auto mass = engine.group_mass();
            if (*std::min_element(mass.begin(), mass.end()) < 1.0) {
                degenerate = true;
                break;
            }

            auto p_new = engine.m_step_affinity();
            double change = 0.0;
            for (int r = 0; r < k; ++r)
                for (int s = 0; s < k; ++s)
                    change = std::max(change, std::abs(p_new.at(r, s) - p.at(r, s)));
            p = p_new;
            engine.set_affinity(p);
            if (change < kEmTol) {
                em_converged = true;
                break;
            }
        }

        if (degenerate) {
            result.restarts_used = attempt + 1;
            continue;
        }

        EmResult candidate = result;
        candidate.affinity_hat = p;
        candidate.a_hat = assortativity_from_affinity(p);
        candidate.marginals = engine.marginals();
        candidate.assignments = map_assignments(candidate.marginals);
        candidate.em_iterations = std::min(rounds, kMaxEmRounds);
        candidate.converged = em_converged;
        candidate.bp_converged = bp_diff < config.convergence_tol;
        candidate.free_energy = engine.free_energy();
        candidate.restarts_used = attempt;
        if (em_converged) return finalize(std::move(candidate));
        fallback = std::move(candidate);
        have_fallback = true;
        result.restarts_used = attempt + 1;
    }

    if (have_fallback) return finalize(std::move(fallback));
    result.converged = false;  // every attempt degenerated
    return result;
}

}  // namespace dsbm
