#include <doctest.h>

#include <cmath>

#include "dsbm/bp.hpp"
#include "dsbm/generator.hpp"
#include "dsbm/rng.hpp"
#include "oracles.hpp"

using namespace dsbm;

namespace {

ModelParams static_params(int n, double a, double cbar) {
    ModelParams p;
    p.n_nodes = n;
    p.n_steps = 0;
    p.k = 2;
    p.assortativity = a;
    p.mean_degree = cbar;
    p.link_persistence = 0.0;
    p.community_persistence = 0.0;
    p.prior = ModelParams::uniform_prior(2);
    return p;
}

}  // namespace

TEST_CASE("map_assignments") {
    Marginals m;
    m.n_nodes = 3;
    m.k = 3;
    m.probs = {0.9, 0.1, 0.0, 1.0 / 3, 1.0 / 3, 1.0 / 3, 0.2, 0.5, 0.3};
    auto g = map_assignments(m);
    CHECK(g == AssignmentRow{0, 0, 1});
}

TEST_CASE("uniform messages are an exact fixed point at a = 0") {
    auto params = static_params(500, 0.0, 8.0);
    auto [labels, edges] = sample_initial(params, 3);
    auto affinity = affinity_from_assortativity(0.0, 2, 8.0, 500);

    BpConfig config;
    config.random_init_amplitude = 0.0;  // start exactly at the factorized point
    config.max_iterations = 1;
    config.convergence_tol = 1e-12;
    auto result = bp_marginals(edges, 500, affinity, params.prior, config);
    CHECK(result.converged);  // residual of the single sweep below 1e-12
    for (int i = 0; i < 500; ++i) {
        CHECK(result.marginals.at(i, 0) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(result.marginals.at(i, 1) == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("marginals and messages stay normalized") {
    auto params = static_params(400, 0.7, 10.0);
    auto [labels, edges] = sample_initial(params, 9);
    auto affinity = affinity_from_assortativity(0.7, 2, 10.0, 400);
    BpConfig config;
    config.seed = 4;
    auto result = bp_marginals(edges, 400, affinity, params.prior, config);
    for (int i = 0; i < 400; ++i)
        CHECK(result.marginals.at(i, 0) + result.marginals.at(i, 1) ==
              doctest::Approx(1.0).epsilon(1e-9));
    for (std::size_t e = 0; e < result.messages.size() / 2; ++e)
        CHECK(result.messages[2 * e] + result.messages[2 * e + 1] ==
              doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::isfinite(result.free_energy));
}

TEST_CASE("group swap equivariance for k = 2") {
    // Swapping both prior and affinity labels permutes the marginals exactly
    // (pairwise sums commute, and the noise-free init is symmetric).
    int n = 120;
    auto rng = substream(21, 0);
    auto edges = oracles::random_tree(n, rng);
    AffinityMatrix p = AffinityMatrix::zero(2);
    p.at(0, 0) = 0.09;
    p.at(0, 1) = p.at(1, 0) = 0.02;
    p.at(1, 1) = 0.05;
    std::vector<double> prior{0.3, 0.7};

    BpConfig config;
    config.random_init_amplitude = 0.0;
    config.seed = 77;
    auto base = bp_marginals(edges, n, p, prior, config);

    AffinityMatrix swapped = AffinityMatrix::zero(2);
    swapped.at(0, 0) = p.at(1, 1);
    swapped.at(1, 1) = p.at(0, 0);
    swapped.at(0, 1) = swapped.at(1, 0) = p.at(0, 1);
    // equivariant to rounding: accumulation order differs under the swap
    auto flipped = bp_marginals(edges, n, swapped, {0.7, 0.3}, config);
    for (int i = 0; i < n; ++i) {
        CHECK(flipped.marginals.at(i, 1) ==
              doctest::Approx(base.marginals.at(i, 0)).epsilon(1e-9));
        CHECK(flipped.marginals.at(i, 0) ==
              doctest::Approx(base.marginals.at(i, 1)).epsilon(1e-9));
    }
}

TEST_CASE("all-zero affinity rejected") {
    BpConfig config;
    CHECK_THROWS_AS(
        bp_marginals({{0, 1}}, 2, AffinityMatrix::zero(2), ModelParams::uniform_prior(2), config),
        std::invalid_argument);
}

TEST_CASE("exhaustive posterior agrees with BP on small trees") {
    // The enumeration uses the full likelihood including (1-p) non-edge
    // factors; BP treats non-edges in mean field, so densities are kept low.
    auto prior = ModelParams::uniform_prior(2);
    AffinityMatrix p = AffinityMatrix::zero(2);
    p.at(0, 0) = p.at(1, 1) = 0.10;
    p.at(0, 1) = p.at(1, 0) = 0.02;

    int compared = 0;
    for (int instance = 0; instance < 12; ++instance) {
        int n = 10 + instance % 3;
        auto rng = substream(31, instance);
        auto edges = oracles::random_tree(n, rng);
        auto exact = oracles::exhaustive_posterior(edges, n, p, prior);

        BpConfig config;
        config.seed = 100 + static_cast<std::uint64_t>(instance);
        config.convergence_tol = 1e-10;
        config.max_iterations = 2000;
        auto bp = bp_marginals(edges, n, p, prior, config);
        REQUIRE(bp.converged);
        for (int i = 0; i < n; ++i)
            for (int r = 0; r < 2; ++r)
                CHECK(std::abs(bp.marginals.at(i, r) - exact.at(i, r)) < 0.05);
        ++compared;
    }
    CHECK(compared == 12);
}

TEST_CASE("detection above and below the static threshold") {
    // a_c = 1/sqrt(10) ~ 0.316 at cbar = 10; full-size runs live in the
    // acceptance suite.
    auto prior = ModelParams::uniform_prior(2);
    SUBCASE("strong signal is recovered") {
        double mean_q = 0.0;
        for (int seed = 0; seed < 3; ++seed) {
            auto params = static_params(2000, 0.7, 10.0);
            auto [labels, edges] = sample_initial(params, 51 + static_cast<std::uint64_t>(seed));
            auto affinity = affinity_from_assortativity(0.7, 2, 10.0, 2000);
            BpConfig config;
            config.seed = static_cast<std::uint64_t>(seed);
            auto result = bp_marginals(edges, 2000, affinity, prior, config);
            mean_q += overlap(labels, map_assignments(result.marginals), prior, true) / 3.0;
        }
        CHECK(mean_q > 0.6);
    }
    SUBCASE("weak signal stays at chance") {
        double mean_q = 0.0;
        for (int seed = 0; seed < 3; ++seed) {
            auto params = static_params(2000, 0.12, 10.0);
            auto [labels, edges] = sample_initial(params, 81 + static_cast<std::uint64_t>(seed));
            auto affinity = affinity_from_assortativity(0.12, 2, 10.0, 2000);
            BpConfig config;
            config.seed = static_cast<std::uint64_t>(seed);
            auto result = bp_marginals(edges, 2000, affinity, prior, config);
            mean_q += overlap(labels, map_assignments(result.marginals), prior, true) / 3.0;
        }
        CHECK(mean_q < 0.1);
    }
}

TEST_CASE("em_fit") {
    auto prior = ModelParams::uniform_prior(2);
    SUBCASE("learns the assortativity of a strong planted partition") {
        double mean_a = 0.0;
        int seeds = 5;
        for (int seed = 0; seed < seeds; ++seed) {
            auto params = static_params(300, 0.9, 10.0);
            auto [labels, edges] = sample_initial(params, 200 + static_cast<std::uint64_t>(seed));
            BpConfig config;
            config.seed = static_cast<std::uint64_t>(seed);
            auto em = em_fit(edges, 300, 2, prior, std::nullopt, config);
            mean_a += em.a_hat / seeds;
        }
        CHECK(std::abs(mean_a - 0.9) < 0.1);
    }
    SUBCASE("no structure yields a_hat near zero") {
        double mean_a = 0.0;
        int seeds = 5;
        for (int seed = 0; seed < seeds; ++seed) {
            auto params = static_params(300, 0.0, 10.0);
            auto [labels, edges] = sample_initial(params, 300 + static_cast<std::uint64_t>(seed));
            BpConfig config;
            config.seed = static_cast<std::uint64_t>(seed);
            auto em = em_fit(edges, 300, 2, prior, std::nullopt, config);
            mean_a += em.a_hat / seeds;
        }
        CHECK(std::abs(mean_a) < 0.1);
    }
    SUBCASE("zero-edge input reports no signal") {
        BpConfig config;
        auto em = em_fit({}, 50, 2, prior, std::nullopt, config);
        CHECK_FALSE(em.converged);
    }
}
