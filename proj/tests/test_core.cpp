#include <doctest.h>

#include <random>

#include "dsbm/core.hpp"
#include "dsbm/rng.hpp"

using namespace dsbm;

TEST_CASE("planted-partition affinity from assortativity") {
    SUBCASE("fully random limit is flat") {
        auto p = affinity_from_assortativity(0.0, 2, 10.0, 100);
        CHECK(p.at(0, 0) == doctest::Approx(0.1).epsilon(1e-12));
        CHECK(p.at(0, 1) == doctest::Approx(0.1).epsilon(1e-12));
        CHECK(p.at(1, 1) == doctest::Approx(0.1).epsilon(1e-12));
    }
    SUBCASE("fully assortative limit") {
        auto p = affinity_from_assortativity(1.0, 2, 10.0, 100);
        CHECK(p.at(0, 0) == doctest::Approx(0.2).epsilon(1e-12));
        CHECK(p.at(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("half assortative") {
        auto p = affinity_from_assortativity(0.5, 2, 10.0, 1000);
        CHECK(p.at(0, 0) == doctest::Approx(0.015).epsilon(1e-12));
        CHECK(p.at(0, 1) == doctest::Approx(0.005).epsilon(1e-12));
        // row-average degree equals cbar under the uniform prior
        double cbar = 1000.0 * (p.at(0, 0) + p.at(0, 1)) / 2.0;
        CHECK(cbar == doctest::Approx(10.0).epsilon(1e-12));
    }
    SUBCASE("dense violation rejected") {
        CHECK_THROWS_AS(affinity_from_assortativity(1.0, 4, 30.0, 100), std::invalid_argument);
    }
}

TEST_CASE("assortativity from affinity") {
    CHECK(assortativity_from_affinity(0.1, 0.1, 2) == doctest::Approx(0.0));
    CHECK(assortativity_from_affinity(0.2, 0.0, 2) == doctest::Approx(1.0));
    CHECK(assortativity_from_affinity(0.015, 0.005, 2) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(assortativity_from_affinity(0.0, 0.0, 2), std::invalid_argument);
}

TEST_CASE("affinity round trip is the identity") {
    for (int k : {2, 3, 5}) {
        for (double a : {0.0, 0.1, 0.35, 0.7, 1.0}) {
            for (double cbar : {2.0, 10.0}) {
                int n = 500;
                auto p = affinity_from_assortativity(a, k, cbar, n);
                auto [p_in, p_out] = project_planted_partition(p);
                CHECK(assortativity_from_affinity(p_in, p_out, k) ==
                      doctest::Approx(a).epsilon(1e-12));
                // mean of entries stays pbar for every a
                double mean = 0.0;
                for (int r = 0; r < k; ++r)
                    for (int s = 0; s < k; ++s) mean += p.at(r, s);
                mean /= static_cast<double>(k) * k;
                CHECK(mean == doctest::Approx(cbar / n).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("projection of a non-planted matrix averages the bands") {
    AffinityMatrix p = AffinityMatrix::zero(3);
    p.at(0, 0) = 0.3;
    p.at(1, 1) = 0.5;
    p.at(2, 2) = 0.4;
    for (int r = 0; r < 3; ++r)
        for (int s = 0; s < 3; ++s)
            if (r != s) p.at(r, s) = 0.1;
    auto [p_in, p_out] = project_planted_partition(p);
    CHECK(p_in == doctest::Approx(0.4));
    CHECK(p_out == doctest::Approx(0.1));
}

TEST_CASE("overlap examples") {
    auto uniform2 = ModelParams::uniform_prior(2);
    SUBCASE("identical assignments") {
        AssignmentRow g{0, 1, 0, 1, 1, 0};
        CHECK(overlap(g, g, uniform2, false) == doctest::Approx(1.0));
        CHECK(overlap(g, g, uniform2, true) == doctest::Approx(1.0));
    }
    SUBCASE("all-zeros against balanced groups") {
        AssignmentRow planted{0, 0, 1, 1};
        AssignmentRow inferred{0, 0, 0, 0};
        CHECK(overlap(planted, inferred, uniform2, false) == doctest::Approx(0.0));
    }
    SUBCASE("swapped labels recover under permutation") {
        AssignmentRow planted{0, 0, 1, 1};
        AssignmentRow inferred{1, 1, 0, 0};
        CHECK(overlap(planted, inferred, uniform2, true) == doctest::Approx(1.0));
        CHECK(overlap(planted, inferred, uniform2, false) == doctest::Approx(-1.0));
    }
    SUBCASE("k too large for permutation search") {
        AssignmentRow g{0, 1, 2, 3, 4, 5, 6, 7, 8};
        auto prior = ModelParams::uniform_prior(9);
        CHECK_THROWS_AS(overlap(g, g, prior, true), std::invalid_argument);
        CHECK(overlap(g, g, prior, false) == doctest::Approx(1.0));
    }
}

TEST_CASE("overlap is invariant under common relabelings") {
    auto rng = substream(99, 0);
    std::uniform_int_distribution<int> label(0, 2);
    auto prior = ModelParams::uniform_prior(3);
    AssignmentRow planted(200), inferred(200);
    for (auto& g : planted) g = label(rng);
    for (auto& g : inferred) g = label(rng);

    auto apply = [](const AssignmentRow& row, const std::vector<int>& perm) {
        AssignmentRow out(row.size());
        for (std::size_t i = 0; i < row.size(); ++i)
            out[i] = perm[static_cast<std::size_t>(row[i])];
        return out;
    };
    double base_plain = overlap(planted, inferred, prior, false);
    double base_max = overlap(planted, inferred, prior, true);
    for (const auto& perm : detail::all_permutations(3)) {
        CHECK(overlap(apply(planted, perm), apply(inferred, perm), prior, false) ==
              doctest::Approx(base_plain).epsilon(1e-12));
        // with maximization, permuting either side alone changes nothing
        CHECK(overlap(apply(planted, perm), inferred, prior, true) ==
              doctest::Approx(base_max).epsilon(1e-12));
        CHECK(overlap(planted, apply(inferred, perm), prior, true) ==
              doctest::Approx(base_max).epsilon(1e-12));
    }
}

TEST_CASE("random assignments score near zero at large N") {
    int n = 10000;
    auto rng = substream(7, 1);
    std::uniform_int_distribution<int> label(0, 1);
    auto prior = ModelParams::uniform_prior(2);
    AssignmentRow planted(static_cast<std::size_t>(n)), inferred(static_cast<std::size_t>(n));
    for (auto& g : planted) g = label(rng);
    for (auto& g : inferred) g = label(rng);
    CHECK(std::abs(overlap(planted, inferred, prior, true)) < 0.05);
}

TEST_CASE("model params validation") {
    ModelParams p;
    p.n_nodes = 100;
    p.n_steps = 5;
    p.k = 2;
    p.assortativity = 0.5;
    p.mean_degree = 10.0;
    p.link_persistence = 0.5;
    p.community_persistence = 0.5;
    p.prior = ModelParams::uniform_prior(2);
    CHECK_NOTHROW(p.validate());

    auto bad = p;
    bad.prior = {0.7, 0.2};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.mean_degree = 80.0;  // diagonal affinity would pass 1
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.k = 1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.link_persistence = 1.1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
