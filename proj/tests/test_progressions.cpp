#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "rfree/errors.hpp"
#include "rfree/progressions.hpp"

using namespace rfree;

namespace {

const SieveTable& table_1e6() {
    static const SieveTable t = build_sieve(1'000'000, {2, 3, 4});
    return t;
}

constexpr double kSixOverPiSq = 6 / (std::numbers::pi * std::numbers::pi);

}  // namespace

TEST_CASE("progression counts") {
    const auto& t = table_1e6();
    CHECK(count_r_free_in_progression(t, 100, 2, 4, 2) == 20);
    CHECK(oracle::progression_count(100, 2, 4, 2) == 20);
    CHECK(count_r_free_in_progression(t, 10, 2, 1, 0) == 7);
    CHECK(count_r_free_in_progression(t, 100, 2, 4, 0) == 0);
    CHECK_THROWS_AS(count_r_free_in_progression(t, 1'000'001, 2, 4, 1), InvalidArgument);
    CHECK_THROWS_AS(count_r_free_in_progression(t, 100, 2, 4, 4), InvalidArgument);
    CHECK_THROWS_AS(count_r_free_in_progression(t, 100, 2, 0, 0), InvalidArgument);
}

TEST_CASE("progression parameters") {
    auto pp = progression_params(2, 4, 2, factorize_trial(4));
    CHECK(pp.g == 2);
    CHECK(pp.s == 2);
    CHECK(pp.t == 1);
    CHECK(pp.g_is_r_free);
    CHECK(pp.rewrite_exact);

    auto zero = progression_params(2, 6, 0, factorize_trial(6));
    CHECK(zero.g == 6);
    CHECK(zero.s == 1);
    CHECK(zero.t == 0);
    CHECK(zero.g_is_r_free);

    CHECK_FALSE(progression_params(2, 4, 0, factorize_trial(4)).g_is_r_free);
    CHECK(progression_params(3, 4, 0, factorize_trial(4)).g_is_r_free);

    // r = 3, g = 2 with 2 ∤ s: cofactors w in {1, 2}, density 1 + 1/2.
    auto cube = progression_params(3, 2, 0, factorize_trial(2));
    CHECK_FALSE(cube.rewrite_exact);
    CHECK(cube.cofactor_density == 1.5);
    // g = 4 = 2^{r-1}: exact again.
    CHECK(progression_params(3, 12, 4, factorize_trial(12)).rewrite_exact);
}

TEST_CASE("main terms") {
    const auto& t = table_1e6();
    auto rep = error_term(t, 1'000'000, 2, 1, 0);
    CHECK(std::abs(rep.main_term - 1e6 * kSixOverPiSq) <= 0.01);
    CHECK(std::abs(rep.main_term - 607927.10) <= 0.01);

    auto pp = progression_params(2, 4, 2, factorize_trial(4));
    auto f4 = f_value(2, 4, factorize_trial(4));
    auto mt = main_term(100, pp, f4);
    CHECK(std::abs(mt.value - 25.0 * kSixOverPiSq * 4 / 3) <= 1e-10 * mt.value);
    CHECK(mt.value == doctest::Approx(20.264).epsilon(1e-4));
    CHECK(main_term(0, pp, f4).value == 0);

    auto bad = progression_params(2, 4, 0, factorize_trial(4));
    CHECK_THROWS_AS(main_term(100, bad, f4), DomainError);
}

TEST_CASE("error terms") {
    const auto& t = table_1e6();
    auto rep = error_term(t, 100, 2, 4, 2);
    CHECK(rep.R == 20);
    CHECK(rep.error_term == doctest::Approx(-0.264).epsilon(1e-3));

    auto zero = error_term(t, 1000, 2, 4, 0);
    CHECK_FALSE(zero.g_is_r_free);
    CHECK(zero.R == 0);
    CHECK(zero.main_term == 0);
    CHECK(zero.error_term == 0);

    auto full = error_term(t, 1'000'000, 2, 1, 0);
    int64_t exact = oracle::r_free_count_inclusion_exclusion(1'000'000, 2);
    CHECK(full.R == static_cast<uint64_t>(exact));
    CHECK(std::abs(full.error_term - (exact - 1e6 * kSixOverPiSq)) <= 1e-6);
    CHECK(std::abs(full.error_term) < 1000);
    CHECK(full.main_term_error < 1e-6);
}

TEST_CASE("report serialization") {
    auto rep = error_term(table_1e6(), 100, 2, 4, 2);
    CHECK(to_csv_row(rep).rfind("100,2,4,2,2,2,1,1,20,", 0) == 0);
    CHECK(to_json(rep).find("\"R\":20") != std::string::npos);
}

TEST_CASE("decomposition examples") {
    const auto& t = table_1e6();
    auto d = decompose(t, 100, 2, 4, 2, 3.0);
    CHECK(d.small_sum + d.large_sum == 20);
    CHECK(d.identity_holds());

    auto d3 = decompose(t, 1000, 3, 7, 3, std::pow(1000.0, 0.25));
    CHECK(d3.identity_holds());
    CHECK(d3.R == oracle::progression_count(1000, 3, 7, 3));

    auto wide = decompose(t, 5000, 2, 6, 1, 5000.0);
    CHECK(wide.large_sum == 0);
    CHECK(wide.small_sum == static_cast<int64_t>(wide.R));
    CHECK(lemma_bound_probe(wide).large_ratio == 0);

    CHECK_THROWS_AS(decompose(t, 100, 2, 4, 2, 0.5), InvalidArgument);
    CHECK_THROWS_AS(decompose(t, 100, 2, 4, 0, 2.0), DomainError);

    auto probe = lemma_bound_probe(t, 100, 2, 4, 2, 3.0);
    CHECK(std::isfinite(probe.small_residual));
    CHECK(probe.small_residual > 0);
    CHECK(std::isfinite(probe.large_ratio));
    CHECK(probe.large_ratio > 0);
}

TEST_CASE("literal double sum misses terms for r = 3 when p | g, p ∤ s") {
    const auto& t = table_1e6();
    DecomposeOptions literal;
    literal.include_cofactors = false;
    auto d = decompose(t, 2000, 3, 6, 2, 1.0e9, literal);
    CHECK(d.R == 247);
    CHECK(d.small_sum == 165);
    auto full = decompose(t, 2000, 3, 6, 2, 1.0e9);
    CHECK(full.cofactors == 2);
    CHECK(full.identity_holds());

    // For r = 2 the literal sum is already exact.
    auto sq = decompose(t, 2000, 2, 6, 2, 1.0e9, literal);
    CHECK(sq.identity_holds());
}

TEST_CASE("cofactor-corrected main term tracks the count for r = 3") {
    const auto& t = table_1e6();
    auto rep = error_term(t, 1'000'000, 3, 2, 0);
    CHECK_FALSE(rep.rewrite_exact);
    // Even cube-free density is (3/7)/zeta(3); the uncorrected form gives 2/7.
    double corrected = rep.main_term * 1.5;
    CHECK(std::abs(static_cast<double>(rep.R) - corrected) < 1e-3 * corrected);
    CHECK(std::abs(rep.error_term) > 0.3 * corrected);
}

TEST_CASE("inclusion-exclusion and per-u paths agree") {
    const auto& t = table_1e6();
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        unsigned r = 2 + static_cast<unsigned>(rng() % 3);
        uint64_t x = 1 + rng() % 200000, k = 1 + rng() % 120, l = rng() % k;
        auto pp = progression_params(t, r, k, l);
        if (!pp.g_is_r_free) continue;
        double z = 1 + static_cast<double>(rng() % 40);
        DecomposeOptions per_u, incl;
        per_u.coprime_crossover = UINT64_MAX;
        incl.coprime_crossover = 0;
        auto a = decompose(t, x, r, k, l, z, per_u);
        auto b = decompose(t, x, r, k, l, z, incl);
        REQUIRE(a.small_sum == b.small_sum);
        REQUIRE(a.large_sum == b.large_sum);
        REQUIRE(a.identity_holds());
    }
}

TEST_CASE("decomposition matches brute force for small random inputs") {
    const auto& t = table_1e6();
    std::mt19937_64 rng(17);
    for (int i = 0; i < 150; ++i) {
        unsigned r = 2 + static_cast<unsigned>(rng() % 3);
        uint64_t x = 1 + rng() % 3000, k = 1 + rng() % 40, l = rng() % k;
        if (!oracle::is_r_free(std::gcd(l, k), r)) continue;
        double z = 1 + std::uniform_real_distribution<double>(0, 20)(rng);
        auto d = decompose(t, x, r, k, l, z);
        REQUIRE(d.small_sum + d.large_sum == static_cast<int64_t>(oracle::progression_count(x, r, k, l)));
    }
}

TEST_CASE("residue classes partition the r-free count") {
    const auto& t = table_1e6();
    for (uint64_t x : {1ull, 977ull, 100000ull}) {
        for (unsigned r : {2u, 3u}) {
            uint64_t total = t.count_r_free(x, r);
            for (uint64_t k = 1; k <= 100; ++k) {
                uint64_t sum = 0;
                for (uint64_t l = 0; l < k; ++l) {
                    uint64_t c = count_r_free_in_progression(t, x, r, k, l);
                    if (!progression_params(t, r, k, l).g_is_r_free) REQUIRE(c == 0);
                    sum += c;
                }
                REQUIRE(sum == total);
            }
        }
    }
}
