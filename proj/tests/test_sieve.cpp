#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "rfree/errors.hpp"
#include "rfree/sieve.hpp"

using namespace rfree;

TEST_CASE("squarefree indicator for n <= 10") {
    auto t = build_sieve(10, {2});
    std::vector<int> expected{1, 1, 1, 0, 1, 1, 1, 0, 0, 1};
    for (uint64_t n = 1; n <= 10; ++n) CHECK(t.is_r_free(n, 2) == (expected[n - 1] == 1));
}

TEST_CASE("limit 1 table") {
    auto t = build_sieve(1, {2});
    CHECK(t.mu(1) == 1);
    CHECK(t.is_r_free(1, 2));
    CHECK(t.phi(1) == 1);
    CHECK(t.spf(1) == 1);
    CHECK(t.omega(1) == 0);
    CHECK(factorize(t, 1).factors.empty());
}

TEST_CASE("cube-free count up to 100") {
    auto t = build_sieve(100, {3});
    CHECK(t.count_r_free(100, 3) == 85);
    CHECK(oracle::r_free_count_inclusion_exclusion(100, 3) == 85);
}

TEST_CASE("factorize") {
    auto t = build_sieve(200, {2});
    CHECK(factorize(t, 12).factors == std::vector<std::pair<uint64_t, unsigned>>{{2, 2}, {3, 1}});
    CHECK(factorize(t, 97).factors == std::vector<std::pair<uint64_t, unsigned>>{{97, 1}});
    CHECK(factorize_trial(12) == factorize(t, 12));
    CHECK_THROWS_AS(factorize(t, 0), InvalidArgument);
    CHECK_THROWS_AS(factorize(t, 201), InvalidArgument);
}

TEST_CASE("mu_r_direct literal sum") {
    CHECK(mu_r_direct(4, 2) == 0);
    CHECK(mu_r_direct(8, 3) == 0);
    CHECK(mu_r_direct(8, 4) == 1);
    CHECK(mu_r_direct(1, 5) == 1);
    CHECK_THROWS_AS(mu_r_direct(0, 2), InvalidArgument);
    CHECK_THROWS_AS(mu_r_direct(5, 1), InvalidArgument);
}

TEST_CASE("argument errors") {
    CHECK_THROWS_AS(build_sieve(0, {2}), InvalidArgument);
    CHECK_THROWS_AS(build_sieve(10, {1}), InvalidArgument);
    SieveOptions tight;
    tight.memory_budget_bytes = 1000;
    try {
        build_sieve(1'000'000, {2}, tight);
        FAIL("expected ResourceLimitError");
    } catch (const ResourceLimitError& e) {
        CHECK(std::string(e.what()).find("1000 bytes") != std::string::npos);
    }
    auto t = build_sieve(50, {2});
    CHECK_THROWS_AS(t.r_free_at(10, 3), InvalidArgument);
    CHECK_THROWS_AS(t.mu_at(51), InvalidArgument);
}

TEST_CASE("tables agree with trial division up to 20000") {
    const uint64_t N = 20000;
    auto t = build_sieve(N, {2, 3, 4}, SieveOptions{.segment_length = 4096});
    for (uint64_t n = 1; n <= N; ++n) {
        auto f = oracle::trial_factor(n);
        REQUIRE(t.mu(n) == oracle::mobius(n));
        REQUIRE(t.omega(n) == f.size());
        REQUIRE(t.spf(n) == (n == 1 ? 1 : f.front().first));
        for (unsigned r : {2u, 3u, 4u}) REQUIRE(t.is_r_free(n, r) == oracle::is_r_free(n, r));
        REQUIRE((t.mu(n) != 0) == t.is_r_free(n, 2));
    }
    for (uint64_t n : {1ull, 2ull, 97ull, 360ull, 1001ull, 9973ull, 19999ull}) CHECK(t.phi(n) == oracle::phi(n));
}

TEST_CASE("divisor sum of phi recovers n") {
    auto t = build_sieve(100000, {2});
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        uint64_t n = std::uniform_int_distribution<uint64_t>(1, 100000)(rng);
        uint64_t sum = 0;
        for (uint64_t d = 1; d <= n; ++d)
            if (n % d == 0) sum += t.phi(d);
        REQUIRE(sum == n);
        REQUIRE(factorize(t, n).omega() == t.omega(n));
        REQUIRE(factorize(t, n).product() == n);
    }
}

TEST_CASE("segment length and thread count do not change the tables") {
    const uint64_t N = 300'001;
    auto reference = build_sieve(N, {2, 3}, SieveOptions{.segment_length = 1u << 18});
    for (uint64_t seg : {64ull, 1000ull, 65536ull, 1ull << 20}) {
        for (unsigned th : {1u, 3u}) {
            SieveOptions o;
            o.segment_length = seg;
            o.threads = th;
            CHECK(build_sieve(N, {3, 2}, o) == reference);
        }
    }
}

TEST_CASE("reduced arithmetic range keeps indicators identical") {
    auto full = build_sieve(100'000, {2});
    SieveOptions o;
    o.arithmetic_limit = 500;
    auto partial = build_sieve(100'000, {2}, o);
    CHECK(partial.arithmetic_limit() == 500);
    CHECK(std::ranges::equal(full.r_free_words(2), partial.r_free_words(2)));
    CHECK(std::ranges::equal(full.mu_words(), partial.mu_words()));
    CHECK(partial.phi(500) == full.phi(500));
    CHECK_THROWS_AS(factorize(partial, 501), InvalidArgument);
}

TEST_CASE("squarefree density at 1e6") {
    auto t = build_sieve(1'000'000, {2});
    double density = static_cast<double>(t.count_r_free(1'000'000, 2)) / 1e6;
    CHECK(density >= 0.59);
    CHECK(density <= 0.62);
}

TEST_CASE("cache round trip is bit-identical") {
    auto path = std::filesystem::temp_directory_path() / "rfree_test_cache.bin";
    auto t = build_sieve(123'457, {2, 5});
    t.save(path);
    {
        std::ifstream in(path, std::ios::binary);
        char magic[5];
        in.read(magic, 5);
        CHECK(std::string(magic, 5) == "RFSV1");
        unsigned char limit_bytes[8];
        in.read(reinterpret_cast<char*>(limit_bytes), 8);
        uint64_t limit = 0;
        for (int b = 7; b >= 0; --b) limit = limit << 8 | limit_bytes[b];
        CHECK(limit == 123'457);
    }
    CHECK(SieveTable::load(path) == t);

    // Truncation is detected.
    std::filesystem::resize_file(path, std::filesystem::file_size(path) - 3);
    CHECK_THROWS_AS(SieveTable::load(path), InvalidArgument);
    std::filesystem::remove(path);
}
