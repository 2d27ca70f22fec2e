#include <doctest.h>

#include <cmath>
#include <sstream>

#include "rfree/bv_harness.hpp"
#include "rfree/errors.hpp"
#include "rfree/multiplicative.hpp"
#include "rfree/progressions.hpp"

using namespace rfree;

namespace {

const SieveTable& table_1e5() {
    static const SieveTable t = build_sieve(100'000, {2, 3});
    return t;
}

std::string csv_of(const std::vector<BvRow>& rows) {
    std::ostringstream out;
    write_csv(out, rows, false);
    return out.str();
}

}  // namespace

TEST_CASE("modulus thresholds") {
    CHECK(modulus_threshold(1'000'000, 2, 1.0) == 52);
    CHECK(modulus_threshold(1000, 2, 0.0) == 14);
    CHECK(modulus_threshold(10'000, 2, 1.0) == 5);
    CHECK_THROWS_AS(modulus_threshold(10, 2, 5.0), ConfigError);
    CHECK_THROWS_AS(modulus_threshold(2, 2, 1.0), InvalidArgument);
}

TEST_CASE("r = 2 threshold is the squarefree formula") {
    for (uint64_t x : {3ull, 10ull, 1000ull, 123457ull, 10'000'000ull, 1'000'000'000'000ull})
        for (double A : {0.0, 0.5, 1.0, 2.0, 3.25}) CHECK(threshold_value(x, 2, A) == squarefree_threshold_value(x, A));
}

TEST_CASE("residue class counts from one pass") {
    const auto& t = table_1e5();
    for (uint64_t k : {1ull, 2ull, 7ull, 63ull, 64ull, 65ull, 200ull}) {
        for (uint64_t x : {1ull, 63ull, 64ull, 99'999ull}) {
            auto counts = residue_class_counts(t, x, 2, k);
            for (uint64_t l = 0; l < k; ++l) REQUIRE(counts[l] == count_r_free_in_progression(t, x, 2, k, l));
        }
    }
}

TEST_CASE("max error over residues") {
    const auto& t = table_1e5();
    auto one = max_error_for_modulus(t, 100'000, 2, 1);
    CHECK(one.l == 0);
    // same quantity, different rounding order; an ulp of the ~6e4 main term survives the cancellation
    CHECK(std::abs(one.max_abs_error -
                   std::abs(static_cast<double>(t.count_r_free(100'000, 2)) - 1e5 / zeta_cached(2).value)) < 1e-9);

    auto four = max_error_for_modulus(t, 100, 2, 4);
    CHECK(four.admissible == 3);
    double best = 0;
    uint64_t best_l = 0;
    for (uint64_t l = 1; l < 4; ++l) {
        double e = std::abs(error_term(t, 100, 2, 4, l).error_term);
        if (e > best) best = e, best_l = l;
    }
    CHECK(four.l == best_l);
    CHECK(four.max_abs_error == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("ties resolve to the smallest residue") {
    // x = 3, k = 4: classes 1, 2, 3 each hold one squarefree number and share
    // the main term 0.75 f_2(4).
    auto m = max_error_for_modulus(table_1e5(), 3, 2, 4);
    CHECK(m.l == 1);
    auto zero = max_error_for_modulus(table_1e5(), 0, 2, 6);
    CHECK(zero.l == 0);
    CHECK(zero.max_abs_error == 0);
}

TEST_CASE("experiment at x = 1e4 matches serial recomputation") {
    ExperimentConfig config;
    config.xs = {10'000};
    auto result = run_experiment(table_1e5(), config);
    REQUIRE(result.rows.size() == 1);
    const BvRow& row = result.rows[0];
    CHECK(row.K == 5);
    CHECK(result.self_check_ok);

    double S = 0;
    for (uint64_t k = 1; k <= 5; ++k) {
        double best = 0;
        for (uint64_t l = 0; l < k; ++l) {
            auto rep = error_term(table_1e5(), 10'000, 2, k, l);
            if (rep.g_is_r_free) best = std::max(best, std::abs(rep.error_term));
        }
        S += best;
    }
    CHECK(row.S == doctest::Approx(S).epsilon(1e-12));
    CHECK(std::abs(row.normalized - row.S * std::log(1e4) / 1e4) <= 1e-9);
}

TEST_CASE("serial and parallel runs are byte-identical") {
    ExperimentConfig config;
    config.xs = {1000, 10'000, 100'000};
    config.threads = 1;
    std::string serial = csv_of(run_experiment(table_1e5(), config).rows);
    for (unsigned th : {2u, 3u, 8u}) {
        config.threads = th;
        CHECK(csv_of(run_experiment(table_1e5(), config).rows) == serial);
    }
}

TEST_CASE("smaller thresholds give smaller sums") {
    ExperimentConfig wide, narrow;
    wide.xs = narrow.xs = {100'000};
    narrow.A = 2.0;
    auto w = run_experiment(table_1e5(), wide).rows[0];
    auto n = run_experiment(table_1e5(), narrow).rows[0];
    REQUIRE(n.K < w.K);
    CHECK(n.S <= w.S);
}

TEST_CASE("sampled residues never exceed the exhaustive maximum") {
    ExperimentConfig config;
    config.xs = {100'000};
    auto exact = run_experiment(table_1e5(), config).rows[0];
    config.sample_l = 2;
    config.seed = 99;
    auto sampled = run_experiment(table_1e5(), config);
    CHECK(sampled.self_check_ok);
    CHECK(sampled.rows[0].S <= exact.S);
}

TEST_CASE("config validation") {
    const auto& t = table_1e5();
    ExperimentConfig c;
    CHECK_THROWS_AS(run_experiment(t, c), ConfigError);
    c.xs = {10'000, 1000};
    CHECK_THROWS_AS(run_experiment(t, c), ConfigError);
    c.xs = {1'000'000};
    CHECK_THROWS_AS(run_experiment(t, c), ConfigError);
    c.xs = {10'000};
    c.A = 0;
    CHECK_THROWS_AS(run_experiment(t, c), ConfigError);
    c.A = 4;
    CHECK_THROWS_AS(run_experiment(t, c), ConfigError);
    c.A = 1;
    c.r = 4;
    CHECK_THROWS_AS(run_experiment(t, c), ConfigError);
}

TEST_CASE("CSV and SVG artifacts") {
    ExperimentConfig config;
    config.xs = {10'000, 100'000};
    auto rows = run_experiment(table_1e5(), config).rows;
    std::string csv = csv_of(rows);
    CHECK(csv.rfind("x,r,A,K,S,normalized,wall_seconds\n10000,2,1,5,", 0) == 0);
    std::ostringstream svg;
    write_svg_plot(svg, rows);
    CHECK(svg.str().find("<svg") == 0);
    CHECK(svg.str().find("<polyline") != std::string::npos);
}

TEST_CASE("z sensitivity probe") {
    const auto& t = table_1e5();
    const uint64_t x = 100'000;
    auto rows = z_sensitivity_probe(t, x, 2, {{7, 3}, {12, 5}, {30, 0}}, make_z_grid(x, 2, 15));
    CHECK(rows.size() == 3 * 16);
    size_t standard_rows = 0;
    for (const auto& row : rows) {
        CHECK(row.identity_holds);
        standard_rows += row.standard_choice;
    }
    CHECK(standard_rows == 3);

    // Bound shape is convex in z, hence unimodal along the sorted grid.
    for (size_t start = 0; start < rows.size(); start += 16) {
        bool rising = false;
        for (size_t i = start + 1; i < start + 16; ++i) {
            if (rows[i].bound_shape > rows[i - 1].bound_shape) rising = true;
            if (rising) REQUIRE(rows[i].bound_shape >= rows[i - 1].bound_shape);
        }
    }
    CHECK_THROWS_AS(z_sensitivity_probe(t, x, 2, {{4, 0}}, {2.0}), InvalidArgument);
}
