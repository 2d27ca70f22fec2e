#pragma once

// Exact r-free counts in the progression n ≡ l (mod k), their main terms and
// error terms, and the small-d / large-d decomposition of the count.
//
// Notation: g = gcd(l, k) with gcd(0, k) = k, s = k / g, t = l / g.

#include <cstdint>
#include <string>

#include "rfree/multiplicative.hpp"
#include "rfree/sieve.hpp"

namespace rfree {

struct ProgressionParams {
    unsigned r = 0;
    uint64_t k = 0;
    uint64_t l = 0;
    uint64_t g = 0;
    uint64_t s = 0;
    uint64_t t = 0;
    Factorization k_fact;
    Factorization g_fact;
    Factorization s_fact;
    bool g_is_r_free = false;
    // True when every prime p | g with p ∤ s has v_p(g) = r - 1. Then an
    // r-free n = g m forces gcd(m, g) = 1 and the count reduces to a single
    // Möbius double sum; always true for r = 2.
    bool rewrite_exact = false;
    // Σ_w 1/w over the cofactors w that the general decomposition adds when
    // rewrite_exact is false; 1 otherwise.
    double cofactor_density = 1.0;
};

ProgressionParams progression_params(unsigned r, uint64_t k, uint64_t l, const Factorization& k_fact);
// Factors k through the table when it can, by trial division otherwise.
ProgressionParams progression_params(const SieveTable& table, unsigned r, uint64_t k, uint64_t l);

// R(x;k,l) by a strided scan of the r-free bits, O(x/k).
uint64_t count_r_free_in_progression(const SieveTable& table, uint64_t x, unsigned r, uint64_t k, uint64_t l);

struct MainTerm {
    double value = 0;
    double abs_error = 0;  // rounding budget of value
};

// (x/k) · φ(k)/(g φ(s)) · f_r(k). Throws DomainError when g is not r-free.
MainTerm main_term(uint64_t x, const ProgressionParams& params, const FValue& fval);

struct ProgressionReport {
    uint64_t x = 0;
    unsigned r = 0;
    uint64_t k = 0;
    uint64_t l = 0;
    uint64_t g = 0;
    uint64_t s = 0;
    uint64_t t = 0;
    bool g_is_r_free = false;
    bool rewrite_exact = true;
    uint64_t R = 0;
    double main_term = 0;
    double main_term_error = 0;
    double error_term = 0;
};

// Full report; for g not r-free, R = main = error = 0 with g_is_r_free false.
ProgressionReport error_term(const SieveTable& table, uint64_t x, unsigned r, uint64_t k, uint64_t l);

struct DecomposeOptions {
    // Inner ranges of at most this many terms check gcd(u, g) per u; longer
    // ones use inclusion-exclusion over v | g.
    uint64_t coprime_crossover = 64;
    // false evaluates only the w = 1 double sum, which equals R exactly when
    // rewrite_exact holds.
    bool include_cofactors = true;
};

struct DecompositionReport {
    double z = 0;
    int64_t small_sum = 0;
    int64_t large_sum = 0;
    uint64_t R = 0;
    // Main term of the small-d sum: the progression main term times
    // cofactor_density.
    double small_main = 0;
    // x z^{1-r}/k + 2^{ω(g)} z
    double small_error_scale = 0;
    // r^{ω(s)} (x/(k z^{r-1}) + x/(g z^r))
    double large_bound_scale = 0;
    uint64_t cofactors = 1;
    bool rewrite_exact = true;

    bool identity_holds() const { return small_sum + large_sum == static_cast<int64_t>(R); }
};

// Throws InvalidArgument for z < 1 and DomainError when g is not r-free.
DecompositionReport decompose(const SieveTable& table, uint64_t x, unsigned r, uint64_t k, uint64_t l, double z,
                              const DecomposeOptions& options = {});

struct LemmaProbe {
    double small_residual = 0;  // |small_sum - small_main| / small_error_scale
    double large_ratio = 0;     // |large_sum| / large_bound_scale
};

LemmaProbe lemma_bound_probe(const DecompositionReport& report);
LemmaProbe lemma_bound_probe(const SieveTable& table, uint64_t x, unsigned r, uint64_t k, uint64_t l, double z);

std::string to_csv_header();
std::string to_csv_row(const ProgressionReport& report);
std::string to_json(const ProgressionReport& report);

}  // namespace rfree
