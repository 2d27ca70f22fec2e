#pragma once

// Brute-force reference computations for the tests. Nothing here calls into
// the library, so a shared bug cannot hide on both sides of a comparison.

#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

namespace oracle {

inline std::vector<std::pair<uint64_t, unsigned>> trial_factor(uint64_t n) {
    std::vector<std::pair<uint64_t, unsigned>> out;
    for (uint64_t p = 2; p * p <= n; ++p) {
        unsigned e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        if (e) out.emplace_back(p, e);
    }
    if (n > 1) out.emplace_back(n, 1);
    return out;
}

inline int mobius(uint64_t n) {
    int sign = 1;
    for (auto [p, e] : trial_factor(n)) {
        if (e > 1) return 0;
        sign = -sign;
    }
    return sign;
}

inline bool is_r_free(uint64_t n, unsigned r) {
    for (auto [p, e] : trial_factor(n))
        if (e >= r) return false;
    return true;
}

inline uint64_t phi(uint64_t n) {
    uint64_t count = 0;
    for (uint64_t a = 1; a <= n; ++a) count += std::gcd(a, n) == 1;
    return count;
}

// Σ_{d<=root} μ(d) floor(x / d^r): the classical inclusion-exclusion count.
inline int64_t r_free_count_inclusion_exclusion(uint64_t x, unsigned r) {
    int64_t total = 0;
    for (uint64_t d = 1;; ++d) {
        uint64_t dr = 1;
        bool over = false;
        for (unsigned i = 0; i < r; ++i) {
            if (dr > x / d) {
                over = true;
                break;
            }
            dr *= d;
        }
        if (over) break;
        total += mobius(d) * static_cast<int64_t>(x / dr);
    }
    return total;
}

inline uint64_t progression_count(uint64_t x, unsigned r, uint64_t k, uint64_t l) {
    uint64_t count = 0;
    for (uint64_t n = 1; n <= x; ++n)
        if (n % k == l && is_r_free(n, r)) ++count;
    return count;
}

// Ordered r-tuples with product n, by recursion over the first factor.
inline uint64_t tau_enumerate(uint64_t n, unsigned r) {
    if (r == 1) return 1;
    uint64_t total = 0;
    for (uint64_t d = 1; d <= n; ++d)
        if (n % d == 0) total += tau_enumerate(n / d, r - 1);
    return total;
}

inline uint64_t power_mod_naive(uint64_t d, unsigned r, uint64_t s) {
    uint64_t v = 1 % s;
    for (unsigned i = 0; i < r; ++i) v = v * (d % s) % s;
    return v;
}

inline uint64_t residue_solutions(unsigned r, uint64_t a, uint64_t s) {
    uint64_t count = 0;
    for (uint64_t d = 0; d < s; ++d) count += power_mod_naive(d, r, s) == a % s;
    return count;
}

}  // namespace oracle
