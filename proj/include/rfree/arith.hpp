#pragma once

// Small integer helpers shared by every module.

#include <cmath>
#include <cstdint>
#include <optional>

namespace rfree {

inline uint64_t mul_mod(uint64_t a, uint64_t b, uint64_t m) {
    return static_cast<uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

inline uint64_t pow_mod(uint64_t base, uint64_t exp, uint64_t m) {
    if (m == 1) return 0;
    uint64_t result = 1;
    base %= m;
    while (exp > 0) {
        if (exp & 1) result = mul_mod(result, base, m);
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    return result;
}

// Inverse of a modulo m by extended Euclid; nullopt when gcd(a, m) != 1.
// Every residue is its own inverse modulo 1 (the ring has one element).
inline std::optional<uint64_t> inverse_mod(uint64_t a, uint64_t m) {
    if (m == 1) return 0;
    int64_t old_r = static_cast<int64_t>(a % m), r = static_cast<int64_t>(m);
    int64_t old_s = 1, s = 0;
    while (r != 0) {
        int64_t q = old_r / r;
        int64_t tmp = old_r - q * r;
        old_r = r;
        r = tmp;
        tmp = old_s - q * s;
        old_s = s;
        s = tmp;
    }
    if (old_r != 1) return std::nullopt;
    int64_t inv = old_s % static_cast<int64_t>(m);
    if (inv < 0) inv += static_cast<int64_t>(m);
    return static_cast<uint64_t>(inv);
}

// base^exp, or nullopt if the result exceeds `cap`.
inline std::optional<uint64_t> checked_pow(uint64_t base, unsigned exp, uint64_t cap = UINT64_MAX) {
    uint64_t result = 1;
    for (unsigned i = 0; i < exp; ++i) {
        if (base != 0 && result > cap / base) return std::nullopt;
        result *= base;
    }
    if (result > cap) return std::nullopt;
    return result;
}

// floor(n^(1/r)) computed exactly.
inline uint64_t iroot(uint64_t n, unsigned r) {
    if (r == 1 || n < 2) return n;
    auto guess = static_cast<uint64_t>(std::pow(static_cast<long double>(n), 1.0L / r));
    while (guess > 0 && !checked_pow(guess, r, n)) --guess;
    while (checked_pow(guess + 1, r, n)) ++guess;
    return guess;
}

inline uint64_t isqrt(uint64_t n) { return iroot(n, 2); }

// Number of h in [1, limit] with h ≡ c (mod m).
inline uint64_t count_in_class(uint64_t limit, uint64_t c, uint64_t m) {
    c %= m;
    if (c == 0) return limit / m;
    return limit >= c ? (limit - c) / m + 1 : 0;
}

}  // namespace rfree
