#pragma once

// Counting solutions of d^r ≡ a (mod s).

#include <cstdint>
#include <map>
#include <tuple>
#include <vector>

#include "rfree/sieve.hpp"

namespace rfree {

struct ResidueCount {
    unsigned r = 0;
    uint64_t a = 0;
    uint64_t s = 0;
    uint64_t count = 0;
    double bound = 0;  // 2 r^{ω(s)}
};

// Exhaustive count over d in [0, s).
uint64_t count_solutions_bruteforce(unsigned r, uint64_t a, uint64_t s);

// hist[a] = #{d in [0, s) : d^r ≡ a}, for every a at once.
std::vector<uint32_t> power_residue_histogram(unsigned r, uint64_t s);

// CRT product of per-prime-power counts. Prime powers up to
// `brute_force_threshold` are enumerated (memoized per instance); above it a
// unit a is counted from the structure of (Z/p^e)^*, and a non-unit a by
// stripping its p-adic valuation down to a unit problem.
//
// Not thread-safe: give each worker its own counter.
class PowerResidueCounter {
public:
    explicit PowerResidueCounter(uint64_t brute_force_threshold = 1'000'000)
        : threshold_(brute_force_threshold) {}

    ResidueCount count(unsigned r, uint64_t a, uint64_t s, const Factorization& fact);
    uint64_t count_prime_power(unsigned r, uint64_t a, uint64_t p, unsigned e);

private:
    uint64_t structural_count(unsigned r, uint64_t a, uint64_t p, unsigned e) const;

    uint64_t threshold_;
    std::map<std::tuple<unsigned, uint64_t, unsigned>, std::vector<uint32_t>> memo_;
};

// Uses a thread-local PowerResidueCounter with the default threshold.
ResidueCount count_solutions(unsigned r, uint64_t a, uint64_t s, const Factorization& fact);

struct BoundWitness {
    double ratio = 0;  // count / r^{ω(s)}
    unsigned r = 0;
    uint64_t a = 0;
    uint64_t s = 0;
    uint64_t count = 0;
};

struct BoundSweep {
    BoundWitness worst;                 // first (s, a) attaining the maximum
    std::vector<BoundWitness> per_s;    // per-modulus maximum, s = 2..sMax
};

// Exhaustive over 2 <= s <= s_max and units a mod s.
BoundSweep bound_sweep(unsigned r, uint64_t s_max);

}  // namespace rfree
