#pragma once

// Segmented construction of packed arithmetic-function tables over [1, N].
//
// Layout (index n is the integer itself; slot 0 is unused and zero):
//   mu     2 bits per n: 00 -> 0, 01 -> +1, 10 -> -1
//   muR    1 bit per n for each requested r: set iff n is r-free
//   spf    uint32 smallest prime factor, spf(1) = 1
//   omega  uint8 number of distinct prime factors
//   phi    uint32 Euler totient
//
// spf/omega/phi cover [1, arithmetic_limit], which defaults to limit and may
// be smaller when only the indicators are needed far out (the harness needs
// phi and factorizations for moduli k but r-free bits up to x).

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rfree {

struct SieveOptions {
    // Entries per segment; rounded up to a multiple of 64.
    uint64_t segment_length = 1u << 18;
    // Upper bound on bytes of output tables plus per-worker scratch.
    uint64_t memory_budget_bytes = uint64_t{6} << 30;
    // 0 means "same as limit".
    uint64_t arithmetic_limit = 0;
    unsigned threads = 1;
};

// Sorted (prime, exponent) pairs; empty for n = 1.
struct Factorization {
    uint64_t n = 1;
    std::vector<std::pair<uint64_t, unsigned>> factors;

    bool operator==(const Factorization&) const = default;
    size_t omega() const { return factors.size(); }
    uint64_t radical() const;
    // Product of p^e; throws ArithmeticOverflow past 64 bits.
    uint64_t product() const;
};

class SieveTable {
public:
    SieveTable() = default;

    uint64_t limit() const { return limit_; }
    uint64_t arithmetic_limit() const { return arith_limit_; }
    const std::vector<unsigned>& rs() const { return rs_; }
    bool has_r(unsigned r) const;

    int mu(uint64_t n) const {
        unsigned code = (mu_[n >> 5] >> ((n & 31) * 2)) & 3u;
        return code == 1 ? 1 : (code == 2 ? -1 : 0);
    }
    bool is_r_free(uint64_t n, unsigned r) const {
        const auto& bits = words_for(r);
        return (bits[n >> 6] >> (n & 63)) & 1u;
    }
    uint32_t spf(uint64_t n) const { return spf_[n]; }
    unsigned omega(uint64_t n) const { return omega_[n]; }
    uint32_t phi(uint64_t n) const { return phi_[n]; }

    // Checked accessors: throw InvalidArgument on out-of-range n or unknown r.
    int mu_at(uint64_t n) const;
    bool r_free_at(uint64_t n, unsigned r) const;
    uint32_t spf_at(uint64_t n) const;
    unsigned omega_at(uint64_t n) const;
    uint32_t phi_at(uint64_t n) const;

    // Bit n of word n/64 is the r-free indicator for n.
    std::span<const uint64_t> r_free_words(unsigned r) const;
    std::span<const uint64_t> mu_words() const { return mu_; }

    // Number of r-free n in [1, x].
    uint64_t count_r_free(uint64_t x, unsigned r) const;

    bool operator==(const SieveTable&) const = default;

    // Bit-exact cache format, little-endian:
    //   "RFSV1" | u64 limit | u32 count | u32 r[count] | u64 arithmetic_limit
    //   | u64 mu words | per r: u64 muR words | u32 spf | u8 omega | u32 phi
    // spf/omega/phi arrays hold arithmetic_limit + 1 entries (slot 0 included).
    void save(const std::filesystem::path& path) const;
    static SieveTable load(const std::filesystem::path& path);

    friend SieveTable build_sieve(uint64_t limit, std::vector<unsigned> rs, const SieveOptions& options);

private:
    const std::vector<uint64_t>& words_for(unsigned r) const;

    uint64_t limit_ = 0;
    uint64_t arith_limit_ = 0;
    std::vector<unsigned> rs_;
    std::vector<uint64_t> mu_;
    std::vector<std::vector<uint64_t>> r_free_;
    std::vector<uint32_t> spf_;
    std::vector<uint8_t> omega_;
    std::vector<uint32_t> phi_;
};

// Bytes the output tables (plus scratch for `options.threads` workers) would use.
uint64_t estimate_sieve_bytes(uint64_t limit, size_t r_count, const SieveOptions& options);

// rs is deduplicated and sorted. Throws InvalidArgument for limit = 0 or r < 2
// and ResourceLimitError when estimate_sieve_bytes exceeds the budget.
SieveTable build_sieve(uint64_t limit, std::vector<unsigned> rs, const SieveOptions& options = {});

// Primes p <= limit by a plain sieve of Eratosthenes.
std::vector<uint32_t> primes_up_to(uint64_t limit);

Factorization factorize(const SieveTable& table, uint64_t n);

// Trial division; for moduli beyond the table's arithmetic range.
Factorization factorize_trial(uint64_t n);

// Σ_{d^r | n} μ(d), enumerating d directly with μ(d) by trial division.
// Independent of any sieve; used as the cross-check oracle.
int mu_r_direct(uint64_t n, unsigned r);

// Möbius function by trial division.
int mobius_trial(uint64_t n);

}  // namespace rfree
