#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rfree/sieve.hpp"

namespace rfree {

struct ZetaValue {
    double value = 0;
    double rel_error = 0;  // bound on |value - ζ(r)| / ζ(r)
    uint64_t terms = 0;    // M, the number of summed terms
};

// ζ(r) = Σ n^{-r} as Σ_{n<=M} n^{-r} + M^{1-r}/(r-1), with M the smallest
// integer whose residual bound M^{-r} meets the target. r < 2 throws.
ZetaValue zeta_with_error(unsigned r, double target_rel_error);
double zeta(unsigned r, double target_rel_error);

// ζ(r) at relative error 1e-13, computed once per r and shared.
const ZetaValue& zeta_cached(unsigned r);

// f_r(k) = Π_{p ∤ k} (1 - p^{-r}).
struct FValue {
    unsigned r = 0;
    uint64_t k = 0;
    double value = 0;
    double rel_error = 0;
};

// Evaluated as ζ(r)^{-1} · Π_{p | k} (1 - p^{-r})^{-1}. `fact` must factor k.
FValue f_value(unsigned r, uint64_t k, const Factorization& fact);

// τ_r(n) for n in [1, limit], 64-bit with overflow detection.
class TauTable {
public:
    TauTable(unsigned r, uint64_t limit, std::vector<uint64_t> values)
        : r_(r), limit_(limit), tau_(std::move(values)) {}

    unsigned r() const { return r_; }
    uint64_t limit() const { return limit_; }
    uint64_t operator()(uint64_t n) const { return tau_[n]; }
    std::span<const uint64_t> values() const { return tau_; }

    bool operator==(const TauTable&) const = default;

private:
    unsigned r_;
    uint64_t limit_;
    std::vector<uint64_t> tau_;  // slot 0 unused
};

enum class TauMethod {
    // τ_r(p^e) = C(e+r-1, r-1) assembled through a linear sieve.
    Multiplicative,
    // r-1 passes of τ_{j+1} = τ_j * 1.
    Convolution,
};

// Throws ArithmeticOverflow when some τ_r(n) does not fit in 64 bits.
TauTable tau_table(unsigned r, uint64_t limit, TauMethod method = TauMethod::Multiplicative);

// C(e+r-1, r-1), the number of ways to write p^e as an ordered r-fold product.
uint64_t tau_prime_power(unsigned r, unsigned e);

struct TauSumRow {
    uint64_t x = 0;
    uint64_t sum = 0;
    double ratio = 0;  // sum / (x (log x)^{r-1})
};

std::vector<TauSumRow> tau_partial_sum_check(unsigned r, std::span<const uint64_t> xs);

// r^{ω(k)} <= τ_r(k) for every k <= limit.
bool omega_vs_tau_check(unsigned r, uint64_t limit, const SieveTable& table);

// φ(n) from a factorization of n.
uint64_t totient(const Factorization& fact);

}  // namespace rfree
