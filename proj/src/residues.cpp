#include "rfree/residues.hpp"

#include <numeric>

#include "rfree/arith.hpp"
#include "rfree/errors.hpp"

namespace rfree {

namespace {

uint64_t ipow(uint64_t p, unsigned e) {
    auto v = checked_pow(p, e);
    if (!v) throw ArithmeticOverflow("prime power exceeds 64 bits");
    return *v;
}

// #{d mod p^e : d^r ≡ a} for a unit a. (Z/p^e)^* is cyclic for odd p and for
// 2^e with e <= 2; for e >= 3 it is {±1} × <5> with <5> of order 2^{e-2}.
uint64_t unit_count(unsigned r, uint64_t a, uint64_t p, unsigned e) {
    const uint64_t pe = ipow(p, e);
    a %= pe;
    if (p == 2 && e >= 3) {
        if (r % 2 == 1) return 1;
        if (a % 4 != 1) return 0;
        const uint64_t order = pe / 4;
        const uint64_t h = std::gcd<uint64_t>(r, order);
        return pow_mod(a, order / h, pe) == 1 ? 2 * h : 0;
    }
    const uint64_t order = pe / p * (p - 1);
    const uint64_t h = std::gcd<uint64_t>(r, order);
    return pow_mod(a, order / h, pe) == 1 ? h : 0;
}

}  // namespace

uint64_t count_solutions_bruteforce(unsigned r, uint64_t a, uint64_t s) {
    if (s < 1) throw InvalidArgument("count_solutions_bruteforce: s must be >= 1");
    a %= s;
    uint64_t count = 0;
    for (uint64_t d = 0; d < s; ++d) count += pow_mod(d, r, s) == a;
    return count;
}

std::vector<uint32_t> power_residue_histogram(unsigned r, uint64_t s) {
    if (s < 1) throw InvalidArgument("power_residue_histogram: s must be >= 1");
    std::vector<uint32_t> hist(s, 0);
    for (uint64_t d = 0; d < s; ++d) ++hist[pow_mod(d, r, s)];
    return hist;
}

uint64_t PowerResidueCounter::structural_count(unsigned r, uint64_t a, uint64_t p, unsigned e) const {
    const uint64_t pe = ipow(p, e);
    a %= pe;
    if (a % p != 0) return unit_count(r, a, p, e);
    if (a == 0) {
        // d^r ≡ 0 iff p^{ceil(e/r)} | d.
        unsigned need = (e + r - 1) / r;
        return ipow(p, e - need);
    }
    unsigned v = 0;
    uint64_t unit = a;
    while (unit % p == 0) {
        unit /= p;
        ++v;
    }
    if (v % r != 0) return 0;
    // d = p^{v/r} d' with d' a unit mod p^{e - v/r}; the condition only sees
    // d' mod p^{e - v}, and each such class has p^{v - v/r} lifts.
    unsigned m = v / r;
    return unit_count(r, unit, p, e - v) * ipow(p, v - m);
}

uint64_t PowerResidueCounter::count_prime_power(unsigned r, uint64_t a, uint64_t p, unsigned e) {
    const uint64_t pe = ipow(p, e);
    if (pe > threshold_) return structural_count(r, a, p, e);
    auto key = std::make_tuple(r, p, e);
    auto it = memo_.find(key);
    if (it == memo_.end()) it = memo_.emplace(key, power_residue_histogram(r, pe)).first;
    return it->second[a % pe];
}

ResidueCount PowerResidueCounter::count(unsigned r, uint64_t a, uint64_t s, const Factorization& fact) {
    if (s < 1) throw InvalidArgument("count_solutions: s must be >= 1");
    if (fact.n != s || fact.product() != s) throw InvalidArgument("count_solutions: factorization does not match s");
    a %= s;
    ResidueCount rc{r, a, s, 1, 2.0};
    for (size_t i = 0; i < fact.omega(); ++i) rc.bound *= r;
    for (auto [p, e] : fact.factors) {
        rc.count *= count_prime_power(r, a % ipow(p, e), p, e);
        if (rc.count == 0) break;
    }
    return rc;
}

ResidueCount count_solutions(unsigned r, uint64_t a, uint64_t s, const Factorization& fact) {
    thread_local PowerResidueCounter counter;
    return counter.count(r, a, s, fact);
}

BoundSweep bound_sweep(unsigned r, uint64_t s_max) {
    if (s_max < 2) throw InvalidArgument("bound_sweep: s_max must be >= 2");
    PowerResidueCounter counter;
    BoundSweep sweep;
    for (uint64_t s = 1; s <= s_max; ++s) {
        Factorization fact = factorize_trial(s);
        double scale = 1;
        for (size_t i = 0; i < fact.omega(); ++i) scale *= r;
        BoundWitness best;
        for (uint64_t a = 0; a < s; ++a) {
            if (std::gcd(a, s) != 1) continue;
            uint64_t c = counter.count(r, a, s, fact).count;
            double ratio = static_cast<double>(c) / scale;
            if (ratio > best.ratio) best = {ratio, r, a, s, c};
        }
        sweep.per_s.push_back(best);
        if (best.ratio > sweep.worst.ratio) sweep.worst = best;
    }
    return sweep;
}

}  // namespace rfree
