#include "rfree/sieve.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <thread>

#include "rfree/arith.hpp"
#include "rfree/errors.hpp"

namespace rfree {

uint64_t Factorization::radical() const {
    uint64_t rad = 1;
    for (auto [p, e] : factors) rad *= p;
    return rad;
}

uint64_t Factorization::product() const {
    uint64_t value = 1;
    for (auto [p, e] : factors) {
        auto pe = checked_pow(p, e);
        if (!pe || value > UINT64_MAX / *pe) throw ArithmeticOverflow("factorization product exceeds 64 bits");
        value *= *pe;
    }
    return value;
}

bool SieveTable::has_r(unsigned r) const {
    return std::binary_search(rs_.begin(), rs_.end(), r);
}

const std::vector<uint64_t>& SieveTable::words_for(unsigned r) const {
    auto it = std::lower_bound(rs_.begin(), rs_.end(), r);
    if (it == rs_.end() || *it != r)
        throw InvalidArgument("sieve table was not built for r = " + std::to_string(r));
    return r_free_[static_cast<size_t>(it - rs_.begin())];
}

std::span<const uint64_t> SieveTable::r_free_words(unsigned r) const { return words_for(r); }

namespace {

void check_index(uint64_t n, uint64_t limit, const char* what) {
    if (n < 1 || n > limit)
        throw InvalidArgument(std::string(what) + ": n = " + std::to_string(n) + " outside [1, " +
                              std::to_string(limit) + "]");
}

}  // namespace

int SieveTable::mu_at(uint64_t n) const {
    check_index(n, limit_, "mu");
    return mu(n);
}

bool SieveTable::r_free_at(uint64_t n, unsigned r) const {
    check_index(n, limit_, "muR");
    return is_r_free(n, r);
}

uint32_t SieveTable::spf_at(uint64_t n) const {
    check_index(n, arith_limit_, "spf");
    return spf_[n];
}

unsigned SieveTable::omega_at(uint64_t n) const {
    check_index(n, arith_limit_, "omega");
    return omega_[n];
}

uint32_t SieveTable::phi_at(uint64_t n) const {
    check_index(n, arith_limit_, "phi");
    return phi_[n];
}

uint64_t SieveTable::count_r_free(uint64_t x, unsigned r) const {
    if (x > limit_) throw InvalidArgument("count_r_free: x exceeds sieve limit");
    const auto& bits = words_for(r);
    uint64_t full = (x + 1) / 64;
    uint64_t total = 0;
    for (uint64_t w = 0; w < full; ++w) total += std::popcount(bits[w]);
    unsigned rest = (x + 1) % 64;
    if (rest) total += std::popcount(bits[full] & ((uint64_t{1} << rest) - 1));
    return total;
}

std::vector<uint32_t> primes_up_to(uint64_t limit) {
    std::vector<uint32_t> primes;
    if (limit < 2) return primes;
    std::vector<bool> composite(limit + 1, false);
    for (uint64_t i = 2; i <= limit; ++i) {
        if (composite[i]) continue;
        primes.push_back(static_cast<uint32_t>(i));
        for (uint64_t j = i * i; j <= limit; j += i) composite[j] = true;
    }
    return primes;
}

namespace {

uint64_t words64(uint64_t entries) { return (entries + 63) / 64; }

uint64_t first_multiple(uint64_t lo, uint64_t step, uint64_t at_least) {
    uint64_t m = (lo + step - 1) / step * step;
    return std::max(m, at_least);
}

struct Scratch {
    std::vector<uint64_t> prod;
    std::vector<int8_t> mu;
    std::vector<uint32_t> spf;
    std::vector<uint8_t> omega;
    std::vector<uint64_t> phi;

    explicit Scratch(uint64_t len) : prod(len), mu(len), spf(len), omega(len), phi(len) {}
};

struct BuildState {
    uint64_t limit;
    uint64_t arith;
    const std::vector<unsigned>& rs;
    const std::vector<uint32_t>& primes;
    std::vector<uint64_t>& mu_words;
    std::vector<std::vector<uint64_t>>& r_free;
    std::vector<uint32_t>& spf;
    std::vector<uint8_t>& omega;
    std::vector<uint32_t>& phi;
};

void sieve_segment(const BuildState& st, uint64_t lo, uint64_t hi, Scratch& sc) {
    const uint64_t len = hi - lo;
    std::fill_n(sc.prod.begin(), len, 1);
    std::fill_n(sc.mu.begin(), len, 1);
    std::fill_n(sc.spf.begin(), len, 0);
    std::fill_n(sc.omega.begin(), len, 0);
    std::fill_n(sc.phi.begin(), len, 1);

    // lo is 64-aligned, so this segment owns whole words of every bit table.
    for (auto& bits : st.r_free) {
        for (uint64_t w = lo / 64; w < words64(hi); ++w) bits[w] = ~uint64_t{0};
        if (hi % 64) bits[(hi - 1) / 64] &= (uint64_t{1} << (hi % 64)) - 1;
        if (lo == 0) bits[0] &= ~uint64_t{1};
    }

    for (uint32_t p32 : st.primes) {
        const uint64_t p = p32;
        if (p >= hi) break;
        for (uint64_t j = first_multiple(lo, p, p); j < hi; j += p) {
            auto i = j - lo;
            sc.mu[i] = static_cast<int8_t>(-sc.mu[i]);
            sc.prod[i] *= p;
            sc.omega[i] += 1;
            sc.phi[i] *= p - 1;
            if (sc.spf[i] == 0) sc.spf[i] = p32;
        }
        for (uint64_t pk = p * p; pk < hi; pk *= p) {
            for (uint64_t j = first_multiple(lo, pk, pk); j < hi; j += pk) {
                auto i = j - lo;
                sc.mu[i] = 0;
                sc.prod[i] *= p;
                sc.phi[i] *= p;
            }
            if (pk > (hi - 1) / p) break;
        }
        for (size_t ri = 0; ri < st.rs.size(); ++ri) {
            auto pr = checked_pow(p, st.rs[ri], hi - 1);
            if (!pr) continue;
            auto& bits = st.r_free[ri];
            for (uint64_t j = first_multiple(lo, *pr, *pr); j < hi; j += *pr)
                bits[j >> 6] &= ~(uint64_t{1} << (j & 63));
        }
    }

    for (uint64_t n = std::max<uint64_t>(lo, 1); n < hi; ++n) {
        auto i = n - lo;
        if (sc.prod[i] != n) {
            // Whatever survives division by primes <= sqrt(limit) is one prime.
            uint64_t q = n / sc.prod[i];
            sc.mu[i] = static_cast<int8_t>(-sc.mu[i]);
            sc.omega[i] += 1;
            sc.phi[i] *= q - 1;
            if (sc.spf[i] == 0) sc.spf[i] = static_cast<uint32_t>(q);
        }
        if (sc.spf[i] == 0) sc.spf[i] = 1;
    }

    for (uint64_t w = lo / 32; w < (hi + 31) / 32; ++w) {
        uint64_t word = 0;
        for (unsigned b = 0; b < 32; ++b) {
            uint64_t n = w * 32 + b;
            if (n < std::max<uint64_t>(lo, 1) || n >= hi) continue;
            int8_t m = sc.mu[n - lo];
            uint64_t code = m == 1 ? 1 : (m == -1 ? 2 : 0);
            word |= code << (2 * b);
        }
        st.mu_words[w] = word;
    }

    if (lo <= st.arith) {
        uint64_t top = std::min(hi - 1, st.arith);
        for (uint64_t n = std::max<uint64_t>(lo, 1); n <= top; ++n) {
            auto i = n - lo;
            st.spf[n] = sc.spf[i];
            st.omega[n] = sc.omega[i];
            st.phi[n] = static_cast<uint32_t>(sc.phi[i]);
        }
    }
}

}  // namespace

uint64_t estimate_sieve_bytes(uint64_t limit, size_t r_count, const SieveOptions& options) {
    uint64_t arith = options.arithmetic_limit == 0 ? limit : std::min(options.arithmetic_limit, limit);
    uint64_t seg = std::max<uint64_t>(64, (options.segment_length + 63) / 64 * 64);
    uint64_t bytes = ((limit + 32) / 32) * 8 + r_count * words64(limit + 1) * 8;
    bytes += (arith + 1) * (sizeof(uint32_t) * 2 + sizeof(uint8_t));
    bytes += std::max(1u, options.threads) * seg * (8 + 1 + 4 + 1 + 8);
    return bytes;
}

SieveTable build_sieve(uint64_t limit, std::vector<unsigned> rs, const SieveOptions& options) {
    if (limit == 0) throw InvalidArgument("build_sieve: limit must be >= 1");
    for (unsigned r : rs)
        if (r < 2) throw InvalidArgument("build_sieve: every r must be >= 2, got " + std::to_string(r));
    std::sort(rs.begin(), rs.end());
    rs.erase(std::unique(rs.begin(), rs.end()), rs.end());

    uint64_t arith = options.arithmetic_limit == 0 ? limit : std::min(options.arithmetic_limit, limit);
    if (arith > UINT32_MAX) throw InvalidArgument("build_sieve: arithmetic limit must fit in 32 bits");

    uint64_t need = estimate_sieve_bytes(limit, rs.size(), options);
    if (need > options.memory_budget_bytes)
        throw ResourceLimitError("build_sieve: limit " + std::to_string(limit) + " needs ~" + std::to_string(need) +
                                 " bytes, over the memory budget of " +
                                 std::to_string(options.memory_budget_bytes) + " bytes");

    SieveTable t;
    t.limit_ = limit;
    t.arith_limit_ = arith;
    t.rs_ = rs;
    t.mu_.assign((limit + 32) / 32, 0);
    t.r_free_.assign(rs.size(), std::vector<uint64_t>(words64(limit + 1), 0));
    t.spf_.assign(arith + 1, 0);
    t.omega_.assign(arith + 1, 0);
    t.phi_.assign(arith + 1, 0);

    const auto primes = primes_up_to(isqrt(limit));
    const uint64_t seg = std::max<uint64_t>(64, (options.segment_length + 63) / 64 * 64);
    const uint64_t segments = (limit + 1 + seg - 1) / seg;
    BuildState st{limit, arith, t.rs_, primes, t.mu_, t.r_free_, t.spf_, t.omega_, t.phi_};

    unsigned workers = static_cast<unsigned>(std::clamp<uint64_t>(options.threads, 1, segments));
    std::atomic<uint64_t> next{0};
    auto work = [&] {
        Scratch sc(seg);
        for (uint64_t s = next++; s < segments; s = next++) {
            uint64_t lo = s * seg;
            sieve_segment(st, lo, std::min(lo + seg, limit + 1), sc);
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
    }
    return t;
}

Factorization factorize(const SieveTable& table, uint64_t n) {
    if (n < 1 || n > table.arithmetic_limit())
        throw InvalidArgument("factorize: n = " + std::to_string(n) + " outside [1, " +
                              std::to_string(table.arithmetic_limit()) + "]");
    Factorization f;
    f.n = n;
    while (n > 1) {
        uint64_t p = table.spf(n);
        unsigned e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        f.factors.emplace_back(p, e);
    }
    return f;
}

Factorization factorize_trial(uint64_t n) {
    if (n < 1) throw InvalidArgument("factorize_trial: n must be >= 1");
    Factorization f;
    f.n = n;
    for (uint64_t p = 2; p <= n / p; p += (p == 2 ? 1 : 2)) {
        unsigned e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        if (e) f.factors.emplace_back(p, e);
    }
    if (n > 1) f.factors.emplace_back(n, 1);
    return f;
}

int mobius_trial(uint64_t n) {
    int sign = 1;
    for (const auto& [p, e] : factorize_trial(n).factors) {
        if (e > 1) return 0;
        sign = -sign;
    }
    return sign;
}

int mu_r_direct(uint64_t n, unsigned r) {
    if (n < 1 || r < 2) throw InvalidArgument("mu_r_direct: need n >= 1 and r >= 2");
    int sum = 0;
    for (uint64_t d = 1;; ++d) {
        auto dr = checked_pow(d, r, n);
        if (!dr) break;
        if (n % *dr == 0) sum += mobius_trial(d);
    }
    return sum;
}

}  // namespace rfree
