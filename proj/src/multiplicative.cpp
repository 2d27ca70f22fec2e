#include "rfree/multiplicative.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <string>

#include "rfree/arith.hpp"
#include "rfree/errors.hpp"

namespace rfree {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double inverse_power(uint64_t n, unsigned r) {
    double base = 1.0 / static_cast<double>(n);
    double result = 1.0;
    for (unsigned e = r; e > 0; e >>= 1) {
        if (e & 1) result *= base;
        base *= base;
    }
    return result;
}

uint64_t checked_mul(uint64_t a, uint64_t b, const char* what) {
    uint64_t out;
    if (__builtin_mul_overflow(a, b, &out)) throw ArithmeticOverflow(std::string(what) + " overflows 64 bits");
    return out;
}

uint64_t checked_add(uint64_t a, uint64_t b, const char* what) {
    uint64_t out;
    if (__builtin_add_overflow(a, b, &out)) throw ArithmeticOverflow(std::string(what) + " overflows 64 bits");
    return out;
}

}  // namespace

ZetaValue zeta_with_error(unsigned r, double target_rel_error) {
    if (r < 2) throw InvalidArgument("zeta: the series diverges for r < 2");
    if (!(target_rel_error > 0)) throw InvalidArgument("zeta: target relative error must be positive");

    // ζ(r) >= 1, so an absolute residual of M^{-r} bounds the relative one.
    auto m = static_cast<uint64_t>(std::ceil(std::pow(target_rel_error, -1.0 / r)));
    m = std::max<uint64_t>(m, 1);
    while (m > 1 && inverse_power(m - 1, r) <= target_rel_error) --m;

    // Neumaier summation, smallest terms first.
    double sum = 0, comp = 0;
    auto add = [&](double term) {
        double t = sum + term;
        if (std::abs(sum) >= std::abs(term))
            comp += (sum - t) + term;
        else
            comp += (term - t) + sum;
        sum = t;
    };
    add(inverse_power(m, r - 1) / (r - 1));
    for (uint64_t n = m; n >= 1; --n) add(inverse_power(n, r));
    double value = sum + comp;
    return {value, inverse_power(m, r) / value + 4 * kEps, m};
}

double zeta(unsigned r, double target_rel_error) { return zeta_with_error(r, target_rel_error).value; }

const ZetaValue& zeta_cached(unsigned r) {
    static std::mutex mutex;
    static std::map<unsigned, ZetaValue> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(r);
    if (it == cache.end()) it = cache.emplace(r, zeta_with_error(r, 1e-13)).first;
    return it->second;
}

FValue f_value(unsigned r, uint64_t k, const Factorization& fact) {
    if (r < 2) throw InvalidArgument("f_value: r must be >= 2");
    if (k < 1 || fact.n != k || fact.product() != k)
        throw InvalidArgument("f_value: factorization does not match k = " + std::to_string(k));
    const ZetaValue& z = zeta_cached(r);
    double value = 1.0 / z.value;
    for (auto [p, e] : fact.factors) value /= 1.0 - inverse_power(p, r);
    double rel = z.rel_error + (3.0 * static_cast<double>(fact.factors.size()) + 2.0) * kEps;
    return {r, k, value, rel};
}

uint64_t tau_prime_power(unsigned r, unsigned e) {
    if (r == 0) throw InvalidArgument("tau: r must be >= 1");
    unsigned __int128 c = 1;
    for (unsigned i = 1; i <= e; ++i) {
        c = c * (r - 1 + i) / i;
        if (c > UINT64_MAX) throw ArithmeticOverflow("tau_r(p^e) overflows 64 bits");
    }
    return static_cast<uint64_t>(c);
}

TauTable tau_table(unsigned r, uint64_t limit, TauMethod method) {
    if (r < 1) throw InvalidArgument("tau_table: r must be >= 1");
    if (limit < 1) throw InvalidArgument("tau_table: limit must be >= 1");
    std::vector<uint64_t> tau(limit + 1, 0);
    tau[1] = 1;

    if (method == TauMethod::Convolution) {
        std::fill(tau.begin() + 1, tau.end(), 1);
        std::vector<uint64_t> next(limit + 1);
        for (unsigned pass = 1; pass < r; ++pass) {
            std::fill(next.begin(), next.end(), 0);
            for (uint64_t d = 1; d <= limit; ++d)
                for (uint64_t m = d; m <= limit; m += d) next[m] = checked_add(next[m], tau[d], "tau_r(n)");
            tau.swap(next);
        }
        return {r, limit, std::move(tau)};
    }

    // Linear sieve: every composite n is reached once as i * p with p = lpf(n).
    // exponent[n] is the multiplicity of lpf(n); cofactor[n] is n with that
    // prime power removed.
    std::vector<uint32_t> primes;
    std::vector<uint8_t> exponent(limit + 1, 0);
    std::vector<uint64_t> cofactor(limit + 1, 1);
    std::vector<uint32_t> lpf(limit + 1, 0);
    for (uint64_t i = 2; i <= limit; ++i) {
        if (lpf[i] == 0) {
            lpf[i] = static_cast<uint32_t>(i);
            primes.push_back(static_cast<uint32_t>(i));
            exponent[i] = 1;
            cofactor[i] = 1;
            tau[i] = r;
        }
        for (uint32_t p : primes) {
            if (p > lpf[i] || i * p > limit) break;
            uint64_t n = i * p;
            lpf[n] = p;
            if (p == lpf[i]) {
                exponent[n] = static_cast<uint8_t>(exponent[i] + 1);
                cofactor[n] = cofactor[i];
                tau[n] = checked_mul(tau[cofactor[n]], tau_prime_power(r, exponent[n]), "tau_r(n)");
            } else {
                exponent[n] = 1;
                cofactor[n] = i;
                tau[n] = checked_mul(tau[i], r, "tau_r(n)");
            }
        }
    }
    return {r, limit, std::move(tau)};
}

std::vector<TauSumRow> tau_partial_sum_check(unsigned r, std::span<const uint64_t> xs) {
    if (xs.empty()) return {};
    for (uint64_t x : xs)
        if (x < 3) throw InvalidArgument("tau_partial_sum_check: every x must be >= 3");
    uint64_t top = *std::max_element(xs.begin(), xs.end());
    TauTable table = tau_table(r, top);
    std::vector<uint64_t> prefix(top + 1, 0);
    for (uint64_t n = 1; n <= top; ++n) prefix[n] = checked_add(prefix[n - 1], table(n), "sum of tau_r");

    std::vector<TauSumRow> rows;
    for (uint64_t x : xs) {
        double lx = std::log(static_cast<double>(x));
        double denom = static_cast<double>(x) * std::pow(lx, static_cast<double>(r) - 1.0);
        rows.push_back({x, prefix[x], static_cast<double>(prefix[x]) / denom});
    }
    return rows;
}

bool omega_vs_tau_check(unsigned r, uint64_t limit, const SieveTable& table) {
    if (limit > table.arithmetic_limit())
        throw InvalidArgument("omega_vs_tau_check: limit exceeds the table's arithmetic range");
    if (limit == 0) return true;
    TauTable tau = tau_table(r, limit);
    for (uint64_t k = 1; k <= limit; ++k) {
        auto bound = checked_pow(r, table.omega(k));
        if (!bound || *bound > tau(k)) return false;
    }
    return true;
}

uint64_t totient(const Factorization& fact) {
    uint64_t phi = 1;
    for (auto [p, e] : fact.factors) {
        phi *= p - 1;
        for (unsigned i = 1; i < e; ++i) phi *= p;
    }
    return phi;
}

}  // namespace rfree
