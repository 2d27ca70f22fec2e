#include "rfree/progressions.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <json.hpp>

#include "rfree/arith.hpp"
#include "rfree/errors.hpp"
#include "rfree/format.hpp"

namespace rfree {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

unsigned valuation(uint64_t n, uint64_t p) {
    if (n == 0) return std::numeric_limits<unsigned>::max();
    unsigned v = 0;
    while (n % p == 0) {
        n /= p;
        ++v;
    }
    return v;
}

void check_progression(uint64_t k, uint64_t l) {
    if (k < 1) throw InvalidArgument("modulus k must be >= 1");
    if (l >= k) throw InvalidArgument("residue l must lie in [0, k)");
}

struct SignedDivisor {
    uint64_t v;
    int mu;
};

// Squarefree divisors v of g with gcd(v, s) = 1, paired with μ(v).
std::vector<SignedDivisor> coprime_squarefree_divisors(const ProgressionParams& pp) {
    std::vector<SignedDivisor> out{{1, 1}};
    for (auto [p, e] : pp.g_fact.factors) {
        if (pp.s % p == 0) continue;
        size_t n = out.size();
        for (size_t i = 0; i < n; ++i) out.push_back({out[i].v * p, -out[i].mu});
    }
    return out;
}

// Cofactors w composed of primes p | g, p ∤ s with v_p(w) < r - v_p(g).
std::vector<uint64_t> cofactors(const ProgressionParams& pp, uint64_t cap) {
    std::vector<uint64_t> out{1};
    for (auto [p, e] : pp.g_fact.factors) {
        if (pp.s % p == 0) continue;
        size_t n = out.size();
        for (size_t i = 0; i < n; ++i) {
            uint64_t w = out[i];
            for (unsigned j = 1; j + e < pp.r; ++j) {
                if (w > cap / p) break;
                w *= p;
                out.push_back(w);
            }
        }
    }
    return out;
}

double ipow(double base, unsigned e) {
    double out = 1;
    for (unsigned i = 0; i < e; ++i) out *= base;
    return out;
}

}  // namespace

ProgressionParams progression_params(unsigned r, uint64_t k, uint64_t l, const Factorization& k_fact) {
    check_progression(k, l);
    if (r < 2) throw InvalidArgument("r must be >= 2");
    if (k_fact.n != k || k_fact.product() != k) throw InvalidArgument("factorization does not match k");

    ProgressionParams pp;
    pp.r = r;
    pp.k = k;
    pp.l = l;
    pp.g = std::gcd(l, k);
    pp.s = k / pp.g;
    pp.t = l / pp.g;
    pp.k_fact = k_fact;
    pp.g_fact.n = pp.g;
    pp.s_fact.n = pp.s;
    pp.g_is_r_free = true;
    pp.rewrite_exact = true;
    for (auto [p, e] : k_fact.factors) {
        unsigned vg = std::min(e, valuation(l, p));
        if (vg > 0) pp.g_fact.factors.emplace_back(p, vg);
        if (e > vg) pp.s_fact.factors.emplace_back(p, e - vg);
        if (vg >= r) pp.g_is_r_free = false;
        if (vg > 0 && vg == e && vg + 1 < r) {
            pp.rewrite_exact = false;
            double local = 0, term = 1;
            for (unsigned j = 0; j + vg < r; ++j, term /= static_cast<double>(p)) local += term;
            pp.cofactor_density *= local;
        }
    }
    return pp;
}

ProgressionParams progression_params(const SieveTable& table, unsigned r, uint64_t k, uint64_t l) {
    check_progression(k, l);
    Factorization kf = k <= table.arithmetic_limit() ? factorize(table, k) : factorize_trial(k);
    return progression_params(r, k, l, kf);
}

uint64_t count_r_free_in_progression(const SieveTable& table, uint64_t x, unsigned r, uint64_t k, uint64_t l) {
    check_progression(k, l);
    if (x > table.limit())
        throw InvalidArgument("x = " + std::to_string(x) + " exceeds sieve limit " + std::to_string(table.limit()));
    if (k == 1) return table.count_r_free(x, r);
    auto bits = table.r_free_words(r);
    uint64_t count = 0;
    for (uint64_t n = l == 0 ? k : l; n <= x; n += k) count += (bits[n >> 6] >> (n & 63)) & 1u;
    return count;
}

MainTerm main_term(uint64_t x, const ProgressionParams& pp, const FValue& fval) {
    if (!pp.g_is_r_free)
        throw DomainError("main term undefined: gcd(l, k) = " + std::to_string(pp.g) + " is not " +
                          std::to_string(pp.r) + "-free");
    if (fval.k != pp.k || fval.r != pp.r) throw InvalidArgument("main_term: f value computed for another (r, k)");
    if (x == 0) return {0, 0};
    double phi_k = static_cast<double>(totient(pp.k_fact));
    double phi_s = static_cast<double>(totient(pp.s_fact));
    double value = static_cast<double>(x) / static_cast<double>(pp.k) * (phi_k / (static_cast<double>(pp.g) * phi_s)) *
                   fval.value;
    return {value, value * (fval.rel_error + 8 * kEps)};
}

ProgressionReport error_term(const SieveTable& table, uint64_t x, unsigned r, uint64_t k, uint64_t l) {
    ProgressionParams pp = progression_params(table, r, k, l);
    ProgressionReport rep;
    rep.x = x;
    rep.r = r;
    rep.k = k;
    rep.l = l;
    rep.g = pp.g;
    rep.s = pp.s;
    rep.t = pp.t;
    rep.g_is_r_free = pp.g_is_r_free;
    rep.rewrite_exact = pp.rewrite_exact;
    if (!pp.g_is_r_free) {
        if (x > table.limit()) throw InvalidArgument("x exceeds sieve limit");
        return rep;
    }
    rep.R = count_r_free_in_progression(table, x, r, k, l);
    MainTerm mt = main_term(x, pp, f_value(r, k, pp.k_fact));
    rep.main_term = mt.value;
    rep.main_term_error = mt.abs_error;
    rep.error_term = static_cast<double>(rep.R) - mt.value;
    return rep;
}

DecompositionReport decompose(const SieveTable& table, uint64_t x, unsigned r, uint64_t k, uint64_t l, double z,
                              const DecomposeOptions& options) {
    if (!(z >= 1.0)) throw InvalidArgument("decompose: split point z must be >= 1");
    ProgressionParams pp = progression_params(table, r, k, l);
    if (!pp.g_is_r_free)
        throw DomainError("decompose: gcd(l, k) = " + std::to_string(pp.g) + " is not " + std::to_string(r) + "-free");

    DecompositionReport rep;
    rep.z = z;
    rep.R = count_r_free_in_progression(table, x, r, k, l);
    rep.rewrite_exact = pp.rewrite_exact;

    const auto divisors = coprime_squarefree_divisors(pp);
    std::vector<uint64_t> rad_inverse(divisors.size());
    for (size_t i = 0; i < divisors.size(); ++i) {
        auto inv = inverse_mod(divisors[i].v, pp.s);
        if (!inv) throw InternalConsistencyError("decompose: divisor of g not invertible mod s");
        rad_inverse[i] = *inv;
    }
    const uint64_t rad_g = pp.g_fact.radical();

    // #{u <= limit : u ≡ c (mod s), gcd(u, g) = 1}
    auto coprime_count = [&](uint64_t limit, uint64_t c) -> int64_t {
        if (limit <= options.coprime_crossover) {
            int64_t n = 0;
            uint64_t first = c % pp.s == 0 ? pp.s : c % pp.s;
            for (uint64_t u = first; u <= limit; u += pp.s) n += std::gcd(u, rad_g) == 1;
            return n;
        }
        int64_t n = 0;
        for (size_t i = 0; i < divisors.size(); ++i) {
            uint64_t ci = mul_mod(c, rad_inverse[i], pp.s);
            n += divisors[i].mu * static_cast<int64_t>(count_in_class(limit / divisors[i].v, ci, pp.s));
        }
        return n;
    };

    std::vector<uint64_t> ws = options.include_cofactors ? cofactors(pp, x) : std::vector<uint64_t>{1};
    rep.cofactors = ws.size();
    for (uint64_t w : ws) {
        if (pp.g > x / w) continue;
        const uint64_t outer = x / (pp.g * w);
        const uint64_t w_mod = w % pp.s;
        const uint64_t d_max = iroot(outer, r);
        for (uint64_t d = 1; d <= d_max; ++d) {
            int mu = table.mu(d);
            if (mu == 0 || std::gcd(d, k) != 1) continue;
            uint64_t dr = *checked_pow(d, r);
            uint64_t unit = mul_mod(w_mod, pow_mod(d, r, pp.s), pp.s);
            auto inv = inverse_mod(unit, pp.s);
            if (!inv) throw InternalConsistencyError("decompose: w d^r not invertible mod s although gcd(d, k) = 1");
            uint64_t c = mul_mod(pp.t % pp.s, *inv, pp.s);
            int64_t term = mu * coprime_count(outer / dr, c);
            if (static_cast<double>(d) <= z)
                rep.small_sum += term;
            else
                rep.large_sum += term;
        }
    }

    const double xd = static_cast<double>(x);
    const double kd = static_cast<double>(k);
    const double gd = static_cast<double>(pp.g);
    MainTerm mt = x == 0 ? MainTerm{} : main_term(x, pp, f_value(r, k, pp.k_fact));
    rep.small_main = mt.value * (options.include_cofactors ? pp.cofactor_density : 1.0);
    rep.small_error_scale = xd * std::pow(z, 1.0 - r) / kd + ipow(2.0, static_cast<unsigned>(pp.g_fact.omega())) * z;
    rep.large_bound_scale = ipow(static_cast<double>(r), static_cast<unsigned>(pp.s_fact.omega())) *
                            (xd / (kd * std::pow(z, r - 1.0)) + xd / (gd * std::pow(z, static_cast<double>(r))));
    return rep;
}

LemmaProbe lemma_bound_probe(const DecompositionReport& rep) {
    LemmaProbe probe;
    probe.small_residual = std::abs(static_cast<double>(rep.small_sum) - rep.small_main) / rep.small_error_scale;
    probe.large_ratio = rep.large_sum == 0 ? 0.0 : std::abs(static_cast<double>(rep.large_sum)) / rep.large_bound_scale;
    return probe;
}

LemmaProbe lemma_bound_probe(const SieveTable& table, uint64_t x, unsigned r, uint64_t k, uint64_t l, double z) {
    return lemma_bound_probe(decompose(table, x, r, k, l, z));
}

std::string to_csv_header() { return "x,r,k,l,g,s,t,g_is_r_free,R,main_term,error_term"; }

std::string to_csv_row(const ProgressionReport& rep) {
    return std::to_string(rep.x) + "," + std::to_string(rep.r) + "," + std::to_string(rep.k) + "," +
           std::to_string(rep.l) + "," + std::to_string(rep.g) + "," + std::to_string(rep.s) + "," +
           std::to_string(rep.t) + "," + (rep.g_is_r_free ? "1" : "0") + "," + std::to_string(rep.R) + "," +
           format_double(rep.main_term) + "," + format_double(rep.error_term);
}

std::string to_json(const ProgressionReport& rep) {
    nlohmann::ordered_json j;
    j["x"] = rep.x;
    j["r"] = rep.r;
    j["k"] = rep.k;
    j["l"] = rep.l;
    j["g"] = rep.g;
    j["s"] = rep.s;
    j["t"] = rep.t;
    j["g_is_r_free"] = rep.g_is_r_free;
    j["rewrite_exact"] = rep.rewrite_exact;
    j["R"] = rep.R;
    j["main_term"] = rep.main_term;
    j["main_term_error"] = rep.main_term_error;
    j["error_term"] = rep.error_term;
    return j.dump();
}

}  // namespace rfree
