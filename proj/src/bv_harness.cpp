#include "rfree/bv_harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "rfree/errors.hpp"
#include "rfree/format.hpp"
#include "rfree/multiplicative.hpp"
#include "rfree/progressions.hpp"

namespace rfree {

double threshold_value(uint64_t x, unsigned r, double A) {
    // r/(r+1) rather than 1 - 1/(r+1) so that r = 2 yields the same double as 2/3.
    double exponent = static_cast<double>(r) / (static_cast<double>(r) + 1.0);
    double lx = std::log(static_cast<double>(x));
    return std::pow(static_cast<double>(x), exponent) / std::pow(lx, A + static_cast<double>(r) - 1.0);
}

double squarefree_threshold_value(uint64_t x, double A) {
    double lx = std::log(static_cast<double>(x));
    return std::pow(static_cast<double>(x), 2.0 / 3.0) / std::pow(lx, A + 1.0);
}

uint64_t modulus_threshold(uint64_t x, unsigned r, double A) {
    if (x < 3) throw InvalidArgument("modulus_threshold: x must be >= 3");
    if (r < 2) throw InvalidArgument("modulus_threshold: r must be >= 2");
    double k = std::floor(threshold_value(x, r, A));
    if (!(k >= 1))
        throw ConfigError("modulus threshold K(x = " + std::to_string(x) + ", r = " + std::to_string(r) +
                          ", A = " + format_double(A) + ") is below 1; use a larger x or a smaller A");
    return static_cast<uint64_t>(k);
}

std::vector<uint64_t> residue_class_counts(const SieveTable& table, uint64_t x, unsigned r, uint64_t k) {
    if (k < 1) throw InvalidArgument("residue_class_counts: k must be >= 1");
    if (x > table.limit()) throw InvalidArgument("residue_class_counts: x exceeds sieve limit");
    std::vector<uint64_t> counts(k, 0);
    auto bits = table.r_free_words(r);

    // idx = (base mod k) + bit < k + 64; small k reduce through a table.
    std::vector<uint32_t> reduce;
    if (k < 64) {
        reduce.resize(k + 64);
        for (uint64_t i = 0; i < reduce.size(); ++i) reduce[i] = static_cast<uint32_t>(i % k);
    }
    const uint64_t step = 64 % k;
    uint64_t base_mod = 0;
    const uint64_t last_word = x / 64;
    for (uint64_t w = 0; w <= last_word; ++w) {
        uint64_t word = bits[w];
        if (w == last_word) {
            unsigned keep = static_cast<unsigned>(x % 64) + 1;
            if (keep < 64) word &= (uint64_t{1} << keep) - 1;
        }
        while (word) {
            uint64_t idx = base_mod + static_cast<uint64_t>(std::countr_zero(word));
            word &= word - 1;
            if (k < 64)
                idx = reduce[idx];
            else if (idx >= k)
                idx -= k;
            ++counts[idx];
        }
        base_mod += step;
        if (base_mod >= k) base_mod -= k;
    }
    return counts;
}

ModulusMax max_error_for_modulus(const SieveTable& table, uint64_t x, unsigned r, uint64_t k, uint64_t sample_l,
                                 uint64_t seed) {
    if (k < 1) throw InvalidArgument("max_error_for_modulus: k must be >= 1");
    if (x > table.limit()) throw InvalidArgument("max_error_for_modulus: x exceeds sieve limit");
    Factorization kf = k <= table.arithmetic_limit() ? factorize(table, k) : factorize_trial(k);
    FValue fval = f_value(r, k, kf);

    std::vector<uint64_t> admissible;
    std::map<uint64_t, double> main_by_g;
    for (uint64_t l = 0; l < k; ++l) {
        uint64_t g = std::gcd(l, k);
        auto it = main_by_g.find(g);
        if (it == main_by_g.end()) {
            ProgressionParams pp = progression_params(r, k, l, kf);
            double main = pp.g_is_r_free ? main_term(x, pp, fval).value : -1.0;
            it = main_by_g.emplace(g, main).first;
        }
        if (it->second >= 0) admissible.push_back(l);
    }
    if (admissible.empty()) throw InternalConsistencyError("no admissible residue for modulus " + std::to_string(k));

    ModulusMax best;
    best.admissible = admissible.size();
    if (sample_l > 0 && sample_l < admissible.size()) {
        std::mt19937_64 rng(seed ^ (k * 0x9E3779B97F4A7C15ull));
        std::vector<uint64_t> chosen;
        std::sample(admissible.begin(), admissible.end(), std::back_inserter(chosen), sample_l, rng);
        best.l = chosen.front();
        best.max_abs_error = -1;
        for (uint64_t l : chosen) {
            uint64_t count = count_r_free_in_progression(table, x, r, k, l);
            double err = std::abs(static_cast<double>(count) - main_by_g.at(std::gcd(l, k)));
            if (err > best.max_abs_error) best.l = l, best.max_abs_error = err;
        }
        return best;
    }

    std::vector<uint64_t> counts = residue_class_counts(table, x, r, k);
    best.total = std::accumulate(counts.begin(), counts.end(), uint64_t{0});
    best.max_abs_error = -1;
    for (uint64_t l : admissible) {
        double err = std::abs(static_cast<double>(counts[l]) - main_by_g.at(std::gcd(l, k)));
        if (err > best.max_abs_error) best.l = l, best.max_abs_error = err;
    }
    return best;
}

void validate_config(const ExperimentConfig& config, uint64_t sieve_limit) {
    if (config.r < 2) throw ConfigError("r must be >= 2");
    if (!(config.A > 0) || !std::isfinite(config.A)) throw ConfigError("A must be a positive finite number");
    if (config.xs.empty()) throw ConfigError("xs must not be empty");
    if (config.threads < 1) throw ConfigError("threads must be >= 1");
    for (size_t i = 0; i < config.xs.size(); ++i) {
        if (config.xs[i] < 3) throw ConfigError("every x must be >= 3");
        if (i > 0 && config.xs[i] <= config.xs[i - 1]) throw ConfigError("xs must be strictly increasing");
        modulus_threshold(config.xs[i], config.r, config.A);
    }
    if (config.xs.back() > sieve_limit)
        throw ConfigError("sieve limit " + std::to_string(sieve_limit) + " is below max(xs) = " +
                          std::to_string(config.xs.back()));
}

SieveOptions harness_sieve_options(const ExperimentConfig& config, SieveOptions base) {
    uint64_t max_k = 1;
    for (uint64_t x : config.xs) max_k = std::max(max_k, modulus_threshold(x, config.r, config.A));
    base.arithmetic_limit = std::max(base.arithmetic_limit, max_k);
    base.threads = std::max(base.threads, config.threads);
    return base;
}

ExperimentResult run_experiment(const SieveTable& table, const ExperimentConfig& config) {
    validate_config(config, table.limit());
    if (!table.has_r(config.r)) throw ConfigError("sieve table lacks r = " + std::to_string(config.r));

    ExperimentResult result;
    for (uint64_t x : config.xs) {
        auto start = std::chrono::steady_clock::now();
        const uint64_t K = modulus_threshold(x, config.r, config.A);
        const uint64_t expected_total = table.count_r_free(x, config.r);

        std::vector<ModulusMax> per_k(K + 1);
        std::atomic<uint64_t> next{1};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto work = [&] {
            try {
                for (uint64_t k = next++; k <= K; k = next++)
                    per_k[k] = max_error_for_modulus(table, x, config.r, k, config.sample_l, config.seed);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = K + 1;
            }
        };
        unsigned workers = static_cast<unsigned>(std::min<uint64_t>(config.threads, K));
        if (workers <= 1) {
            work();
        } else {
            std::vector<std::jthread> pool;
            for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
        }
        if (failure) std::rethrow_exception(failure);

        // Fixed ascending-k fold keeps S independent of scheduling.
        double S = 0;
        for (uint64_t k = 1; k <= K; ++k) {
            S += per_k[k].max_abs_error;
            bool sampled = config.sample_l > 0 && config.sample_l < per_k[k].admissible;
            if (!sampled && per_k[k].total != expected_total) result.self_check_ok = false;
        }
        double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        double lx = std::log(static_cast<double>(x));
        result.rows.push_back({x, config.r, config.A, K, S, S * std::pow(lx, config.A) / static_cast<double>(x),
                               elapsed});
    }
    return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const SieveOptions& options) {
    validate_config(config, UINT64_MAX);
    SieveTable table = build_sieve(config.xs.back(), {config.r}, harness_sieve_options(config, options));
    return run_experiment(table, config);
}

void write_csv(std::ostream& out, const std::vector<BvRow>& rows, bool include_timing) {
    out << "x,r,A,K,S,normalized,wall_seconds\n";
    for (const auto& row : rows) {
        out << row.x << ',' << row.r << ',' << format_double(row.A) << ',' << row.K << ',' << format_double(row.S)
            << ',' << format_double(row.normalized) << ',' << (include_timing ? format_double(row.wall_seconds) : "0")
            << '\n';
    }
}

void write_svg_plot(std::ostream& out, const std::vector<BvRow>& rows) {
    constexpr double W = 640, H = 400, L = 70, R = 20, T = 30, B = 50;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (rows.empty()) {
        out << "</svg>\n";
        return;
    }
    double lx_min = std::floor(std::log10(static_cast<double>(rows.front().x)));
    double lx_max = std::ceil(std::log10(static_cast<double>(rows.back().x)));
    if (lx_max <= lx_min) lx_max = lx_min + 1;
    double y_max = 0;
    for (const auto& row : rows) y_max = std::max(y_max, row.normalized);
    y_max = y_max > 0 ? y_max * 1.1 : 1.0;

    auto px = [&](double x) { return L + (std::log10(x) - lx_min) / (lx_max - lx_min) * (W - L - R); };
    auto py = [&](double y) { return H - B - y / y_max * (H - T - B); };

    out << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    for (double e = lx_min; e <= lx_max; e += 1) {
        double x = px(std::pow(10.0, e));
        out << "<line x1=\"" << x << "\" y1=\"" << H - B << "\" x2=\"" << x << "\" y2=\"" << H - B + 5
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << x << "\" y=\"" << H - B + 20 << "\" font-size=\"12\" text-anchor=\"middle\">1e"
            << static_cast<int>(e) << "</text>\n";
    }
    for (int i = 0; i <= 4; ++i) {
        double y = y_max * i / 4.0;
        std::ostringstream label;
        label.precision(3);
        label << y;
        out << "<text x=\"" << L - 8 << "\" y=\"" << py(y) + 4 << "\" font-size=\"12\" text-anchor=\"end\">"
            << label.str() << "</text>\n";
    }
    out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10
        << "\" font-size=\"13\" text-anchor=\"middle\">x (log scale)</text>\n";
    out << "<text x=\"" << L << "\" y=\"" << T - 10 << "\" font-size=\"13\">S(x) (log x)^A / x, r = " << rows.front().r
        << ", A = " << format_double(rows.front().A) << "</text>\n";
    out << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (const auto& row : rows) out << px(static_cast<double>(row.x)) << ',' << py(row.normalized) << ' ';
    out << "\"/>\n";
    for (const auto& row : rows)
        out << "<circle cx=\"" << px(static_cast<double>(row.x)) << "\" cy=\"" << py(row.normalized)
            << "\" r=\"4\" fill=\"steelblue\"/>\n";
    out << "</svg>\n";
}

std::vector<double> make_z_grid(uint64_t x, unsigned r, unsigned points) {
    if (points < 2) throw InvalidArgument("make_z_grid: need at least two points");
    double top = std::pow(static_cast<double>(x), 1.0 / r);
    std::vector<double> grid;
    for (unsigned i = 0; i < points; ++i) grid.push_back(std::pow(top, static_cast<double>(i) / (points - 1)));
    return grid;
}

std::vector<ZProbeRow> z_sensitivity_probe(const SieveTable& table, uint64_t x, unsigned r,
                                           const std::vector<std::pair<uint64_t, uint64_t>>& samples,
                                           std::vector<double> z_grid) {
    const double standard_z = std::pow(static_cast<double>(x), 1.0 / (r + 1.0));
    auto is_standard = [&](double z) { return std::abs(z - standard_z) <= 1e-12 * standard_z; };
    if (std::none_of(z_grid.begin(), z_grid.end(), is_standard)) z_grid.push_back(standard_z);
    std::sort(z_grid.begin(), z_grid.end());

    std::vector<ZProbeRow> rows;
    for (auto [k, l] : samples) {
        ProgressionParams pp = progression_params(table, r, k, l);
        if (!pp.g_is_r_free) throw InvalidArgument("z_sensitivity_probe: sample (k, l) has gcd not r-free");
        double w_k = std::pow(2.0, static_cast<double>(pp.k_fact.omega()));
        double r_k = std::pow(static_cast<double>(r), static_cast<double>(pp.k_fact.omega()));
        for (double z : z_grid) {
            DecompositionReport rep = decompose(table, x, r, k, l, z);
            LemmaProbe probe = lemma_bound_probe(rep);
            double xd = static_cast<double>(x);
            double shape = w_k * z + r_k * (xd / (static_cast<double>(k) * std::pow(z, r - 1.0)) +
                                            xd / (static_cast<double>(pp.g) * std::pow(z, static_cast<double>(r))));
            rows.push_back({k, l, z, shape, probe.small_residual, probe.large_ratio, rep.identity_holds(), is_standard(z)});
        }
    }
    return rows;
}

void write_z_probe_csv(std::ostream& out, const std::vector<ZProbeRow>& rows) {
    out << "k,l,z,bound_shape,small_residual,large_ratio,identity_holds,standard_choice\n";
    for (const auto& row : rows)
        out << row.k << ',' << row.l << ',' << format_double(row.z) << ',' << format_double(row.bound_shape) << ','
            << format_double(row.small_residual) << ',' << format_double(row.large_ratio) << ','
            << (row.identity_holds ? 1 : 0) << ',' << (row.standard_choice ? 1 : 0) << '\n';
}

}  // namespace rfree
