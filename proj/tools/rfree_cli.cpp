// rfree: command-line front end for the r-free progression library.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rfree/bv_harness.hpp"
#include "rfree/errors.hpp"
#include "rfree/format.hpp"
#include "rfree/multiplicative.hpp"
#include "rfree/progressions.hpp"
#include "rfree/residues.hpp"
#include "rfree/sieve.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSelfCheck = 3;

// Accepts plain integers and exact scientific forms such as 1e6.
uint64_t parse_count(const std::string& text) {
    size_t pos = 0;
    if (text.find_first_of("eE.") == std::string::npos) {
        unsigned long long v = std::stoull(text, &pos);
        if (pos != text.size()) throw rfree::ConfigError("not an integer: " + text);
        return v;
    }
    double v = std::stod(text, &pos);
    if (pos != text.size() || !(v >= 0) || v > 1.8e19 || std::floor(v) != v)
        throw rfree::ConfigError("not an integer: " + text);
    return static_cast<uint64_t>(v);
}

std::vector<uint64_t> parse_count_list(const std::string& text) {
    std::vector<uint64_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(parse_count(item));
    if (out.empty()) throw rfree::ConfigError("empty list: " + text);
    return out;
}

std::vector<unsigned> parse_r_list(const std::string& text) {
    std::vector<unsigned> out;
    for (uint64_t v : parse_count_list(text)) out.push_back(static_cast<unsigned>(v));
    return out;
}

bool covers(const rfree::SieveTable& t, uint64_t limit, const std::vector<unsigned>& rs, uint64_t arith) {
    if (t.limit() < limit || t.arithmetic_limit() < arith) return false;
    for (unsigned r : rs)
        if (!t.has_r(r)) return false;
    return true;
}

// Reuses the cache when it covers the request, otherwise builds and rewrites it.
rfree::SieveTable obtain_sieve(uint64_t limit, const std::vector<unsigned>& rs, rfree::SieveOptions options,
                               const std::string& cache) {
    uint64_t arith = options.arithmetic_limit == 0 ? limit : options.arithmetic_limit;
    if (!cache.empty() && std::filesystem::exists(cache)) {
        try {
            rfree::SieveTable t = rfree::SieveTable::load(cache);
            if (covers(t, limit, rs, arith)) return t;
            std::cerr << "cache " << cache << " does not cover the request; rebuilding\n";
        } catch (const rfree::InvalidArgument& e) {
            std::cerr << "ignoring unreadable cache: " << e.what() << "\n";
        }
    }
    rfree::SieveTable t = rfree::build_sieve(limit, rs, options);
    if (!cache.empty()) t.save(cache);
    return t;
}

struct Common {
    unsigned threads = 1;
    uint64_t segment = 1u << 18;
    double memory_gib = 6.0;

    rfree::SieveOptions options() const {
        rfree::SieveOptions o;
        o.threads = threads;
        o.segment_length = segment;
        o.memory_budget_bytes = static_cast<uint64_t>(memory_gib * 1073741824.0);
        return o;
    }
};

void add_sieve_knobs(CLI::App* cmd, Common& common) {
    cmd->add_option("--segment", common.segment, "sieve segment length")->capture_default_str();
    cmd->add_option("--memory-gib", common.memory_gib, "sieve memory budget in GiB")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact counts and error terms of r-free numbers in arithmetic progressions"};
    app.require_subcommand(1);
    Common common;

    // sieve
    std::string sieve_limit = "1000000", sieve_rs = "2", sieve_cache;
    auto* sieve_cmd = app.add_subcommand("sieve", "build (or load) the sieve tables and print their summary");
    sieve_cmd->add_option("--limit", sieve_limit, "table limit N")->required();
    sieve_cmd->add_option("--r", sieve_rs, "comma-separated r values")->capture_default_str();
    sieve_cmd->add_option("--cache", sieve_cache, "binary cache file (RFSV1)");
    sieve_cmd->add_option("--threads", common.threads, "worker threads")->capture_default_str();
    add_sieve_knobs(sieve_cmd, common);

    // tau-sum
    unsigned tau_r = 2;
    std::string tau_xs;
    auto* tau_cmd = app.add_subcommand("tau-sum", "partial sums of tau_r as CSV x,sum,ratio");
    tau_cmd->add_option("--r", tau_r, "r >= 1")->required();
    tau_cmd->add_option("--x", tau_xs, "comma-separated x values")->required();

    // f
    unsigned f_r = 2;
    std::string f_k;
    auto* f_cmd = app.add_subcommand("f", "print f_r(k) to 12 decimals");
    f_cmd->add_option("--r", f_r, "r >= 2")->required();
    f_cmd->add_option("--k", f_k, "k >= 1")->required();

    // error
    std::string err_x, err_k, err_l;
    unsigned err_r = 2;
    double err_z = 0;
    std::string err_format = "csv";
    auto* err_cmd = app.add_subcommand("error", "R(x;k,l), main term and error term of one progression");
    err_cmd->add_option("--x", err_x, "x")->required();
    err_cmd->add_option("--r", err_r, "r >= 2")->required();
    err_cmd->add_option("--k", err_k, "modulus")->required();
    err_cmd->add_option("--l", err_l, "residue in [0, k)")->required();
    auto* z_opt = err_cmd->add_option("--z", err_z, "split point for the small/large d decomposition");
    err_cmd->add_option("--format", err_format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    add_sieve_knobs(err_cmd, common);

    // verify-lemmas
    std::string vl_x;
    unsigned vl_r = 2, vl_trials = 100;
    uint64_t vl_seed = 1, vl_kmax = 200;
    auto* vl_cmd = app.add_subcommand("verify-lemmas", "randomized decomposition and lemma-bound sweep");
    vl_cmd->add_option("--x", vl_x, "x")->required();
    vl_cmd->add_option("--r", vl_r, "r >= 2")->required();
    vl_cmd->add_option("--trials", vl_trials, "number of random (k, l, z)")->capture_default_str();
    vl_cmd->add_option("--seed", vl_seed, "RNG seed")->capture_default_str();
    vl_cmd->add_option("--k-max", vl_kmax, "largest modulus sampled")->capture_default_str();
    add_sieve_knobs(vl_cmd, common);

    // residues
    unsigned res_r = 2;
    uint64_t res_smax = 100;
    auto* res_cmd = app.add_subcommand("residues", "worst d^r ≡ a (mod s) counts relative to r^omega(s)");
    res_cmd->add_option("--r", res_r, "r >= 2")->required();
    res_cmd->add_option("--s-max", res_smax, "largest modulus")->required();

    // bv-sum
    unsigned bv_r = 2;
    double bv_A = 1.0;
    std::string bv_xs, bv_csv, bv_plot, bv_cache;
    uint64_t bv_sample = 0, bv_seed = 0;
    bool bv_no_timing = false;
    auto* bv_cmd = app.add_subcommand("bv-sum", "S(x) = sum over k <= K(x) of max_l |E(x;k,l)|");
    bv_cmd->add_option("--r", bv_r, "r >= 2")->required();
    bv_cmd->add_option("--A", bv_A, "log-power saving A > 0")->required();
    bv_cmd->add_option("--x", bv_xs, "comma-separated increasing x values, e.g. 1e4,1e5,1e6")->required();
    bv_cmd->add_option("--threads", common.threads, "worker threads")->capture_default_str();
    bv_cmd->add_option("--csv", bv_csv, "write CSV here instead of stdout");
    bv_cmd->add_option("--plot", bv_plot, "write an SVG plot of the normalized column");
    bv_cmd->add_option("--cache", bv_cache, "sieve cache file (RFSV1)");
    bv_cmd->add_option("--sample-l", bv_sample,
                       "NON-AUTHORITATIVE: evaluate only this many random residues per modulus");
    bv_cmd->add_option("--seed", bv_seed, "seed for --sample-l")->capture_default_str();
    bv_cmd->add_flag("--no-timing", bv_no_timing, "write 0 in the wall_seconds column");
    add_sieve_knobs(bv_cmd, common);

    // z-probe
    std::string zp_x;
    unsigned zp_r = 2, zp_samples = 5, zp_points = 9;
    uint64_t zp_seed = 1, zp_kmax = 50;
    auto* zp_cmd = app.add_subcommand("z-probe", "lemma residuals and bound shape across split points z");
    zp_cmd->add_option("--x", zp_x, "x")->required();
    zp_cmd->add_option("--r", zp_r, "r >= 2")->required();
    zp_cmd->add_option("--samples", zp_samples, "random (k, l) pairs")->capture_default_str();
    zp_cmd->add_option("--points", zp_points, "grid points in [1, x^(1/r)]")->capture_default_str();
    zp_cmd->add_option("--seed", zp_seed, "RNG seed")->capture_default_str();
    zp_cmd->add_option("--k-max", zp_kmax, "largest modulus sampled")->capture_default_str();
    add_sieve_knobs(zp_cmd, common);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sieve_cmd) {
            auto rs = parse_r_list(sieve_rs);
            auto table = obtain_sieve(parse_count(sieve_limit), rs, common.options(), sieve_cache);
            std::cout << "limit," << table.limit() << "\n";
            for (unsigned r : table.rs()) {
                uint64_t c = table.count_r_free(table.limit(), r);
                std::cout << "r_free_count_r" << r << "," << c << "\n";
                std::cout << "r_free_density_r" << r << ","
                          << rfree::format_double(static_cast<double>(c) / static_cast<double>(table.limit())) << "\n";
            }
            return 0;
        }

        if (*tau_cmd) {
            auto xs = parse_count_list(tau_xs);
            std::cout << "x,sum,ratio\n";
            for (const auto& row : rfree::tau_partial_sum_check(tau_r, xs))
                std::cout << row.x << ',' << row.sum << ',' << rfree::format_double(row.ratio) << '\n';
            return 0;
        }

        if (*f_cmd) {
            uint64_t k = parse_count(f_k);
            auto fv = rfree::f_value(f_r, k, rfree::factorize_trial(k));
            std::cout << std::fixed << std::setprecision(12) << fv.value << "\n";
            return 0;
        }

        if (*err_cmd) {
            uint64_t x = parse_count(err_x), k = parse_count(err_k), l = parse_count(err_l);
            auto opts = common.options();
            opts.arithmetic_limit = std::min<uint64_t>(std::max<uint64_t>(x, 1), std::max<uint64_t>(k, 1));
            auto table = rfree::build_sieve(std::max<uint64_t>({x, k, 1}), {err_r}, opts);
            auto rep = rfree::error_term(table, x, err_r, k, l);
            bool with_z = z_opt->count() > 0;
            rfree::DecompositionReport dec;
            if (with_z) dec = rfree::decompose(table, x, err_r, k, l, err_z);
            if (err_format == "json") {
                std::string js = rfree::to_json(rep);
                if (with_z) {
                    js.pop_back();
                    js += ",\"z\":" + rfree::format_double(dec.z) + ",\"small_sum\":" + std::to_string(dec.small_sum) +
                          ",\"large_sum\":" + std::to_string(dec.large_sum) +
                          ",\"identity_holds\":" + (dec.identity_holds() ? "true" : "false") + "}";
                }
                std::cout << js << "\n";
            } else {
                std::cout << rfree::to_csv_header() << (with_z ? ",z,small_sum,large_sum,identity_holds" : "") << "\n";
                std::cout << rfree::to_csv_row(rep);
                if (with_z)
                    std::cout << ',' << rfree::format_double(dec.z) << ',' << dec.small_sum << ',' << dec.large_sum
                              << ',' << (dec.identity_holds() ? 1 : 0);
                std::cout << "\n";
            }
            return with_z && !dec.identity_holds() ? kExitSelfCheck : 0;
        }

        if (*vl_cmd) {
            uint64_t x = parse_count(vl_x);
            if (vl_kmax < 1) throw rfree::ConfigError("--k-max must be >= 1");
            auto opts = common.options();
            opts.arithmetic_limit = std::min(x, std::max<uint64_t>(vl_kmax, 1));
            auto table = rfree::build_sieve(std::max(x, vl_kmax), {vl_r}, opts);
            std::mt19937_64 rng(vl_seed);
            std::uniform_int_distribution<uint64_t> pick_k(1, vl_kmax);
            uint64_t failures = 0;
            double worst_small = 0, worst_large = 0;
            for (unsigned trial = 0; trial < vl_trials; ++trial) {
                uint64_t k = pick_k(rng), l = 0;
                rfree::ProgressionParams pp;
                do {
                    l = std::uniform_int_distribution<uint64_t>(0, k - 1)(rng);
                    pp = rfree::progression_params(table, vl_r, k, l);
                } while (!pp.g_is_r_free);
                double z_top = std::max(1.0, std::pow(static_cast<double>(x / pp.g), 1.0 / vl_r));
                double z = std::uniform_real_distribution<double>(1.0, z_top)(rng);
                auto dec = rfree::decompose(table, x, vl_r, k, l, z);
                auto probe = rfree::lemma_bound_probe(dec);
                worst_small = std::max(worst_small, probe.small_residual);
                worst_large = std::max(worst_large, probe.large_ratio);
                if (!dec.identity_holds()) {
                    ++failures;
                    std::cerr << "identity failure: x=" << x << " r=" << vl_r << " k=" << k << " l=" << l
                              << " z=" << rfree::format_double(z) << " small=" << dec.small_sum
                              << " large=" << dec.large_sum << " R=" << dec.R << "\n";
                }
            }
            std::cout << "trials," << vl_trials << "\nidentity_failures," << failures << "\nmax_small_residual,"
                      << rfree::format_double(worst_small) << "\nmax_large_ratio," << rfree::format_double(worst_large)
                      << "\n";
            return failures ? kExitSelfCheck : 0;
        }

        if (*res_cmd) {
            auto sweep = rfree::bound_sweep(res_r, res_smax);
            std::cout << "s,a,count,ratio\n";
            for (const auto& w : sweep.per_s)
                if (w.count > 0)
                    std::cout << w.s << ',' << w.a << ',' << w.count << ',' << rfree::format_double(w.ratio) << '\n';
            std::cout << "# max ratio " << rfree::format_double(sweep.worst.ratio) << " at s=" << sweep.worst.s
                      << " a=" << sweep.worst.a << " (r=" << res_r << ", s<=" << res_smax << ")\n";
            return 0;
        }

        if (*bv_cmd) {
            rfree::ExperimentConfig config;
            config.r = bv_r;
            config.A = bv_A;
            config.xs = parse_count_list(bv_xs);
            config.threads = common.threads;
            config.sample_l = bv_sample;
            config.seed = bv_seed;
            rfree::validate_config(config, UINT64_MAX);
            if (bv_sample > 0)
                std::cerr << "warning: --sample-l evaluates a random subset of residues; "
                             "S is a lower estimate and NOT authoritative\n";
            auto opts = rfree::harness_sieve_options(config, common.options());
            auto table = obtain_sieve(config.xs.back(), {config.r}, opts, bv_cache);
            auto result = rfree::run_experiment(table, config);
            if (bv_csv.empty()) {
                rfree::write_csv(std::cout, result.rows, !bv_no_timing);
            } else {
                std::ofstream out(bv_csv);
                if (!out) throw rfree::ConfigError("cannot write " + bv_csv);
                rfree::write_csv(out, result.rows, !bv_no_timing);
            }
            if (!bv_plot.empty()) {
                std::ofstream out(bv_plot);
                if (!out) throw rfree::ConfigError("cannot write " + bv_plot);
                rfree::write_svg_plot(out, result.rows);
            }
            if (!result.self_check_ok) {
                std::cerr << "self-check failed: residue-class counts do not partition the r-free count\n";
                return kExitSelfCheck;
            }
            return 0;
        }

        if (*zp_cmd) {
            uint64_t x = parse_count(zp_x);
            auto opts = common.options();
            opts.arithmetic_limit = std::min(x, std::max<uint64_t>(zp_kmax, 1));
            auto table = rfree::build_sieve(std::max(x, zp_kmax), {zp_r}, opts);
            std::mt19937_64 rng(zp_seed);
            std::vector<std::pair<uint64_t, uint64_t>> samples;
            while (samples.size() < zp_samples) {
                uint64_t k = std::uniform_int_distribution<uint64_t>(1, zp_kmax)(rng);
                uint64_t l = std::uniform_int_distribution<uint64_t>(0, k - 1)(rng);
                if (rfree::progression_params(table, zp_r, k, l).g_is_r_free) samples.emplace_back(k, l);
            }
            auto rows = rfree::z_sensitivity_probe(table, x, zp_r, samples, rfree::make_z_grid(x, zp_r, zp_points));
            rfree::write_z_probe_csv(std::cout, rows);
            for (const auto& row : rows)
                if (!row.identity_holds) return kExitSelfCheck;
            return 0;
        }
    } catch (const rfree::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const rfree::InvalidArgument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return kExitConfig;
    } catch (const rfree::ResourceLimitError& e) {
        std::cerr << "resource limit: " << e.what() << "\n";
        return kExitConfig;
    } catch (const rfree::DomainError& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
