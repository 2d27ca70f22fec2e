#pragma once

// Average of the worst progression error over moduli k <= K(x):
//   S(x) = Σ_{k<=K} max_{gcd(l,k) r-free} |E(x;k,l)|,
//   K(x) = floor(x^{r/(r+1)} / (log x)^{A+r-1}).

#include <cstdint>
#include <ostream>
#include <utility>
#include <vector>

#include "rfree/sieve.hpp"

namespace rfree {

// Unfloored K(x); natural log.
double threshold_value(uint64_t x, unsigned r, double A);
// x^{2/3} / (log x)^{A+1}, the squarefree special case written out.
double squarefree_threshold_value(uint64_t x, double A);

// floor(threshold_value); throws ConfigError when it is below 1 and
// InvalidArgument for x < 3.
uint64_t modulus_threshold(uint64_t x, unsigned r, double A);

// r-free counts for every class n mod k, n <= x, from one pass over the bits.
std::vector<uint64_t> residue_class_counts(const SieveTable& table, uint64_t x, unsigned r, uint64_t k);

struct ModulusMax {
    uint64_t l = 0;          // maximizing residue, smallest on ties
    double max_abs_error = 0;
    uint64_t admissible = 0; // residues with gcd(l, k) r-free
    uint64_t total = 0;      // Σ over all classes (exhaustive mode only)
};

// Exhaustive over admissible l. With sample_l > 0, only that many admissible
// residues (chosen from `seed`) are counted by strided scans; such results
// are exploratory, not a value of max |E|.
ModulusMax max_error_for_modulus(const SieveTable& table, uint64_t x, unsigned r, uint64_t k, uint64_t sample_l = 0,
                                 uint64_t seed = 0);

struct ExperimentConfig {
    unsigned r = 2;
    double A = 1.0;
    std::vector<uint64_t> xs;
    unsigned threads = 1;
    uint64_t sample_l = 0;
    uint64_t seed = 0;
};

struct BvRow {
    uint64_t x = 0;
    unsigned r = 0;
    double A = 0;
    uint64_t K = 0;
    double S = 0;
    double normalized = 0;  // S (log x)^A / x
    double wall_seconds = 0;
};

struct ExperimentResult {
    std::vector<BvRow> rows;
    // Every k's class counts summed to the r-free count up to x.
    bool self_check_ok = true;
};

// Throws ConfigError on any invalid field, including max(xs) > sieve_limit.
void validate_config(const ExperimentConfig& config, uint64_t sieve_limit);

ExperimentResult run_experiment(const SieveTable& table, const ExperimentConfig& config);
// Builds its own sieve: r-free bits to max(xs), arithmetic tables to max K.
ExperimentResult run_experiment(const ExperimentConfig& config, const SieveOptions& options = {});

// Sieve options sized for this config (arithmetic tables only up to max K).
SieveOptions harness_sieve_options(const ExperimentConfig& config, SieveOptions base = {});

void write_csv(std::ostream& out, const std::vector<BvRow>& rows, bool include_timing = true);
void write_svg_plot(std::ostream& out, const std::vector<BvRow>& rows);

struct ZProbeRow {
    uint64_t k = 0;
    uint64_t l = 0;
    double z = 0;
    double bound_shape = 0;  // 2^{ω(k)} z + r^{ω(k)} (x/(k z^{r-1}) + x/(g z^r))
    double small_residual = 0;
    double large_ratio = 0;
    bool identity_holds = false;
    bool standard_choice = false;  // z = x^{1/(r+1)}
};

// Geometric grid of `points` values in [1, x^{1/r}].
std::vector<double> make_z_grid(uint64_t x, unsigned r, unsigned points);

// The split x^{1/(r+1)} is added to the grid when missing.
std::vector<ZProbeRow> z_sensitivity_probe(const SieveTable& table, uint64_t x, unsigned r,
                                           const std::vector<std::pair<uint64_t, uint64_t>>& samples,
                                           std::vector<double> z_grid);

void write_z_probe_csv(std::ostream& out, const std::vector<ZProbeRow>& rows);

}  // namespace rfree
