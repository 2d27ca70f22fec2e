#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "rfree/bv_harness.hpp"
#include "rfree/errors.hpp"
#include "rfree/multiplicative.hpp"
#include "rfree/progressions.hpp"
#include "rfree/residues.hpp"
#include "rfree/sieve.hpp"

namespace py = pybind11;
using namespace rfree;

namespace {

py::list factors_of(const Factorization& f) {
    py::list out;
    for (auto [p, e] : f.factors) out.append(py::make_tuple(p, e));
    return out;
}

}  // namespace

PYBIND11_MODULE(_rfree, m) {
    m.doc() = "Exact r-free counts, main terms and error terms in arithmetic progressions";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ResourceLimitError>(m, "ResourceLimitError", PyExc_MemoryError);

    py::class_<SieveTable>(m, "SieveTable")
        .def_property_readonly("limit", &SieveTable::limit)
        .def_property_readonly("arithmetic_limit", &SieveTable::arithmetic_limit)
        .def_property_readonly("rs", &SieveTable::rs)
        .def("mu", &SieveTable::mu_at, py::arg("n"))
        .def("is_r_free", &SieveTable::r_free_at, py::arg("n"), py::arg("r"))
        .def("spf", &SieveTable::spf_at, py::arg("n"))
        .def("omega", &SieveTable::omega_at, py::arg("n"))
        .def("phi", &SieveTable::phi_at, py::arg("n"))
        .def("count_r_free", &SieveTable::count_r_free, py::arg("x"), py::arg("r"))
        .def("save", &SieveTable::save, py::arg("path"))
        .def_static("load", &SieveTable::load, py::arg("path"))
        .def("__eq__", [](const SieveTable& a, const SieveTable& b) { return a == b; });

    m.def(
        "build_sieve",
        [](uint64_t limit, std::vector<unsigned> rs, uint64_t segment_length, unsigned threads,
           uint64_t arithmetic_limit) {
            SieveOptions o;
            o.segment_length = segment_length;
            o.threads = threads;
            o.arithmetic_limit = arithmetic_limit;
            py::gil_scoped_release release;
            return build_sieve(limit, std::move(rs), o);
        },
        py::arg("limit"), py::arg("rs") = std::vector<unsigned>{2}, py::arg("segment_length") = 1u << 18,
        py::arg("threads") = 1, py::arg("arithmetic_limit") = 0);

    m.def("factorize", [](const SieveTable& t, uint64_t n) { return factors_of(factorize(t, n)); });
    m.def("factorize_trial", [](uint64_t n) { return factors_of(factorize_trial(n)); });
    m.def("mu_r_direct", &mu_r_direct, py::arg("n"), py::arg("r"));

    m.def("zeta", &zeta, py::arg("r"), py::arg("target_rel_error") = 1e-12);
    m.def(
        "f_value", [](unsigned r, uint64_t k) { return f_value(r, k, factorize_trial(k)).value; }, py::arg("r"),
        py::arg("k"));
    m.def(
        "tau_table",
        [](unsigned r, uint64_t limit) {
            auto t = tau_table(r, limit);
            return std::vector<uint64_t>(t.values().begin(), t.values().end());
        },
        py::arg("r"), py::arg("limit"));
    m.def(
        "tau_partial_sum_check",
        [](unsigned r, const std::vector<uint64_t>& xs) {
            py::list out;
            for (const auto& row : tau_partial_sum_check(r, xs)) out.append(py::make_tuple(row.x, row.sum, row.ratio));
            return out;
        },
        py::arg("r"), py::arg("xs"));
    m.def("omega_vs_tau_check", &omega_vs_tau_check, py::arg("r"), py::arg("limit"), py::arg("table"));

    py::class_<ProgressionReport>(m, "ProgressionReport")
        .def_readonly("x", &ProgressionReport::x)
        .def_readonly("r", &ProgressionReport::r)
        .def_readonly("k", &ProgressionReport::k)
        .def_readonly("l", &ProgressionReport::l)
        .def_readonly("g", &ProgressionReport::g)
        .def_readonly("s", &ProgressionReport::s)
        .def_readonly("t", &ProgressionReport::t)
        .def_readonly("g_is_r_free", &ProgressionReport::g_is_r_free)
        .def_readonly("rewrite_exact", &ProgressionReport::rewrite_exact)
        .def_readonly("R", &ProgressionReport::R)
        .def_readonly("main_term", &ProgressionReport::main_term)
        .def_readonly("main_term_error", &ProgressionReport::main_term_error)
        .def_readonly("error_term", &ProgressionReport::error_term)
        .def("to_json", [](const ProgressionReport& r) { return to_json(r); });

    py::class_<DecompositionReport>(m, "DecompositionReport")
        .def_readonly("z", &DecompositionReport::z)
        .def_readonly("small_sum", &DecompositionReport::small_sum)
        .def_readonly("large_sum", &DecompositionReport::large_sum)
        .def_readonly("R", &DecompositionReport::R)
        .def_readonly("small_main", &DecompositionReport::small_main)
        .def_readonly("small_error_scale", &DecompositionReport::small_error_scale)
        .def_readonly("large_bound_scale", &DecompositionReport::large_bound_scale)
        .def_readonly("cofactors", &DecompositionReport::cofactors)
        .def_readonly("rewrite_exact", &DecompositionReport::rewrite_exact)
        .def("identity_holds", &DecompositionReport::identity_holds);

    m.def("count_r_free_in_progression", &count_r_free_in_progression, py::arg("table"), py::arg("x"), py::arg("r"),
          py::arg("k"), py::arg("l"));
    m.def("error_term", &error_term, py::arg("table"), py::arg("x"), py::arg("r"), py::arg("k"), py::arg("l"));
    m.def(
        "decompose",
        [](const SieveTable& t, uint64_t x, unsigned r, uint64_t k, uint64_t l, double z) {
            return decompose(t, x, r, k, l, z);
        },
        py::arg("table"), py::arg("x"), py::arg("r"), py::arg("k"), py::arg("l"), py::arg("z"));
    m.def(
        "lemma_bound_probe",
        [](const SieveTable& t, uint64_t x, unsigned r, uint64_t k, uint64_t l, double z) {
            auto p = lemma_bound_probe(t, x, r, k, l, z);
            return py::make_tuple(p.small_residual, p.large_ratio);
        },
        py::arg("table"), py::arg("x"), py::arg("r"), py::arg("k"), py::arg("l"), py::arg("z"));

    m.def("count_solutions_bruteforce", &count_solutions_bruteforce, py::arg("r"), py::arg("a"), py::arg("s"));
    m.def(
        "count_solutions", [](unsigned r, uint64_t a, uint64_t s) { return count_solutions(r, a, s, factorize_trial(s)).count; },
        py::arg("r"), py::arg("a"), py::arg("s"));
    m.def(
        "bound_sweep",
        [](unsigned r, uint64_t s_max) {
            auto w = bound_sweep(r, s_max).worst;
            py::dict d;
            d["ratio"] = w.ratio;
            d["r"] = w.r;
            d["a"] = w.a;
            d["s"] = w.s;
            d["count"] = w.count;
            return d;
        },
        py::arg("r"), py::arg("s_max"));

    m.def("modulus_threshold", &modulus_threshold, py::arg("x"), py::arg("r"), py::arg("A"));
    m.def(
        "max_error_for_modulus",
        [](const SieveTable& t, uint64_t x, unsigned r, uint64_t k) {
            auto mm = max_error_for_modulus(t, x, r, k);
            return py::make_tuple(mm.l, mm.max_abs_error);
        },
        py::arg("table"), py::arg("x"), py::arg("r"), py::arg("k"));

    py::class_<BvRow>(m, "BvRow")
        .def_readonly("x", &BvRow::x)
        .def_readonly("r", &BvRow::r)
        .def_readonly("A", &BvRow::A)
        .def_readonly("K", &BvRow::K)
        .def_readonly("S", &BvRow::S)
        .def_readonly("normalized", &BvRow::normalized)
        .def_readonly("wall_seconds", &BvRow::wall_seconds);

    m.def(
        "run_experiment",
        [](unsigned r, double A, std::vector<uint64_t> xs, unsigned threads) {
            ExperimentConfig c;
            c.r = r;
            c.A = A;
            c.xs = std::move(xs);
            c.threads = threads;
            py::gil_scoped_release release;
            return run_experiment(c).rows;
        },
        py::arg("r"), py::arg("A"), py::arg("xs"), py::arg("threads") = 1);
    m.def(
        "experiment_csv",
        [](const std::vector<BvRow>& rows, bool include_timing) {
            std::ostringstream out;
            write_csv(out, rows, include_timing);
            return out.str();
        },
        py::arg("rows"), py::arg("include_timing") = false);
}
