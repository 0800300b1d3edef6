#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ispval/estimators.hpp"
#include "ispval/inference.hpp"
#include "ispval/oracle.hpp"
#include "ispval/special.hpp"

namespace py = pybind11;
using namespace ispval;

namespace {

std::vector<WeightedDraw> draws_from_lists(const std::vector<double>& stats,
                                           const std::vector<double>& log_weights,
                                           bool normalized) {
    if (stats.size() != log_weights.size())
        throw ShapeError("stats and log_weights must have the same length");
    std::vector<WeightedDraw> out;
    out.reserve(stats.size());
    for (std::size_t i = 0; i < stats.size(); ++i)
        out.emplace_back(stats[i], LogWeight(log_weights[i], normalized));
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Importance-sampling p-values with validity corrections";

    py::register_exception<Error>(m, "IspvalError");

    m.def(
        "p_hat",
        [](double obs_stat, const std::vector<double>& stats,
           const std::vector<double>& log_weights) {
            return p_hat(obs_stat, draws_from_lists(stats, log_weights, true));
        },
        py::arg("obs_stat"), py::arg("stats"), py::arg("log_weights"));

    m.def(
        "p_tilde",
        [](double obs_stat, const std::vector<double>& stats,
           const std::vector<double>& log_weights) {
            return p_tilde(obs_stat, draws_from_lists(stats, log_weights, false));
        },
        py::arg("obs_stat"), py::arg("stats"), py::arg("log_weights"));

    m.def(
        "p_hat_star",
        [](double obs_stat, double obs_log_w, const std::vector<double>& stats,
           const std::vector<double>& log_weights) {
            ObservedPoint obs(obs_stat, LogWeight(obs_log_w, true));
            return p_hat_star(obs, draws_from_lists(stats, log_weights, true));
        },
        py::arg("obs_stat"), py::arg("obs_log_w"), py::arg("stats"),
        py::arg("log_weights"));

    m.def(
        "p_tilde_star",
        [](double obs_stat, double obs_log_w, const std::vector<double>& stats,
           const std::vector<double>& log_weights, bool normalized) {
            ObservedPoint obs(obs_stat, LogWeight(obs_log_w, normalized));
            return p_tilde_star(obs, draws_from_lists(stats, log_weights, normalized));
        },
        py::arg("obs_stat"), py::arg("obs_log_w"), py::arg("stats"),
        py::arg("log_weights"), py::arg("normalized") = false);

    m.def("two_sided_combine", &two_sided_combine, py::arg("p_plus"), py::arg("p_minus"));
    m.def("wald_upper_limit", &wald_upper_limit, py::arg("p_hat_value"), py::arg("se"),
          py::arg("level"));
    m.def(
        "ess_diagnostic",
        [](const std::vector<double>& log_weights) {
            std::vector<WeightedDraw> draws;
            draws.reserve(log_weights.size());
            for (double lw : log_weights) draws.emplace_back(0.0, LogWeight(lw, false));
            return ess_diagnostic(draws);
        },
        py::arg("log_weights"));

    m.def("normal_cdf", &normal_cdf, py::arg("x"));
    m.def("normal_quantile", &normal_quantile, py::arg("p"));
    m.def("gaussian_true_pvalue", &gaussian_true_pvalue, py::arg("x"));

    m.def(
        "lemma1_check",
        [](const std::vector<double>& t, const std::vector<double>& w, double alpha) {
            auto res = lemma1_check(t, w, alpha);
            return py::make_tuple(res.lhs, res.holds);
        },
        py::arg("t"), py::arg("w"), py::arg("alpha"));

    m.def(
        "bonferroni",
        [](const std::vector<double>& pvalues, double alpha, std::size_t n_tests) {
            return bonferroni(pvalues, alpha, n_tests).rejected;
        },
        py::arg("pvalues"), py::arg("alpha"), py::arg("n_tests"));

    m.def(
        "invert_confidence_set",
        [](const std::vector<double>& grid, const py::function& pvalue_at, double alpha) {
            ConfidenceSet cs = invert_confidence_set(
                grid, [&](double th) { return pvalue_at(th).cast<double>(); }, alpha);
            py::dict out;
            out["grid"] = cs.grid;
            out["pvalues"] = cs.pvalues;
            out["retained"] = cs.retained;
            out["contiguous"] = cs.contiguous;
            if (cs.hull)
                out["hull"] = py::make_tuple(cs.hull->first, cs.hull->second);
            else
                out["hull"] = py::none();
            return out;
        },
        py::arg("grid"), py::arg("pvalue_at"), py::arg("alpha"));
}
