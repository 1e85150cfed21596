#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "modloc/freefield.hpp"
#include "modloc/standard.hpp"
#include "modloc/suites.hpp"

namespace py = pybind11;
using namespace modloc;

namespace {

// subspaces cross the boundary as complex column vectors spanning K over the reals
RealSubspace subspace_from_columns(const cmat& cols) { return real_span(static_cast<int>(cols.rows()), realify(cols)); }

py::dict modular_summary(const cmat& cols) {
    const RealSubspace k = subspace_from_columns(cols);
    const RealLinearMap s = tomita_operator(k);
    const ModularData md = modular_data(s);
    std::vector<double> angles;
    for (const auto& b : fiberize(k).blocks) angles.push_back(b.theta);
    py::dict out;
    out["delta_eigenvalues"] = rvec(md.eigenvalues);
    out["condition"] = md.condition;
    out["fiber_angles"] = angles;
    out["delta"] = md.delta.complex_form();
    // j is antilinear: j x = A conj(x)
    out["j_matrix"] = md.j.complex_form();
    return out;
}

}  // namespace

PYBIND11_MODULE(_modloc, m) {
    m.doc() = "modular localization checks for a scalar free field in 1+1 dimensions";

    // UsageError derives from std::invalid_argument and arrives in Python as ValueError
    py::register_exception<DomainError>(m, "DomainError", PyExc_ArithmeticError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_RuntimeError);

    m.def("default_config", [] { return to_yaml(ExperimentConfig{}); }, "default config as YAML text");
    m.def("normalize_config", [](const std::string& text) { return to_yaml(parse_config(text)); }, py::arg("yaml_text"),
          "parse, validate and re-emit a config with every default filled in");
    m.def("schema", &schema_text);
    m.def("list_checks", [] {
        std::vector<py::dict> out;
        for (const auto& c : check_registry()) {
            py::dict d;
            d["name"] = c.name;
            d["criterion"] = c.criterion;
            d["suite"] = c.suite;
            d["statement"] = c.anchor;
            d["refinement_sensitive"] = c.refinement_sensitive;
            out.push_back(std::move(d));
        }
        return out;
    });
    m.def(
        "run_json",
        [](const std::string& text, std::vector<int> criteria, bool include_volatile) {
            const ExperimentConfig cfg = parse_config(text);
            RunOptions opt;
            opt.criteria.insert(criteria.begin(), criteria.end());
            Report r;
            {
                py::gil_scoped_release release;
                r = run_experiment(cfg, opt);
            }
            return report_json(r, include_volatile);
        },
        py::arg("yaml_text"), py::arg("criteria") = std::vector<int>{}, py::arg("include_volatile") = true);
    m.def(
        "refine_json",
        [](const std::string& text, const std::vector<int>& ladder) {
            const ExperimentConfig cfg = parse_config(text);
            Report r;
            {
                py::gil_scoped_release release;
                r = refine_experiment(cfg, ladder);
            }
            return report_json(r);
        },
        py::arg("yaml_text"), py::arg("ladder"));

    m.def(
        "is_standard",
        [](const cmat& cols) {
            const auto c = is_standard(subspace_from_columns(cols));
            return py::make_tuple(c.standard, c.dim_sum, c.dim_intersection);
        },
        py::arg("columns"), "(standard, dim_R(K + iK), dim_R(K ∩ iK)) for the real span of the columns");
    m.def("modular_data", &modular_summary, py::arg("columns"));

    m.def(
        "one_particle",
        [](double mass, double theta_max, int n_points, std::pair<double, double> center, double radius) {
            const FreeFieldModel model(mass, theta_max, n_points);
            const TestFunction2 f = TestFunction2::unchecked({center.first, center.second}, radius);
            return py::make_tuple(rvec(model.theta()), cvec(embed(f, model).values));
        },
        py::arg("mass"), py::arg("theta_max"), py::arg("n_points"), py::arg("center"), py::arg("radius") = 0.5,
        "rapidity grid and one-particle vector of a smooth bump");
    m.def(
        "bw_residual",
        [](double mass, double theta_max, int n_points, std::pair<double, double> center, double radius) {
            const FreeFieldModel model(mass, theta_max, n_points);
            const TestFunction2 f = TestFunction2::unchecked({center.first, center.second}, radius);
            const BwResult r = bw_diagnostics(embed(f, model).values, model);
            py::dict out;
            out["residual"] = r.residual;
            out["tail_mass"] = r.tail_mass;
            out["log10_amplified_tail"] = r.log10_amplified_tail;
            out["band_fraction"] = r.band_fraction;
            return out;
        },
        py::arg("mass"), py::arg("theta_max"), py::arg("n_points"), py::arg("center"), py::arg("radius") = 0.5,
        "right-wedge fixed-point residual and domain diagnostics of a bump");
}
