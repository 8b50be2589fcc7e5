#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "stwall/antenna_link.hpp"
#include "stwall/cli.hpp"
#include "stwall/design_sweep.hpp"
#include "stwall/error.hpp"
#include "stwall/inverse.hpp"
#include "stwall/layered_em.hpp"
#include "stwall/thermal.hpp"

namespace py = pybind11;
using namespace stwall;

namespace {

using LayerSpec = std::vector<std::pair<std::string, double>>;

const MaterialDatabase& builtin() {
    static const MaterialDatabase db = MaterialDatabase::builtin();
    return db;
}

LayerStack stack_of(const std::optional<LayerSpec>& layers) {
    if (!layers) return reference_wall(builtin());
    LayerStack s;
    for (const auto& [name, t] : *layers) s.layers.push_back({builtin().lookup(name), t});
    s.validate();
    return s;
}

py::dict link_dict(const LinkPoint& p) {
    py::dict d;
    d["frequency_ghz"] = p.frequency_ghz;
    d["wall_db"] = p.wall_db;
    d["antenna_db"] = p.antenna_db;
    d["combined_db"] = p.combined_db;
    d["improvement_db"] = p.improvement_db();
    return d;
}

} // namespace

PYBIND11_MODULE(_stwall, m) {
    m.doc() = "Through-wall RF links in insulated concrete walls";

    py::register_exception<NotFound>(m, "NotFound", PyExc_KeyError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

    m.def("materials", [] {
        std::vector<std::string> names;
        for (const auto& mat : builtin().list()) names.push_back(mat.name);
        return names;
    });

    m.def("permittivity", [](const std::string& name, double f_ghz) {
        const auto e = builtin().lookup(name).permittivity(f_ghz);
        return e.value();
    }, py::arg("material"), py::arg("f_ghz"));

    m.def("transmission", [](double f_ghz, double theta_deg, const std::string& pol, std::optional<LayerSpec> layers) {
        const auto c = tmm_coefficients(stack_of(layers), Incidence{f_ghz, theta_deg, polarization_from_string(pol)});
        return std::make_pair(c.t, c.r);
    }, py::arg("f_ghz"), py::arg("theta_deg") = 0.0, py::arg("pol") = "TE", py::arg("layers") = py::none(),
       "Complex (t, r) of a layer stack, default the reference wall.");

    m.def("u_value", [](std::optional<LayerSpec> layers, double r_si, double r_se) {
        return u_value_analytical(stack_of(layers), ThermalBoundary{r_si, r_se, 293.0, 271.0}).u;
    }, py::arg("layers") = py::none(), py::arg("r_si") = 0.13, py::arg("r_se") = 0.04);

    m.def("u_value_fv", [](double separation_mm, bool with_antennas, double refinement, double tol) {
        UnitCell cell;
        if (with_antennas) {
            cell = reference_unit_cell(builtin(), separation_mm);
        } else {
            cell.wall = reference_wall(builtin());
            cell = cell.with_separation(separation_mm);
        }
        VoxelOptions vo;
        vo.refinement = refinement;
        py::gil_scoped_release release;
        return cell_u_value(cell, ThermalBoundary{}, vo, tol).u;
    }, py::arg("separation_mm") = 150.0, py::arg("with_antennas") = true, py::arg("refinement") = 1.0,
       py::arg("tol") = 1e-8);

    m.def("cable_loss_db", [](double f_ghz) {
        return coax_attenuation(reference_unit_cell(builtin()).system->coax, f_ghz).total_db;
    }, py::arg("f_ghz"));

    m.def("link", [](double f_ghz, double separation_mm, double theta_deg, const std::string& pol,
                     const std::string& mode) {
        return link_dict(link_point(reference_unit_cell(builtin(), separation_mm), f_ghz, theta_deg,
                                    polarization_from_string(pol), combine_mode_from_string(mode)));
    }, py::arg("f_ghz"), py::arg("separation_mm") = 150.0, py::arg("theta_deg") = 0.0, py::arg("pol") = "RHCP",
       py::arg("mode") = "incoherent");

    m.def("improvement_onset_ghz", [](double separation_mm) {
        return improvement_onset_ghz(reference_unit_cell(builtin(), separation_mm));
    }, py::arg("separation_mm") = 150.0);

    m.def("slab_transmission", [](double a, double b, double c, double d, double thickness_mm, double f_ghz) {
        return slab_transmission(PermittivityModel(a, b, c, d), thickness_mm, f_ghz);
    }, py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"), py::arg("thickness_mm"), py::arg("f_ghz"));

    m.def("fit_permittivity", [](const std::vector<double>& f_ghz, const std::vector<double>& s21_db,
                                 double thickness_mm, int starts, std::uint64_t seed) {
        FitOptions o;
        o.n_starts = starts;
        o.seed = seed;
        const auto spectrum = make_magnitude_spectrum(f_ghz, s21_db);
        FitResult r;
        {
            py::gil_scoped_release release;
            r = fit_permittivity(spectrum, thickness_mm, o);
        }
        py::dict d;
        d["a"] = r.model.a();
        d["b"] = r.model.b();
        d["c"] = r.model.c();
        d["d"] = r.model.d();
        d["residual_db"] = r.residual_db;
        d["converged"] = r.converged;
        d["warnings"] = r.warnings;
        return d;
    }, py::arg("f_ghz"), py::arg("s21_db"), py::arg("thickness_mm"), py::arg("starts") = 16,
       py::arg("seed") = 20240521);

    m.def("run_cli", [](const std::vector<std::string>& args) {
        std::vector<const char*> argv{"stwall"};
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        int code;
        {
            py::gil_scoped_release release;
            code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
    }, py::arg("args"), "Run the command-line tool in-process; returns (exit_code, stdout, stderr).");
}
