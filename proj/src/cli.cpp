#include "stwall/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "stwall/error.hpp"
#include "stwall/fdtd.hpp"
#include "stwall/inverse.hpp"
#include "stwall/scenario.hpp"

namespace stwall {

namespace {

// Plain numbers only: "8GHz" or "70mm" are rejected rather than converted.
double strict_number(const std::string& text, const std::string& what) {
    double v = 0.0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v))
        throw InvalidArgument(what + ": '" + text + "' is not a plain number (units are implied)");
    return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    if (!text.empty() && text.back() == sep) out.emplace_back();
    return out;
}

// "start:stop:n" frequency grid.
std::vector<double> parse_band(const std::string& text) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw InvalidArgument("--band expects START:STOP:POINTS in GHz");
    const double a = strict_number(parts[0], "--band"), b = strict_number(parts[1], "--band");
    const double n = strict_number(parts[2], "--band");
    if (!(n >= 1.0) || n != std::floor(n)) throw InvalidArgument("--band point count must be a positive integer");
    if (!(b >= a) || !(a > 0.0)) throw InvalidArgument("--band needs 0 < START <= STOP");
    return linear_grid(a, b, static_cast<std::size_t>(n));
}

// "a,b,c" or "start:stop:step".
std::vector<double> parse_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        const auto parts = split(text, ':');
        if (parts.size() != 3) throw InvalidArgument(what + " range expects START:STOP:STEP");
        const double a = strict_number(parts[0], what), b = strict_number(parts[1], what);
        const double step = strict_number(parts[2], what);
        if (!(step > 0.0) || b < a) throw InvalidArgument(what + " range needs START <= STOP and STEP > 0");
        for (int i = 0; a + i * step <= b + 1e-9; ++i) out.push_back(a + i * step);
        return out;
    }
    for (const auto& item : split(text, ','))
        if (!item.empty()) out.push_back(strict_number(item, what));
    if (out.empty()) throw InvalidArgument(what + " list is empty");
    return out;
}

Bounds parse_bounds(const std::string& text, const std::string& what) {
    const auto parts = split(text, ':');
    if (parts.size() != 2) throw InvalidArgument(what + " expects LO:HI");
    return {strict_number(parts[0], what), strict_number(parts[1], what)};
}

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

// CSV destination: a file, or stdout with the summary moved to stderr.
struct Outputs {
    std::ofstream file;
    std::ostream* csv;
    std::ostream* summary;

    Outputs(const std::string& path, std::ostream& out, std::ostream& err) {
        if (path.empty()) {
            csv = &out;
            summary = &err;
        } else {
            file.open(path);
            if (!file) throw InvalidArgument("cannot write " + path);
            csv = &file;
            summary = &out;
        }
    }
};

struct Common {
    std::string materials_file;
    std::string scenario_file;
};

MaterialDatabase load_materials(const Common& common) {
    MaterialDatabase db = MaterialDatabase::builtin();
    if (const char* env = std::getenv(kMaterialsEnv); env && *env) db = MaterialDatabase::load(env);
    if (!common.materials_file.empty()) db.merge(MaterialDatabase::load(common.materials_file));
    return db;
}

Scenario load(const Common& common) {
    const MaterialDatabase db = load_materials(common);
    return common.scenario_file.empty() ? default_scenario(db) : load_scenario(common.scenario_file, db);
}

UnitCell antenna_cell(const Scenario& sc, double separation_mm) {
    UnitCell cell = sc.cell_or_default();
    if (separation_mm > 0.0) cell = cell.with_separation(separation_mm);
    cell.validate();
    return cell;
}

// ---- transmission

struct TransmissionArgs {
    bool with_antennas = false;
    double theta = 0.0;
    std::string pol = "RHCP";
    std::string band = "1:8:141";
    std::string mode = "incoherent";
    double separation = 0.0;
    std::string out;
};

int cmd_transmission(const Common& common, const TransmissionArgs& a, std::ostream& out, std::ostream& err) {
    const Scenario sc = load(common);
    const auto freqs = parse_band(a.band);
    const Polarization pol = polarization_from_string(a.pol);
    Outputs io(a.out, out, err);
    std::ostream& sum = *io.summary;

    auto loss_at = [&](double f) { return -amplitude_db(tmm_coefficients(sc.wall, Incidence{f, a.theta, pol}).t); };
    sum << fmt("bare wall loss @3.5 GHz: %.2f dB\n", loss_at(3.5));
    sum << fmt("bare wall loss @8 GHz: %.2f dB\n", loss_at(8.0));

    if (!a.with_antennas) {
        write_spectrum_csv(*io.csv, transmission_spectrum(sc.wall, freqs, a.theta, pol));
        return kExitOk;
    }
    const UnitCell cell = antenna_cell(sc, a.separation);
    const CombineMode mode = combine_mode_from_string(a.mode);
    write_link_csv(*io.csv, link_spectrum(cell, freqs, a.theta, pol, mode));
    for (double f : {3.5, 8.0}) {
        const LinkPoint p = link_point(cell, f, a.theta, pol, mode);
        sum << fmt("with antennas (%.0f mm) @%g GHz: loss %.2f dB, improvement %.2f dB\n", cell.sx_mm, f,
                   -p.combined_db, p.improvement_db());
    }
    if (const auto onset = improvement_onset_ghz(cell)) {
        sum << fmt("improvement onset: %.3f GHz\n", *onset);
    } else {
        sum << "improvement onset: none below 8 GHz\n";
    }
    return kExitOk;
}

// ---- uvalue

struct UValueArgs {
    bool fv = false;
    bool analytical = false;
    bool with_antennas = false;
    double separation = 0.0;
    double tol = 0.0;
    double refinement = 0.0;
    std::string preconditioner;
    std::string vtk;
};

int cmd_uvalue(const Common& common, const UValueArgs& a, std::ostream& out) {
    const Scenario sc = load(common);
    bool analytical = a.analytical, fv = a.fv;
    if (!analytical && !fv) (a.with_antennas ? fv : analytical) = true;

    if (analytical) {
        const UValueResult r = u_value_analytical(sc.wall, sc.boundary);
        out << fmt("analytical U = %.5f W/(m^2 K) (bare wall)\n", r.u);
    }
    if (!fv) return kExitOk;

    UnitCell cell;
    if (a.with_antennas) {
        cell = antenna_cell(sc, a.separation);
    } else {
        cell.wall = sc.wall;
        if (a.separation > 0.0) cell = cell.with_separation(a.separation);
    }
    VoxelOptions vo = sc.voxel;
    if (a.refinement > 0.0) vo.refinement = a.refinement;
    SolverOptions so = sc.solver;
    if (a.tol > 0.0) so.tolerance = a.tol;
    if (a.preconditioner == "jacobi") so.preconditioner = Preconditioner::Jacobi;
    else if (a.preconditioner == "zline") so.preconditioner = Preconditioner::ZLine;
    else if (a.preconditioner == "multigrid") so.preconditioner = Preconditioner::Multigrid;
    else if (!a.preconditioner.empty()) throw InvalidArgument("unknown preconditioner '" + a.preconditioner + "'");

    const VoxelGrid grid = voxelize_unit_cell(cell, vo);
    const ThermalSolution sol = solve_temperature(grid, sc.boundary, so);
    const UValueResult& r = sol.result;
    out << fmt("FV U = %.5f W/(m^2 K) (%s, %.0f x %.0f mm cell)\n", r.u, a.with_antennas ? "antenna cell" : "bare wall",
               cell.sx_mm, cell.sy_mm);
    out << fmt("  grid %zu x %zu x %zu, %zu iterations, residual %.2e, balance %.2e, %s\n", grid.nx(), grid.ny(),
               grid.nz(), r.iterations, r.residual, r.balance_error(), r.converged ? "converged" : "NOT converged");
    if (!a.vtk.empty()) {
        std::ofstream f(a.vtk);
        if (!f) throw InvalidArgument("cannot write " + a.vtk);
        write_vtk(f, grid, sol.temperature_k);
    }
    return r.converged ? kExitOk : kExitInfeasible;
}

// ---- fit-permittivity

struct FitArgs {
    std::string input;
    double thickness = 0.0;
    std::string reference;
    bool interpolate = false;
    std::string a_bounds, c_bounds, d_bounds;
    double b = 0.0;
    int starts = 16;
    std::uint64_t seed = FitOptions{}.seed;
    bool complex_fit = false;
    bool json = false;
};

int cmd_fit(const FitArgs& a, std::ostream& out) {
    if (!(a.thickness > 0.0)) throw InvalidArgument("--thickness must be positive");
    MeasuredSpectrum spec = read_spectrum_file(a.input);
    if (!a.reference.empty()) {
        NormalizeOptions no;
        no.interpolate = a.interpolate;
        spec = normalize_spectrum(spec, read_spectrum_file(a.reference), no);
    }
    FitOptions opt;
    if (!a.a_bounds.empty()) opt.a = parse_bounds(a.a_bounds, "--a-bounds");
    if (!a.c_bounds.empty()) opt.c = parse_bounds(a.c_bounds, "--c-bounds");
    if (!a.d_bounds.empty()) opt.d = parse_bounds(a.d_bounds, "--d-bounds");
    opt.b = a.b;
    opt.n_starts = a.starts;
    opt.seed = a.seed;
    opt.complex_fit = a.complex_fit;
    const FitResult r = fit_permittivity(spec, a.thickness, opt);

    if (a.json) {
        nlohmann::json j{{"a", r.model.a()},         {"b", r.model.b()},
                         {"c", r.model.c()},         {"d", r.model.d()},
                         {"residual_dB", r.residual_db}, {"converged", r.converged},
                         {"iterations", r.iterations}, {"best_start", r.best_start},
                         {"warnings", r.warnings}};
        for (const auto& s : r.starts)
            j["starts"].push_back({{"initial", s.initial}, {"fitted", s.fitted}, {"residual_dB", s.residual_db},
                                   {"iterations", s.iterations}, {"converged", s.converged}});
        out << j.dump(2) << '\n';
    } else {
        out << fmt("a = %.6f\nb = %.6f (fixed)\nc = %.6f\nd = %.6f\n", r.model.a(), r.model.b(), r.model.c(),
                   r.model.d());
        out << fmt("residual = %.4f dB RMS over %zu points, %s after %d iterations (%zu starts, best #%zu)\n",
                   r.residual_db, spec.size(), r.converged ? "converged" : "NOT converged", r.iterations,
                   r.starts.size(), r.best_start);
        for (const auto& w : r.warnings) out << "warning: " << w << '\n';
    }
    return r.converged ? kExitOk : kExitInfeasible;
}

// ---- sweep

struct SweepArgs {
    std::string separations;
    std::string frequencies;
    double u_limit = 0.0;
    std::string mode;
    double tol = 0.0;
    bool refine = false;
    std::string out;
};

int cmd_sweep(const Common& common, const SweepArgs& a, std::ostream& out, std::ostream& err) {
    const Scenario sc = load(common);
    SweepConfig cfg = sc.sweep;
    if (!a.separations.empty()) cfg.separations_mm = parse_list(a.separations, "--separations");
    if (!a.frequencies.empty()) cfg.frequencies_ghz = parse_list(a.frequencies, "--frequencies");
    if (a.u_limit > 0.0) cfg.u_limit = a.u_limit;
    if (!a.mode.empty()) cfg.mode = combine_mode_from_string(a.mode);
    if (a.tol > 0.0) cfg.tolerance = a.tol;
    const UnitCell tmpl = sc.cell_or_default();

    const SweepResult result = run_sweep(cfg, tmpl);
    Outputs io(a.out, out, err);
    write_sweep_csv(*io.csv, result);
    write_sweep_summary(*io.summary, result);

    SweepConfig sorted = cfg;
    std::sort(sorted.separations_mm.begin(), sorted.separations_mm.end());
    const FeasibleSeparation mf = min_feasible_separation(sorted, tmpl, a.refine, &result);
    if (mf.separation_mm) {
        *io.summary << fmt("smallest feasible separation: %.2f mm (U = %.4f)\n", *mf.separation_mm, mf.u);
    } else {
        *io.summary << "smallest feasible separation: none\n";
    }
    for (const auto& r : result.rows)
        if (!r.thermal.converged) return kExitInfeasible;
    return result.selected_mm ? kExitOk : kExitInfeasible;
}

// ---- fdtd-validate

struct FdtdArgs {
    std::string band = "1:8:15";
    double dx = 0.0;
    double sub_band = 0.0;
    double tolerance = 0.5;
    std::string out;
};

int cmd_fdtd(const Common& common, const FdtdArgs& a, std::ostream& out, std::ostream& err) {
    const Scenario sc = load(common);
    const auto freqs = parse_band(a.band);
    FdtdSweepOptions opt;
    if (a.dx > 0.0) opt.base.dx_mm = a.dx;
    opt.sub_band_ghz = a.sub_band;
    const FdtdResult fd = fdtd_spectrum(sc.wall, freqs, opt);

    Outputs io(a.out, out, err);
    *io.csv << "freq_GHz,tmm_dB,fdtd_dB,delta_dB\n";
    double worst = 0.0;
    for (std::size_t i = 0; i < fd.spectrum.size(); ++i) {
        const double f = fd.spectrum.frequencies_ghz[i];
        const double t_tmm = amplitude_db(tmm_coefficients(sc.wall, Incidence{f, 0.0, Polarization::TE}).t);
        const double t_fd = amplitude_db(fd.spectrum.t[i]);
        worst = std::max(worst, std::abs(t_fd - t_tmm));
        *io.csv << fmt("%.6f,%.4f,%.4f,%.4f\n", f, t_tmm, t_fd, t_fd - t_tmm);
    }
    std::ostream& sum = *io.summary;
    sum << fmt("valid band %.3f-%.3f GHz, %zu points compared, %zu dropped\n", fd.valid_min_ghz, fd.valid_max_ghz,
               fd.spectrum.size(), fd.dropped_ghz.size());
    sum << fmt("max |TMM - FDTD| = %.4f dB (tolerance %.2f dB)\n", worst, a.tolerance);
    const bool ok = fd.spectrum.size() > 0 && worst <= a.tolerance;
    sum << (ok ? "agreement: PASS\n" : "agreement: FAIL\n");
    return ok ? kExitOk : kExitInfeasible;
}

// ---- materials list

std::string describe(const ElectricalModel& e) {
    if (const auto* m = std::get_if<PermittivityModel>(&e))
        return fmt("itu a=%g b=%g c=%g d=%g", m->a(), m->b(), m->c(), m->d());
    if (const auto* f = std::get_if<FixedPermittivity>(&e))
        return fmt("fixed eps'=%g eps''=%g", f->eps_real, f->eps_imag);
    const auto& c = std::get<Conductor>(e);
    return fmt("conductor rho=%g Ohm m", c.resistivity);
}

int cmd_materials(const Common& common, bool json, std::ostream& out) {
    const MaterialDatabase db = load_materials(common);
    if (json) {
        out << db.to_json().dump(2) << '\n';
        return kExitOk;
    }
    out << fmt("%-16s %-10s %s\n", "name", "lambda", "electrical");
    for (const auto& m : db.list()) out << fmt("%-16s %-10g %s\n", m.name.c_str(), m.thermal_conductivity,
                                                describe(m.electrical).c_str());
    return kExitOk;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Signal-transmissive wall: EM transmission, thermal transmittance and design sweeps.\n"
                 "Frequencies in GHz, lengths in mm, temperatures in K."};
    app.fallthrough();
    app.require_subcommand(1);
    Common common;
    app.add_option("--materials", common.materials_file, "JSON material file merged over the database")
        ->check(CLI::ExistingFile);
    app.footer(std::string("Environment: ") + kMaterialsEnv + " replaces the built-in material database.");

    auto add_scenario = [&](CLI::App* sub) {
        sub->add_option("-s,--scenario", common.scenario_file, "scenario JSON (default: reference wall)")
            ->check(CLI::ExistingFile);
    };

    TransmissionArgs ta;
    auto* tr = app.add_subcommand("transmission", "plane-wave transmission spectrum (CSV)");
    add_scenario(tr);
    tr->add_flag("--with-antennas", ta.with_antennas, "include the embedded antenna path");
    tr->add_option("--theta", ta.theta, "incidence angle, degrees");
    tr->add_option("--pol", ta.pol, "TE, TM, RHCP or LHCP");
    tr->add_option("--band", ta.band, "START:STOP:POINTS in GHz");
    tr->add_option("--mode", ta.mode, "incoherent, coherent_best or coherent_worst");
    tr->add_option("--separation", ta.separation, "antenna separation (cell size), mm");
    tr->add_option("-o,--out", ta.out, "CSV output file (default stdout)");

    UValueArgs ua;
    auto* uv = app.add_subcommand("uvalue", "thermal transmittance");
    add_scenario(uv);
    uv->add_flag("--fv", ua.fv, "finite-volume solve");
    uv->add_flag("--analytical", ua.analytical, "series-resistance formula");
    uv->add_flag("--with-antennas", ua.with_antennas, "unit cell with the embedded system");
    uv->add_option("--separation", ua.separation, "cell size, mm");
    uv->add_option("--tol", ua.tol, "relative residual tolerance");
    uv->add_option("--refinement", ua.refinement, "mesh refinement factor");
    uv->add_option("--preconditioner", ua.preconditioner, "multigrid, zline or jacobi");
    uv->add_option("--vtk", ua.vtk, "write the temperature field (legacy VTK)");

    FitArgs fa;
    auto* fit = app.add_subcommand("fit-permittivity", "fit a*f^b, c*f^d to a slab transmission spectrum");
    fit->add_option("input", fa.input, "CSV or Touchstone .s2p")->required()->check(CLI::ExistingFile);
    fit->add_option("--thickness", fa.thickness, "slab thickness, mm")->required();
    fit->add_option("--reference", fa.reference, "empty-fixture spectrum to normalize by")->check(CLI::ExistingFile);
    fit->add_flag("--interpolate", fa.interpolate, "resample the reference onto the DUT grid");
    fit->add_option("--a-bounds", fa.a_bounds, "LO:HI");
    fit->add_option("--c-bounds", fa.c_bounds, "LO:HI, S/m");
    fit->add_option("--d-bounds", fa.d_bounds, "LO:HI");
    fit->add_option("--b", fa.b, "fixed exponent of eps'");
    fit->add_option("--starts", fa.starts, "number of simplex starts");
    fit->add_option("--seed", fa.seed, "start-point seed");
    fit->add_flag("--complex", fa.complex_fit, "fit magnitude and phase");
    fit->add_flag("--json", fa.json, "JSON report");

    SweepArgs sa;
    auto* sw = app.add_subcommand("sweep", "separation sweep: U-value and link improvement");
    add_scenario(sw);
    sw->add_option("--separations", sa.separations, "mm: list a,b,c or START:STOP:STEP");
    sw->add_option("--frequencies", sa.frequencies, "GHz: list a,b,c or START:STOP:STEP");
    sw->add_option("--u-limit", sa.u_limit, "W/(m^2 K)");
    sw->add_option("--mode", sa.mode, "incoherent, coherent_best or coherent_worst");
    sw->add_option("--tol", sa.tol, "thermal solver tolerance");
    sw->add_flag("--refine", sa.refine, "bisect the feasibility boundary to 1 mm");
    sw->add_option("-o,--out", sa.out, "CSV output file (default stdout)");

    FdtdArgs da;
    auto* fd = app.add_subcommand("fdtd-validate", "compare TMM with the 1-D FDTD oracle");
    add_scenario(fd);
    fd->add_option("--band", da.band, "START:STOP:POINTS in GHz");
    fd->add_option("--dx", da.dx, "cell size, mm");
    fd->add_option("--sub-band", da.sub_band, "GHz grouped per run (0: one run per frequency)");
    fd->add_option("--tolerance", da.tolerance, "dB");
    fd->add_option("-o,--out", da.out, "CSV output file (default stdout)");

    bool materials_json = false;
    auto* mat = app.add_subcommand("materials", "material database");
    auto* mat_list = mat->add_subcommand("list", "list materials");
    mat_list->add_flag("--json", materials_json, "dump as JSON");
    mat->require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        err << "run '" << sub->get_name() << " --help' for options\n";
        return kExitUsage;
    }

    try {
        if (tr->parsed()) return cmd_transmission(common, ta, out, err);
        if (uv->parsed()) return cmd_uvalue(common, ua, out);
        if (fit->parsed()) return cmd_fit(fa, out);
        if (sw->parsed()) return cmd_sweep(common, sa, out, err);
        if (fd->parsed()) return cmd_fdtd(common, da, out, err);
        if (mat_list->parsed()) return cmd_materials(common, materials_json, out);
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const NotFound& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitUsage;
}

} // namespace stwall
