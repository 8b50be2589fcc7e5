// One PASS/FAIL line per acceptance criterion; exit status is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "stwall/antenna_link.hpp"
#include "stwall/design_sweep.hpp"
#include "stwall/fdtd.hpp"
#include "stwall/inverse.hpp"
#include "stwall/layered_em.hpp"
#include "stwall/thermal.hpp"

using namespace stwall;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int n, bool ok, const std::string& detail) {
    std::printf("criterion %d: %s  %s\n", n, ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

template <class... Args>
std::string fmt(const char* f, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

const MaterialDatabase& db() {
    static const MaterialDatabase d = MaterialDatabase::builtin();
    return d;
}

double wall_loss_db(const LayerStack& wall, double f) {
    return -amplitude_db(tmm_coefficients(wall, Incidence{f, 0.0, Polarization::TE}).t);
}

void bare_wall_loss() {
    const auto t0 = Clock::now();
    const LayerStack wall = reference_wall(db());
    const double l35 = wall_loss_db(wall, 3.5), l8 = wall_loss_db(wall, 8.0);
    const double dt = seconds_since(t0);
    report(1, std::abs(l35 - 23.2) <= 1.0 && std::abs(l8 - 42.5) <= 1.0 && dt < 1.0,
           fmt("loss %.2f dB @3.5 GHz, %.2f dB @8 GHz (target 23.2 / 42.5 +-1.0), %.3f s", l35, l8, dt));
}

void fdtd_cross_check() {
    const auto t0 = Clock::now();
    const LayerStack wall = reference_wall(db());
    const auto fd = fdtd_spectrum(wall, linear_grid(1.0, 8.0, 15));
    double worst = 0.0;
    for (std::size_t i = 0; i < fd.spectrum.size(); ++i)
        worst = std::max(worst, std::abs(amplitude_db(fd.spectrum.t[i]) + wall_loss_db(wall, fd.spectrum.frequencies_ghz[i])));
    const double dt = seconds_since(t0);
    report(2, fd.spectrum.size() > 0 && worst <= 0.5 && dt < 120.0,
           fmt("max |TMM - FDTD| %.4f dB over %zu points in %.2f-%.2f GHz (%zu dropped), %.1f s", worst,
               fd.spectrum.size(), fd.valid_min_ghz, fd.valid_max_ghz, fd.dropped_ghz.size(), dt));
}

void bare_wall_u() {
    const ThermalBoundary bc;
    const double ua = u_value_analytical(reference_wall(db()), bc).u;
    UnitCell cell;
    cell.wall = reference_wall(db());
    const auto t0 = Clock::now();
    const auto fv = solve_steady_state(voxelize_unit_cell(cell.with_separation(150.0)), bc);
    const double dt = seconds_since(t0);
    report(3, std::abs(ua - 0.15) <= 0.005 && std::abs(fv.u - 0.15) <= 0.005 && fv.converged && dt < 60.0,
           fmt("analytical %.5f, FV %.5f W/(m^2 K) (target 0.15 +-0.005), FV %.2f s", ua, fv.u, dt));
}

struct CellSolve {
    double u = 0.0, t_min = 0.0, t_max = 0.0, balance = 0.0, tolerance = 0.0;
    bool converged = false;
};

CellSolve antenna_cell_u() {
    const ThermalBoundary bc;
    const auto t0 = Clock::now();
    SolverOptions opt;
    const auto sol = solve_temperature(voxelize_unit_cell(reference_unit_cell(db(), 150.0)), bc, opt);
    const double dt = seconds_since(t0);
    const double bare = u_value_analytical(reference_wall(db()), bc).u;
    const auto [lo, hi] = std::minmax_element(sol.temperature_k.begin(), sol.temperature_k.end());
    const CellSolve out{sol.result.u, *lo, *hi, sol.result.balance_error(), opt.tolerance, sol.result.converged};
    report(4, std::abs(out.u - 0.16) <= 0.015 && out.u > bare && out.converged,
           fmt("U %.5f W/(m^2 K) (target 0.16 +-0.015), bare wall %.5f, %.2f s", out.u, bare, dt));
    return out;
}

void cable_losses() {
    const CoaxSpec coax = reference_unit_cell(db()).system->coax;
    const double l35 = coax_attenuation(coax, 3.5).total_db, l8 = coax_attenuation(coax, 8.0).total_db;
    report(5, std::abs(l35 - 3.7) <= 0.5 && std::abs(l8 - 6.3) <= 0.5,
           fmt("%.2f dB @3.5 GHz, %.2f dB @8 GHz over %.2f m (target 3.7 / 6.3 +-0.5)", l35, l8, coax.length_m));
}

void link_improvements() {
    const auto at = [](double s) {
        return link_point(reference_unit_cell(db(), s), 8.0, 0.0, Polarization::RHCP, CombineMode::Incoherent)
            .improvement_db();
    };
    const double i150 = at(150.0), i90 = at(90.0);
    const auto onset = improvement_onset_ghz(reference_unit_cell(db(), 150.0));
    const bool onset_ok = onset && *onset >= 2.0 && *onset <= 3.5;
    report(6, std::abs(i150 - 17.0) <= 3.0 && std::abs(i90 - 22.0) <= 3.0 && onset_ok,
           fmt("improvement @8 GHz %.2f dB at 150 mm (17 +-3), %.2f dB at 90 mm (22 +-3), onset %s GHz ([2.0, 3.5])",
               i150, i90, onset ? fmt("%.3f", *onset).c_str() : "none"));
}

SweepResult feasibility_boundary() {
    const auto t0 = Clock::now();
    const SweepConfig cfg;
    const UnitCell tmpl = reference_unit_cell(db());
    const SweepResult sweep = run_sweep(cfg, tmpl);
    const auto mf = min_feasible_separation(cfg, tmpl, false, &sweep);
    const double dt = seconds_since(t0);
    const double step = cfg.separations_mm[1] - cfg.separations_mm[0];

    bool ok = false;
    std::string detail;
    if (!mf.separation_mm) {
        detail = "no feasible separation";
    } else if (*mf.separation_mm == 90.0) {
        ok = true;
        detail = fmt("90 mm, U = %.4f", mf.u);
    } else if (std::abs(*mf.separation_mm - 90.0) <= step + 1e-9) {
        // One grid step off is accepted only when the boundary row is within 0.005 of the limit.
        ok = std::abs(mf.u - cfg.u_limit) <= 0.005;
        detail = fmt("%.0f mm, U = %.4f, |U - limit| = %.4f (one-step allowance needs <= 0.005)", *mf.separation_mm,
                     mf.u, std::abs(mf.u - cfg.u_limit));
    } else {
        detail = fmt("%.0f mm, U = %.4f (expected 90 mm)", *mf.separation_mm, mf.u);
    }
    if (const SweepRow* r90 = sweep.row(90.0)) detail += fmt("; U(90 mm) = %.4f", r90->thermal.u);
    report(7, ok, detail + fmt(", sweep of %zu separations %.1f s", sweep.rows.size(), dt));
    return sweep;
}

double lossless_energy_error() {
    const LayerStack stack{{{Material("a", FixedPermittivity{5.0, 0.0}, 1.0), 70.0},
                            {Material("b", FixedPermittivity{1.1, 0.0}, 1.0), 220.0},
                            {Material("c", FixedPermittivity{9.0, 0.0}, 1.0), 150.0}}};
    double worst = 0.0;
    for (double f : linear_grid(1.0, 8.0, 71))
        for (double th : {0.0, 30.0, 60.0})
            for (Polarization p : {Polarization::TE, Polarization::TM}) {
                const auto c = tmm_coefficients(stack, Incidence{f, th, p});
                worst = std::max(worst, std::abs(std::norm(c.t) + std::norm(c.r) - 1.0));
            }
    return worst;
}

std::string csv_rows(const SweepResult& r, double separation_mm) {
    SweepResult one;
    if (const SweepRow* row = r.row(separation_mm)) one.rows.push_back(*row);
    std::ostringstream out;
    write_sweep_csv(out, one);
    return out.str();
}

void properties(const CellSolve& cell, const SweepResult& sweep) {
    std::vector<std::string> failed;

    const double energy = lossless_energy_error();
    if (energy > 1e-10) failed.push_back(fmt("lossless |t|^2+|r|^2 error %.2e", energy));

    const ThermalBoundary bc;
    if (cell.t_min < bc.t_se_air || cell.t_max > bc.t_si_air) failed.push_back("FV maximum principle");
    if (cell.balance > cell.tolerance) failed.push_back(fmt("FV energy balance %.2e", cell.balance));

    const PermittivityModel truth(5.84, 0.0, 0.205, 0.06);
    const auto f = linear_grid(2.0, 8.0, 61);
    std::vector<cplx> t;
    for (double x : f) t.push_back(slab_transmission(truth, 290.0, x));
    const auto fit = fit_permittivity(make_spectrum(f, t), 290.0);
    if (!(fit.residual_db <= 0.1) || std::abs(fit.model.a() - 5.84) > 0.05 || std::abs(fit.model.c() - 0.205) > 0.02)
        failed.push_back(fmt("fit round trip a=%.4f c=%.4f residual %.4f dB", fit.model.a(), fit.model.c(),
                             fit.residual_db));

    std::vector<const SweepRow*> rows;
    for (const auto& r : sweep.rows) rows.push_back(&r);
    std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->separation_mm < b->separation_mm; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (!(rows[i]->thermal.u < rows[i - 1]->thermal.u))
            failed.push_back(fmt("U not decreasing at %.0f mm", rows[i]->separation_mm));
        if (rows[i - 1]->feasible && !rows[i]->feasible)
            failed.push_back(fmt("feasibility not monotone at %.0f mm", rows[i]->separation_mm));
        if (rows[i]->mean_improvement_db() > rows[i - 1]->mean_improvement_db() + 1e-9)
            failed.push_back(fmt("improvement grows with separation at %.0f mm", rows[i]->separation_mm));
    }
    for (const auto* r : rows)
        if (!(r->thermal.u > sweep.bare_u)) failed.push_back(fmt("U below bare wall at %.0f mm", r->separation_mm));

    // Re-running a row in isolation reproduces its CSV bytes.
    SweepConfig again;
    again.separations_mm = {rows.empty() ? 150.0 : rows[rows.size() / 2]->separation_mm};
    const auto rerun = run_sweep(again, reference_unit_cell(db()));
    if (csv_rows(rerun, again.separations_mm[0]) != csv_rows(sweep, again.separations_mm[0]))
        failed.push_back("sweep CSV differs on re-run");
    std::ostringstream a, b;
    write_spectrum_csv(a, transmission_spectrum(reference_wall(db()), 1.0, 8.0, 141, 0.0, Polarization::RHCP));
    write_spectrum_csv(b, transmission_spectrum(reference_wall(db()), 1.0, 8.0, 141, 0.0, Polarization::RHCP));
    if (a.str() != b.str()) failed.push_back("transmission CSV differs on re-run");

    std::string detail = fmt("energy %.1e, T in [%.3f, %.3f] K, balance %.1e, fit residual %.2e dB, %zu sweep rows",
                             energy, cell.t_min, cell.t_max, cell.balance, fit.residual_db, rows.size());
    for (const auto& s : failed) detail += "; " + s;
    report(8, failed.empty(), detail);
}

} // namespace

int main() {
    try {
        bare_wall_loss();
        fdtd_cross_check();
        bare_wall_u();
        const CellSolve cell = antenna_cell_u();
        cable_losses();
        link_improvements();
        const SweepResult sweep = feasibility_boundary();
        properties(cell, sweep);
    } catch (const std::exception& e) {
        std::printf("acceptance aborted: %s\n", e.what());
        return 1;
    }
    std::printf("%d of 8 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
