#include "stwall/design_sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <numeric>
#include <ostream>
#include <thread>

#include "stwall/error.hpp"

namespace stwall {

std::vector<double> SweepConfig::default_separations() {
    std::vector<double> s;
    for (int mm = 70; mm <= 200; mm += 10) s.push_back(mm);
    return s;
}

void SweepConfig::validate(const UnitCell& cell_template) const {
    if (separations_mm.empty()) throw InvalidArgument("sweep needs at least one separation");
    if (frequencies_ghz.empty()) throw InvalidArgument("sweep needs at least one frequency");
    if (!(u_limit > 0.0)) throw InvalidArgument("U limit must be positive");
    if (!(tolerance > 0.0)) throw InvalidArgument("solver tolerance must be positive");
    if (!cell_template.system) throw InvalidArgument("sweep template has no embedded antenna system");
    const double footprint = cell_template.system->antenna.footprint_mm;
    for (double s : separations_mm)
        if (!(s > footprint) || !std::isfinite(s))
            throw InvalidArgument("separation " + std::to_string(s) + " mm does not exceed the antenna footprint");
    for (double f : frequencies_ghz)
        if (!(f > 0.0) || !std::isfinite(f)) throw InvalidArgument("sweep frequencies must be positive");
    boundary.validate();
}

double SweepRow::mean_improvement_db() const {
    if (link.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& p : link) sum += p.improvement_db();
    return sum / link.size();
}

const SweepRow* SweepResult::row(double separation_mm) const {
    for (const auto& r : rows)
        if (r.separation_mm == separation_mm) return &r;
    return nullptr;
}

UValueResult cell_u_value(const UnitCell& cell, const ThermalBoundary& bc, const VoxelOptions& voxel, double tol) {
    return solve_steady_state(voxelize_unit_cell(cell, voxel), bc, tol);
}

namespace {

SweepRow evaluate(const SweepConfig& cfg, const UnitCell& cell_template, double separation_mm) {
    const UnitCell cell = cell_template.with_separation(separation_mm);
    SweepRow row;
    row.separation_mm = separation_mm;
    row.thermal = cell_u_value(cell, cfg.boundary, cfg.voxel, cfg.tolerance);
    row.feasible = row.thermal.u <= cfg.u_limit;
    row.link = link_spectrum(cell, cfg.frequencies_ghz, cfg.theta_deg, cfg.polarization, cfg.mode);
    return row;
}

template <class T, class Fn>
std::vector<T> parallel_map(const std::vector<double>& inputs, Fn fn) {
    std::vector<T> out(inputs.size());
    const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    if (workers == 1) {
        for (std::size_t i = 0; i < inputs.size(); ++i) out[i] = fn(inputs[i]);
        return out;
    }
    for (std::size_t start = 0; start < inputs.size(); start += workers) {
        std::vector<std::future<T>> batch;
        for (std::size_t i = start; i < std::min(inputs.size(), start + workers); ++i)
            batch.push_back(std::async(std::launch::async, fn, inputs[i]));
        for (std::size_t i = 0; i < batch.size(); ++i) out[start + i] = batch[i].get();
    }
    return out;
}

} // namespace

SweepResult run_sweep(const SweepConfig& cfg, const UnitCell& cell_template) {
    cfg.validate(cell_template);
    SweepResult result;
    result.u_limit = cfg.u_limit;
    result.bare_u = u_value_analytical(cell_template.wall, cfg.boundary).u;
    result.rows = parallel_map<SweepRow>(cfg.separations_mm,
                                         [&](double s) { return evaluate(cfg, cell_template, s); });

    for (const auto& r : result.rows)
        if (!r.thermal.converged)
            result.diagnostics.push_back("thermal solve did not converge at " + std::to_string(r.separation_mm) +
                                         " mm (residual " + std::to_string(r.thermal.residual) + ")");

    // Feasibility should be monotone in separation; report violations.
    std::vector<const SweepRow*> sorted;
    for (const auto& r : result.rows) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(),
              [](const SweepRow* a, const SweepRow* b) { return a->separation_mm < b->separation_mm; });
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i - 1]->feasible && !sorted[i]->feasible)
            result.diagnostics.push_back("feasibility not monotone between " +
                                         std::to_string(sorted[i - 1]->separation_mm) + " and " +
                                         std::to_string(sorted[i]->separation_mm) + " mm");

    const SweepRow* best = nullptr;
    for (const SweepRow* r : sorted) {
        if (!r->feasible) continue;
        // Ascending order, so >= hands ties to the larger separation.
        if (!best || r->mean_improvement_db() >= best->mean_improvement_db() - 1e-9) best = r;
    }
    char buf[320];
    if (best) {
        result.selected_mm = best->separation_mm;
        std::snprintf(buf, sizeof buf,
                      "%.0f mm: largest mean improvement (%.2f dB) among separations with U <= %.3f W/(m^2 K) "
                      "(U = %.4f). Mutual coupling between neighbouring antenna systems is not modelled, so the "
                      "ranking of the closest separations may differ from full-wave results.",
                      best->separation_mm, best->mean_improvement_db(), cfg.u_limit, best->thermal.u);
        result.rationale = buf;
    } else {
        std::snprintf(buf, sizeof buf, "no separation satisfies U <= %.3f W/(m^2 K)", cfg.u_limit);
        result.rationale = buf;
        result.diagnostics.push_back(buf);
    }
    return result;
}

FeasibleSeparation min_feasible_separation(const SweepConfig& cfg, const UnitCell& cell_template, bool refine,
                                           const SweepResult* known) {
    cfg.validate(cell_template);
    if (!std::is_sorted(cfg.separations_mm.begin(), cfg.separations_mm.end()))
        throw InvalidArgument("separations must be sorted ascending");

    FeasibleSeparation out;
    auto u_at = [&](double s) {
        const SweepRow* r = known ? known->row(s) : nullptr;
        const double u = r ? r->thermal.u
                           : cell_u_value(cell_template.with_separation(s), cfg.boundary, cfg.voxel, cfg.tolerance).u;
        out.evaluated.emplace_back(s, u);
        return u;
    };

    std::optional<double> infeasible;
    for (double s : cfg.separations_mm) {
        const double u = u_at(s);
        if (u <= cfg.u_limit) {
            out.separation_mm = s;
            out.u = u;
            break;
        }
        infeasible = s;
    }
    if (!out.separation_mm || !refine || !infeasible) return out;

    // Integer-mm bisection on (infeasible, feasible].
    double lo = std::floor(*infeasible), hi = *out.separation_mm;
    while (hi - lo > 1.0) {
        const double mid = std::floor(0.5 * (lo + hi));
        const double u = u_at(mid);
        if (u <= cfg.u_limit) {
            hi = mid;
            out.u = u;
        } else {
            lo = mid;
        }
    }
    out.separation_mm = hi;
    return out;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
    out << "separation_mm,U,feasible,f_GHz,t_dB,improvement_dB\n";
    char buf[200];
    for (const auto& r : result.rows)
        for (const auto& p : r.link) {
            std::snprintf(buf, sizeof buf, "%.2f,%.6f,%d,%.4f,%.4f,%.4f\n", r.separation_mm, r.thermal.u,
                          r.feasible ? 1 : 0, p.frequency_ghz, p.combined_db, p.improvement_db());
            out << buf;
        }
}

void write_sweep_summary(std::ostream& out, const SweepResult& result) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "bare wall U = %.4f W/(m^2 K), limit %.3f\n", result.bare_u, result.u_limit);
    out << buf;
    for (const auto& r : result.rows) {
        std::snprintf(buf, sizeof buf, "  %7.2f mm  U = %.4f  %-10s mean improvement %6.2f dB\n", r.separation_mm,
                      r.thermal.u, r.feasible ? "feasible" : "infeasible", r.mean_improvement_db());
        out << buf;
    }
    if (result.selected_mm) {
        std::snprintf(buf, sizeof buf, "selected: %.2f mm\n", *result.selected_mm);
        out << buf;
    } else {
        out << "selected: none\n";
    }
    out << "rationale: " << result.rationale << '\n';
    for (const auto& d : result.diagnostics) out << "note: " << d << '\n';
}

} // namespace stwall
