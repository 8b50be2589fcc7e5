#include "stwall/antenna_link.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "stwall/error.hpp"
#include "stwall/units.hpp"

namespace stwall {

double coax_impedance(const CoaxSpec& spec) {
    spec.validate();
    return kEta0 / (2.0 * std::numbers::pi * std::sqrt(spec.eps_r)) *
           std::log(spec.outer_radius_mm / spec.inner_radius_mm);
}

double assembly_impedance(const CoaxSpec& spec) { return spec.count * coax_impedance(spec); }

CoaxLoss coax_attenuation(const CoaxSpec& spec, double f_ghz) {
    if (!(f_ghz > 0.0) || !std::isfinite(f_ghz)) throw InvalidArgument("frequency must be positive");
    const double z0 = coax_impedance(spec);
    const double f = ghz_to_hz(f_ghz);
    const double a = mm_to_m(spec.inner_radius_mm), b = mm_to_m(spec.outer_radius_mm);

    const double rs = std::sqrt(std::numbers::pi * f * kMu0 * spec.mu_r * spec.resistivity);
    const double r_per_m = rs / (2.0 * std::numbers::pi) * (1.0 / a + 1.0 / b);
    const double alpha_c = r_per_m / (2.0 * z0);
    const double alpha_d = std::numbers::pi * f * std::sqrt(spec.eps_r) / kSpeedOfLight * spec.tan_delta;

    CoaxLoss loss;
    loss.conductor_db = kNeperToDb * alpha_c * spec.length_m;
    loss.dielectric_db = kNeperToDb * alpha_d * spec.length_m;
    loss.total_db = loss.conductor_db + loss.dielectric_db;
    loss.skin_depth_mm = 1e3 * std::sqrt(spec.resistivity / (std::numbers::pi * f * kMu0 * spec.mu_r));
    loss.skin_depth_warning =
        loss.skin_depth_mm >= std::min(spec.inner_radius_mm, spec.shield_thickness_mm);
    return loss;
}

double aperture_transmission(const UnitCell& cell, double f_ghz, double theta_deg) {
    if (!cell.system) throw InvalidArgument("unit cell has no embedded antenna system");
    if (!(f_ghz > 0.0)) throw InvalidArgument("frequency must be positive");
    if (!(theta_deg >= 0.0 && theta_deg < 90.0)) throw InvalidArgument("theta must be in [0, 90) degrees");
    const EmbeddedSystem& sys = *cell.system;
    const double lambda = kSpeedOfLight / ghz_to_hz(f_ghz);
    const double a_eff = sys.antenna.gain(f_ghz, theta_deg) * lambda * lambda / (4.0 * std::numbers::pi);
    const double capture = std::min(a_eff / (cell.area_m2() * std::cos(deg_to_rad(theta_deg))), 1.0);
    const double cable = std::pow(10.0, -coax_attenuation(sys.coax, f_ghz).total_db / 10.0);
    return std::sqrt(capture * cable);
}

std::string_view to_string(CombineMode mode) {
    switch (mode) {
    case CombineMode::Incoherent: return "incoherent";
    case CombineMode::CoherentBest: return "coherent_best";
    case CombineMode::CoherentWorst: return "coherent_worst";
    }
    return "?";
}

CombineMode combine_mode_from_string(std::string_view text) {
    if (text == "incoherent") return CombineMode::Incoherent;
    if (text == "coherent_best") return CombineMode::CoherentBest;
    if (text == "coherent_worst") return CombineMode::CoherentWorst;
    throw InvalidArgument("unknown combination mode '" + std::string(text) + "'");
}

double combine_paths(cplx t_wall, double t_ant, CombineMode mode) {
    const double w = std::abs(t_wall);
    switch (mode) {
    case CombineMode::Incoherent: return std::hypot(w, t_ant);
    case CombineMode::CoherentBest: return w + t_ant;
    case CombineMode::CoherentWorst: return std::abs(w - t_ant);
    }
    return w;
}

namespace {

cplx wall_coefficient(const LayerStack& wall, double f_ghz, double theta_deg, Polarization pol) {
    if (pol == Polarization::RHCP || pol == Polarization::LHCP) return cp_transmission(wall, f_ghz, theta_deg).co;
    return tmm_coefficients(wall, Incidence{f_ghz, theta_deg, pol}).t;
}

} // namespace

LinkPoint link_point(const UnitCell& cell, double f_ghz, double theta_deg, Polarization pol, CombineMode mode) {
    cell.validate();
    const cplx tw = wall_coefficient(cell.wall, f_ghz, theta_deg, pol);
    const double ta = cell.system ? aperture_transmission(cell, f_ghz, theta_deg) : 0.0;
    return LinkPoint{f_ghz, amplitude_db(tw), amplitude_db(ta), amplitude_db(combine_paths(tw, ta, mode))};
}

std::vector<LinkPoint> link_spectrum(const UnitCell& cell, const std::vector<double>& frequencies_ghz,
                                     double theta_deg, Polarization pol, CombineMode mode) {
    cell.validate();
    std::vector<LinkPoint> out;
    out.reserve(frequencies_ghz.size());
    for (double f : frequencies_ghz) out.push_back(link_point(cell, f, theta_deg, pol, mode));
    return out;
}

std::optional<double> improvement_onset_ghz(const UnitCell& cell, double f_lo_ghz, double f_hi_ghz,
                                            double resolution_ghz) {
    if (!cell.system) throw InvalidArgument("unit cell has no embedded antenna system");
    if (!(f_hi_ghz > f_lo_ghz && f_lo_ghz > 0.0 && resolution_ghz > 0.0))
        throw InvalidArgument("invalid onset search range");
    // Positive where the antenna path dominates.
    auto margin = [&](double f) {
        return amplitude_db(aperture_transmission(cell, f)) -
               amplitude_db(tmm_coefficients(cell.wall, Incidence{f, 0.0, Polarization::TE}).t);
    };
    if (margin(f_hi_ghz) < 0.0) return std::nullopt;
    // Coarse scan downward for the last sign change, then bisect it.
    const double step = std::min(0.01, f_hi_ghz - f_lo_ghz);
    double hi = f_hi_ghz;
    while (hi > f_lo_ghz) {
        const double lo = std::max(hi - step, f_lo_ghz);
        if (margin(lo) < 0.0) {
            double a = lo, b = hi;
            while (b - a > resolution_ghz) {
                const double m = 0.5 * (a + b);
                (margin(m) < 0.0 ? a : b) = m;
            }
            return b;
        }
        hi = lo;
    }
    return f_lo_ghz;
}

void write_link_csv(std::ostream& out, const std::vector<LinkPoint>& points) {
    out << "freq_GHz,wall_dB,antenna_dB,combined_dB,improvement_dB\n";
    char buf[160];
    for (const auto& p : points) {
        std::snprintf(buf, sizeof buf, "%.6f,%.4f,%.4f,%.4f,%.4f\n", p.frequency_ghz, p.wall_db, p.antenna_db,
                      p.combined_db, p.improvement_db());
        out << buf;
    }
}

} // namespace stwall
