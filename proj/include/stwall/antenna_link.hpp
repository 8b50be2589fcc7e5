#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "stwall/layered_em.hpp"
#include "stwall/unit_cell.hpp"

namespace stwall {

/// Characteristic impedance of one line, Ohm.
double coax_impedance(const CoaxSpec& spec);
/// Balanced assembly of `count` lines with bonded shields: count * Z0.
double assembly_impedance(const CoaxSpec& spec);

struct CoaxLoss {
    double total_db = 0.0;
    double conductor_db = 0.0;
    double dielectric_db = 0.0;
    double skin_depth_mm = 0.0;
    /// Skin depth reaches the pin radius or shield thickness; the surface
    /// resistance model is then optimistic.
    bool skin_depth_warning = false;
};

/// Loss over the full line length. In a balanced pair both the series
/// resistance and the impedance double, so the per-line figure applies.
CoaxLoss coax_attenuation(const CoaxSpec& spec, double f_ghz);

/// Amplitude transmission of the antenna path of one unit cell:
/// sqrt(min(A_eff(theta) / (A_cell cos theta), 1) * L_cable).
double aperture_transmission(const UnitCell& cell, double f_ghz, double theta_deg = 0.0);

enum class CombineMode { Incoherent, CoherentBest, CoherentWorst };

std::string_view to_string(CombineMode mode);
/// Accepts incoherent, coherent_best, coherent_worst.
CombineMode combine_mode_from_string(std::string_view text);

double combine_paths(cplx t_wall, double t_ant, CombineMode mode = CombineMode::Incoherent);

struct LinkPoint {
    double frequency_ghz = 0.0;
    double wall_db = 0.0;
    double antenna_db = 0.0;
    double combined_db = 0.0;
    double improvement_db() const { return combined_db - wall_db; }
};

/// Through-wall transmission with and without the embedded system. For
/// circular polarization the wall term is the co-polarized coefficient.
LinkPoint link_point(const UnitCell& cell, double f_ghz, double theta_deg = 0.0,
                     Polarization pol = Polarization::RHCP, CombineMode mode = CombineMode::Incoherent);

std::vector<LinkPoint> link_spectrum(const UnitCell& cell, const std::vector<double>& frequencies_ghz,
                                     double theta_deg = 0.0, Polarization pol = Polarization::RHCP,
                                     CombineMode mode = CombineMode::Incoherent);

/// Lowest frequency in [f_lo, f_hi] above which the antenna path carries at
/// least as much power as the wall itself (normal incidence), located to
/// `resolution_ghz`. Empty when the antenna path never catches up.
std::optional<double> improvement_onset_ghz(const UnitCell& cell, double f_lo_ghz = 1.0, double f_hi_ghz = 8.0,
                                            double resolution_ghz = 1e-3);

void write_link_csv(std::ostream& out, const std::vector<LinkPoint>& points);

} // namespace stwall
