#pragma once

#include <optional>
#include <vector>

#include "stwall/layered_em.hpp"
#include "stwall/materials.hpp"

namespace stwall {

/// Coaxial line. `outer_radius_mm` is the radius used in ln(b/a) for the
/// impedance and conductor loss; the steel shield occupies
/// [outer - shield_thickness, outer].
struct CoaxSpec {
    double inner_radius_mm = 0.1435;
    double outer_radius_mm = 0.88;
    double shield_thickness_mm = 0.2;
    double eps_r = 1.75;
    double tan_delta = 0.004;
    double resistivity = 6.9e-7; // Ohm m
    double mu_r = 1.0;
    double length_m = 0.44;
    int count = 2;

    void validate() const;
    double dielectric_radius_mm() const { return outer_radius_mm - shield_thickness_mm; }
    /// Steel cross-section of one line (pin plus shield annulus), m^2.
    double conductor_area_m2() const;
};

struct GainPoint {
    double frequency_ghz;
    double gain_dbi;
};

/// Realized-gain model of one element.
///
/// Gain comes from `gain_table` (linear interpolation in dB, clamped at the
/// ends) or `constant_gain_dbi` when the table is empty. Below the spiral's
/// lower band edge c/(2*pi*r_ex) the gain is reduced by a high-pass factor
/// 1/(1 + (f_edge/f)^(2*band_edge_order)); order 0 disables it.
struct AntennaSpec {
    std::vector<GainPoint> gain_table;
    double constant_gain_dbi = 4.6;
    double pattern_exponent = 1.0;
    double band_edge_order = 4.0;
    double spiral_inner_radius_mm = 1.08;
    double spiral_outer_radius_mm = 17.4;
    int spiral_turns = 6;
    double footprint_mm = 40.0;

    void validate() const;
    double lower_band_edge_ghz() const;
    double gain_dbi(double f_ghz) const;
    /// Linear gain toward theta (cos^n roll-off).
    double gain(double f_ghz, double theta_deg) const;
};

struct FoamBlock {
    double size_x_mm = 50.0;
    double size_y_mm = 50.0;
    double thickness_mm = 10.0;
};

struct LaminateSheet {
    double size_mm = 40.0;
    double thickness_mm = 0.5;
};

/// Back-to-back antenna pair joined by the dual-coax assembly. The laminate
/// sits flush with each wall face, the foam block behind it, both recessed
/// into the outer concrete layers; the coax runs through the full depth.
struct EmbeddedSystem {
    AntennaSpec antenna;
    CoaxSpec coax;
    Material conductor;
    Material coax_dielectric;
    Material foam;
    Material laminate;
    FoamBlock foam_block;
    LaminateSheet laminate_sheet;

    static EmbeddedSystem defaults(const MaterialDatabase& db);
};

/// Square (or rectangular) lateral cell of a periodic wall; the cell size is
/// the antenna-system separation.
struct UnitCell {
    double sx_mm = 150.0;
    double sy_mm = 150.0;
    LayerStack wall;
    std::optional<EmbeddedSystem> system;

    void validate() const;
    double area_m2() const { return mm_to_area(sx_mm) * mm_to_area(sy_mm); }
    UnitCell with_separation(double separation_mm) const;

private:
    static double mm_to_area(double mm) { return mm * 1e-3; }
};

/// 70 mm concrete / 220 mm rock wool / 150 mm concrete, outdoor side first.
LayerStack reference_wall(const MaterialDatabase& db);

/// Reference wall with the embedded system at the given separation.
UnitCell reference_unit_cell(const MaterialDatabase& db, double separation_mm = 150.0);

} // namespace stwall
