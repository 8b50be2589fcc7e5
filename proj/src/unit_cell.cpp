#include "stwall/unit_cell.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stwall/error.hpp"
#include "stwall/units.hpp"

namespace stwall {

void CoaxSpec::validate() const {
    if (!(inner_radius_mm > 0.0)) throw InvalidArgument("coax inner radius must be positive");
    if (!(outer_radius_mm > inner_radius_mm)) throw InvalidArgument("coax outer radius must exceed inner radius");
    if (!(shield_thickness_mm > 0.0) || !(dielectric_radius_mm() > inner_radius_mm))
        throw InvalidArgument("coax shield thickness must leave room for the dielectric");
    if (!(length_m > 0.0)) throw InvalidArgument("coax length must be positive");
    if (!(eps_r >= 1.0) || tan_delta < 0.0) throw InvalidArgument("coax dielectric parameters invalid");
    if (resistivity < 0.0 || !(mu_r > 0.0)) throw InvalidArgument("coax conductor parameters invalid");
    if (count < 1) throw InvalidArgument("coax count must be at least 1");
}

double CoaxSpec::conductor_area_m2() const {
    const double a = mm_to_m(inner_radius_mm), b = mm_to_m(outer_radius_mm), bi = mm_to_m(dielectric_radius_mm());
    return std::numbers::pi * (a * a + b * b - bi * bi);
}

void AntennaSpec::validate() const {
    if (!std::isfinite(constant_gain_dbi)) throw InvalidArgument("antenna gain must be finite");
    if (!(pattern_exponent >= 0.0)) throw InvalidArgument("pattern exponent must be non-negative");
    if (!(band_edge_order >= 0.0)) throw InvalidArgument("band-edge order must be non-negative");
    if (!(spiral_outer_radius_mm > 0.0)) throw InvalidArgument("spiral outer radius must be positive");
    for (std::size_t i = 0; i < gain_table.size(); ++i) {
        if (!std::isfinite(gain_table[i].gain_dbi)) throw InvalidArgument("antenna gain table entry not finite");
        if (i > 0 && !(gain_table[i].frequency_ghz > gain_table[i - 1].frequency_ghz))
            throw InvalidArgument("antenna gain table frequencies must be strictly increasing");
    }
}

double AntennaSpec::lower_band_edge_ghz() const {
    return kSpeedOfLight / (2.0 * std::numbers::pi * mm_to_m(spiral_outer_radius_mm)) * 1e-9;
}

double AntennaSpec::gain_dbi(double f_ghz) const {
    double g = constant_gain_dbi;
    if (!gain_table.empty()) {
        if (f_ghz <= gain_table.front().frequency_ghz) {
            g = gain_table.front().gain_dbi;
        } else if (f_ghz >= gain_table.back().frequency_ghz) {
            g = gain_table.back().gain_dbi;
        } else {
            auto hi = std::upper_bound(gain_table.begin(), gain_table.end(), f_ghz,
                                       [](double f, const GainPoint& p) { return f < p.frequency_ghz; });
            auto lo = hi - 1;
            const double w = (f_ghz - lo->frequency_ghz) / (hi->frequency_ghz - lo->frequency_ghz);
            g = lo->gain_dbi + w * (hi->gain_dbi - lo->gain_dbi);
        }
    }
    if (band_edge_order > 0.0) {
        const double ratio = lower_band_edge_ghz() / f_ghz;
        g -= 10.0 * std::log10(1.0 + std::pow(ratio, 2.0 * band_edge_order));
    }
    return g;
}

double AntennaSpec::gain(double f_ghz, double theta_deg) const {
    const double c = std::cos(deg_to_rad(theta_deg));
    return std::pow(10.0, gain_dbi(f_ghz) / 10.0) * std::pow(std::max(c, 0.0), pattern_exponent);
}

EmbeddedSystem EmbeddedSystem::defaults(const MaterialDatabase& db) {
    const auto& steel = db.lookup("stainless_steel");
    EmbeddedSystem sys{AntennaSpec{},         CoaxSpec{},           steel, db.lookup("ptfe"), db.lookup("foam_backing"),
                       db.lookup("laminate"), FoamBlock{},          LaminateSheet{}};
    sys.coax.resistivity = steel.conductor().resistivity;
    sys.coax.mu_r = steel.conductor().mu_r;
    return sys;
}

void UnitCell::validate() const {
    wall.validate();
    if (!(sx_mm > 0.0) || !(sy_mm > 0.0)) throw InvalidArgument("unit cell dimensions must be positive");
    if (!system) return;
    const auto& sys = *system;
    sys.antenna.validate();
    sys.coax.validate();
    if (!(sx_mm > sys.antenna.footprint_mm) || !(sy_mm > sys.antenna.footprint_mm))
        throw InvalidArgument("unit cell must be larger than the antenna footprint");
    const double depth_m = mm_to_m(wall.total_thickness_mm());
    if (std::abs(sys.coax.length_m - depth_m) > 1e-9)
        throw InvalidArgument("coax length must equal the total wall depth");
}

UnitCell UnitCell::with_separation(double separation_mm) const {
    UnitCell out = *this;
    out.sx_mm = separation_mm;
    out.sy_mm = separation_mm;
    return out;
}

LayerStack reference_wall(const MaterialDatabase& db) {
    const auto& concrete = db.lookup("concrete");
    return LayerStack{{{concrete, 70.0}, {db.lookup("rockwool"), 220.0}, {concrete, 150.0}}};
}

UnitCell reference_unit_cell(const MaterialDatabase& db, double separation_mm) {
    UnitCell cell;
    cell.wall = reference_wall(db);
    cell.sx_mm = separation_mm;
    cell.sy_mm = separation_mm;
    cell.system = EmbeddedSystem::defaults(db);
    cell.system->coax.length_m = mm_to_m(cell.wall.total_thickness_mm());
    return cell;
}

} // namespace stwall
