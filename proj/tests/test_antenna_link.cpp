#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "stwall/antenna_link.hpp"
#include "stwall/error.hpp"
#include "stwall/units.hpp"

using namespace stwall;

namespace {

const MaterialDatabase& db() {
    static const MaterialDatabase d = MaterialDatabase::builtin();
    return d;
}

} // namespace

TEST_CASE("coax impedance") {
    CoaxSpec c;
    CHECK(coax_impedance(c) == doctest::Approx(82.0).epsilon(0.01));
    CHECK(assembly_impedance(c) == doctest::Approx(164.0).epsilon(0.01));

    CoaxSpec e;
    e.eps_r = 1.0;
    e.inner_radius_mm = 0.3;
    e.outer_radius_mm = 0.3 * std::numbers::e;
    e.shield_thickness_mm = 0.1;
    CHECK(coax_impedance(e) == doctest::Approx(376.730313 / (2.0 * std::numbers::pi)).epsilon(1e-6));

    CoaxSpec literal; // dielectric radius read as the shield's inner radius
    literal.outer_radius_mm = 0.68;
    CHECK(coax_impedance(literal) == doctest::Approx(70.5).epsilon(0.005));

    CoaxSpec bad;
    bad.outer_radius_mm = 0.1;
    CHECK_THROWS_AS(coax_impedance(bad), InvalidArgument);
}

TEST_CASE("cable loss of the dual coax") {
    const CoaxSpec c;
    const auto l35 = coax_attenuation(c, 3.5);
    const auto l8 = coax_attenuation(c, 8.0);
    CHECK(l35.total_db == doctest::Approx(3.7).epsilon(0.5 / 3.7));
    CHECK(l8.total_db == doctest::Approx(6.3).epsilon(0.5 / 6.3));
    CHECK(l35.total_db == doctest::Approx(l35.conductor_db + l35.dielectric_db));
    CHECK_FALSE(l35.skin_depth_warning);
    // Conductor term scales as sqrt(f).
    CHECK(l8.conductor_db / l35.conductor_db == doctest::Approx(std::sqrt(8.0 / 3.5)).epsilon(0.01));
    // Dielectric term scales as f.
    CHECK(l8.dielectric_db / l35.dielectric_db == doctest::Approx(8.0 / 3.5).epsilon(1e-12));
}

TEST_CASE("lossless line and skin-depth flag") {
    CoaxSpec c;
    c.tan_delta = 0.0;
    c.resistivity = 0.0;
    CHECK(coax_attenuation(c, 5.0).total_db == 0.0);

    CoaxSpec poor;
    poor.resistivity = 1e-2; // skin depth ~ 0.8 mm at 4 GHz
    CHECK(coax_attenuation(poor, 4.0).skin_depth_warning);
    CHECK_THROWS_AS(coax_attenuation(CoaxSpec{}, 0.0), InvalidArgument);
}

TEST_CASE("aperture path at 8 GHz") {
    const auto c150 = reference_unit_cell(db(), 150.0);
    CHECK(amplitude_db(aperture_transmission(c150, 8.0)) == doctest::Approx(-24.7).epsilon(3.0 / 24.7));

    // Hand value: G = 10^0.46, lambda = 37.47 mm, A_cell = 0.0225 m^2, cable loss from the model.
    const double lambda = kSpeedOfLight / 8e9;
    const double capture = std::pow(10.0, 0.46) * lambda * lambda / (4.0 * std::numbers::pi) / 0.0225;
    const double gain_edge = 1.0 / (1.0 + std::pow(c150.system->antenna.lower_band_edge_ghz() / 8.0, 8.0));
    const double expect = 10.0 * std::log10(capture * gain_edge) - coax_attenuation(c150.system->coax, 8.0).total_db;
    CHECK(amplitude_db(aperture_transmission(c150, 8.0)) == doctest::Approx(expect).epsilon(1e-9));

    const auto c90 = reference_unit_cell(db(), 90.0);
    CHECK(link_point(c90, 8.0).improvement_db() == doctest::Approx(22.0).epsilon(3.0 / 22.0));
    CHECK(link_point(c150, 8.0).improvement_db() == doctest::Approx(17.0).epsilon(3.0 / 17.0));
}

TEST_CASE("capture saturates at the cable loss") {
    auto cell = reference_unit_cell(db(), 50.0);
    cell.system->antenna.constant_gain_dbi = 30.0;
    cell.system->antenna.band_edge_order = 0.0;
    const double cable = coax_attenuation(cell.system->coax, 2.0).total_db;
    CHECK(amplitude_db(aperture_transmission(cell, 2.0)) == doctest::Approx(-cable).epsilon(1e-12));
}

TEST_CASE("antenna path shrinks with cell area") {
    double prev = 1.0;
    for (double s = 60.0; s <= 300.0; s += 20.0) {
        const double t = aperture_transmission(reference_unit_cell(db(), s), 6.0);
        CHECK(t <= prev);
        prev = t;
    }
}

TEST_CASE("path combination") {
    const cplx w(0.03, -0.04); // |w| = 0.05
    CHECK(combine_paths(w, 0.0) == doctest::Approx(0.05));
    CHECK(combine_paths(0.0, 0.2) == doctest::Approx(0.2));
    CHECK(combine_paths(w, 0.12) == doctest::Approx(0.13));
    CHECK(combine_paths(w, 0.12, CombineMode::CoherentBest) == doctest::Approx(0.17));
    CHECK(combine_paths(w, 0.12, CombineMode::CoherentWorst) == doctest::Approx(0.07));
    for (double a : {0.0, 0.01, 0.3})
        for (double b : {0.0, 0.02, 0.5}) {
            const double inc = combine_paths(a, b);
            CHECK(inc >= std::max(a, b));
            CHECK(combine_paths(a, b, CombineMode::CoherentWorst) <= inc);
            CHECK(inc <= combine_paths(a, b, CombineMode::CoherentBest));
        }
    CHECK(combine_mode_from_string("coherent_best") == CombineMode::CoherentBest);
    CHECK_THROWS_AS(combine_mode_from_string("max"), InvalidArgument);
}

TEST_CASE("improvement onset") {
    const auto cell = reference_unit_cell(db(), 150.0);
    const auto onset = improvement_onset_ghz(cell);
    REQUIRE(onset);
    CHECK(*onset >= 2.0);
    CHECK(*onset <= 3.5);
    // At the crossover the two paths carry equal power.
    const auto p = link_point(cell, *onset, 0.0, Polarization::TE);
    CHECK(p.antenna_db == doctest::Approx(p.wall_db).epsilon(0.01));
    CHECK(p.improvement_db() == doctest::Approx(10.0 * std::log10(2.0)).epsilon(0.02));

    auto flat = cell;
    flat.system->antenna.band_edge_order = 0.0;
    CHECK(*improvement_onset_ghz(flat) == 1.0);
}

TEST_CASE("improvement is never negative above 2.6 GHz up to 200 mm") {
    for (double s = 70.0; s <= 200.0; s += 10.0)
        for (double f : {2.6, 3.5, 5.0, 8.0}) CHECK(link_point(reference_unit_cell(db(), s), f).improvement_db() >= 0.0);
}

TEST_CASE("common dB offset keeps the best separation") {
    // Scaling every path by the same factor leaves the argmax unchanged.
    auto best = [&](double offset_db) {
        double arg = 0.0, top = -1e9;
        for (double s = 70.0; s <= 200.0; s += 10.0) {
            const auto cell = reference_unit_cell(db(), s);
            const double k = std::pow(10.0, offset_db / 20.0);
            const cplx w = tmm_coefficients(cell.wall, {5.0, 0.0, Polarization::TE}).t * k;
            const double v = amplitude_db(combine_paths(w, aperture_transmission(cell, 5.0) * k));
            if (v > top) top = v, arg = s;
        }
        return arg;
    };
    CHECK(best(0.0) == best(-7.5));
}

TEST_CASE("oblique incidence uses the element pattern") {
    auto cell = reference_unit_cell(db(), 150.0);
    // cos^1 pattern cancels the 1/cos projected cell.
    CHECK(aperture_transmission(cell, 5.0, 60.0) == doctest::Approx(aperture_transmission(cell, 5.0, 0.0)).epsilon(1e-12));
    cell.system->antenna.pattern_exponent = 2.0;
    const double t0 = aperture_transmission(cell, 5.0, 0.0);
    const double t60 = aperture_transmission(cell, 5.0, 60.0);
    CHECK(t60 / t0 == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    CHECK_THROWS_AS(aperture_transmission(cell, 5.0, 90.0), InvalidArgument);
}

TEST_CASE("gain table interpolation") {
    AntennaSpec a;
    a.band_edge_order = 0.0;
    a.gain_table = {{2.0, 0.0}, {4.0, 4.0}, {8.0, 2.0}};
    CHECK(a.gain_dbi(1.0) == 0.0);
    CHECK(a.gain_dbi(3.0) == doctest::Approx(2.0));
    CHECK(a.gain_dbi(6.0) == doctest::Approx(3.0));
    CHECK(a.gain_dbi(9.0) == 2.0);
    a.gain_table = {{4.0, 0.0}, {2.0, 1.0}};
    CHECK_THROWS_AS(a.validate(), InvalidArgument);
}

TEST_CASE("link CSV") {
    std::ostringstream out;
    write_link_csv(out, link_spectrum(reference_unit_cell(db(), 150.0), {3.5, 8.0}));
    CHECK(out.str().rfind("freq_GHz,wall_dB,antenna_dB,combined_dB,improvement_dB\n", 0) == 0);
}
