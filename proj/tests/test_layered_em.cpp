#include <doctest.h>

#include <cmath>
#include <sstream>

#include "stwall/error.hpp"
#include "stwall/layered_em.hpp"
#include "stwall/unit_cell.hpp"
#include "stwall/units.hpp"

using namespace stwall;

namespace {

Material dielectric(double eps_real, double eps_imag = 0.0) {
    return Material("d", FixedPermittivity{eps_real, eps_imag}, 1.0);
}

LayerStack lossless_wall() {
    const Material c("c", PermittivityModel(5.24, 0.0, 0.0, 0.0), 1.3);
    const Material r("r", PermittivityModel(1.48, 0.0, 0.0, 0.0), 0.035);
    return LayerStack{{{c, 70.0}, {r, 220.0}, {c, 150.0}}};
}

// Airy formula for one slab in vacuum at normal incidence, e^{+jwt}.
cplx airy_slab(cplx eps, double d_mm, double f_ghz) {
    const cplx n = std::sqrt(eps);
    const cplx rho = (1.0 - n) / (1.0 + n);
    const cplx delta = free_space_wavenumber(f_ghz) * n * mm_to_m(d_mm);
    const cplx j(0.0, 1.0);
    return (1.0 - rho * rho) * std::exp(-j * delta) / (1.0 - rho * rho * std::exp(-2.0 * j * delta));
}

} // namespace

TEST_CASE("vacuum stack is transparent") {
    const LayerStack s{{{dielectric(1.0), 123.4}}};
    for (auto pol : {Polarization::TE, Polarization::TM, Polarization::RHCP}) {
        const auto c = tmm_coefficients(s, {5.0, 0.0, pol});
        CHECK(std::abs(c.t) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(c.r) < 1e-12);
    }
}

TEST_CASE("half-wave slab resonance") {
    const double f = 3.0;
    const double d = free_space_wavelength_mm(f) / 2.0 / 2.0; // n = 2
    const LayerStack s{{{dielectric(4.0), d}}};
    CHECK(std::abs(tmm_coefficients(s, {f, 0.0, Polarization::TE}).t) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("single lossy slab matches the Airy formula") {
    for (double f : {1.0, 2.3, 5.5, 8.0}) {
        for (cplx eps : {cplx(4.0, -0.3), cplx(5.24, -0.63), cplx(2.2, 0.0)}) {
            const LayerStack s{{{dielectric(eps.real(), -eps.imag()), 83.0}}};
            const cplx t = tmm_coefficients(s, {f, 0.0, Polarization::TE}).t;
            const cplx ref = airy_slab(eps, 83.0, f);
            CHECK(std::abs(t - ref) < 1e-12 * std::max(1.0, std::abs(ref)) + 1e-15);
        }
    }
}

TEST_CASE("reference wall levels") {
    const auto wall = reference_wall(MaterialDatabase::builtin());
    CHECK(-amplitude_db(tmm_coefficients(wall, {3.5, 0.0, Polarization::TE}).t) == doctest::Approx(23.2).epsilon(0.05));
    CHECK(-amplitude_db(tmm_coefficients(wall, {8.0, 0.0, Polarization::TE}).t) == doctest::Approx(42.5).epsilon(0.03));
    CHECK(-amplitude_db(cp_transmission(wall, 3.5, 0.0).co) == doctest::Approx(23.2).epsilon(0.05));
}

TEST_CASE("bare wall spectrum shape") {
    const auto s = transmission_spectrum(reference_wall(MaterialDatabase::builtin()), 1.0, 8.0, 141, 0.0,
                                         Polarization::TE);
    CHECK(amplitude_db(s.t.front()) > -14.0);
    CHECK(amplitude_db(s.t.front()) < -8.0);
    CHECK(amplitude_db(s.t.back()) == doctest::Approx(-42.5).epsilon(0.03));
    // Trend: every 1 GHz step loses transmission.
    for (std::size_t i = 20; i < s.size(); i += 20) CHECK(std::abs(s.t[i]) < std::abs(s.t[i - 20]));
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(std::norm(s.t[i]) + std::norm(s.r[i]) <= 1.0 + 1e-12);
}

TEST_CASE("lossless energy conservation") {
    const auto wall = lossless_wall();
    for (double theta : {0.0, 30.0, 60.0})
        for (auto pol : {Polarization::TE, Polarization::TM})
            for (double f = 1.0; f <= 8.0; f += 0.25) {
                const auto c = tmm_coefficients(wall, {f, theta, pol});
                CHECK(std::abs(std::norm(c.t) + std::norm(c.r) - 1.0) < 1e-10);
            }
    const auto s = transmission_spectrum(wall, 1.0, 8.0, 29, 0.0, Polarization::TM);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(std::abs(std::norm(s.t[i]) + std::norm(s.r[i]) - 1.0) < 1e-12);
}

TEST_CASE("reciprocity under layer reversal") {
    const auto wall = reference_wall(MaterialDatabase::builtin());
    for (double theta : {0.0, 45.0})
        for (auto pol : {Polarization::TE, Polarization::TM})
            for (double f : {1.0, 3.5, 8.0}) {
                const double a = std::abs(tmm_coefficients(wall, {f, theta, pol}).t);
                const double b = std::abs(tmm_coefficients(wall.reversed(), {f, theta, pol}).t);
                CHECK(std::abs(a - b) <= 1e-10 * a);
            }
}

TEST_CASE("splitting a layer changes nothing") {
    const auto db = MaterialDatabase::builtin();
    const auto wall = reference_wall(db);
    LayerStack split = wall;
    split.layers = {wall.layers[0], {wall.layers[1].material, 110.0}, {wall.layers[1].material, 110.0},
                    wall.layers[2]};
    for (double f : {1.3, 4.0, 7.7}) {
        const cplx a = tmm_coefficients(wall, {f, 20.0, Polarization::TM}).t;
        const cplx b = tmm_coefficients(split, {f, 20.0, Polarization::TM}).t;
        CHECK(std::abs(a - b) < 1e-12);
    }
}

TEST_CASE("oblique incidence lowers transmission") {
    const auto wall = reference_wall(MaterialDatabase::builtin());
    CHECK(std::abs(tmm_coefficients(wall, {8.0, 60.0, Polarization::TE}).t) <
          std::abs(tmm_coefficients(wall, {8.0, 0.0, Polarization::TE}).t));
}

TEST_CASE("circular polarization") {
    const auto wall = reference_wall(MaterialDatabase::builtin());
    const auto n = cp_transmission(wall, 3.5, 0.0);
    CHECK(std::abs(n.cross) < 1e-15);
    CHECK(std::abs(n.co) == doctest::Approx(std::abs(tmm_coefficients(wall, {3.5, 0.0, Polarization::TE}).t)));
    CHECK(std::abs(tmm_coefficients(wall, {3.5, 0.0, Polarization::RHCP}).t -
                   tmm_coefficients(wall, {3.5, 0.0, Polarization::LHCP}).t) < 1e-15);

    const cplx te = tmm_coefficients(wall, {8.0, 60.0, Polarization::TE}).t;
    const cplx tm = tmm_coefficients(wall, {8.0, 60.0, Polarization::TM}).t;
    const auto o = cp_transmission(wall, 8.0, 60.0);
    CHECK(std::abs(o.co - 0.5 * (te + tm)) < 1e-15);
    CHECK(std::abs(o.cross - 0.5 * (te - tm)) < 1e-15);
    CHECK(std::abs(o.cross) > 0.0);
}

TEST_CASE("thick lossy stacks stay finite") {
    const Material lossy("l", FixedPermittivity{6.0, 3.0}, 1.0);
    const LayerStack s{{{lossy, 2000.0}, {lossy, 2000.0}}};
    const auto c = tmm_coefficients(s, {20.0, 0.0, Polarization::TE});
    CHECK(std::isfinite(c.t.real()));
    CHECK(std::isfinite(std::abs(c.r)));
    CHECK(std::abs(c.r) < 1.0);
    const auto sc = scattering_coefficients(s, {20.0, 0.0, Polarization::TE});
    CHECK(std::abs(sc.r - c.r) < 1e-9);
}

TEST_CASE("scattering cascade agrees with transfer matrices") {
    const auto wall = reference_wall(MaterialDatabase::builtin());
    for (double theta : {0.0, 40.0})
        for (auto pol : {Polarization::TE, Polarization::TM}) {
            const auto a = tmm_coefficients(wall, {4.2, theta, pol});
            const auto b = scattering_coefficients(wall, {4.2, theta, pol});
            CHECK(std::abs(a.t - b.t) < 1e-12);
            CHECK(std::abs(a.r - b.r) < 1e-12);
        }
}

TEST_CASE("argument checks") {
    const auto wall = reference_wall(MaterialDatabase::builtin());
    CHECK_THROWS_AS(tmm_coefficients(wall, {3.0, 90.0, Polarization::TE}), InvalidArgument);
    CHECK_THROWS_AS(tmm_coefficients(wall, {3.0, -1.0, Polarization::TE}), InvalidArgument);
    CHECK_THROWS_AS(transmission_spectrum(wall, 0.5, 8.0, 10, 0.0, Polarization::TE), InvalidArgument);
    CHECK_THROWS_AS(transmission_spectrum(wall, 1.0, 8.0, 1, 0.0, Polarization::TE), InvalidArgument);
    LayerStack bad{{{wall.layers[0].material, 0.0}}};
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    CHECK_THROWS_AS(polarization_from_string("XP"), InvalidArgument);
    CHECK(polarization_from_string("rhcp") == Polarization::RHCP);
}

TEST_CASE("CSV export is fixed-format and repeatable") {
    const auto wall = reference_wall(MaterialDatabase::builtin());
    std::ostringstream a, b;
    write_spectrum_csv(a, transmission_spectrum(wall, 1.0, 8.0, 15, 0.0, Polarization::RHCP));
    write_spectrum_csv(b, transmission_spectrum(wall, 1.0, 8.0, 15, 0.0, Polarization::RHCP));
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("freq_GHz,t_dB,t_phase_deg,r_dB,r_phase_deg,pol,theta_deg\n", 0) == 0);
}
