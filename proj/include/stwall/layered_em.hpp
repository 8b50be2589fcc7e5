#pragma once

#include <complex>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "stwall/materials.hpp"

namespace stwall {

using cplx = std::complex<double>;

struct Layer {
    Material material;
    double thickness_mm;
};

/// Planar wall cross-section. Layers are ordered from the illuminated
/// (outdoor) side to the far (indoor) side.
struct LayerStack {
    std::vector<Layer> layers;
    double ambient_front_eps = 1.0;
    double ambient_back_eps = 1.0;

    /// Throws InvalidArgument when empty or a thickness is not positive.
    void validate() const;
    double total_thickness_mm() const;
    LayerStack reversed() const;
};

enum class Polarization { TE, TM, RHCP, LHCP };

std::string_view to_string(Polarization pol);
/// Accepts TE, TM, RHCP, LHCP (case-insensitive).
Polarization polarization_from_string(std::string_view text);

struct Incidence {
    double frequency_ghz;
    double theta_deg = 0.0;
    Polarization polarization = Polarization::TE;
};

/// Transverse-field transmission and reflection coefficients.
struct Coefficients {
    cplx t;
    cplx r;
};

/// Exact plane-wave solution for the stack. For circular polarizations the
/// co-polarized coefficients are returned (see cp_transmission).
Coefficients tmm_coefficients(const LayerStack& stack, const Incidence& inc);

/// Same solution computed by cascading interface and propagation scattering
/// matrices. Used as the fallback for deeply attenuating stacks.
Coefficients scattering_coefficients(const LayerStack& stack, const Incidence& inc);

/// Circular-polarization transmission in the fixed (TE, TM) basis:
/// co = (t_TE + t_TM)/2, cross = (t_TE - t_TM)/2. Both handednesses share
/// the same co-polar value for isotropic stacks.
struct CpCoefficients {
    cplx co;
    cplx cross;
};

CpCoefficients cp_transmission(const LayerStack& stack, double f_ghz, double theta_deg);

struct Spectrum {
    std::vector<double> frequencies_ghz;
    std::vector<cplx> t;
    std::vector<cplx> r;
    Polarization polarization = Polarization::TE;
    double theta_deg = 0.0;

    std::size_t size() const { return frequencies_ghz.size(); }
};

/// Linear grid of n_points from f_start to f_stop inclusive.
std::vector<double> linear_grid(double f_start, double f_stop, std::size_t n_points);

Spectrum transmission_spectrum(const LayerStack& stack, double f_start_ghz, double f_stop_ghz, std::size_t n_points,
                               double theta_deg, Polarization pol);

Spectrum transmission_spectrum(const LayerStack& stack, const std::vector<double>& frequencies_ghz, double theta_deg,
                               Polarization pol);

/// 20 log10 |x|, floored at -400 dB.
double amplitude_db(cplx x);
double amplitude_db(double x);

/// Writes `freq_GHz,t_dB,t_phase_deg,r_dB,r_phase_deg,pol,theta_deg`.
void write_spectrum_csv(std::ostream& out, const Spectrum& spectrum);

} // namespace stwall
