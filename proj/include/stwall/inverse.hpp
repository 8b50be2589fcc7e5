#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "stwall/layered_em.hpp"
#include "stwall/materials.hpp"

namespace stwall {

/// Transmission (S21) record of a device under test. Magnitude-only data keep
/// a zero phase and set `magnitude_only`.
struct MeasuredSpectrum {
    std::vector<double> frequencies_ghz;
    std::vector<cplx> s21;
    bool magnitude_only = false;
    double thickness_mm = 0.0; // 0 when not recorded
    std::string fixture_id;
    std::string reference_id;
    /// Points normalized by a reference below the noise floor; excluded from fits.
    std::vector<bool> flagged;

    void validate() const;
    std::size_t size() const { return frequencies_ghz.size(); }
    std::vector<double> magnitude_db() const;
};

MeasuredSpectrum make_spectrum(std::vector<double> frequencies_ghz, std::vector<cplx> s21);
MeasuredSpectrum make_magnitude_spectrum(std::vector<double> frequencies_ghz, const std::vector<double>& s21_db);

struct NormalizeOptions {
    /// Interpolate the reference onto the DUT grid (dB magnitude and
    /// unwrapped phase, linear in frequency) instead of requiring equal grids.
    bool interpolate = false;
    double reference_floor_db = -100.0;
};

/// DUT / reference per point; dB subtraction when either is magnitude-only.
MeasuredSpectrum normalize_spectrum(const MeasuredSpectrum& dut, const MeasuredSpectrum& reference,
                                    const NormalizeOptions& options = {});

struct Bounds {
    double lo;
    double hi;
};

struct FitOptions {
    Bounds a{1.0, 20.0};
    Bounds c{1e-4, 2.0};
    Bounds d{0.0, 1.5};
    double b = 0.0;
    int n_starts = 16;
    std::uint64_t seed = 20240521;
    int max_iterations = 4000;
    double simplex_tolerance = 1e-7;
    /// Complex log-ratio residual instead of dB magnitude only.
    bool complex_fit = false;

    void validate() const;
};

struct FitStart {
    std::array<double, 3> initial{}; // a, c, d
    std::array<double, 3> fitted{};
    double residual_db = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct FitResult {
    PermittivityModel model{1.0, 0.0, 0.0, 0.0};
    double residual_db = 0.0;
    int iterations = 0;
    bool converged = false;
    std::size_t best_start = 0;
    std::vector<FitStart> starts;
    std::vector<std::string> warnings;
};

/// RMS misfit between `spectrum` and a single slab of the given model in
/// vacuum at normal incidence. In dB magnitude, or for `complex_fit` the RMS
/// of |ln(t_model / t_measured)| expressed in dB.
double fit_objective(const MeasuredSpectrum& spectrum, double thickness_mm, const PermittivityModel& model,
                     bool complex_fit = false);

/// Multi-start Nelder-Mead over (a, c, d) with b fixed; parameters are kept
/// inside their bounds by a logistic map.
FitResult fit_permittivity(const MeasuredSpectrum& spectrum, double thickness_mm, const FitOptions& options = {});

/// Slab transmission of a homogeneous sample, the forward model of the fit.
cplx slab_transmission(const PermittivityModel& model, double thickness_mm, double f_ghz);

/// CSV with a `freq_GHz` column and `s21_dB` or `t_dB`; an optional
/// `s21_phase_deg` / `t_phase_deg` column makes the record complex.
MeasuredSpectrum read_spectrum_csv(std::istream& in);
/// Two-port Touchstone (v1), S21 extracted; MA, DB and RI encodings.
MeasuredSpectrum read_touchstone(std::istream& in);
/// Dispatches on extension (.s2p -> Touchstone, else CSV).
MeasuredSpectrum read_spectrum_file(const std::filesystem::path& path);

} // namespace stwall
