#pragma once

#include <cstddef>
#include <vector>

#include "stwall/layered_em.hpp"

namespace stwall {

/// One-dimensional Yee-grid run at normal incidence.
///
/// Each layer is mapped to a non-dispersive lossy dielectric with eps' and
/// sigma evaluated at `center_ghz`, so a run is only faithful near its center
/// frequency; fdtd_spectrum() therefore splits a band into sub-band runs.
struct Fdtd1dConfig {
    double dx_mm = 0.25;
    std::size_t max_time_steps = 400000;
    double center_ghz = 4.5;
    /// Offset from the center at which the source spectrum is 40 dB down.
    double bandwidth_ghz = 1.0;
    /// Courant number c*dt/dx in vacuum, 0 < s <= 1.
    double courant = 1.0;
    /// Vacuum gap between the stack and the TF/SF plane or probes.
    double margin_mm = 30.0;
    /// Run until the peak field falls this far below its maximum.
    double decay_db = 80.0;
    double min_cells_per_wavelength = 20.0;

    void validate() const;
};

struct FdtdResult {
    /// Coefficients at the requested frequencies inside the valid band.
    Spectrum spectrum;
    double valid_min_ghz = 0.0;
    double valid_max_ghz = 0.0;
    /// Requested frequencies outside the valid band (source too weak or
    /// grid too coarse).
    std::vector<double> dropped_ghz;
    std::size_t steps = 0;
    bool decayed = false;

    // Time-integrated E^2 at the probes, all with the same normalization.
    double injected_energy = 0.0;
    double transmitted_energy = 0.0;
    double reflected_energy = 0.0;

    std::vector<double> transmitted_trace;
    std::vector<double> reflected_trace;
    std::vector<double> incident_trace;
};

/// Transmission and reflection via the ratio of probe DFTs with the stack
/// present to an identical free-space run driven by the same source.
FdtdResult run_fdtd(const LayerStack& stack, const Fdtd1dConfig& cfg, const std::vector<double>& frequencies_ghz);

struct FdtdSweepOptions {
    Fdtd1dConfig base;
    /// Frequencies closer than this share one run centered on their mean;
    /// 0 gives one run per frequency.
    double sub_band_ghz = 0.0;
    double min_bandwidth_ghz = 0.5;
};

/// Normal-incidence spectrum assembled from independent sub-band runs.
FdtdResult fdtd_spectrum(const LayerStack& stack, const std::vector<double>& frequencies_ghz,
                         const FdtdSweepOptions& options = {});

} // namespace stwall
