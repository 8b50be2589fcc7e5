#pragma once

#include <numbers>

namespace stwall {

inline constexpr double kSpeedOfLight = 299792458.0;   // m/s
inline constexpr double kMu0 = 1.25663706212e-6;        // H/m
inline constexpr double kEps0 = 8.8541878128e-12;       // F/m
inline constexpr double kEta0 = 376.730313668;          // Ohm
inline constexpr double kNeperToDb = 8.685889638065035; // 20 / ln(10)

// Public interfaces take GHz and mm. These are the only conversion sites.
constexpr double ghz_to_hz(double f_ghz) { return f_ghz * 1e9; }
constexpr double angular_frequency(double f_ghz) { return 2.0 * std::numbers::pi * ghz_to_hz(f_ghz); }
constexpr double mm_to_m(double mm) { return mm * 1e-3; }
constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Free-space wavenumber in rad/m.
constexpr double free_space_wavenumber(double f_ghz) { return angular_frequency(f_ghz) / kSpeedOfLight; }

/// Free-space wavelength in mm.
constexpr double free_space_wavelength_mm(double f_ghz) { return kSpeedOfLight / ghz_to_hz(f_ghz) * 1e3; }

} // namespace stwall
