#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stwall/antenna_link.hpp"
#include "stwall/thermal.hpp"

namespace stwall {

struct SweepConfig {
    std::vector<double> separations_mm = default_separations();
    std::vector<double> frequencies_ghz{1.5, 3.5, 5.0, 8.0};
    double u_limit = 0.17; // W/(m^2 K)
    CombineMode mode = CombineMode::Incoherent;
    double tolerance = 1e-8;
    double theta_deg = 0.0;
    Polarization polarization = Polarization::RHCP;
    ThermalBoundary boundary;
    VoxelOptions voxel;

    /// 70, 80, ..., 200 mm.
    static std::vector<double> default_separations();
    void validate(const UnitCell& cell_template) const;
};

struct SweepRow {
    double separation_mm = 0.0;
    UValueResult thermal;
    bool feasible = false;
    std::vector<LinkPoint> link; // one per configured frequency

    double mean_improvement_db() const;
};

struct SweepResult {
    std::vector<SweepRow> rows; // in configuration order
    double bare_u = 0.0;        // analytical, no embedded system
    double u_limit = 0.0;
    std::optional<double> selected_mm;
    std::string rationale;
    std::vector<std::string> diagnostics;

    const SweepRow* row(double separation_mm) const;
};

/// U-value of one cell from the voxelized finite-volume model.
UValueResult cell_u_value(const UnitCell& cell, const ThermalBoundary& bc, const VoxelOptions& voxel, double tol);

SweepResult run_sweep(const SweepConfig& cfg, const UnitCell& cell_template);

struct FeasibleSeparation {
    std::optional<double> separation_mm;
    double u = 0.0; // at the returned separation
    /// Every (separation, U) pair evaluated, in evaluation order.
    std::vector<std::pair<double, double>> evaluated;
};

/// Smallest listed separation with U <= U_limit (the list must be ascending).
/// With `refine`, bisects down to 1 mm between the last infeasible and first
/// feasible entries. Rows of `known` are reused instead of re-solving.
FeasibleSeparation min_feasible_separation(const SweepConfig& cfg, const UnitCell& cell_template, bool refine = false,
                                           const SweepResult* known = nullptr);

/// One row per (separation, frequency).
void write_sweep_csv(std::ostream& out, const SweepResult& result);
void write_sweep_summary(std::ostream& out, const SweepResult& result);

} // namespace stwall
