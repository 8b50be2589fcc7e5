#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "stwall/layered_em.hpp"
#include "stwall/unit_cell.hpp"

namespace stwall {

/// Surface resistances in m^2 K/W and ambient air temperatures in K. The
/// outdoor side is the first layer of the stack (z = 0).
struct ThermalBoundary {
    double r_si = 0.13;
    double r_se = 0.04;
    double t_si_air = 293.0;
    double t_se_air = 271.0;

    void validate() const;
    double delta_t() const { return t_si_air - t_se_air; }
};

struct UValueResult {
    double u = 0.0;           // W/(m^2 K)
    double heat_flow_w = 0.0; // mean of indoor and outdoor face flows
    bool converged = false;
    std::size_t iterations = 0;
    double residual = 0.0; // relative
    double heat_flow_in_w = 0.0;
    double heat_flow_out_w = 0.0;

    double balance_error() const;
};

/// Layered formula U = 1 / (R_si + sum d/lambda + R_se).
UValueResult u_value_analytical(const LayerStack& stack, const ThermalBoundary& bc);

/// Rectilinear voxel grid; x and y are centered on the cell, z runs from
/// the outdoor face. Cell (i, j, k) is stored at (k * ny + j) * nx + i.
struct VoxelGrid {
    std::vector<double> x_edges_mm, y_edges_mm, z_edges_mm;
    std::vector<std::uint8_t> material;
    std::vector<std::string> material_names;
    std::vector<double> conductivity;

    std::size_t nx() const { return x_edges_mm.size() - 1; }
    std::size_t ny() const { return y_edges_mm.size() - 1; }
    std::size_t nz() const { return z_edges_mm.size() - 1; }
    std::size_t cell_count() const { return nx() * ny() * nz(); }
    std::size_t index(std::size_t i, std::size_t j, std::size_t k) const { return (k * ny() + j) * nx() + i; }

    double dx_mm(std::size_t i) const { return x_edges_mm[i + 1] - x_edges_mm[i]; }
    double dy_mm(std::size_t j) const { return y_edges_mm[j + 1] - y_edges_mm[j]; }
    double dz_mm(std::size_t k) const { return z_edges_mm[k + 1] - z_edges_mm[k]; }

    /// Material id by name; throws NotFound.
    std::uint8_t material_id(const std::string& name) const;
    /// Cross-section area (m^2) of a material in z-plane k.
    double plane_area_m2(std::uint8_t id, std::size_t k) const;
    /// First z-plane whose center lies at depth z_mm.
    std::size_t plane_at(double z_mm) const;

    void validate() const;
};

struct VoxelOptions {
    double lateral_max_mm = 5.0;
    double lateral_feature_mm = 1.0;
    double growth = 1.3;
    double z_conductive_mm = 5.0;
    double z_insulation_mm = 2.0;
    double z_interface_mm = 0.5;
    /// Layers with conductivity below this use the insulation step.
    double insulation_threshold = 0.1;
    /// Divides every target step; 2 doubles the resolution.
    double refinement = 1.0;
};

VoxelGrid voxelize_unit_cell(const UnitCell& cell, const VoxelOptions& options = {});

/// Multigrid: lateral-aggregation V-cycle with z-line smoothing (default).
enum class Preconditioner { Jacobi, ZLine, Multigrid };

struct SolverOptions {
    double tolerance = 1e-8;
    std::size_t max_iterations = 20000;
    Preconditioner preconditioner = Preconditioner::Multigrid;
};

struct ThermalSolution {
    UValueResult result;
    std::vector<double> temperature_k; // per voxel
};

/// Steady conduction with Robin faces on z and adiabatic x/y faces, solved by
/// preconditioned conjugate gradients.
ThermalSolution solve_temperature(const VoxelGrid& grid, const ThermalBoundary& bc, const SolverOptions& options = {});

UValueResult solve_steady_state(const VoxelGrid& grid, const ThermalBoundary& bc, double tol = 1e-8,
                                std::size_t max_iter = 20000);

/// Legacy-VTK rectilinear grid with per-cell temperature and material id.
void write_vtk(std::ostream& out, const VoxelGrid& grid, const std::vector<double>& temperature_k);

} // namespace stwall
