#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "stwall/error.hpp"
#include "stwall/thermal.hpp"

using namespace stwall;

namespace {

const MaterialDatabase& db() {
    static const MaterialDatabase d = MaterialDatabase::builtin();
    return d;
}

UnitCell bare_cell(double s = 150.0) {
    UnitCell c;
    c.wall = reference_wall(db());
    return c.with_separation(s);
}

// Copy of the grid with voxel `cell` given its own material of conductivity lambda.
VoxelGrid with_voxel(VoxelGrid g, std::size_t cell, double lambda) {
    g.material_names.push_back("probe");
    g.conductivity.push_back(lambda);
    g.material[cell] = static_cast<std::uint8_t>(g.conductivity.size() - 1);
    return g;
}

} // namespace

TEST_CASE("analytical U of the reference wall") {
    const auto r = u_value_analytical(reference_wall(db()), ThermalBoundary{});
    // 1 / (0.13 + 0.07/1.3 + 0.22/0.035 + 0.15/1.3 + 0.04)
    CHECK(r.u == doctest::Approx(1.0 / (0.13 + 0.07 / 1.3 + 0.22 / 0.035 + 0.15 / 1.3 + 0.04)));
    CHECK(r.u == doctest::Approx(0.15).epsilon(0.005 / 0.15));
    CHECK(r.converged);
    CHECK(r.iterations == 0);
}

TEST_CASE("analytical trivial cases") {
    const LayerStack unit{{{Material("m", FixedPermittivity{}, 1.0), 1000.0}}};
    CHECK(u_value_analytical(unit, ThermalBoundary{0.0, 0.0, 293.0, 271.0}).u == doctest::Approx(1.0));

    const auto& c = db().lookup("concrete");
    const LayerStack no_wool{{{c, 70.0}, {c, 150.0}}};
    CHECK(u_value_analytical(no_wool, ThermalBoundary{}).u == doctest::Approx(2.95).epsilon(0.002));

    CHECK_THROWS_AS((ThermalBoundary{0.13, 0.04, 280.0, 280.0}.validate()), InvalidArgument);
    CHECK_THROWS_AS((ThermalBoundary{-0.1, 0.04, 293.0, 271.0}.validate()), InvalidArgument);
}

TEST_CASE("feature-free FV equals the analytical value") {
    const auto grid = voxelize_unit_cell(bare_cell());
    const auto r = solve_steady_state(grid, ThermalBoundary{});
    const double ref = u_value_analytical(reference_wall(db()), ThermalBoundary{}).u;
    CHECK(r.converged);
    CHECK(r.u == doctest::Approx(ref).epsilon(0.005));
    CHECK(r.u == doctest::Approx(0.15).epsilon(0.002 / 0.15));
    CHECK(r.balance_error() <= 1e-8);
}

TEST_CASE("preconditioners agree") {
    const auto bare = voxelize_unit_cell(bare_cell(60.0));
    const ThermalBoundary bc;
    SolverOptions o;
    o.tolerance = 1e-10;
    o.preconditioner = Preconditioner::Jacobi;
    const double jac = solve_temperature(bare, bc, o).result.u;
    o.preconditioner = Preconditioner::Multigrid;
    CHECK(solve_temperature(bare, bc, o).result.u == doctest::Approx(jac).epsilon(1e-7));

    const auto cell = voxelize_unit_cell(reference_unit_cell(db(), 70.0));
    o.preconditioner = Preconditioner::ZLine;
    const auto z = solve_temperature(cell, bc, o).result;
    o.preconditioner = Preconditioner::Multigrid;
    const auto m = solve_temperature(cell, bc, o).result;
    CHECK(z.converged);
    CHECK(m.converged);
    CHECK(m.u == doctest::Approx(z.u).epsilon(1e-7));
    CHECK(m.iterations < z.iterations);
}

TEST_CASE("voxelized steel cross-section") {
    const auto grid = voxelize_unit_cell(reference_unit_cell(db(), 150.0));
    const auto steel = grid.material_id("stainless_steel");
    // Per coax: pi * (0.1435^2 + 0.88^2 - 0.68^2) mm^2 = 1.045e-6 m^2.
    const double expected = 2.0 * 1.045e-6;
    for (double z : {35.0, 180.0, 300.0, 420.0})
        CHECK(grid.plane_area_m2(steel, grid.plane_at(z)) == doctest::Approx(expected).epsilon(0.05));
    CHECK(grid.plane_area_m2(steel, grid.plane_at(180.0)) == doctest::Approx(CoaxSpec{}.conductor_area_m2() * 2).epsilon(1e-9));
}

TEST_CASE("foam stays inside the concrete layers") {
    const auto cell = reference_unit_cell(db(), 70.0);
    const auto grid = voxelize_unit_cell(cell);
    const auto foam = grid.material_id("foam_backing");
    const double outer = cell.wall.layers[0].thickness_mm;
    const double depth = cell.wall.total_thickness_mm();
    const double inner = depth - cell.wall.layers[2].thickness_mm;
    std::size_t count = 0;
    for (std::size_t k = 0; k < grid.nz(); ++k)
        for (std::size_t j = 0; j < grid.ny(); ++j)
            for (std::size_t i = 0; i < grid.nx(); ++i) {
                if (grid.material[grid.index(i, j, k)] != foam) continue;
                ++count;
                const double z0 = grid.z_edges_mm[k], z1 = grid.z_edges_mm[k + 1];
                CHECK(((z0 >= 0.0 && z1 <= outer) || (z0 >= inner && z1 <= depth)));
                CHECK(std::abs(0.5 * (grid.x_edges_mm[i] + grid.x_edges_mm[i + 1])) < 25.0);
                CHECK(std::abs(0.5 * (grid.y_edges_mm[j] + grid.y_edges_mm[j + 1])) < 25.0);
            }
    CHECK(count > 0);
}

TEST_CASE("150 mm antenna cell") {
    const auto grid = voxelize_unit_cell(reference_unit_cell(db(), 150.0));
    const ThermalBoundary bc;
    const auto t0 = std::chrono::steady_clock::now();
    const auto sol = solve_temperature(grid, bc);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto& r = sol.result;
    MESSAGE("U = " << r.u << " in " << seconds << " s, " << r.iterations << " iterations");
    CHECK(r.converged);
    CHECK(r.u == doctest::Approx(0.16).epsilon(0.015 / 0.16));
    CHECK(r.u > u_value_analytical(reference_wall(db()), bc).u);
    CHECK(r.balance_error() <= 1e-8);
    CHECK(r.residual <= 1e-8);
    CHECK(seconds < 60.0);

    const auto [lo, hi] = std::minmax_element(sol.temperature_k.begin(), sol.temperature_k.end());
    CHECK(*lo >= bc.t_se_air);
    CHECK(*hi <= bc.t_si_air);
}

TEST_CASE("copper bridges more heat than steel") {
    auto cell = reference_unit_cell(db(), 100.0);
    const double steel = solve_steady_state(voxelize_unit_cell(cell), ThermalBoundary{}).u;
    cell.system->conductor = db().lookup("copper");
    const double copper = solve_steady_state(voxelize_unit_cell(cell), ThermalBoundary{}).u;
    CHECK(copper > steel);
}

TEST_CASE("z refinement changes U by less than 1 percent") {
    const auto cell = reference_unit_cell(db(), 90.0);
    VoxelOptions fine;
    fine.z_conductive_mm /= 2.0;
    fine.z_insulation_mm /= 2.0;
    fine.z_interface_mm /= 2.0;
    const double a = solve_steady_state(voxelize_unit_cell(cell), ThermalBoundary{}).u;
    const double b = solve_steady_state(voxelize_unit_cell(cell, fine), ThermalBoundary{}).u;
    CHECK(std::abs(a - b) < 0.01 * a);
}

TEST_CASE("U is non-decreasing in any voxel's conductivity") {
    const auto grid = voxelize_unit_cell(reference_unit_cell(db(), 70.0));
    const ThermalBoundary bc;
    const double base = solve_steady_state(grid, bc, 1e-10).u;
    const std::size_t picks[] = {grid.index(grid.nx() / 2, grid.ny() / 3, grid.plane_at(180.0)),
                                 grid.index(0, 0, grid.plane_at(100.0)),
                                 grid.index(grid.nx() - 1, grid.ny() / 2, grid.plane_at(300.0))};
    for (std::size_t c : picks) {
        const double lam = grid.conductivity[grid.material[c]];
        const double up = solve_steady_state(with_voxel(grid, c, lam * 50.0), bc, 1e-10).u;
        const double down = solve_steady_state(with_voxel(grid, c, lam / 50.0), bc, 1e-10).u;
        CHECK(up >= base - 1e-10 * base);
        CHECK(down <= base + 1e-10 * base);
    }
}

TEST_CASE("maximum principle with reversed temperatures") {
    const auto grid = voxelize_unit_cell(reference_unit_cell(db(), 80.0));
    const ThermalBoundary bc{0.13, 0.04, 250.0, 300.0};
    const auto sol = solve_temperature(grid, bc);
    const auto [lo, hi] = std::minmax_element(sol.temperature_k.begin(), sol.temperature_k.end());
    CHECK(*lo >= 250.0);
    CHECK(*hi <= 300.0);
    CHECK(sol.result.u > 0.0);
}

TEST_CASE("iteration cap reports non-convergence") {
    const auto grid = voxelize_unit_cell(reference_unit_cell(db(), 80.0));
    const auto r = solve_steady_state(grid, ThermalBoundary{}, 1e-8, 2);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 2);
}

TEST_CASE("geometry errors") {
    VoxelOptions bad;
    bad.refinement = 0.0;
    CHECK_THROWS_AS(voxelize_unit_cell(reference_unit_cell(db(), 150.0), bad), InvalidArgument);
    auto small = reference_unit_cell(db(), 150.0);
    small.sx_mm = small.sy_mm = 35.0;
    CHECK_THROWS_AS(voxelize_unit_cell(small), InvalidArgument);
    auto short_coax = reference_unit_cell(db(), 150.0);
    short_coax.system->coax.length_m = 0.3;
    CHECK_THROWS_AS(short_coax.validate(), InvalidArgument);
    CHECK_THROWS_AS(solve_steady_state(voxelize_unit_cell(bare_cell()), ThermalBoundary{}, 0.0), InvalidArgument);
}

TEST_CASE("VTK export") {
    const auto grid = voxelize_unit_cell(bare_cell(60.0));
    const auto sol = solve_temperature(grid, ThermalBoundary{});
    std::ostringstream out;
    write_vtk(out, grid, sol.temperature_k);
    CHECK(out.str().rfind("# vtk DataFile", 0) == 0);
    CHECK(out.str().find("RECTILINEAR_GRID") != std::string::npos);
}
