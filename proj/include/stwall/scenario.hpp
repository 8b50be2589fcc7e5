#pragma once

#include <filesystem>
#include <optional>

#include <json.hpp>

#include "stwall/design_sweep.hpp"

namespace stwall {

/// Everything one CLI invocation needs, read from a single JSON document.
/// Missing sections fall back to the reference wall and its defaults.
struct Scenario {
    MaterialDatabase materials;
    LayerStack wall;
    /// Embedded system; empty for a scenario without a "unit_cell" section.
    std::optional<UnitCell> unit_cell;
    ThermalBoundary boundary;
    SweepConfig sweep;
    SolverOptions solver;
    VoxelOptions voxel;

    /// Unit cell of the scenario or, when absent, the reference cell built
    /// around this scenario's wall.
    UnitCell cell_or_default() const;
};

/// Schema errors are InvalidArgument with a JSON-pointer prefix such as
/// "/wall/layers/1/thickness_mm: expected a number". `db` is the material
/// database before the scenario's own "materials" overrides are merged.
Scenario parse_scenario(const nlohmann::json& doc, const MaterialDatabase& db);
Scenario load_scenario(const std::filesystem::path& path, const MaterialDatabase& db);
Scenario default_scenario(const MaterialDatabase& db);

} // namespace stwall
