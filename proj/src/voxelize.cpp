#include <algorithm>
#include <cmath>
#include <numbers>

#include "stwall/error.hpp"
#include "stwall/thermal.hpp"

namespace stwall {

namespace {

struct Key {
    double pos;
    double h;
    bool rigid = false; // interval between two rigid keys stays a single cell
};

template <typename StepFn>
std::vector<double> graded_edges(std::vector<Key> keys, StepFn max_step_at, double growth) {
    std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) { return a.pos < b.pos; });
    std::vector<Key> merged;
    for (const auto& k : keys) {
        if (!merged.empty() && std::abs(k.pos - merged.back().pos) < 1e-9) {
            merged.back().h = std::min(merged.back().h, k.h);
            merged.back().rigid = merged.back().rigid || k.rigid;
        } else {
            merged.push_back(k);
        }
    }

    std::vector<double> edges{merged.front().pos};
    for (std::size_t n = 0; n + 1 < merged.size(); ++n) {
        const Key& lo = merged[n];
        const Key& hi = merged[n + 1];
        const double h_max = max_step_at(0.5 * (lo.pos + hi.pos));
        if ((lo.rigid && hi.rigid) || hi.pos - lo.pos <= std::min(lo.h, hi.h) * 1.0001) {
            edges.push_back(hi.pos);
            continue;
        }
        std::vector<double> left{lo.pos}, right{hi.pos};
        double hl = std::min(lo.h, h_max), hr = std::min(hi.h, h_max);
        while (true) {
            const double gap = right.back() - left.back();
            if (gap <= h_max * 1.0001 && gap <= std::max(hl, hr) * growth) break;
            if (hl <= hr) {
                if (gap - hl < 0.5 * hl) break;
                left.push_back(left.back() + hl);
                hl = std::min(hl * growth, h_max);
            } else {
                if (gap - hr < 0.5 * hr) break;
                right.push_back(right.back() - hr);
                hr = std::min(hr * growth, h_max);
            }
        }
        const double gap = right.back() - left.back();
        const auto fill = static_cast<std::size_t>(std::ceil(gap / h_max - 1e-9));
        for (std::size_t i = 1; i < left.size(); ++i) edges.push_back(left[i]);
        for (std::size_t i = 1; i < fill; ++i)
            edges.push_back(left.back() + gap * static_cast<double>(i) / static_cast<double>(fill));
        for (std::size_t i = right.size(); i-- > 0;) edges.push_back(right[i]);
    }
    return edges;
}

struct MaterialTable {
    std::vector<std::string> names;
    std::vector<double> conductivity;

    std::uint8_t id(const Material& m) {
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (names[i] == m.name) {
                if (conductivity[i] != m.thermal_conductivity)
                    throw InvalidArgument("material '" + m.name + "' used with two conductivities");
                return static_cast<std::uint8_t>(i);
            }
        }
        if (names.size() >= 255) throw InvalidArgument("too many materials in unit cell");
        names.push_back(m.name);
        conductivity.push_back(m.thermal_conductivity);
        return static_cast<std::uint8_t>(names.size() - 1);
    }
};

} // namespace

VoxelGrid voxelize_unit_cell(const UnitCell& cell, const VoxelOptions& opt) {
    cell.validate();
    if (!(opt.refinement > 0.0) || !(opt.growth >= 1.0)) throw InvalidArgument("invalid voxel options");

    const double hx = cell.sx_mm / 2.0, hy = cell.sy_mm / 2.0;
    const double depth = cell.wall.total_thickness_mm();
    const double lat_max = opt.lateral_max_mm / opt.refinement;
    const double lat_feat = opt.lateral_feature_mm / opt.refinement;

    std::vector<Key> xkeys{{-hx, lat_max}, {hx, lat_max}};
    std::vector<Key> ykeys{{-hy, lat_max}, {hy, lat_max}};

    // Each line becomes an equal-area square: pin, dielectric bore, shield.
    const double root_pi = std::sqrt(std::numbers::pi);
    double pin_half = 0, bore_half = 0, outer_half = 0;
    std::vector<double> coax_centers;
    const EmbeddedSystem* sys = cell.system ? &*cell.system : nullptr;
    if (sys) {
        const auto& coax = sys->coax;
        pin_half = root_pi * coax.inner_radius_mm / 2.0;
        bore_half = root_pi * coax.dielectric_radius_mm() / 2.0;
        outer_half = root_pi * coax.outer_radius_mm / 2.0;
        const double side = 2.0 * outer_half;
        for (int n = 0; n < coax.count; ++n)
            coax_centers.push_back((n - (coax.count - 1) / 2.0) * side);
        const double block_half_x = coax.count * outer_half;
        const double lam_half = sys->laminate_sheet.size_mm / 2.0;
        const double foam_hx = sys->foam_block.size_x_mm / 2.0, foam_hy = sys->foam_block.size_y_mm / 2.0;

        if (lam_half > hx || lam_half > hy) throw InvalidArgument("laminate exceeds the unit cell");
        if (foam_hx > hx || foam_hy > hy) throw InvalidArgument("foam block exceeds the unit cell");
        if (block_half_x > lam_half || outer_half > lam_half)
            throw InvalidArgument("coax assembly exceeds the antenna laminate");
        const double recess = sys->laminate_sheet.thickness_mm + sys->foam_block.thickness_mm;
        if (!(sys->laminate_sheet.thickness_mm > 0.0) || !(sys->foam_block.thickness_mm > 0.0))
            throw InvalidArgument("laminate and foam thickness must be positive");
        if (!(recess < cell.wall.layers.front().thickness_mm) || !(recess < cell.wall.layers.back().thickness_mm))
            throw InvalidArgument("antenna recess must lie inside the outer wall layers");
        if (pin_half < 1e-3 || (outer_half - bore_half) < 1e-3)
            throw InvalidArgument("coax features too small to resolve");

        const double feature_h = std::min({outer_half - bore_half, 2.0 * pin_half, bore_half - pin_half});
        for (double c : coax_centers) {
            for (double off : {-outer_half, -bore_half, -pin_half, pin_half, bore_half, outer_half})
                xkeys.push_back({c + off, feature_h, true});
        }
        for (double off : {-outer_half, -bore_half, -pin_half, pin_half, bore_half, outer_half})
            ykeys.push_back({off, feature_h, true});
        for (double v : {-lam_half, lam_half}) {
            xkeys.push_back({v, lat_feat});
            ykeys.push_back({v, lat_feat});
        }
        for (double v : {-foam_hx, foam_hx}) xkeys.push_back({v, lat_feat});
        for (double v : {-foam_hy, foam_hy}) ykeys.push_back({v, lat_feat});
    }

    auto lateral_step = [&](double) { return lat_max; };

    // z: layer boundaries plus laminate and foam interfaces at both faces.
    std::vector<double> layer_ends;
    std::vector<double> layer_step;
    double z = 0.0;
    for (const auto& layer : cell.wall.layers) {
        z += layer.thickness_mm;
        layer_ends.push_back(z);
        const bool insulating = layer.material.thermal_conductivity < opt.insulation_threshold;
        layer_step.push_back((insulating ? opt.z_insulation_mm : opt.z_conductive_mm) / opt.refinement);
    }
    auto z_step = [&](double zm) {
        for (std::size_t n = 0; n < layer_ends.size(); ++n)
            if (zm <= layer_ends[n]) return layer_step[n];
        return layer_step.back();
    };
    const double z_iface = opt.z_interface_mm / opt.refinement;
    std::vector<Key> zkeys{{0.0, sys ? z_iface : layer_step.front()}, {depth, sys ? z_iface : layer_step.back()}};
    for (std::size_t n = 0; n + 1 < layer_ends.size(); ++n)
        zkeys.push_back({layer_ends[n], std::min(layer_step[n], layer_step[n + 1])});
    if (sys) {
        const double lam = sys->laminate_sheet.thickness_mm;
        const double back = lam + sys->foam_block.thickness_mm;
        for (double v : {lam, back, depth - lam, depth - back}) zkeys.push_back({v, z_iface});
    }

    VoxelGrid grid;
    grid.x_edges_mm = graded_edges(xkeys, lateral_step, opt.growth);
    grid.y_edges_mm = graded_edges(ykeys, lateral_step, opt.growth);
    grid.z_edges_mm = graded_edges(zkeys, z_step, opt.growth);

    MaterialTable table;
    std::vector<std::uint8_t> layer_ids;
    for (const auto& layer : cell.wall.layers) layer_ids.push_back(table.id(layer.material));
    std::uint8_t steel = 0, dielectric = 0, foam = 0, laminate = 0;
    if (sys) {
        steel = table.id(sys->conductor);
        dielectric = table.id(sys->coax_dielectric);
        foam = table.id(sys->foam);
        laminate = table.id(sys->laminate);
    }

    const std::size_t nx = grid.nx(), ny = grid.ny(), nz = grid.nz();
    grid.material.assign(nx * ny * nz, 0);
    for (std::size_t k = 0; k < nz; ++k) {
        const double zc = 0.5 * (grid.z_edges_mm[k] + grid.z_edges_mm[k + 1]);
        std::size_t layer = 0;
        while (layer + 1 < layer_ends.size() && zc > layer_ends[layer]) ++layer;
        const double from_face = std::min(zc, depth - zc);
        for (std::size_t j = 0; j < ny; ++j) {
            const double yc = 0.5 * (grid.y_edges_mm[j] + grid.y_edges_mm[j + 1]);
            for (std::size_t i = 0; i < nx; ++i) {
                const double xc = 0.5 * (grid.x_edges_mm[i] + grid.x_edges_mm[i + 1]);
                std::uint8_t id = layer_ids[layer];
                if (sys) {
                    const double lam_t = sys->laminate_sheet.thickness_mm;
                    const double lam_half = sys->laminate_sheet.size_mm / 2.0;
                    if (from_face < lam_t + sys->foam_block.thickness_mm &&
                        std::abs(xc) < sys->foam_block.size_x_mm / 2.0 &&
                        std::abs(yc) < sys->foam_block.size_y_mm / 2.0)
                        id = foam;
                    if (from_face < lam_t && std::abs(xc) < lam_half && std::abs(yc) < lam_half) id = laminate;
                    for (double c : coax_centers) {
                        const double ax = std::abs(xc - c), ay = std::abs(yc);
                        if (ax < outer_half && ay < outer_half) {
                            const bool pin = ax < pin_half && ay < pin_half;
                            const bool bore = ax < bore_half && ay < bore_half;
                            id = pin ? steel : (bore ? dielectric : steel);
                        }
                    }
                }
                grid.material[grid.index(i, j, k)] = id;
            }
        }
    }
    grid.material_names = std::move(table.names);
    grid.conductivity = std::move(table.conductivity);

    if (sys) {
        std::size_t across = 0;
        for (std::size_t i = 0; i < nx; ++i) {
            const double xc = 0.5 * (grid.x_edges_mm[i] + grid.x_edges_mm[i + 1]);
            if (std::abs(xc - coax_centers.front()) < outer_half) ++across;
        }
        if (across < 2) throw InvalidArgument("coax diameter spans fewer than 2 voxels");
    }
    grid.validate();
    return grid;
}

} // namespace stwall
