#include "stwall/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "stwall/error.hpp"

namespace stwall {

namespace {

using nlohmann::json;

// Object reader that tracks its JSON pointer and rejects unknown keys.
class Node {
public:
    Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail("expected an object");
    }

    [[noreturn]] void fail(const std::string& what) const { throw InvalidArgument((path_.empty() ? "/" : path_) + ": " + what); }
    std::string at(const std::string& key) const { return path_ + "/" + key; }
    std::string path() const { return path_.empty() ? "/" : path_; }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key);
    }
    const json& raw(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key)) fail("missing required key '" + key + "'");
        return j_.at(key);
    }
    Node child(const std::string& key) { return Node(raw(key), at(key)); }

    double number(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number()) throw InvalidArgument(at(key) + ": expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) throw InvalidArgument(at(key) + ": expected a finite number");
        return x;
    }
    double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }
    double positive(const std::string& key, double fallback) {
        const double x = number(key, fallback);
        if (!(x > 0.0)) throw InvalidArgument(at(key) + ": must be positive");
        return x;
    }
    std::string string(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_string()) throw InvalidArgument(at(key) + ": expected a string");
        return v.get<std::string>();
    }
    std::vector<double> numbers(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_array()) throw InvalidArgument(at(key) + ": expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) throw InvalidArgument(at(key) + "/" + std::to_string(i) + ": expected a number");
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw InvalidArgument(at(it.key()) + ": unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

template <class Fn>
auto rethrow_at(const std::string& path, Fn fn) {
    try {
        return fn();
    } catch (const NotFound& e) {
        throw InvalidArgument(path + ": " + e.what());
    } catch (const InvalidArgument& e) {
        const std::string what = e.what();
        if (!what.empty() && what[0] == '/') throw;
        throw InvalidArgument(path + ": " + what);
    } catch (const json::exception& e) {
        throw InvalidArgument(path + ": " + e.what());
    }
}

Material material_ref(Node& n, const std::string& key, const MaterialDatabase& db, const std::string& fallback) {
    const std::string name = n.has(key) ? n.string(key) : fallback;
    return rethrow_at(n.at(key), [&] { return db.lookup(name); });
}

LayerStack parse_wall(Node n, const MaterialDatabase& db) {
    LayerStack stack;
    const json& layers = n.raw("layers");
    const std::string lpath = n.at("layers");
    if (!layers.is_array() || layers.empty()) throw InvalidArgument(lpath + ": expected a non-empty array");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        Node l(layers[i], lpath + "/" + std::to_string(i));
        const std::string name = l.string("material");
        Material m = rethrow_at(l.at("material"), [&] { return db.lookup(name); });
        const double t = l.number("thickness_mm");
        if (!(t > 0.0)) throw InvalidArgument(l.at("thickness_mm") + ": must be positive");
        l.finish();
        stack.layers.push_back(Layer{std::move(m), t});
    }
    stack.ambient_front_eps = n.positive("ambient_front_eps", 1.0);
    stack.ambient_back_eps = n.positive("ambient_back_eps", 1.0);
    n.finish();
    return stack;
}

AntennaSpec parse_antenna(Node n) {
    AntennaSpec a;
    a.constant_gain_dbi = n.number("constant_gain_dbi", a.constant_gain_dbi);
    a.pattern_exponent = n.number("pattern_exponent", a.pattern_exponent);
    a.band_edge_order = n.number("band_edge_order", a.band_edge_order);
    a.spiral_inner_radius_mm = n.positive("spiral_inner_radius_mm", a.spiral_inner_radius_mm);
    a.spiral_outer_radius_mm = n.positive("spiral_outer_radius_mm", a.spiral_outer_radius_mm);
    a.spiral_turns = static_cast<int>(n.positive("spiral_turns", a.spiral_turns));
    a.footprint_mm = n.positive("footprint_mm", a.footprint_mm);
    if (n.has("gain_table")) {
        const json& t = n.raw("gain_table");
        const std::string path = n.at("gain_table");
        if (!t.is_array()) throw InvalidArgument(path + ": expected an array of [GHz, dBi] pairs");
        for (std::size_t i = 0; i < t.size(); ++i) {
            const json& p = t[i];
            if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
                throw InvalidArgument(path + "/" + std::to_string(i) + ": expected [GHz, dBi]");
            a.gain_table.push_back({p[0].get<double>(), p[1].get<double>()});
        }
    }
    n.finish();
    rethrow_at(n.path(), [&] { a.validate(); return 0; });
    return a;
}

CoaxSpec parse_coax(Node n) {
    CoaxSpec c;
    c.inner_radius_mm = n.positive("inner_radius_mm", c.inner_radius_mm);
    c.outer_radius_mm = n.positive("outer_radius_mm", c.outer_radius_mm);
    c.shield_thickness_mm = n.positive("shield_thickness_mm", c.shield_thickness_mm);
    c.eps_r = n.positive("eps_r", c.eps_r);
    c.tan_delta = n.number("tan_delta", c.tan_delta);
    c.resistivity = n.number("resistivity_ohm_m", c.resistivity);
    c.mu_r = n.positive("mu_r", c.mu_r);
    if (n.has("length_m")) c.length_m = n.positive("length_m", c.length_m);
    c.count = static_cast<int>(n.positive("count", c.count));
    n.finish();
    return c;
}

UnitCell parse_unit_cell(Node n, const LayerStack& wall, const MaterialDatabase& db) {
    UnitCell cell;
    cell.wall = wall;
    const double s = n.positive("separation_mm", 150.0);
    cell.sx_mm = n.positive("sx_mm", s);
    cell.sy_mm = n.positive("sy_mm", s);

    EmbeddedSystem sys = rethrow_at(n.path(), [&] { return EmbeddedSystem::defaults(db); });
    if (n.has("antenna")) sys.antenna = parse_antenna(n.child("antenna"));
    const bool explicit_length = n.has("coax") && n.raw("coax").contains("length_m");
    const bool explicit_rho = n.has("coax") && n.raw("coax").contains("resistivity_ohm_m");
    if (n.has("coax")) sys.coax = parse_coax(n.child("coax"));
    // The cable always spans the wall unless the scenario says otherwise.
    if (!explicit_length) sys.coax.length_m = wall.total_thickness_mm() * 1e-3;
    sys.conductor = material_ref(n, "conductor", db, sys.conductor.name);
    if (!explicit_rho) {
        if (sys.conductor.is_dielectric()) throw InvalidArgument(n.at("conductor") + ": material is not a conductor");
        sys.coax.resistivity = sys.conductor.conductor().resistivity;
        sys.coax.mu_r = sys.conductor.conductor().mu_r;
    }
    sys.coax_dielectric = material_ref(n, "coax_dielectric", db, sys.coax_dielectric.name);
    sys.foam = material_ref(n, "foam", db, sys.foam.name);
    sys.laminate = material_ref(n, "laminate", db, sys.laminate.name);
    if (n.has("foam_block")) {
        Node f = n.child("foam_block");
        sys.foam_block.size_x_mm = f.positive("size_x_mm", sys.foam_block.size_x_mm);
        sys.foam_block.size_y_mm = f.positive("size_y_mm", sys.foam_block.size_y_mm);
        sys.foam_block.thickness_mm = f.positive("thickness_mm", sys.foam_block.thickness_mm);
        f.finish();
    }
    if (n.has("laminate_sheet")) {
        Node l = n.child("laminate_sheet");
        sys.laminate_sheet.size_mm = l.positive("size_mm", sys.laminate_sheet.size_mm);
        sys.laminate_sheet.thickness_mm = l.positive("thickness_mm", sys.laminate_sheet.thickness_mm);
        l.finish();
    }
    n.finish();
    cell.system = std::move(sys);
    rethrow_at(n.path(), [&] { cell.validate(); return 0; });
    return cell;
}

std::vector<double> parse_separations(Node& n) {
    const json& v = n.raw("separations_mm");
    const std::string path = n.at("separations_mm");
    if (v.is_array()) return n.numbers("separations_mm");
    Node r(v, path);
    const double start = r.number("start"), stop = r.number("stop"), step = r.number("step");
    r.finish();
    if (!(step > 0.0) || stop < start) throw InvalidArgument(path + ": expected start <= stop and step > 0");
    std::vector<double> out;
    for (int i = 0; start + i * step <= stop + 1e-9; ++i) out.push_back(start + i * step);
    return out;
}

} // namespace

UnitCell Scenario::cell_or_default() const {
    if (unit_cell) return *unit_cell;
    UnitCell cell = reference_unit_cell(materials);
    cell.wall = wall;
    cell.system->coax.length_m = wall.total_thickness_mm() * 1e-3;
    return cell;
}

Scenario default_scenario(const MaterialDatabase& db) {
    Scenario s;
    s.materials = db;
    s.wall = reference_wall(db);
    return s;
}

Scenario parse_scenario(const json& doc, const MaterialDatabase& base) {
    Node root(doc, "");
    Scenario s;
    s.materials = base;
    if (root.has("materials")) {
        const json& m = root.raw("materials");
        if (!m.is_array()) throw InvalidArgument("/materials: expected an array of material objects");
        for (std::size_t i = 0; i < m.size(); ++i)
            s.materials.insert(rethrow_at("/materials/" + std::to_string(i), [&] { return material_from_json(m[i]); }));
    }
    s.wall = root.has("wall") ? parse_wall(root.child("wall"), s.materials) : reference_wall(s.materials);
    rethrow_at("/wall", [&] { s.wall.validate(); return 0; });
    if (root.has("unit_cell")) s.unit_cell = parse_unit_cell(root.child("unit_cell"), s.wall, s.materials);

    if (root.has("boundary")) {
        Node b = root.child("boundary");
        s.boundary.r_si = b.number("r_si", s.boundary.r_si);
        s.boundary.r_se = b.number("r_se", s.boundary.r_se);
        s.boundary.t_si_air = b.positive("t_si_air_K", s.boundary.t_si_air);
        s.boundary.t_se_air = b.positive("t_se_air_K", s.boundary.t_se_air);
        b.finish();
        rethrow_at("/boundary", [&] { s.boundary.validate(); return 0; });
    }

    if (root.has("thermal")) {
        Node t = root.child("thermal");
        s.solver.tolerance = t.positive("tolerance", s.solver.tolerance);
        s.solver.max_iterations = static_cast<std::size_t>(t.positive("max_iterations", s.solver.max_iterations));
        if (t.has("mesh")) {
            Node m = t.child("mesh");
            VoxelOptions& v = s.voxel;
            v.lateral_max_mm = m.positive("lateral_max_mm", v.lateral_max_mm);
            v.lateral_feature_mm = m.positive("lateral_feature_mm", v.lateral_feature_mm);
            v.growth = m.positive("growth", v.growth);
            v.z_conductive_mm = m.positive("z_conductive_mm", v.z_conductive_mm);
            v.z_insulation_mm = m.positive("z_insulation_mm", v.z_insulation_mm);
            v.z_interface_mm = m.positive("z_interface_mm", v.z_interface_mm);
            v.insulation_threshold = m.positive("insulation_threshold", v.insulation_threshold);
            v.refinement = m.positive("refinement", v.refinement);
            m.finish();
        }
        t.finish();
    }

    s.sweep.boundary = s.boundary;
    s.sweep.voxel = s.voxel;
    s.sweep.tolerance = s.solver.tolerance;
    if (root.has("sweep")) {
        Node w = root.child("sweep");
        if (w.has("separations_mm")) s.sweep.separations_mm = parse_separations(w);
        if (w.has("frequencies_ghz")) s.sweep.frequencies_ghz = w.numbers("frequencies_ghz");
        s.sweep.u_limit = w.positive("u_limit", s.sweep.u_limit);
        if (w.has("mode")) {
            const std::string mode = w.string("mode");
            s.sweep.mode = rethrow_at(w.at("mode"), [&] { return combine_mode_from_string(mode); });
        }
        s.sweep.theta_deg = w.number("theta_deg", s.sweep.theta_deg);
        if (w.has("polarization")) {
            const std::string pol = w.string("polarization");
            s.sweep.polarization = rethrow_at(w.at("polarization"), [&] { return polarization_from_string(pol); });
        }
        w.finish();
    }
    root.finish();
    return s;
}

Scenario load_scenario(const std::filesystem::path& path, const MaterialDatabase& db) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open scenario file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidArgument(path.string() + ": " + e.what());
    }
    return parse_scenario(doc, db);
}

} // namespace stwall
