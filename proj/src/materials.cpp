#include "stwall/materials.hpp"

#include <cmath>
#include <fstream>

#include "stwall/error.hpp"
#include "stwall/units.hpp"

namespace stwall {

namespace {

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw InvalidArgument(std::string("non-finite ") + what);
}

} // namespace

double ComplexPermittivity::conductivity() const {
    return eps_imag * kEps0 * angular_frequency(frequency_ghz);
}

PermittivityModel::PermittivityModel(double a, double b, double c, double d) : a_(a), b_(b), c_(c), d_(d) {
    require_finite(a, "coefficient a");
    require_finite(b, "coefficient b");
    require_finite(c, "coefficient c");
    require_finite(d, "coefficient d");
    if (a <= 0.0) throw InvalidArgument("permittivity coefficient a must be positive");
    if (c < 0.0) throw InvalidArgument("permittivity coefficient c must be non-negative");
}

double PermittivityModel::conductivity(double f_ghz) const { return c_ * std::pow(f_ghz, d_); }

ComplexPermittivity PermittivityModel::at(double f_ghz) const {
    if (!(f_ghz > 0.0)) throw InvalidArgument("frequency must be positive");
    ComplexPermittivity eps;
    eps.frequency_ghz = f_ghz;
    eps.eps_real = a_ * std::pow(f_ghz, b_);
    eps.eps_imag = conductivity(f_ghz) / (kEps0 * angular_frequency(f_ghz));
    return eps;
}

ComplexPermittivity permittivity_at(const PermittivityModel& model, double f_ghz) { return model.at(f_ghz); }

Material::Material(std::string name_, ElectricalModel electrical_, double lambda)
    : name(std::move(name_)), electrical(std::move(electrical_)), thermal_conductivity(lambda) {
    if (name.empty()) throw InvalidArgument("material name must not be empty");
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw InvalidArgument("material '" + name + "': thermal conductivity must be positive");
    if (auto* fixed = std::get_if<FixedPermittivity>(&electrical)) {
        require_finite(fixed->eps_real, "eps_real");
        require_finite(fixed->eps_imag, "eps_imag");
        if (fixed->eps_imag < 0.0) throw InvalidArgument("material '" + name + "': eps_imag must be non-negative");
    } else if (auto* cond = std::get_if<Conductor>(&electrical)) {
        if (cond->resistivity < 0.0 || cond->mu_r <= 0.0)
            throw InvalidArgument("material '" + name + "': invalid conductor parameters");
    }
}

ComplexPermittivity Material::permittivity(double f_ghz) const {
    if (!(f_ghz > 0.0)) throw InvalidArgument("frequency must be positive");
    if (auto* model = std::get_if<PermittivityModel>(&electrical)) return model->at(f_ghz);
    if (auto* fixed = std::get_if<FixedPermittivity>(&electrical)) return {fixed->eps_real, fixed->eps_imag, f_ghz};
    throw InvalidArgument("material '" + name + "' is a conductor and has no dielectric permittivity");
}

const Conductor& Material::conductor() const {
    if (auto* cond = std::get_if<Conductor>(&electrical)) return *cond;
    throw InvalidArgument("material '" + name + "' is not a conductor");
}

Material Material::with_thermal_conductivity(double lambda) const { return Material(name, electrical, lambda); }

void to_json(nlohmann::json& j, const Material& m) {
    j = nlohmann::json{{"name", m.name}, {"thermal_conductivity", m.thermal_conductivity}};
    std::visit(
        [&](const auto& e) {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, PermittivityModel>) {
                j["permittivity"] = {{"model", "itu"}, {"a", e.a()}, {"b", e.b()}, {"c", e.c()}, {"d", e.d()}};
            } else if constexpr (std::is_same_v<T, FixedPermittivity>) {
                j["permittivity"] = {{"model", "fixed"}, {"eps_real", e.eps_real}, {"eps_imag", e.eps_imag}};
            } else {
                j["permittivity"] = {{"model", "conductor"}, {"resistivity", e.resistivity}, {"mu_r", e.mu_r}};
            }
        },
        m.electrical);
}

Material material_from_json(const nlohmann::json& j) {
    const auto name = j.at("name").get<std::string>();
    const auto& p = j.at("permittivity");
    const auto model = p.at("model").get<std::string>();
    ElectricalModel electrical = FixedPermittivity{};
    if (model == "itu") {
        electrical = PermittivityModel(p.at("a").get<double>(), p.value("b", 0.0), p.at("c").get<double>(),
                                       p.value("d", 0.0));
    } else if (model == "fixed") {
        if (p.contains("tan_delta")) {
            electrical = FixedPermittivity::from_loss_tangent(p.at("eps_real").get<double>(), p.at("tan_delta").get<double>());
        } else {
            electrical = FixedPermittivity{p.at("eps_real").get<double>(), p.value("eps_imag", 0.0)};
        }
    } else if (model == "conductor") {
        electrical = Conductor{p.at("resistivity").get<double>(), p.value("mu_r", 1.0)};
    } else {
        throw InvalidArgument("material '" + name + "': unknown permittivity model '" + model + "'");
    }
    return Material(name, electrical, j.at("thermal_conductivity").get<double>());
}

MaterialDatabase::MaterialDatabase(const std::vector<Material>& materials) {
    for (const auto& m : materials) insert(m);
}

MaterialDatabase MaterialDatabase::builtin() { return MaterialDatabase(builtin_database()); }

MaterialDatabase MaterialDatabase::from_json(const nlohmann::json& j) {
    MaterialDatabase db;
    for (const auto& item : j.at("materials")) db.insert(material_from_json(item));
    return db;
}

MaterialDatabase MaterialDatabase::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw NotFound("cannot open material database '" + path.string() + "'");
    return from_json(nlohmann::json::parse(in));
}

nlohmann::json MaterialDatabase::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [name, m] : by_name_) arr.push_back(m);
    return {{"materials", arr}};
}

const Material& MaterialDatabase::lookup(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) throw NotFound("unknown material '" + name + "'");
    return it->second;
}

void MaterialDatabase::insert(Material m) {
    auto name = m.name;
    by_name_.insert_or_assign(std::move(name), std::move(m));
}

void MaterialDatabase::merge(const MaterialDatabase& other) {
    for (const auto& [name, m] : other.by_name_) insert(m);
}

std::vector<Material> MaterialDatabase::list() const {
    std::vector<Material> out;
    out.reserve(by_name_.size());
    for (const auto& [name, m] : by_name_) out.push_back(m);
    return out;
}

std::vector<Material> builtin_database() {
    // Stainless resistivity is a calibrated default for an austenitic grade.
    return {
        Material("concrete", PermittivityModel(5.24, 0.0, 0.0462, 0.7822), 1.3),
        Material("rockwool", PermittivityModel(1.48, 0.0, 1.1e-3, 1.075), 0.035),
        Material("concrete_moist", PermittivityModel(5.84, 0.0, 0.205, 0.06), 1.3),
        Material("stainless_steel", Conductor{6.9e-7, 1.0}, 15.0),
        Material("copper", Conductor{1.68e-8, 1.0}, 400.0),
        Material("ptfe", FixedPermittivity::from_loss_tangent(1.75, 0.004), 0.24),
        Material("styrofoam", FixedPermittivity{1.0, 0.0}, 0.05),
        Material("laminate", FixedPermittivity::from_loss_tangent(2.2, 9.0e-4), 0.2),
        Material("foam_backing", FixedPermittivity{1.0, 0.0}, 0.05),
        Material("vacuum", FixedPermittivity{1.0, 0.0}, 0.026),
    };
}

} // namespace stwall
