#pragma once

#include <complex>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace stwall {

/// Relative permittivity eps = eps_real - j*eps_imag (e^{+jwt} convention), eps_imag >= 0.
struct ComplexPermittivity {
    double eps_real = 1.0;
    double eps_imag = 0.0;
    double frequency_ghz = 0.0;

    std::complex<double> value() const { return {eps_real, -eps_imag}; }
    /// Equivalent conductivity in S/m.
    double conductivity() const;
};

/// ITU-style power law: eps' = a f^b, sigma = c f^d (f in GHz, sigma in S/m).
class PermittivityModel {
public:
    static constexpr double kValidMinGhz = 1.0;
    static constexpr double kValidMaxGhz = 100.0;

    PermittivityModel(double a, double b, double c, double d);

    double a() const { return a_; }
    double b() const { return b_; }
    double c() const { return c_; }
    double d() const { return d_; }

    double conductivity(double f_ghz) const;
    ComplexPermittivity at(double f_ghz) const;

    static bool in_validity_range(double f_ghz) { return f_ghz >= kValidMinGhz && f_ghz <= kValidMaxGhz; }

    friend bool operator==(const PermittivityModel&, const PermittivityModel&) = default;

private:
    double a_, b_, c_, d_;
};

ComplexPermittivity permittivity_at(const PermittivityModel& model, double f_ghz);

/// Frequency-independent dielectric, e.g. eps_r and tan(delta) from a datasheet.
struct FixedPermittivity {
    double eps_real = 1.0;
    double eps_imag = 0.0;

    static FixedPermittivity from_loss_tangent(double eps_r, double tan_delta) { return {eps_r, eps_r * tan_delta}; }
    friend bool operator==(const FixedPermittivity&, const FixedPermittivity&) = default;
};

/// Good conductor, described by bulk resistivity.
struct Conductor {
    double resistivity = 0.0; // Ohm m
    double mu_r = 1.0;
    friend bool operator==(const Conductor&, const Conductor&) = default;
};

using ElectricalModel = std::variant<PermittivityModel, FixedPermittivity, Conductor>;

struct Material {
    std::string name;
    ElectricalModel electrical;
    double thermal_conductivity = 1.0; // W/(m K)

    Material(std::string name, ElectricalModel electrical, double thermal_conductivity);

    bool is_dielectric() const { return !std::holds_alternative<Conductor>(electrical); }
    /// Throws InvalidArgument for conductors.
    ComplexPermittivity permittivity(double f_ghz) const;
    const Conductor& conductor() const;

    Material with_thermal_conductivity(double lambda) const;

    friend bool operator==(const Material&, const Material&) = default;
};

void to_json(nlohmann::json& j, const Material& m);
Material material_from_json(const nlohmann::json& j);

/// Name-keyed, immutable-after-load collection of materials.
class MaterialDatabase {
public:
    MaterialDatabase() = default;
    explicit MaterialDatabase(const std::vector<Material>& materials);

    static MaterialDatabase builtin();
    static MaterialDatabase from_json(const nlohmann::json& j);
    static MaterialDatabase load(const std::filesystem::path& path);

    nlohmann::json to_json() const;

    /// Throws NotFound for unknown names.
    const Material& lookup(const std::string& name) const;
    bool contains(const std::string& name) const { return by_name_.count(name) != 0; }

    /// Adds or replaces by name.
    void insert(Material m);
    void merge(const MaterialDatabase& other);

    std::vector<Material> list() const;
    std::size_t size() const { return by_name_.size(); }

private:
    std::map<std::string, Material> by_name_;
};

std::vector<Material> builtin_database();

} // namespace stwall
