#include "stwall/layered_em.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "stwall/error.hpp"
#include "stwall/units.hpp"

namespace stwall {

void LayerStack::validate() const {
    if (layers.empty()) throw InvalidArgument("layer stack is empty");
    for (const auto& layer : layers) {
        if (!(layer.thickness_mm > 0.0) || !std::isfinite(layer.thickness_mm))
            throw InvalidArgument("layer '" + layer.material.name + "' must have positive thickness");
    }
    if (!(ambient_front_eps >= 1.0) || !(ambient_back_eps >= 1.0))
        throw InvalidArgument("ambient media must have real permittivity >= 1");
}

double LayerStack::total_thickness_mm() const {
    double total = 0.0;
    for (const auto& layer : layers) total += layer.thickness_mm;
    return total;
}

LayerStack LayerStack::reversed() const {
    LayerStack out = *this;
    std::reverse(out.layers.begin(), out.layers.end());
    std::swap(out.ambient_front_eps, out.ambient_back_eps);
    return out;
}

std::string_view to_string(Polarization pol) {
    switch (pol) {
    case Polarization::TE: return "TE";
    case Polarization::TM: return "TM";
    case Polarization::RHCP: return "RHCP";
    case Polarization::LHCP: return "LHCP";
    }
    return "?";
}

Polarization polarization_from_string(std::string_view text) {
    std::string upper(text);
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
    if (upper == "TE") return Polarization::TE;
    if (upper == "TM") return Polarization::TM;
    if (upper == "RHCP") return Polarization::RHCP;
    if (upper == "LHCP") return Polarization::LHCP;
    throw InvalidArgument("unknown polarization '" + std::string(text) + "'");
}

namespace {

enum class Linear { TE, TM };

struct Medium {
    cplx q; // normalized longitudinal wavenumber kz/k0
    cplx y; // normalized transverse admittance
};

// Longitudinal wavenumber with Im(q) <= 0 so waves decay along +z for e^{+jwt}.
Medium medium(cplx eps, double sin2_front, Linear pol) {
    cplx q = std::sqrt(eps - sin2_front);
    if (q.imag() > 0.0) q = -q;
    if (q.real() < 0.0 && q.imag() == 0.0) q = -q;
    const cplx y = pol == Linear::TE ? q : eps / q;
    return {q, y};
}

struct Prepared {
    double k0;
    Medium front, back;
    std::vector<Medium> layers;
    std::vector<double> thickness_m;
};

Prepared prepare(const LayerStack& stack, const Incidence& inc, Linear pol) {
    stack.validate();
    if (!(inc.frequency_ghz > 0.0)) throw InvalidArgument("frequency must be positive");
    if (!(inc.theta_deg >= 0.0 && inc.theta_deg < 90.0))
        throw InvalidArgument("incidence angle must be in [0, 90) degrees");
    const double s = std::sin(deg_to_rad(inc.theta_deg));
    const double sin2 = stack.ambient_front_eps * s * s;
    Prepared p;
    p.k0 = free_space_wavenumber(inc.frequency_ghz);
    p.front = medium(stack.ambient_front_eps, sin2, pol);
    p.back = medium(stack.ambient_back_eps, sin2, pol);
    if (std::abs(p.back.q) == 0.0) throw InvalidArgument("transmitted wave is grazing in the back medium");
    for (const auto& layer : stack.layers) {
        p.layers.push_back(medium(layer.material.permittivity(inc.frequency_ghz).value(), sin2, pol));
        p.thickness_m.push_back(mm_to_m(layer.thickness_mm));
    }
    return p;
}

Coefficients characteristic_matrix(const Prepared& p) {
    using Mat = std::array<cplx, 4>;
    Mat m{1.0, 0.0, 0.0, 1.0};
    const cplx j(0.0, 1.0);
    for (std::size_t i = 0; i < p.layers.size(); ++i) {
        const auto& l = p.layers[i];
        const cplx delta = p.k0 * l.q * p.thickness_m[i];
        const cplx c = std::cos(delta), s = std::sin(delta);
        const Mat layer{c, j * s / l.y, j * l.y * s, c};
        m = Mat{m[0] * layer[0] + m[1] * layer[2], m[0] * layer[1] + m[1] * layer[3],
                m[2] * layer[0] + m[3] * layer[2], m[2] * layer[1] + m[3] * layer[3]};
    }
    const cplx b = m[0] + m[1] * p.back.y;
    const cplx cc = m[2] + m[3] * p.back.y;
    const cplx den = p.front.y * b + cc;
    return {2.0 * p.front.y / den, (p.front.y * b - cc) / den};
}

struct SMatrix {
    cplx s11, s12, s21, s22;
};

SMatrix star(const SMatrix& a, const SMatrix& b) {
    const cplx loop = 1.0 / (1.0 - a.s22 * b.s11);
    return {a.s11 + a.s12 * b.s11 * loop * a.s21, a.s12 * loop * b.s12, b.s21 * loop * a.s21,
            b.s22 + b.s21 * a.s22 * loop * b.s12};
}

SMatrix interface(const Medium& from, const Medium& to) {
    const cplx sum = from.y + to.y;
    return {(from.y - to.y) / sum, 2.0 * to.y / sum, 2.0 * from.y / sum, (to.y - from.y) / sum};
}

Coefficients scattering_cascade(const Prepared& p) {
    SMatrix s{0.0, 1.0, 1.0, 0.0};
    const Medium* prev = &p.front;
    for (std::size_t i = 0; i < p.layers.size(); ++i) {
        s = star(s, interface(*prev, p.layers[i]));
        const cplx phase = std::exp(cplx(0.0, -1.0) * p.k0 * p.layers[i].q * p.thickness_m[i]);
        s = star(s, SMatrix{0.0, phase, phase, 0.0});
        prev = &p.layers[i];
    }
    s = star(s, interface(*prev, p.back));
    return {s.s21, s.s11};
}

Coefficients linear_coefficients(const LayerStack& stack, const Incidence& inc, Linear pol) {
    const Prepared p = prepare(stack, inc, pol);
    Coefficients c = characteristic_matrix(p);
    const bool finite = std::isfinite(std::abs(c.t)) && std::isfinite(std::abs(c.r));
    if (!finite || std::abs(c.t) < 1e-15) c = scattering_cascade(p);
    return c;
}

} // namespace

Coefficients tmm_coefficients(const LayerStack& stack, const Incidence& inc) {
    switch (inc.polarization) {
    case Polarization::TE: return linear_coefficients(stack, inc, Linear::TE);
    case Polarization::TM: return linear_coefficients(stack, inc, Linear::TM);
    case Polarization::RHCP:
    case Polarization::LHCP: {
        const auto te = linear_coefficients(stack, inc, Linear::TE);
        const auto tm = linear_coefficients(stack, inc, Linear::TM);
        return {(te.t + tm.t) / 2.0, (te.r + tm.r) / 2.0};
    }
    }
    throw InvalidArgument("unknown polarization");
}

Coefficients scattering_coefficients(const LayerStack& stack, const Incidence& inc) {
    if (inc.polarization == Polarization::TE || inc.polarization == Polarization::TM) {
        return scattering_cascade(prepare(stack, inc, inc.polarization == Polarization::TE ? Linear::TE : Linear::TM));
    }
    const auto te = scattering_cascade(prepare(stack, inc, Linear::TE));
    const auto tm = scattering_cascade(prepare(stack, inc, Linear::TM));
    return {(te.t + tm.t) / 2.0, (te.r + tm.r) / 2.0};
}

CpCoefficients cp_transmission(const LayerStack& stack, double f_ghz, double theta_deg) {
    const auto te = linear_coefficients(stack, {f_ghz, theta_deg, Polarization::TE}, Linear::TE);
    const auto tm = linear_coefficients(stack, {f_ghz, theta_deg, Polarization::TM}, Linear::TM);
    return {(te.t + tm.t) / 2.0, (te.t - tm.t) / 2.0};
}

std::vector<double> linear_grid(double f_start, double f_stop, std::size_t n_points) {
    if (n_points < 2) throw InvalidArgument("frequency grid needs at least 2 points");
    if (!(f_stop > f_start)) throw InvalidArgument("frequency grid must be strictly increasing");
    std::vector<double> grid(n_points);
    const double step = (f_stop - f_start) / static_cast<double>(n_points - 1);
    for (std::size_t i = 0; i < n_points; ++i) grid[i] = f_start + step * static_cast<double>(i);
    grid.back() = f_stop;
    return grid;
}

Spectrum transmission_spectrum(const LayerStack& stack, double f_start_ghz, double f_stop_ghz, std::size_t n_points,
                               double theta_deg, Polarization pol) {
    if (!PermittivityModel::in_validity_range(f_start_ghz) || !PermittivityModel::in_validity_range(f_stop_ghz))
        throw InvalidArgument("spectrum band must lie within [1, 100] GHz");
    return transmission_spectrum(stack, linear_grid(f_start_ghz, f_stop_ghz, n_points), theta_deg, pol);
}

Spectrum transmission_spectrum(const LayerStack& stack, const std::vector<double>& frequencies_ghz, double theta_deg,
                               Polarization pol) {
    for (std::size_t i = 1; i < frequencies_ghz.size(); ++i) {
        if (!(frequencies_ghz[i] > frequencies_ghz[i - 1]))
            throw InvalidArgument("frequency grid must be strictly increasing");
    }
    Spectrum out;
    out.polarization = pol;
    out.theta_deg = theta_deg;
    out.frequencies_ghz = frequencies_ghz;
    out.t.reserve(frequencies_ghz.size());
    out.r.reserve(frequencies_ghz.size());
    for (double f : frequencies_ghz) {
        const auto c = tmm_coefficients(stack, {f, theta_deg, pol});
        out.t.push_back(c.t);
        out.r.push_back(c.r);
    }
    return out;
}

double amplitude_db(double x) { return std::max(20.0 * std::log10(std::abs(x)), -400.0); }
double amplitude_db(cplx x) { return amplitude_db(std::abs(x)); }

void write_spectrum_csv(std::ostream& out, const Spectrum& s) {
    out << "freq_GHz,t_dB,t_phase_deg,r_dB,r_phase_deg,pol,theta_deg\n";
    char line[256];
    for (std::size_t i = 0; i < s.size(); ++i) {
        std::snprintf(line, sizeof line, "%.6f,%.6f,%.4f,%.6f,%.4f,%s,%.4f\n", s.frequencies_ghz[i], amplitude_db(s.t[i]),
                      rad_to_deg(std::arg(s.t[i])), amplitude_db(s.r[i]), rad_to_deg(std::arg(s.r[i])),
                      std::string(to_string(s.polarization)).c_str(), s.theta_deg);
        out << line;
    }
}

} // namespace stwall
