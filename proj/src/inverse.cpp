#include "stwall/inverse.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <future>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include <gsl/gsl_multimin.h>

#include "stwall/error.hpp"
#include "stwall/units.hpp"

namespace stwall {

void MeasuredSpectrum::validate() const {
    if (frequencies_ghz.empty()) throw InvalidArgument("spectrum is empty");
    if (s21.size() != frequencies_ghz.size()) throw InvalidArgument("spectrum frequency and S21 lengths differ");
    if (!flagged.empty() && flagged.size() != frequencies_ghz.size())
        throw InvalidArgument("spectrum flag vector length differs");
    for (std::size_t i = 0; i < size(); ++i) {
        if (!(frequencies_ghz[i] > 0.0) || !std::isfinite(frequencies_ghz[i]))
            throw InvalidArgument("spectrum frequencies must be positive and finite");
        if (i > 0 && !(frequencies_ghz[i] > frequencies_ghz[i - 1]))
            throw InvalidArgument("spectrum frequency grid must be strictly increasing");
        if (!std::isfinite(s21[i].real()) || !std::isfinite(s21[i].imag()))
            throw InvalidArgument("spectrum S21 values must be finite");
    }
}

std::vector<double> MeasuredSpectrum::magnitude_db() const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = amplitude_db(s21[i]);
    return out;
}

MeasuredSpectrum make_spectrum(std::vector<double> frequencies_ghz, std::vector<cplx> s21) {
    MeasuredSpectrum m;
    m.frequencies_ghz = std::move(frequencies_ghz);
    m.s21 = std::move(s21);
    m.validate();
    return m;
}

MeasuredSpectrum make_magnitude_spectrum(std::vector<double> frequencies_ghz, const std::vector<double>& s21_db) {
    std::vector<cplx> s21;
    s21.reserve(s21_db.size());
    for (double db : s21_db) s21.emplace_back(std::pow(10.0, db / 20.0), 0.0);
    MeasuredSpectrum m = make_spectrum(std::move(frequencies_ghz), std::move(s21));
    m.magnitude_only = true;
    return m;
}

namespace {

std::vector<double> unwrapped_phase(const std::vector<cplx>& v) {
    std::vector<double> ph(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        ph[i] = std::arg(v[i]);
        if (i > 0) {
            const double jump = ph[i] - ph[i - 1];
            ph[i] -= 2.0 * std::numbers::pi * std::round(jump / (2.0 * std::numbers::pi));
        }
    }
    return ph;
}

// Reference resampled onto `grid` (dB and unwrapped phase, linear in f).
std::vector<cplx> resample(const MeasuredSpectrum& ref, const std::vector<double>& grid) {
    const auto& f = ref.frequencies_ghz;
    const std::vector<double> db = ref.magnitude_db();
    const std::vector<double> ph = unwrapped_phase(ref.s21);
    std::vector<cplx> out;
    out.reserve(grid.size());
    for (double x : grid) {
        if (x < f.front() - 1e-9 || x > f.back() + 1e-9)
            throw InvalidArgument("reference spectrum does not cover " + std::to_string(x) + " GHz");
        std::size_t hi = std::upper_bound(f.begin(), f.end(), x) - f.begin();
        hi = std::clamp<std::size_t>(hi, 1, f.size() - 1);
        const std::size_t lo = hi - 1;
        const double w = f.size() == 1 ? 0.0 : std::clamp((x - f[lo]) / (f[hi] - f[lo]), 0.0, 1.0);
        const double m = std::pow(10.0, (db[lo] + w * (db[hi] - db[lo])) / 20.0);
        out.push_back(std::polar(m, ph[lo] + w * (ph[hi] - ph[lo])));
    }
    return out;
}

} // namespace

MeasuredSpectrum normalize_spectrum(const MeasuredSpectrum& dut, const MeasuredSpectrum& reference,
                                    const NormalizeOptions& options) {
    dut.validate();
    reference.validate();
    std::vector<cplx> ref;
    if (options.interpolate) {
        ref = resample(reference, dut.frequencies_ghz);
    } else {
        if (reference.size() != dut.size()) throw InvalidArgument("reference grid differs from DUT grid");
        for (std::size_t i = 0; i < dut.size(); ++i)
            if (std::abs(reference.frequencies_ghz[i] - dut.frequencies_ghz[i]) > 1e-9 * dut.frequencies_ghz[i])
                throw InvalidArgument("reference grid differs from DUT grid");
        ref = reference.s21;
    }

    MeasuredSpectrum out = dut;
    out.magnitude_only = dut.magnitude_only || reference.magnitude_only;
    out.reference_id = reference.fixture_id;
    out.flagged.assign(dut.size(), false);
    for (std::size_t i = 0; i < dut.size(); ++i) {
        if (!dut.flagged.empty() && dut.flagged[i]) out.flagged[i] = true;
        if (amplitude_db(ref[i]) < options.reference_floor_db) out.flagged[i] = true;
        if (std::abs(ref[i]) == 0.0) {
            out.s21[i] = 0.0;
            continue;
        }
        out.s21[i] = out.magnitude_only ? cplx(std::abs(dut.s21[i]) / std::abs(ref[i]), 0.0) : dut.s21[i] / ref[i];
    }
    return out;
}

void FitOptions::validate() const {
    for (const Bounds* bd : {&a, &c, &d})
        if (!(bd->hi > bd->lo) || !std::isfinite(bd->lo) || !std::isfinite(bd->hi))
            throw InvalidArgument("fit bounds must satisfy lo < hi");
    if (!(a.lo > 0.0)) throw InvalidArgument("lower bound on a must be positive");
    if (c.lo < 0.0) throw InvalidArgument("lower bound on c must be non-negative");
    if (!std::isfinite(b)) throw InvalidArgument("fixed exponent b must be finite");
    if (n_starts < 1) throw InvalidArgument("at least one start is required");
    if (max_iterations < 1 || !(simplex_tolerance > 0.0)) throw InvalidArgument("invalid fit stopping criteria");
}

cplx slab_transmission(const PermittivityModel& model, double thickness_mm, double f_ghz) {
    LayerStack stack;
    stack.layers.push_back(Layer{Material("sample", model, 1.0), thickness_mm});
    return tmm_coefficients(stack, Incidence{f_ghz, 0.0, Polarization::TE}).t;
}

double fit_objective(const MeasuredSpectrum& spectrum, double thickness_mm, const PermittivityModel& model,
                     bool complex_fit) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
        if (!spectrum.flagged.empty() && spectrum.flagged[i]) continue;
        const cplx t = slab_transmission(model, thickness_mm, spectrum.frequencies_ghz[i]);
        double e;
        if (complex_fit) {
            e = kNeperToDb * std::abs(std::log(t / spectrum.s21[i]));
        } else {
            e = amplitude_db(t) - amplitude_db(spectrum.s21[i]);
        }
        sum += e * e;
        ++n;
    }
    if (n == 0) throw InvalidArgument("no usable points in spectrum");
    const double r = std::sqrt(sum / n);
    return std::isfinite(r) ? r : 1e30;
}

namespace {

struct Problem {
    const MeasuredSpectrum* spectrum;
    double thickness_mm;
    const FitOptions* options;

    static double map(double u, const Bounds& b) { return b.lo + (b.hi - b.lo) / (1.0 + std::exp(-u)); }
    static double unmap(double x, const Bounds& b) {
        const double p = std::clamp((x - b.lo) / (b.hi - b.lo), 1e-12, 1.0 - 1e-12);
        return std::log(p / (1.0 - p));
    }

    std::array<double, 3> params(const gsl_vector* u) const {
        return {map(gsl_vector_get(u, 0), options->a), map(gsl_vector_get(u, 1), options->c),
                map(gsl_vector_get(u, 2), options->d)};
    }
    PermittivityModel model(const std::array<double, 3>& p) const { return {p[0], options->b, p[1], p[2]}; }

    static double eval(const gsl_vector* u, void* self) {
        const auto* pr = static_cast<const Problem*>(self);
        return fit_objective(*pr->spectrum, pr->thickness_mm, pr->model(pr->params(u)), pr->options->complex_fit);
    }
};

FitStart run_start(const Problem& problem, const std::array<double, 3>& initial) {
    const FitOptions& opt = *problem.options;
    gsl_multimin_function fn{&Problem::eval, 3, const_cast<Problem*>(&problem)};
    gsl_vector* x = gsl_vector_alloc(3);
    gsl_vector* step = gsl_vector_alloc(3);
    gsl_vector_set(x, 0, Problem::unmap(initial[0], opt.a));
    gsl_vector_set(x, 1, Problem::unmap(initial[1], opt.c));
    gsl_vector_set(x, 2, Problem::unmap(initial[2], opt.d));
    gsl_vector_set_all(step, 1.0);
    gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 3);
    gsl_multimin_fminimizer_set(s, &fn, x, step);

    FitStart out;
    out.initial = initial;
    int status = GSL_CONTINUE;
    while (status == GSL_CONTINUE && out.iterations < opt.max_iterations) {
        ++out.iterations;
        if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
        status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), opt.simplex_tolerance);
    }
    out.converged = status == GSL_SUCCESS;
    out.fitted = problem.params(s->x);
    out.residual_db = s->fval;
    gsl_multimin_fminimizer_free(s);
    gsl_vector_free(step);
    gsl_vector_free(x);
    return out;
}

} // namespace

namespace {

std::vector<FitStart> run_starts(const Problem& problem, const std::vector<std::array<double, 3>>& initial) {
    std::vector<FitStart> out(initial.size());
    if (std::thread::hardware_concurrency() > 1) {
        std::vector<std::future<FitStart>> jobs;
        for (const auto& init : initial) jobs.push_back(std::async(std::launch::async, run_start, problem, init));
        for (std::size_t i = 0; i < jobs.size(); ++i) out[i] = jobs[i].get();
    } else {
        for (std::size_t i = 0; i < initial.size(); ++i) out[i] = run_start(problem, initial[i]);
    }
    return out;
}

} // namespace

FitResult fit_permittivity(const MeasuredSpectrum& spectrum, double thickness_mm, const FitOptions& options) {
    spectrum.validate();
    options.validate();
    if (!(thickness_mm > 0.0) || !std::isfinite(thickness_mm))
        throw InvalidArgument("slab thickness must be positive");

    FitResult result;
    if (spectrum.size() < 10) result.warnings.push_back("fewer than 10 frequency points");
    if (spectrum.frequencies_ghz.back() < 2.0 * spectrum.frequencies_ghz.front())
        result.warnings.push_back("frequency span is less than one octave");
    if (spectrum.frequencies_ghz.front() < PermittivityModel::kValidMinGhz ||
        spectrum.frequencies_ghz.back() > PermittivityModel::kValidMaxGhz)
        result.warnings.push_back("spectrum extends outside the 1-100 GHz model range");

    // Start 0 at the centre of the box. The rest are stratified in a, where the
    // magnitude objective is most multimodal, and uniform in c and d.
    std::mt19937_64 rng(options.seed);
    auto unit = [&] { return (rng() >> 11) * 0x1.0p-53; };
    auto uniform = [&](const Bounds& b) { return b.lo + (b.hi - b.lo) * unit(); };
    std::vector<std::array<double, 3>> initial(options.n_starts);
    initial[0] = {0.5 * (options.a.lo + options.a.hi), 0.5 * (options.c.lo + options.c.hi),
                  0.5 * (options.d.lo + options.d.hi)};
    const double strata = options.n_starts - 1;
    for (int i = 1; i < options.n_starts; ++i) {
        initial[i][0] = options.a.lo + (options.a.hi - options.a.lo) * (i - 1 + unit()) / strata;
        initial[i][1] = uniform(options.c);
        initial[i][2] = uniform(options.d);
    }

    if (options.complex_fit) {
        // Wrapped phase makes the complex objective rugged in a; seed it from the magnitude fit.
        FitOptions magnitude = options;
        magnitude.complex_fit = false;
        const auto coarse = run_starts(Problem{&spectrum, thickness_mm, &magnitude}, initial);
        const auto seed = std::min_element(coarse.begin(), coarse.end(), [](const FitStart& x, const FitStart& y) {
            return x.residual_db < y.residual_db;
        });
        initial.insert(initial.begin(), seed->fitted);
    }
    result.starts = run_starts(Problem{&spectrum, thickness_mm, &options}, initial);

    std::size_t best = 0;
    for (std::size_t i = 1; i < result.starts.size(); ++i)
        if (result.starts[i].residual_db < result.starts[best].residual_db) best = i;
    const FitStart& b = result.starts[best];
    result.best_start = best;
    result.model = PermittivityModel(b.fitted[0], options.b, b.fitted[1], b.fitted[2]);
    result.residual_db = b.residual_db;
    result.converged = b.converged && b.residual_db < 1e29;
    for (const auto& s : result.starts) result.iterations += s.iterations;
    if (std::none_of(result.starts.begin(), result.starts.end(), [](const FitStart& s) { return s.converged; }))
        result.warnings.push_back("no start met the simplex tolerance");
    return result;
}

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

double parse_number(const std::string& text, std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (trim(text.substr(used)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw InvalidArgument("line " + std::to_string(line) + ": cannot parse number '" + text + "'");
}

} // namespace

MeasuredSpectrum read_spectrum_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::map<std::string, std::size_t> col;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string cell;
        for (std::size_t i = 0; std::getline(ss, cell, ','); ++i) col[lower(trim(cell))] = i;
        break;
    }
    auto find = [&](std::initializer_list<const char*> names) -> std::ptrdiff_t {
        for (const char* n : names)
            if (auto it = col.find(lower(n)); it != col.end()) return static_cast<std::ptrdiff_t>(it->second);
        return -1;
    };
    const auto fcol = find({"freq_GHz", "f_GHz"});
    const auto mcol = find({"s21_dB", "t_dB"});
    const auto pcol = find({"s21_phase_deg", "t_phase_deg"});
    if (fcol < 0 || mcol < 0) throw InvalidArgument("CSV needs freq_GHz and s21_dB (or t_dB) columns");

    std::vector<double> f, db, ph;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
        const auto need = static_cast<std::size_t>(std::max({fcol, mcol, pcol}));
        if (cells.size() <= need) throw InvalidArgument("line " + std::to_string(line_no) + ": too few columns");
        f.push_back(parse_number(cells[fcol], line_no));
        db.push_back(parse_number(cells[mcol], line_no));
        if (pcol >= 0) ph.push_back(parse_number(cells[pcol], line_no));
    }
    if (pcol < 0) return make_magnitude_spectrum(std::move(f), db);
    std::vector<cplx> s21(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) s21[i] = std::polar(std::pow(10.0, db[i] / 20.0), deg_to_rad(ph[i]));
    return make_spectrum(std::move(f), std::move(s21));
}

MeasuredSpectrum read_touchstone(std::istream& in) {
    double scale = 1.0; // to GHz; GHz is the Touchstone default
    std::string format = "ma";
    std::string line;
    std::size_t line_no = 0;
    std::vector<double> values;
    bool seen_option = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto bang = line.find('!'); bang != std::string::npos) line.erase(bang);
        line = trim(line);
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (seen_option) continue; // only the first option line counts
            seen_option = true;
            std::stringstream ss(lower(line.substr(1)));
            std::string tok;
            while (ss >> tok) {
                if (tok == "hz") scale = 1e-9;
                else if (tok == "khz") scale = 1e-6;
                else if (tok == "mhz") scale = 1e-3;
                else if (tok == "ghz") scale = 1.0;
                else if (tok == "ma" || tok == "db" || tok == "ri") format = tok;
                else if (tok == "r") ss >> tok; // reference impedance
                else if (tok != "s")
                    throw InvalidArgument("line " + std::to_string(line_no) + ": unsupported Touchstone option '" +
                                          tok + "'");
            }
            continue;
        }
        if (line[0] == '[') throw InvalidArgument("Touchstone v2 keywords are not supported");
        std::stringstream ss(line);
        std::string tok;
        while (ss >> tok) values.push_back(parse_number(tok, line_no));
    }
    if (values.empty() || values.size() % 9 != 0)
        throw InvalidArgument("Touchstone data is not a whole number of 2-port records");

    std::vector<double> f;
    std::vector<cplx> s21;
    for (std::size_t r = 0; r < values.size(); r += 9) {
        f.push_back(values[r] * scale);
        // Order: S11 S21 S12 S22, each as a pair.
        const double p = values[r + 3], q = values[r + 4];
        if (format == "ri") s21.emplace_back(p, q);
        else if (format == "db") s21.push_back(std::polar(std::pow(10.0, p / 20.0), deg_to_rad(q)));
        else s21.push_back(std::polar(p, deg_to_rad(q)));
    }
    return make_spectrum(std::move(f), std::move(s21));
}

MeasuredSpectrum read_spectrum_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw NotFound("cannot open spectrum file " + path.string());
    MeasuredSpectrum m = lower(path.extension().string()) == ".s2p" ? read_touchstone(in) : read_spectrum_csv(in);
    m.fixture_id = path.filename().string();
    return m;
}

} // namespace stwall
