#include "stwall/fdtd.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <sstream>
#include <thread>

#include "stwall/error.hpp"
#include "stwall/units.hpp"

namespace stwall {

void Fdtd1dConfig::validate() const {
    if (!(dx_mm > 0.0)) throw InvalidArgument("FDTD spatial step must be positive");
    if (!(courant > 0.0 && courant <= 1.0)) throw InvalidArgument("FDTD Courant factor must be in (0, 1]");
    if (!(center_ghz > 0.0) || !(bandwidth_ghz > 0.0)) throw InvalidArgument("FDTD source band must be positive");
    if (!(margin_mm >= 4.0 * dx_mm)) throw InvalidArgument("FDTD margin must span at least 4 cells");
    if (max_time_steps == 0) throw InvalidArgument("FDTD needs at least one time step");
    if (!(min_cells_per_wavelength > 0.0)) throw InvalidArgument("FDTD resolution requirement must be positive");
}

namespace {

struct Cell {
    double eps_r;
    double sigma;
};

// Cell-averaged properties over [x - dx/2, x + dx/2]; x in metres from stack front.
Cell average_cell(const std::vector<std::pair<double, Cell>>& slabs_end, double x, double dx) {
    const double lo = x - dx / 2.0, hi = x + dx / 2.0;
    double eps = 0.0, sigma = 0.0, start = 0.0, covered = 0.0;
    for (const auto& [end, cell] : slabs_end) {
        const double overlap = std::max(0.0, std::min(hi, end) - std::max(lo, start));
        eps += overlap * cell.eps_r;
        sigma += overlap * cell.sigma;
        covered += overlap;
        start = end;
    }
    const double vacuum = dx - covered;
    return {(eps + vacuum) / dx, sigma / dx};
}

struct Dft {
    std::vector<cplx> acc;
    std::vector<cplx> step; // e^{-j w dt}
    std::vector<cplx> phase;

    Dft(const std::vector<double>& f_ghz, double dt) {
        for (double f : f_ghz) {
            acc.emplace_back(0.0);
            step.push_back(std::polar(1.0, -angular_frequency(f) * dt));
            phase.emplace_back(1.0);
        }
    }
    void add(double v) {
        for (std::size_t i = 0; i < acc.size(); ++i) {
            acc[i] += v * phase[i];
            phase[i] *= step[i];
        }
    }
};

} // namespace

FdtdResult run_fdtd(const LayerStack& stack, const Fdtd1dConfig& cfg, const std::vector<double>& frequencies_ghz) {
    stack.validate();
    cfg.validate();
    if (stack.ambient_front_eps != 1.0 || stack.ambient_back_eps != 1.0)
        throw InvalidArgument("FDTD oracle supports vacuum ambient media only");

    const double dx = mm_to_m(cfg.dx_mm);
    const double dt = cfg.courant * dx / kSpeedOfLight;
    const double s = cfg.courant;

    std::vector<std::pair<double, Cell>> slabs;
    double depth = 0.0, eps_max = 1.0;
    for (const auto& layer : stack.layers) {
        const auto eps = layer.material.permittivity(cfg.center_ghz);
        depth += mm_to_m(layer.thickness_mm);
        slabs.emplace_back(depth, Cell{eps.eps_real, eps.conductivity()});
        eps_max = std::max(eps_max, eps.eps_real);
    }

    const auto margin = static_cast<std::size_t>(std::ceil(cfg.margin_mm / cfg.dx_mm));
    const std::size_t k_reflect = margin / 2;
    const std::size_t k_tfsf = margin;
    const std::size_t k_front = k_tfsf + margin;
    const auto depth_cells = static_cast<std::size_t>(std::ceil(depth / dx - 1e-9));
    const std::size_t k_back = k_front + depth_cells;
    const std::size_t k_trans = k_back + margin / 2;
    const std::size_t n = k_back + margin + 1;

    std::vector<double> ca(n, 1.0), cb(n, s);
    for (std::size_t k = 0; k < n; ++k) {
        const double x = (static_cast<double>(k) - static_cast<double>(k_front)) * dx;
        const Cell c = average_cell(slabs, x, dx);
        const double loss = c.sigma * dt / (2.0 * kEps0 * c.eps_r);
        ca[k] = (1.0 - loss) / (1.0 + loss);
        cb[k] = s / c.eps_r / (1.0 + loss);
    }

    // Gaussian-modulated sine whose spectrum is 40 dB down at center +- bandwidth.
    const double tau = std::sqrt(std::log(100.0)) / (std::numbers::pi * ghz_to_hz(cfg.bandwidth_ghz));
    const double t0 = 5.0 * tau;
    const double w0 = angular_frequency(cfg.center_ghz);
    auto source = [&](double t) {
        const double u = (t - t0) / tau;
        return std::sin(w0 * (t - t0)) * std::exp(-u * u);
    };

    // Valid band: source within 40 dB of its peak, and grid resolves the densest medium.
    FdtdResult result;
    const double resolved_max_ghz =
        kSpeedOfLight / (cfg.min_cells_per_wavelength * dx * std::sqrt(eps_max)) * 1e-9;
    result.valid_min_ghz = std::max(0.0, cfg.center_ghz - cfg.bandwidth_ghz);
    result.valid_max_ghz = std::min(cfg.center_ghz + cfg.bandwidth_ghz, resolved_max_ghz);

    std::vector<double> freqs;
    for (double f : frequencies_ghz) {
        if (f >= result.valid_min_ghz && f <= result.valid_max_ghz && f > 0.0) {
            freqs.push_back(f);
        } else {
            result.dropped_ghz.push_back(f);
        }
    }

    std::vector<double> ez(n, 0.0), hy(n, 0.0), ez_inc(n, 0.0), hy_inc(n, 0.0);
    Dft dft_trans(freqs, dt), dft_refl(freqs, dt), dft_inc_trans(freqs, dt), dft_inc_refl(freqs, dt);

    const double mur = (s - 1.0) / (s + 1.0);
    const double source_end = 2.0 * t0;
    const double threshold = std::pow(10.0, -cfg.decay_db / 20.0);
    double peak = 0.0;

    std::size_t step = 0;
    for (; step < cfg.max_time_steps; ++step) {
        const double time = static_cast<double>(step) * dt;

        for (std::size_t k = 0; k + 1 < n; ++k) hy[k] += s * (ez[k + 1] - ez[k]);
        hy[k_tfsf - 1] -= s * ez_inc[k_tfsf];
        for (std::size_t k = 0; k + 1 < n; ++k) hy_inc[k] += s * (ez_inc[k + 1] - ez_inc[k]);

        const double left_old = ez[0], left_next_old = ez[1];
        const double right_old = ez[n - 1], right_prev_old = ez[n - 2];
        for (std::size_t k = 1; k + 1 < n; ++k) ez[k] = ca[k] * ez[k] + cb[k] * (hy[k] - hy[k - 1]);
        ez[k_tfsf] -= s * hy_inc[k_tfsf - 1];
        ez[0] = left_next_old + mur * (ez[1] - left_old);
        ez[n - 1] = right_prev_old + mur * (ez[n - 2] - right_old);

        const double inc_right_old = ez_inc[n - 1], inc_prev_old = ez_inc[n - 2];
        for (std::size_t k = 1; k + 1 < n; ++k) ez_inc[k] += s * (hy_inc[k] - hy_inc[k - 1]);
        ez_inc[0] = source(time + dt);
        ez_inc[n - 1] = inc_prev_old + mur * (ez_inc[n - 2] - inc_right_old);

        const double et = ez[k_trans], er = ez[k_reflect], it = ez_inc[k_trans], ir = ez_inc[k_reflect];
        dft_trans.add(et);
        dft_refl.add(er);
        dft_inc_trans.add(it);
        dft_inc_refl.add(ir);
        result.transmitted_trace.push_back(et);
        result.reflected_trace.push_back(er);
        result.incident_trace.push_back(it);
        result.transmitted_energy += et * et;
        result.reflected_energy += er * er;
        result.injected_energy += it * it;

        if (step % 16 == 0) {
            double field = 0.0;
            for (std::size_t k = 0; k < n; ++k) field = std::max(field, std::abs(ez[k]));
            if (!std::isfinite(field) || field > 1e3) {
                std::ostringstream msg;
                msg << "FDTD instability at step " << step << ": field norm grew to " << field
                    << " (Courant factor " << cfg.courant << ", stability requires <= 1)";
                throw NumericalError(msg.str());
            }
            peak = std::max(peak, field);
            if (time > source_end && field < threshold * peak) {
                result.decayed = true;
                ++step;
                break;
            }
        }
    }
    result.steps = step;

    const double front_to_back = static_cast<double>(depth_cells) * dx;
    const double reflect_gap = static_cast<double>(k_front - k_reflect) * dx;
    result.spectrum.polarization = Polarization::TE;
    result.spectrum.theta_deg = 0.0;
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        const double k0 = free_space_wavenumber(freqs[i]);
        const cplx t = dft_trans.acc[i] / dft_inc_trans.acc[i] * std::polar(1.0, -k0 * front_to_back);
        const cplx r = dft_refl.acc[i] / dft_inc_refl.acc[i] * std::polar(1.0, 2.0 * k0 * reflect_gap);
        result.spectrum.frequencies_ghz.push_back(freqs[i]);
        result.spectrum.t.push_back(t);
        result.spectrum.r.push_back(r);
    }
    return result;
}

FdtdResult fdtd_spectrum(const LayerStack& stack, const std::vector<double>& frequencies_ghz,
                         const FdtdSweepOptions& options) {
    std::vector<double> sorted = frequencies_ghz;
    std::sort(sorted.begin(), sorted.end());

    std::vector<std::vector<double>> bands;
    for (double f : sorted) {
        if (bands.empty() || f - bands.back().front() > options.sub_band_ghz) {
            bands.push_back({f});
        } else {
            bands.back().push_back(f);
        }
    }

    auto run_band = [&](const std::vector<double>& band) {
        Fdtd1dConfig cfg = options.base;
        cfg.center_ghz = (band.front() + band.back()) / 2.0;
        cfg.bandwidth_ghz = std::max(options.min_bandwidth_ghz, 1.5 * (band.back() - band.front()));
        cfg.bandwidth_ghz = std::min(cfg.bandwidth_ghz, 0.9 * cfg.center_ghz);
        return run_fdtd(stack, cfg, band);
    };

    // Sub-band runs are independent; results are merged in frequency order.
    std::vector<FdtdResult> runs(bands.size());
    const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t begin = 0; begin < bands.size(); begin += workers) {
        std::vector<std::future<FdtdResult>> batch;
        const std::size_t end = std::min(bands.size(), begin + workers);
        for (std::size_t i = begin; i < end; ++i) {
            if (workers == 1) {
                runs[i] = run_band(bands[i]);
            } else {
                batch.push_back(std::async(std::launch::async, run_band, std::cref(bands[i])));
            }
        }
        for (std::size_t i = 0; i < batch.size(); ++i) runs[begin + i] = batch[i].get();
    }

    FdtdResult merged;
    merged.spectrum.polarization = Polarization::TE;
    merged.valid_min_ghz = runs.empty() ? 0.0 : runs.front().valid_min_ghz;
    merged.valid_max_ghz = runs.empty() ? 0.0 : runs.back().valid_max_ghz;
    merged.decayed = true;
    for (auto& run : runs) {
        for (std::size_t i = 0; i < run.spectrum.size(); ++i) {
            merged.spectrum.frequencies_ghz.push_back(run.spectrum.frequencies_ghz[i]);
            merged.spectrum.t.push_back(run.spectrum.t[i]);
            merged.spectrum.r.push_back(run.spectrum.r[i]);
        }
        merged.dropped_ghz.insert(merged.dropped_ghz.end(), run.dropped_ghz.begin(), run.dropped_ghz.end());
        merged.steps += run.steps;
        merged.decayed = merged.decayed && run.decayed;
        merged.injected_energy += run.injected_energy;
        merged.transmitted_energy += run.transmitted_energy;
        merged.reflected_energy += run.reflected_energy;
    }
    return merged;
}

} // namespace stwall
