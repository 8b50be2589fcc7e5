#include "stwall/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <ostream>

#include "stwall/error.hpp"
#include "stwall/units.hpp"

namespace stwall {

void ThermalBoundary::validate() const {
    if (!(r_si >= 0.0) || !(r_se >= 0.0)) throw InvalidArgument("surface resistances must be non-negative");
    if (!std::isfinite(t_si_air) || !std::isfinite(t_se_air)) throw InvalidArgument("ambient temperatures must be finite");
    if (t_si_air == t_se_air) throw InvalidArgument("indoor and outdoor temperatures must differ");
}

double UValueResult::balance_error() const {
    const double scale = std::max(std::abs(heat_flow_in_w), std::abs(heat_flow_out_w));
    return scale > 0.0 ? std::abs(heat_flow_in_w - heat_flow_out_w) / scale : 0.0;
}

UValueResult u_value_analytical(const LayerStack& stack, const ThermalBoundary& bc) {
    stack.validate();
    if (!(bc.r_si >= 0.0) || !(bc.r_se >= 0.0)) throw InvalidArgument("surface resistances must be non-negative");
    double r_total = bc.r_si + bc.r_se;
    for (const auto& layer : stack.layers) r_total += mm_to_m(layer.thickness_mm) / layer.material.thermal_conductivity;
    UValueResult out;
    out.u = 1.0 / r_total;
    out.heat_flow_w = out.u * std::abs(bc.t_si_air - bc.t_se_air);
    out.heat_flow_in_w = out.heat_flow_out_w = out.heat_flow_w;
    out.converged = true;
    return out;
}

std::uint8_t VoxelGrid::material_id(const std::string& name) const {
    for (std::size_t i = 0; i < material_names.size(); ++i)
        if (material_names[i] == name) return static_cast<std::uint8_t>(i);
    throw NotFound("voxel grid has no material '" + name + "'");
}

double VoxelGrid::plane_area_m2(std::uint8_t id, std::size_t k) const {
    double area = 0.0;
    for (std::size_t j = 0; j < ny(); ++j)
        for (std::size_t i = 0; i < nx(); ++i)
            if (material[index(i, j, k)] == id) area += mm_to_m(dx_mm(i)) * mm_to_m(dy_mm(j));
    return area;
}

std::size_t VoxelGrid::plane_at(double z_mm) const {
    for (std::size_t k = 0; k < nz(); ++k)
        if (z_mm < z_edges_mm[k + 1]) return k;
    return nz() - 1;
}

void VoxelGrid::validate() const {
    auto increasing = [](const std::vector<double>& e) {
        if (e.size() < 2) return false;
        for (std::size_t i = 1; i < e.size(); ++i)
            if (!(e[i] > e[i - 1])) return false;
        return true;
    };
    if (!increasing(x_edges_mm) || !increasing(y_edges_mm) || !increasing(z_edges_mm))
        throw InvalidArgument("voxel edges must be strictly increasing");
    if (material.size() != cell_count()) throw InvalidArgument("voxel material array has wrong size");
    if (conductivity.size() != material_names.size()) throw InvalidArgument("voxel material table inconsistent");
    for (double l : conductivity)
        if (!(l > 0.0)) throw InvalidArgument("voxel conductivity must be positive");
    for (auto id : material)
        if (id >= conductivity.size()) throw InvalidArgument("voxel references unknown material");
}

namespace {

// Symmetric 7-point operator in temperature relative to the outdoor air.
struct Operator {
    std::size_t nx, ny, nz;
    std::vector<double> gx, gy, gz; // conductance to the +x/+y/+z neighbor, W/K
    std::vector<double> g_out, g_in; // Robin conductance per column, W/K
    std::vector<double> diag;

    std::size_t idx(std::size_t i, std::size_t j, std::size_t k) const { return (k * ny + j) * nx + i; }

    void apply(const std::vector<double>& v, std::vector<double>& out) const {
        for (std::size_t k = 0; k < nz; ++k)
            for (std::size_t j = 0; j < ny; ++j)
                for (std::size_t i = 0; i < nx; ++i) {
                    const std::size_t c = idx(i, j, k);
                    double s = diag[c] * v[c];
                    if (i + 1 < nx) s -= gx[c] * v[c + 1];
                    if (i > 0) s -= gx[c - 1] * v[c - 1];
                    if (j + 1 < ny) s -= gy[c] * v[c + nx];
                    if (j > 0) s -= gy[c - nx] * v[c - nx];
                    if (k + 1 < nz) s -= gz[c] * v[c + nx * ny];
                    if (k > 0) s -= gz[c - nx * ny] * v[c - nx * ny];
                    out[c] = s;
                }
    }
};

void finalize_diagonal(Operator& op);

Operator assemble(const VoxelGrid& g, const ThermalBoundary& bc) {
    Operator op{g.nx(), g.ny(), g.nz(), {}, {}, {}, {}, {}, {}};
    const std::size_t n = g.cell_count();
    op.gx.assign(n, 0.0);
    op.gy.assign(n, 0.0);
    op.gz.assign(n, 0.0);
    op.diag.assign(n, 0.0);
    op.g_out.assign(op.nx * op.ny, 0.0);
    op.g_in.assign(op.nx * op.ny, 0.0);
    auto lam = [&](std::size_t c) { return g.conductivity[g.material[c]]; };

    for (std::size_t k = 0; k < op.nz; ++k) {
        const double dz = mm_to_m(g.dz_mm(k));
        for (std::size_t j = 0; j < op.ny; ++j) {
            const double dy = mm_to_m(g.dy_mm(j));
            for (std::size_t i = 0; i < op.nx; ++i) {
                const double dx = mm_to_m(g.dx_mm(i));
                const std::size_t c = op.idx(i, j, k);
                // Face conductance from the two half-cell resistances in series.
                if (i + 1 < op.nx) {
                    const double dx2 = mm_to_m(g.dx_mm(i + 1));
                    op.gx[c] = dy * dz / (dx / (2 * lam(c)) + dx2 / (2 * lam(c + 1)));
                }
                if (j + 1 < op.ny) {
                    const double dy2 = mm_to_m(g.dy_mm(j + 1));
                    op.gy[c] = dx * dz / (dy / (2 * lam(c)) + dy2 / (2 * lam(c + op.nx)));
                }
                if (k + 1 < op.nz) {
                    const double dz2 = mm_to_m(g.dz_mm(k + 1));
                    op.gz[c] = dx * dy / (dz / (2 * lam(c)) + dz2 / (2 * lam(c + op.nx * op.ny)));
                }
                if (k == 0) op.g_out[j * op.nx + i] = dx * dy / (bc.r_se + dz / (2 * lam(c)));
                if (k + 1 == op.nz) op.g_in[j * op.nx + i] = dx * dy / (bc.r_si + dz / (2 * lam(c)));
            }
        }
    }
    finalize_diagonal(op);
    return op;
}

void finalize_diagonal(Operator& op) {
    op.diag.assign(op.nx * op.ny * op.nz, 0.0);
    for (std::size_t k = 0; k < op.nz; ++k)
        for (std::size_t j = 0; j < op.ny; ++j)
            for (std::size_t i = 0; i < op.nx; ++i) {
                const std::size_t c = op.idx(i, j, k);
                double d = 0.0;
                if (i + 1 < op.nx) d += op.gx[c];
                if (i > 0) d += op.gx[c - 1];
                if (j + 1 < op.ny) d += op.gy[c];
                if (j > 0) d += op.gy[c - op.nx];
                if (k + 1 < op.nz) d += op.gz[c];
                if (k > 0) d += op.gz[c - op.nx * op.ny];
                if (k == 0) d += op.g_out[j * op.nx + i];
                if (k + 1 == op.nz) d += op.g_in[j * op.nx + i];
                op.diag[c] = d;
            }
}

// Exact tridiagonal solves along z columns (Thomas algorithm, factors cached).
class LineSolver {
public:
    explicit LineSolver(const Operator& op) : op_(&op), inv_pivot_(op.diag.size()), upper_(op.diag.size()) {
        const std::size_t plane = op.nx * op.ny;
        for (std::size_t col = 0; col < plane; ++col) {
            double prev_upper = 0.0;
            for (std::size_t k = 0; k < op.nz; ++k) {
                const std::size_t c = k * plane + col;
                const double lower = k > 0 ? -op.gz[c - plane] : 0.0;
                inv_pivot_[c] = 1.0 / (op.diag[c] - lower * prev_upper);
                upper_[c] = k + 1 < op.nz ? -op.gz[c] * inv_pivot_[c] : 0.0;
                prev_upper = upper_[c];
            }
        }
    }

    /// Solves the columns (i0, j), (i0 + step, j), ... of row j. `rhs(c)` yields
    /// the right-hand side of cell c; sweeps run plane by plane for locality.
    template <class Rhs>
    void solve_row(std::size_t j, std::size_t i0, std::size_t step, Rhs&& rhs, double* x) const {
        const Operator& op = *op_;
        const std::size_t plane = op.nx * op.ny;
        const std::size_t row = j * op.nx;
        for (std::size_t i = i0; i < op.nx; i += step) x[row + i] = rhs(row + i) * inv_pivot_[row + i];
        for (std::size_t k = 1; k < op.nz; ++k) {
            const std::size_t base = k * plane + row;
            for (std::size_t i = i0; i < op.nx; i += step) {
                const std::size_t c = base + i;
                x[c] = (rhs(c) + op.gz[c - plane] * x[c - plane]) * inv_pivot_[c];
            }
        }
        for (std::size_t k = op.nz - 1; k-- > 0;) {
            const std::size_t base = k * plane + row;
            for (std::size_t i = i0; i < op.nx; i += step) {
                const std::size_t c = base + i;
                x[c] -= upper_[c] * x[c + plane];
            }
        }
    }

    void apply(const std::vector<double>& r, std::vector<double>& z) const {
        for (std::size_t j = 0; j < op_->ny; ++j) solve_row(j, 0, 1, [&](std::size_t c) { return r[c]; }, z.data());
    }

private:
    const Operator* op_;
    std::vector<double> inv_pivot_, upper_;
};

// Galerkin coarsening by 2x2 lateral aggregation of z columns. With piecewise
// constant prolongation the coarse operator keeps the 7-point structure.
Operator coarsen(const Operator& f) {
    Operator c;
    c.nx = (f.nx + 1) / 2;
    c.ny = (f.ny + 1) / 2;
    c.nz = f.nz;
    const std::size_t n = c.nx * c.ny * c.nz;
    c.gx.assign(n, 0.0);
    c.gy.assign(n, 0.0);
    c.gz.assign(n, 0.0);
    c.g_in.assign(c.nx * c.ny, 0.0);
    c.g_out.assign(c.nx * c.ny, 0.0);
    for (std::size_t k = 0; k < f.nz; ++k)
        for (std::size_t j = 0; j < f.ny; ++j)
            for (std::size_t i = 0; i < f.nx; ++i) {
                const std::size_t fc = f.idx(i, j, k);
                const std::size_t cc = c.idx(i / 2, j / 2, k);
                if (i + 1 < f.nx && (i + 1) / 2 != i / 2) c.gx[cc] += f.gx[fc];
                if (j + 1 < f.ny && (j + 1) / 2 != j / 2) c.gy[cc] += f.gy[fc];
                if (k + 1 < f.nz) c.gz[cc] += f.gz[fc];
                if (k == 0) c.g_out[(j / 2) * c.nx + i / 2] += f.g_out[j * f.nx + i];
                if (k + 1 == f.nz) c.g_in[(j / 2) * c.nx + i / 2] += f.g_in[j * f.nx + i];
            }
    finalize_diagonal(c);
    return c;
}

// Symmetric V-cycle: red-black z-line Gauss-Seidel smoothing, lateral
// aggregation down to a single column, exact line solve at the bottom.
class Multigrid {
public:
    explicit Multigrid(const Operator& fine) {
        levels_.push_back(std::make_unique<Level>(fine));
        while (levels_.back()->op.nx > 1 || levels_.back()->op.ny > 1)
            levels_.push_back(std::make_unique<Level>(coarsen(levels_.back()->op)));
    }

    void apply(const std::vector<double>& r, std::vector<double>& z) const { cycle(0, r, z); }

private:
    struct Level {
        explicit Level(Operator o) : op(std::move(o)), lines(op) {}
        Operator op;
        LineSolver lines;
        mutable std::vector<double> res, coarse_b, coarse_x;
    };

    static void smooth(const Level& lv, const std::vector<double>& b, std::vector<double>& x, bool forward) {
        const Operator& op = lv.op;
        for (std::size_t pass = 0; pass < 2; ++pass) {
            const std::size_t color = forward ? pass : 1 - pass;
            for (std::size_t j = 0; j < op.ny; ++j) {
                auto rhs = [&](std::size_t c) {
                    const std::size_t i = c % op.nx;
                    double s = b[c];
                    if (i + 1 < op.nx) s += op.gx[c] * x[c + 1];
                    if (i > 0) s += op.gx[c - 1] * x[c - 1];
                    if (j + 1 < op.ny) s += op.gy[c] * x[c + op.nx];
                    if (j > 0) s += op.gy[c - op.nx] * x[c - op.nx];
                    return s;
                };
                lv.lines.solve_row(j, (j + color) % 2, 2, rhs, x.data());
            }
        }
    }

    void cycle(std::size_t level, const std::vector<double>& b, std::vector<double>& x) const {
        const Level& lv = *levels_[level];
        const Operator& op = lv.op;
        const std::size_t n = op.diag.size();
        x.assign(n, 0.0);
        if (level + 1 == levels_.size()) {
            lv.lines.apply(b, x);
            return;
        }
        smooth(lv, b, x, true);

        lv.res.resize(n);
        op.apply(x, lv.res);
        for (std::size_t c = 0; c < n; ++c) lv.res[c] = b[c] - lv.res[c];
        const Operator& cop = levels_[level + 1]->op;
        lv.coarse_b.assign(cop.diag.size(), 0.0);
        for (std::size_t k = 0; k < op.nz; ++k)
            for (std::size_t j = 0; j < op.ny; ++j)
                for (std::size_t i = 0; i < op.nx; ++i)
                    lv.coarse_b[cop.idx(i / 2, j / 2, k)] += lv.res[op.idx(i, j, k)];
        cycle(level + 1, lv.coarse_b, lv.coarse_x);
        for (std::size_t k = 0; k < op.nz; ++k)
            for (std::size_t j = 0; j < op.ny; ++j)
                for (std::size_t i = 0; i < op.nx; ++i) x[op.idx(i, j, k)] += lv.coarse_x[cop.idx(i / 2, j / 2, k)];

        smooth(lv, b, x, false);
    }

    std::vector<std::unique_ptr<Level>> levels_;
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

struct Flows {
    double in, out;
};

Flows face_flows(const Operator& op, const std::vector<double>& theta, double delta_t) {
    Flows f{0.0, 0.0};
    const std::size_t plane = op.nx * op.ny;
    const std::size_t top = (op.nz - 1) * plane;
    for (std::size_t col = 0; col < plane; ++col) {
        f.in += op.g_in[col] * (delta_t - theta[top + col]);
        f.out += op.g_out[col] * theta[col];
    }
    return f;
}

} // namespace

ThermalSolution solve_temperature(const VoxelGrid& grid, const ThermalBoundary& bc, const SolverOptions& options) {
    grid.validate();
    bc.validate();
    if (!(options.tolerance > 0.0)) throw InvalidArgument("solver tolerance must be positive");

    const Operator op = assemble(grid, bc);
    const std::size_t n = grid.cell_count();
    const std::size_t plane = op.nx * op.ny;
    const double delta_t = bc.delta_t();

    std::vector<double> b(n, 0.0);
    for (std::size_t col = 0; col < plane; ++col) b[(op.nz - 1) * plane + col] = op.g_in[col] * delta_t;

    std::unique_ptr<LineSolver> lines;
    std::unique_ptr<Multigrid> multigrid;
    if (options.preconditioner == Preconditioner::ZLine) lines = std::make_unique<LineSolver>(op);
    if (options.preconditioner == Preconditioner::Multigrid) multigrid = std::make_unique<Multigrid>(op);
    auto precondition = [&](const std::vector<double>& r, std::vector<double>& z) {
        switch (options.preconditioner) {
        case Preconditioner::Multigrid: multigrid->apply(r, z); break;
        case Preconditioner::ZLine: lines->apply(r, z); break;
        case Preconditioner::Jacobi:
            for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / op.diag[i];
            break;
        }
    };

    std::vector<double> x(n, 0.0), r = b, z(n), p(n), ap(n);
    precondition(r, z);
    p = z;
    double rz = dot(r, z);
    const double b_norm = std::sqrt(dot(b, b));

    ThermalSolution sol;
    UValueResult& res = sol.result;
    std::size_t it = 0;
    double rel = std::sqrt(dot(r, r)) / b_norm;
    for (; it < options.max_iterations; ++it) {
        if (rel <= options.tolerance) {
            const Flows f = face_flows(op, x, delta_t);
            if (std::abs(f.in - f.out) <= options.tolerance * std::abs(f.in)) break;
            // The recursive residual has left the true one behind; more steps only chase rounding.
            if (rel <= options.tolerance * 1e-3) break;
        }
        op.apply(p, ap);
        const double pap = dot(p, ap);
        // Exhausted precision: the search direction carries nothing further.
        if (rz == 0.0 || !(pap > 0.0)) break;
        const double alpha = rz / pap;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        precondition(r, z);
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        rel = std::sqrt(dot(r, r)) / b_norm;
        if (!std::isfinite(rel)) throw NumericalError("thermal solver produced non-finite residual");
    }

    // True residual, not the recursively updated one.
    op.apply(x, ap);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
    res.residual = std::sqrt(dot(r, r)) / b_norm;
    res.iterations = it;
    const Flows f = face_flows(op, x, delta_t);
    res.heat_flow_in_w = std::abs(f.in);
    res.heat_flow_out_w = std::abs(f.out);
    res.heat_flow_w = 0.5 * (res.heat_flow_in_w + res.heat_flow_out_w);
    double area = 0.0;
    for (std::size_t j = 0; j < op.ny; ++j)
        for (std::size_t i = 0; i < op.nx; ++i) area += mm_to_m(grid.dx_mm(i)) * mm_to_m(grid.dy_mm(j));
    res.u = res.heat_flow_w / (area * std::abs(delta_t));
    res.converged = res.residual <= options.tolerance * 10.0 && res.balance_error() <= options.tolerance;

    sol.temperature_k.resize(n);
    for (std::size_t i = 0; i < n; ++i) sol.temperature_k[i] = bc.t_se_air + x[i];
    return sol;
}

UValueResult solve_steady_state(const VoxelGrid& grid, const ThermalBoundary& bc, double tol, std::size_t max_iter) {
    SolverOptions options;
    options.tolerance = tol;
    options.max_iterations = max_iter;
    return solve_temperature(grid, bc, options).result;
}

void write_vtk(std::ostream& out, const VoxelGrid& grid, const std::vector<double>& temperature_k) {
    if (temperature_k.size() != grid.cell_count()) throw InvalidArgument("temperature field size mismatch");
    out << "# vtk DataFile Version 3.0\nunit cell temperature\nASCII\nDATASET RECTILINEAR_GRID\n";
    out << "DIMENSIONS " << grid.x_edges_mm.size() << ' ' << grid.y_edges_mm.size() << ' ' << grid.z_edges_mm.size()
        << '\n';
    char buf[64];
    auto coords = [&](const char* name, const std::vector<double>& edges) {
        out << name << ' ' << edges.size() << " double\n";
        for (double e : edges) {
            std::snprintf(buf, sizeof buf, "%.6f\n", e);
            out << buf;
        }
    };
    coords("X_COORDINATES", grid.x_edges_mm);
    coords("Y_COORDINATES", grid.y_edges_mm);
    coords("Z_COORDINATES", grid.z_edges_mm);
    out << "CELL_DATA " << grid.cell_count() << "\nSCALARS temperature_K double 1\nLOOKUP_TABLE default\n";
    for (double t : temperature_k) {
        std::snprintf(buf, sizeof buf, "%.6f\n", t);
        out << buf;
    }
    out << "SCALARS material_id int 1\nLOOKUP_TABLE default\n";
    for (auto id : grid.material) out << static_cast<int>(id) << '\n';
}

} // namespace stwall
