#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "stwall/design_sweep.hpp"
#include "stwall/error.hpp"

using namespace stwall;

namespace {

const MaterialDatabase& db() {
    static const MaterialDatabase d = MaterialDatabase::builtin();
    return d;
}

// Coarse mesh keeps the suite quick; the full-resolution sweep runs in the acceptance binary.
SweepConfig quick_config() {
    SweepConfig cfg;
    cfg.separations_mm = {70.0, 110.0, 160.0, 200.0};
    cfg.voxel.refinement = 0.5;
    cfg.tolerance = 1e-7;
    return cfg;
}

const SweepResult& quick_sweep() {
    static const SweepResult r = run_sweep(quick_config(), reference_unit_cell(db()));
    return r;
}

} // namespace

TEST_CASE("sweep rows are ordered, monotone and above the bare wall") {
    const auto& r = quick_sweep();
    REQUIRE(r.rows.size() == 4);
    CHECK(r.bare_u == doctest::Approx(0.1509).epsilon(1e-3));
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        const auto& row = r.rows[i];
        CHECK(row.separation_mm == quick_config().separations_mm[i]);
        CHECK(row.thermal.converged);
        CHECK(row.thermal.u > r.bare_u);
        CHECK(row.feasible == (row.thermal.u <= r.u_limit));
        CHECK(row.link.size() == 4);
        if (i > 0) CHECK(row.thermal.u < r.rows[i - 1].thermal.u);
    }
    CHECK(r.diagnostics.empty());
}

TEST_CASE("selection takes the best feasible mean improvement") {
    const auto& r = quick_sweep();
    REQUIRE(r.selected_mm);
    const SweepRow* chosen = r.row(*r.selected_mm);
    REQUIRE(chosen);
    CHECK(chosen->feasible);
    for (const auto& row : r.rows)
        if (row.feasible) CHECK(row.mean_improvement_db() <= chosen->mean_improvement_db() + 1e-9);
    CHECK(r.rationale.find("coupling") != std::string::npos);
}

TEST_CASE("rows do not depend on evaluation order") {
    auto cfg = quick_config();
    cfg.separations_mm = {200.0, 70.0};
    const auto shuffled = run_sweep(cfg, reference_unit_cell(db()));
    for (const auto& row : shuffled.rows) {
        const SweepRow* ref = quick_sweep().row(row.separation_mm);
        REQUIRE(ref);
        CHECK(row.thermal.u == doctest::Approx(ref->thermal.u).epsilon(1e-6));
        for (std::size_t k = 0; k < row.link.size(); ++k)
            CHECK(row.link[k].combined_db == ref->link[k].combined_db);
    }
}

TEST_CASE("minimum feasible separation") {
    auto cfg = quick_config();
    const auto tmpl = reference_unit_cell(db());

    cfg.u_limit = std::numeric_limits<double>::max();
    const auto any = min_feasible_separation(cfg, tmpl, false, &quick_sweep());
    REQUIRE(any.separation_mm);
    CHECK(*any.separation_mm == 70.0);
    CHECK(any.evaluated.size() == 1);

    cfg.u_limit = 0.5 * quick_sweep().bare_u;
    CHECK_FALSE(min_feasible_separation(cfg, tmpl, false, &quick_sweep()).separation_mm);

    // Limit between the first two rows: bisection lands on an integer inside the bracket.
    const double u70 = quick_sweep().rows[0].thermal.u, u110 = quick_sweep().rows[1].thermal.u;
    cfg.u_limit = 0.5 * (u70 + u110);
    const auto refined = min_feasible_separation(cfg, tmpl, true, &quick_sweep());
    REQUIRE(refined.separation_mm);
    const double s = *refined.separation_mm;
    CHECK(s > 70.0);
    CHECK(s <= 110.0);
    CHECK(s == std::floor(s));
    CHECK(refined.u <= cfg.u_limit);
    bool below_checked = false;
    for (const auto& [sep, u] : refined.evaluated)
        if (sep == s - 1.0) {
            CHECK(u > cfg.u_limit);
            below_checked = true;
        }
    CHECK(below_checked);

    cfg.separations_mm = {110.0, 70.0};
    CHECK_THROWS_AS(min_feasible_separation(cfg, tmpl), InvalidArgument);
}

TEST_CASE("nothing feasible") {
    auto cfg = quick_config();
    cfg.separations_mm = {200.0};
    cfg.u_limit = 0.1;
    const auto r = run_sweep(cfg, reference_unit_cell(db()));
    CHECK_FALSE(r.selected_mm);
    CHECK_FALSE(r.diagnostics.empty());
}

TEST_CASE("sweep configuration errors") {
    auto cfg = quick_config();
    const auto tmpl = reference_unit_cell(db());
    cfg.separations_mm = {30.0};
    CHECK_THROWS_AS(run_sweep(cfg, tmpl), InvalidArgument);
    cfg = quick_config();
    cfg.frequencies_ghz.clear();
    CHECK_THROWS_AS(run_sweep(cfg, tmpl), InvalidArgument);
    cfg = quick_config();
    cfg.u_limit = 0.0;
    CHECK_THROWS_AS(run_sweep(cfg, tmpl), InvalidArgument);
    UnitCell bare;
    bare.wall = reference_wall(db());
    CHECK_THROWS_AS(run_sweep(quick_config(), bare), InvalidArgument);
}

TEST_CASE("CSV and summary output") {
    std::ostringstream a, b, summary;
    write_sweep_csv(a, quick_sweep());
    write_sweep_csv(b, quick_sweep());
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("separation_mm,U,feasible,f_GHz,t_dB,improvement_dB\n", 0) == 0);
    const std::string csv = a.str();
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 4 * 4);
    write_sweep_summary(summary, quick_sweep());
    CHECK(summary.str().find("selected:") != std::string::npos);
}
