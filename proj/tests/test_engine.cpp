#include <doctest.h>

#include <cmath>
#include <random>

#include "oracle.hpp"
#include "xbar/experiments.hpp"

using namespace xbar;

namespace {

ArraySpec spec_of(int rows, int cols, CellKind kind, double r_wire, double c = 0.0) {
    ArraySpec s;
    s.rows = rows;
    s.cols = cols;
    s.kind = kind;
    s.r_wire_bl = s.r_wire_wl = r_wire;
    s.c_cell = c;
    return s;
}

// Sum of v*i over every dissipating element, including source resistances.
double branch_power(const CircuitGraph& g, const LineBias& bias, const OperatingPoint& op) {
    const auto& v = op.node_voltages;
    double p = 0;
    for (const Branch& b : g.branches)
        if (b.kind == BranchKind::Wire && b.value > 0) p += std::pow(v(b.a) - v(b.b), 2) / b.value;
    for (std::size_t k = 0; k < g.cells.size(); ++k) {
        const Cell& c = g.cells[k];
        const double r = effective_resistance(g.params.rram, op.rram[k]);
        if (c.mid == kGround) {
            p += std::pow(v(c.bl) - v(c.wl), 2) / r;
        } else {
            const double vs = v(c.bl) - v(c.mid);
            p += vs * selector_current(g.params.selector, op.modes[k], vs);
            p += std::pow(v(c.mid) - v(c.wl), 2) / r;
        }
    }
    auto src = [&](NodeId t, const LineDrive& d) {
        if (d.driven && d.series_r > 0) p += std::pow(d.volts - v(t), 2) / d.series_r;
    };
    for (std::size_t k = 0; k < bias.bitlines.size(); ++k) src(g.bl_terminals[k], bias.bitlines[k]);
    for (std::size_t k = 0; k < bias.wordlines.size(); ++k) src(g.wl_terminals[k], bias.wordlines[k]);
    return p;
}

}  // namespace

TEST_CASE("two resistors in series") {
    // 1x1 cell with a sense resistor: a plain divider
    const ArraySpec s = spec_of(1, 1, CellKind::R1, 0.0);
    const CircuitGraph g = build_array(s, StatePattern::uniform(ResistiveState::LRS));
    LineBias b = LineBias::all_floating(s);
    b.bitlines[0] = LineDrive::Driven(2.0);
    b.wordlines[0] = LineDrive::Driven(0.0, 30e3);
    const OperatingPoint op = solve_dc(g, b, SolverConfig{});
    CHECK(op.node_voltages(g.wl_terminals[0]) == doctest::Approx(2.0 * 30e3 / 40e3).epsilon(1e-12));
}

TEST_CASE("DC matches a dense nodal solve") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 24; ++trial) {
        const int rows = 1 + static_cast<int>(u(rng) * 8), cols = 1 + static_cast<int>(u(rng) * 8);
        const double r_wire = trial % 3 == 0 ? 0.0 : 0.5 + 10 * u(rng);
        const ArraySpec s = spec_of(rows, cols, CellKind::R1, r_wire, 1e-15);
        StatePattern pat = StatePattern::checkerboard();
        CircuitGraph g = build_array(s, pat);
        for (auto& c : g.cells) c.rram.w = u(rng);
        LineBias b = LineBias::all_floating(s);
        for (auto& d : b.bitlines)
            if (u(rng) < 0.7) d = LineDrive::Driven(2.5 * u(rng) - 0.5, u(rng) < 0.3 ? 1e3 * u(rng) : 0.0);
        for (auto& d : b.wordlines)
            if (u(rng) < 0.7) d = LineDrive::Driven(2.0 * u(rng) - 0.5, u(rng) < 0.3 ? 1e3 * u(rng) : 0.0);
        b.wordlines[0] = LineDrive::Driven(0.0);
        CAPTURE(trial);
        const OperatingPoint op = solve_dc(g, b, SolverConfig{});
        const Eigen::VectorXd ref = oracle::dense_dc(g, b);
        const double scale = ref.cwiseAbs().maxCoeff();
        CHECK((op.node_voltages - ref).cwiseAbs().maxCoeff() <= 1e-9 * scale);
    }
}

TEST_CASE("2x2 read matches the four-resistor network") {
    const ArraySpec s = spec_of(2, 2, CellKind::R1, 0.0);
    StatePattern p = StatePattern::uniform(ResistiveState::LRS);
    p.overrides[{0, 0}] = ResistiveState::HRS;
    const CircuitGraph g = build_array(s, p);
    LineBias b = LineBias::all_floating(s);
    b.bitlines[0] = LineDrive::Driven(2.0);
    b.wordlines[0] = LineDrive::Driven(0.0, 100e3);
    b.sense = LineRef{LineFamily::Wordline, 0};
    const OperatingPoint op = solve_dc(g, b, SolverConfig{});
    const Eigen::VectorXd ref = oracle::dense_dc(g, b);
    CHECK(op.sense_voltage == doctest::Approx(ref(g.wl_terminals[0])).epsilon(1e-9));
}

TEST_CASE("source power equals branch dissipation") {
    for (CellKind kind : {CellKind::R1, CellKind::S1R1}) {
        for (int n : {2, 4, 8}) {
            const ArraySpec s = spec_of(n, n, kind, 2.5, 1e-15);
            const CircuitGraph g = build_array(s, StatePattern::checkerboard());
            const LineBias b = read_bias(s, {n / 2, n / 2}, 2.0, 100e3);
            const OperatingPoint op = solve_dc(g, b, SolverConfig{});
            CAPTURE(n);
            CHECK(op.source_power(b) == doctest::Approx(branch_power(g, b, op)).epsilon(1e-6));
        }
    }
}

TEST_CASE("power of a resistor over an interval") {
    const ArraySpec s = spec_of(1, 1, CellKind::R1, 0.0);
    CircuitGraph g = build_array(s, StatePattern::uniform(ResistiveState::LRS));
    g.params.rram.r_lrs = 1e3;
    LineBias b = LineBias::all_floating(s);
    b.bitlines[0] = LineDrive::Driven(1.0);
    b.wordlines[0] = LineDrive::Driven(0.0);
    SolverConfig cfg;
    cfg.dt = 1e-10;
    const TransientResult r = solve_transient(g, DriveSchedule::constant(b), 20e-9, cfg);
    const PowerMeasure pm = measure_power(r, 0.0, 20e-9);
    CHECK(pm.avg_power == doctest::Approx(1e-3).epsilon(1e-9));
    CHECK(pm.energy == doctest::Approx(20e-12).epsilon(1e-9));
}

TEST_CASE("RC step response") {
    // BL at 1 V through the LRS cell onto the WL rail capacitor; the WL source
    // is far away so the node charges through R.
    const double R = 1e4, C = 1e-12;
    const ArraySpec s = spec_of(1, 1, CellKind::R1, 0.0, C);
    const CircuitGraph g = build_array(s, StatePattern::uniform(ResistiveState::LRS));
    LineBias b = LineBias::all_floating(s);
    b.bitlines[0] = LineDrive::Driven(1.0);
    b.wordlines[0] = LineDrive::Driven(0.0, 1e15);
    SolverConfig cfg;
    cfg.dt = R * C / 100;
    Probes pr;
    pr.nodes = {g.wl_terminals[0]};
    const TransientResult r = solve_transient(g, DriveSchedule::constant(b), 2 * R * C, cfg, pr);
    const auto& t = r.time;
    const auto& v = r.node_traces[0];
    std::size_t k = 0;
    while (t[k + 1] < R * C) ++k;
    const double at = v[k] + (v[k + 1] - v[k]) * (R * C - t[k]) / (t[k + 1] - t[k]);
    CHECK(std::abs(at / (1 - std::exp(-1.0)) - 1) < 0.005);
}

TEST_CASE("zero sources give zero traces") {
    for (CellKind kind : {CellKind::R1, CellKind::S1R1}) {
        const ArraySpec s = spec_of(4, 4, kind, 2.5, 1e-15);
        const CircuitGraph g = build_array(s, StatePattern::checkerboard());
        LineBias b = LineBias::all_floating(s);
        for (auto& d : b.bitlines) d = LineDrive::Driven(0.0);
        for (auto& d : b.wordlines) d = LineDrive::Driven(0.0);
        Probes pr;
        pr.nodes = {0, 5, g.node_count - 1};
        const TransientResult r = solve_transient(g, DriveSchedule::constant(b), 1e-9, SolverConfig{}, pr);
        for (const auto& tr : r.node_traces)
            for (double x : tr) CHECK(x == 0.0);
        for (std::size_t k = 0; k < r.time.size(); ++k) CHECK(r.power_at(k) == 0.0);
        CHECK(measure_power(r, 0.0, 1e-9).energy == 0.0);
    }
}

TEST_CASE("all lines floating is singular") {
    const ArraySpec s = spec_of(2, 2, CellKind::R1, 2.5);
    const CircuitGraph g = build_array(s, StatePattern::checkerboard());
    try {
        solve_dc(g, LineBias::all_floating(s), SolverConfig{});
        FAIL("expected SingularSystem");
    } catch (const SolverError& e) {
        CHECK(e.kind() == SolverError::Kind::SingularSystem);
    }
}

TEST_CASE("schedule gap") {
    const ArraySpec s = spec_of(2, 2, CellKind::R1, 2.5);
    const CircuitGraph g = build_array(s, StatePattern::checkerboard());
    LineBias b = LineBias::all_floating(s);
    b.bitlines[0] = LineDrive::Driven(1.0);
    b.wordlines[0] = LineDrive::Driven(0.0);
    DriveSchedule sched{{{1e-9, b}}};
    try {
        solve_transient(g, sched, 2e-9, SolverConfig{});
        FAIL("expected ScheduleGap");
    } catch (const SolverError& e) {
        CHECK(e.kind() == SolverError::Kind::ScheduleGap);
    }
}

TEST_CASE("delay measurement") {
    TransientResult r;
    r.probe_cells = {{0, 0}};
    r.w_traces.resize(1);
    for (int k = 0; k <= 120; ++k) {
        r.time.push_back(k * 0.01e-9);
        r.w_traces[0].push_back(1.0 - k / 120.0);
    }
    // linear SET ramp over 1.2 ns, criterion 0.9
    CHECK(measure_delay(r, {0, 0}, 0.0, 0.9) == doctest::Approx(1.08e-9).epsilon(1e-9));
    std::fill(r.w_traces[0].begin(), r.w_traces[0].end(), 1.0);
    CHECK(measure_delay(r, {0, 0}, 0.0, 0.9) == kNeverSwitched);
}

TEST_CASE("isolated RRAM sets in the fitted time") {
    ExperimentConfig cfg;
    cfg.solver.dt = 1e-12;
    const ExperimentReport r = run_cell_set(cfg);
    CHECK(r.delay == doctest::Approx(1.2e-9).epsilon(0.01));
    CHECK(r.logical_correct);
}

TEST_CASE("halving dt moves the NOR delay by under 1%") {
    ExperimentConfig cfg;
    const ExperimentReport a = run_magic_nor(8, CellKind::S1R1, {1, 1}, cfg);
    cfg.solver.dt /= 2;
    const ExperimentReport b = run_magic_nor(8, CellKind::S1R1, {1, 1}, cfg);
    CHECK(std::isfinite(a.delay));
    CHECK(std::abs(b.delay / a.delay - 1) < 0.01);
}

TEST_CASE("solver config validation") {
    SolverConfig c;
    c.dt = 0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
}
