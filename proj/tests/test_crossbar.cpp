#include <doctest.h>

#include <regex>

#include "oracle.hpp"
#include "xbar/engine.hpp"

using namespace xbar;

namespace {

ArraySpec ideal(int n, CellKind kind) {
    ArraySpec s;
    s.rows = s.cols = n;
    s.kind = kind;
    s.r_wire_bl = s.r_wire_wl = 0.0;
    s.c_cell = 0.0;
    return s;
}

int count_lines(const std::string& deck, const std::string& pattern) {
    const std::regex re(pattern);
    int n = 0;
    std::istringstream is(deck);
    for (std::string line; std::getline(is, line);) n += std::regex_search(line, re) ? 1 : 0;
    return n;
}

}  // namespace

TEST_CASE("2x2 ideal 1R is the sneak-path quad") {
    const CircuitGraph g = build_array(ideal(2, CellKind::R1), StatePattern::uniform(ResistiveState::LRS));
    CHECK(g.cells.size() == 4);
    int wires = 0, caps = 0;
    for (const Branch& b : g.branches) (b.kind == BranchKind::Wire ? wires : caps)++;
    CHECK(caps == 0);
    CHECK(g.connected());
}

TEST_CASE("node count of an S1R1 array") {
    for (int n : {1, 2, 4, 8}) {
        ArraySpec s;
        s.rows = s.cols = n;
        s.kind = CellKind::S1R1;
        const CircuitGraph g = build_array(s, StatePattern::checkerboard());
        CHECK(g.node_count == 3 * n * n + 2 * n);
    }
}

TEST_CASE("state patterns") {
    const StatePattern cb = StatePattern::checkerboard();
    CHECK(cb.at({0, 0}) == ResistiveState::LRS);
    CHECK(cb.at({0, 1}) == ResistiveState::HRS);
    StatePattern u = StatePattern::uniform(ResistiveState::HRS);
    u.overrides[{1, 1}] = ResistiveState::LRS;
    CHECK(u.at({1, 1}) == ResistiveState::LRS);
    CHECK(u.at({1, 0}) == ResistiveState::HRS);
}

TEST_CASE("4x4 all-equal array: BL to WL resistance is 7R/16") {
    const ArraySpec s = ideal(4, CellKind::R1);
    const CircuitGraph g = build_array(s, StatePattern::uniform(ResistiveState::HRS));
    LineBias b = LineBias::all_floating(s);
    b.bitlines[1] = LineDrive::Driven(1.0);
    b.wordlines[2] = LineDrive::Driven(0.0);
    const double r = g.params.rram.r_hrs();
    // closed form for the complete bipartite K(4,4)
    const double r_expect = 7.0 * r / 16.0;
    const OperatingPoint op = solve_dc(g, b, SolverConfig{});
    CHECK(1.0 / op.bitline_current(1) == doctest::Approx(r_expect).epsilon(1e-9));
    const Eigen::VectorXd v = oracle::dense_dc(g, b);
    CHECK(op.node_voltages.isApprox(v, 1e-9));
}

TEST_CASE("magic cell placement") {
    ArraySpec s;
    s.rows = s.cols = 4;
    MagicCells m = place_magic_cells(s);
    CHECK(m.out == CellAddress{2, 2});
    CHECK(m.in1 == CellAddress{2, 0});
    CHECK(m.in2 == CellAddress{2, 1});
    s.rows = s.cols = 512;
    CHECK(place_magic_cells(s).out == CellAddress{256, 256});
    s.rows = 2;
    s.cols = 4;
    CHECK(place_magic_cells(s).out.row == 1);
    s.cols = 2;
    CHECK_THROWS_AS(place_magic_cells(s), ValidationError);
}

TEST_CASE("magic bias") {
    ArraySpec s;
    s.rows = s.cols = 8;
    const MagicCells m = place_magic_cells(s);
    const LineBias one = magic_bias(s, m, 3.0, 1.0, 2.0, {4});
    CHECK(one.bitlines[m.in1.col] == LineDrive::Driven(3.0));
    CHECK(one.bitlines[m.in2.col] == LineDrive::Driven(3.0));
    CHECK(one.bitlines[m.out.col] == LineDrive::Driven(0.0));
    CHECK_FALSE(one.wordlines[4].driven);
    int floating = 0;
    const LineBias half = magic_bias(s, m, 3.0, 1.0, 2.0, {2, 3, 4, 5});
    for (const auto& d : half.wordlines) floating += d.driven ? 0 : 1;
    CHECK(floating == 4);
    s.rows = 2;
    s.cols = 3;
    const LineBias none = magic_bias(s, place_magic_cells(s), 3.0, std::nullopt, std::nullopt, {1});
    CHECK_FALSE(none.wordlines[0].driven);
    CHECK_FALSE(none.wordlines[1].driven);
}

TEST_CASE("one-third read bias") {
    ArraySpec s;
    s.rows = s.cols = 4;
    const LineBias b = read_bias(s, {1, 2}, 2.0, 100e3);
    CHECK(b.bitlines[2].volts == 2.0);
    CHECK(b.bitlines[0].volts == doctest::Approx(4.0 / 3));
    CHECK(b.wordlines[0].volts == doctest::Approx(2.0 / 3));
    int sensed = 0;
    for (const auto& d : b.wordlines) sensed += d.series_r > 0 ? 1 : 0;
    for (const auto& d : b.bitlines) sensed += d.series_r > 0 ? 1 : 0;
    CHECK(sensed == 1);
    CHECK(b.wordlines[1].series_r == 100e3);
    s.rows = s.cols = 1;
    const LineBias one = read_bias(s, {0, 0}, 2.0, 100e3);
    CHECK(one.bitlines.size() == 1);
    CHECK(one.wordlines.size() == 1);
}

TEST_CASE("netlist export") {
    const ArraySpec s2 = ideal(2, CellKind::R1);
    const CircuitGraph g = build_array(s2, StatePattern::uniform(ResistiveState::LRS));
    const LineBias b = read_bias(s2, {0, 0}, 2.0, 100e3);
    const std::string deck = export_netlist(g, b);
    CHECK(count_lines(deck, "^XR") == 4);
    CHECK(count_lines(deck, "^V") == 4);
    CHECK(deck == export_netlist(g, b));

    ArraySpec s4;
    s4.rows = s4.cols = 4;
    s4.kind = CellKind::R1;
    const CircuitGraph h = build_array(s4, StatePattern::checkerboard());
    const std::string d4 = export_netlist(h, read_bias(s4, {0, 0}, 2.0, 100e3));
    CHECK(count_lines(d4, "^XR") == 16);
    CHECK(count_lines(d4, "^RW") == 2 * 16);
    CHECK(count_lines(d4, "^C") == 16);
}

TEST_CASE("array spec validation") {
    ArraySpec s;
    s.rows = 0;
    CHECK_THROWS_AS(s.validate(), ValidationError);
    s = {};
    s.r_wire_bl = -1;
    CHECK_THROWS_AS(s.validate(), ValidationError);
}
