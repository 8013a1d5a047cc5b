#pragma once

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "xbar/device_models.hpp"

namespace xbar {

enum class CellKind { R1, S1R1 };
enum class ResistiveState { LRS, HRS };
enum class BitlineEnd { Top, Bottom };
enum class WordlineEnd { Left, Right };

const char* to_string(CellKind k);
const char* to_string(ResistiveState s);

struct ArraySpec {
    int rows = 4;
    int cols = 4;
    CellKind kind = CellKind::S1R1;
    double r_wire_wl = 2.5;   ///< ohm per wordline segment
    double r_wire_bl = 2.5;   ///< ohm per bitline segment
    double c_cell = 1e-15;    ///< farad, one per cell on its wordline rail node
    BitlineEnd bl_driver = BitlineEnd::Top;
    WordlineEnd wl_driver = WordlineEnd::Left;
    double r_driver = 0.0;    ///< series source resistance of every driver

    bool operator==(const ArraySpec&) const = default;
    void validate() const;
};

struct CellAddress {
    int row = 0;
    int col = 0;
    auto operator<=>(const CellAddress&) const = default;
};

struct StatePattern {
    enum class Fill { Uniform, Checkerboard };

    ResistiveState default_state = ResistiveState::HRS;
    Fill fill = Fill::Uniform;
    std::map<CellAddress, ResistiveState> overrides;

    static StatePattern uniform(ResistiveState s) { return {s, Fill::Uniform, {}}; }
    /// LRS where row + col is even, HRS elsewhere.
    static StatePattern checkerboard() { return {ResistiveState::HRS, Fill::Checkerboard, {}}; }

    ResistiveState at(CellAddress a) const;
};

using NodeId = int;
inline constexpr NodeId kGround = -1;

enum class BranchKind { Wire, Capacitor };

/// Linear two-terminal element. Capacitors always have b == kGround.
struct Branch {
    BranchKind kind;
    NodeId a;
    NodeId b;
    double value;
};

/// One crosspoint: an RRAM from `bl` to `wl`, or a selector from `bl` to `mid`
/// followed by an RRAM from `mid` to `wl`. Positive cell voltage is V(bl) - V(wl).
struct Cell {
    CellAddress addr;
    NodeId bl;
    NodeId wl;
    NodeId mid = kGround;  ///< selector/RRAM junction, S1R1 only
    RramStated rram;
    SelectorMode mode = SelectorMode::Off;
};

struct CircuitGraph {
    ArraySpec spec;
    CellParamsd params;
    int node_count = 0;
    std::vector<Branch> branches;
    std::vector<Cell> cells;              ///< row-major
    std::vector<NodeId> bl_terminals;     ///< driver-side boundary node per bitline
    std::vector<NodeId> wl_terminals;     ///< driver-side boundary node per wordline

    bool has_selectors() const { return spec.kind == CellKind::S1R1; }
    std::size_t index(CellAddress a) const {
        return static_cast<std::size_t>(a.row) * static_cast<std::size_t>(spec.cols) + static_cast<std::size_t>(a.col);
    }
    Cell& cell(CellAddress a) { return cells.at(index(a)); }
    const Cell& cell(CellAddress a) const { return cells.at(index(a)); }

    NodeId bl_node(int row, int col) const { return row * spec.cols + col; }
    NodeId wl_node(int row, int col) const { return spec.rows * spec.cols + row * spec.cols + col; }
    std::string node_name(NodeId n) const;

    /// Every node is reachable from a line terminal through wires and devices.
    bool connected() const;
};

CircuitGraph build_array(const ArraySpec& spec, const StatePattern& pattern,
                         const CellParamsd& params = CellParamsd{});

/// Reset every cell's RRAM to the pattern's state and every selector to OFF.
void apply_pattern(CircuitGraph& graph, const StatePattern& pattern);

// ---------------------------------------------------------------------------
// Biasing
// ---------------------------------------------------------------------------

struct LineDrive {
    bool driven = false;
    double volts = 0.0;
    double series_r = 0.0;  ///< resistance between the source and the line terminal

    static LineDrive Driven(double v, double r = 0.0) { return {true, v, r}; }
    static LineDrive Floating() { return {}; }
    bool operator==(const LineDrive&) const = default;
};

enum class LineFamily { Bitline, Wordline };

struct LineRef {
    LineFamily family;
    int index;
    bool operator==(const LineRef&) const = default;
};

struct LineBias {
    std::vector<LineDrive> bitlines;
    std::vector<LineDrive> wordlines;
    std::optional<LineRef> sense;  ///< line whose terminal voltage is the read output

    static LineBias all_floating(const ArraySpec& spec);
    const LineDrive& drive(LineRef r) const {
        return r.family == LineFamily::Bitline ? bitlines.at(static_cast<std::size_t>(r.index))
                                               : wordlines.at(static_cast<std::size_t>(r.index));
    }
    bool any_driven() const;
    /// Every line has exactly one status.
    void validate(const ArraySpec& spec) const;
    bool operator==(const LineBias&) const = default;
};

struct MagicCells {
    CellAddress in1;
    CellAddress in2;
    CellAddress out;
};

/// Output at the array center, inputs the two cells to its left in the same row
/// (or straddling it when the center column is 1).
MagicCells place_magic_cells(const ArraySpec& spec);

/// MAGIC NOR bias: input bitlines at v_magic, output bitline grounded, active
/// wordlines floating, everything else at the isolation levels. A missing
/// isolation voltage leaves those lines floating.
LineBias magic_bias(const ArraySpec& spec, const MagicCells& cells, double v_magic,
                    std::optional<double> v_iso_wl, std::optional<double> v_iso_bl,
                    const std::set<int>& active_rows);

/// One-third read scheme with a sense resistor terminating the selected wordline.
LineBias read_bias(const ArraySpec& spec, CellAddress target, double v_read, double r_sense);

/// SPICE deck for the graph under a bias. Ideal (zero-ohm) wires are merged.
std::string export_netlist(const CircuitGraph& graph, const LineBias& bias);

}  // namespace xbar
