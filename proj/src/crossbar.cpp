#include "xbar/crossbar.hpp"

#include <queue>

namespace xbar {

const char* to_string(CellKind k) { return k == CellKind::R1 ? "1R" : "1S1R"; }
const char* to_string(ResistiveState s) { return s == ResistiveState::LRS ? "LRS" : "HRS"; }

void ArraySpec::validate() const {
    if (rows < 1 || cols < 1) throw ValidationError("array: rows and cols must be >= 1");
    if (!(r_wire_wl >= 0 && r_wire_bl >= 0)) throw ValidationError("array: wire resistance must be >= 0");
    if (!(c_cell >= 0)) throw ValidationError("array: c_cell must be >= 0");
    if (!(r_driver >= 0)) throw ValidationError("array: r_driver must be >= 0");
}

ResistiveState StatePattern::at(CellAddress a) const {
    if (auto it = overrides.find(a); it != overrides.end()) return it->second;
    if (fill == Fill::Checkerboard) return (a.row + a.col) % 2 == 0 ? ResistiveState::LRS : ResistiveState::HRS;
    return default_state;
}

std::string CircuitGraph::node_name(NodeId n) const {
    if (n == kGround) return "0";
    const int rc = spec.rows * spec.cols;
    auto rcname = [&](const char* prefix, int idx) {
        return std::string(prefix) + "_" + std::to_string(idx / spec.cols) + "_" + std::to_string(idx % spec.cols);
    };
    if (n < rc) return rcname("bl", n);
    if (n < 2 * rc) return rcname("wl", n - rc);
    const int term_base = node_count - spec.cols - spec.rows;
    if (n < term_base) return rcname("mid", n - 2 * rc);
    if (n < term_base + spec.cols) return "BL" + std::to_string(n - term_base);
    return "WL" + std::to_string(n - term_base - spec.cols);
}

bool CircuitGraph::connected() const {
    std::vector<std::vector<NodeId>> adj(static_cast<std::size_t>(node_count));
    auto link = [&](NodeId a, NodeId b) {
        if (a == kGround || b == kGround) return;
        adj[static_cast<std::size_t>(a)].push_back(b);
        adj[static_cast<std::size_t>(b)].push_back(a);
    };
    for (const Branch& br : branches)
        if (br.kind == BranchKind::Wire) link(br.a, br.b);
    for (const Cell& c : cells) {
        if (c.mid == kGround) {
            link(c.bl, c.wl);
        } else {
            link(c.bl, c.mid);
            link(c.mid, c.wl);
        }
    }
    std::vector<char> seen(static_cast<std::size_t>(node_count), 0);
    std::queue<NodeId> q;
    for (NodeId t : bl_terminals) q.push(t), seen[static_cast<std::size_t>(t)] = 1;
    for (NodeId t : wl_terminals) q.push(t), seen[static_cast<std::size_t>(t)] = 1;
    while (!q.empty()) {
        const NodeId n = q.front();
        q.pop();
        for (NodeId m : adj[static_cast<std::size_t>(n)])
            if (!seen[static_cast<std::size_t>(m)]) seen[static_cast<std::size_t>(m)] = 1, q.push(m);
    }
    for (char s : seen)
        if (!s) return false;
    return true;
}

void apply_pattern(CircuitGraph& graph, const StatePattern& pattern) {
    const auto& p = graph.params.rram;
    for (Cell& c : graph.cells) {
        c.rram.w = pattern.at(c.addr) == ResistiveState::LRS ? p.w_set : p.w_reset;
        c.mode = SelectorMode::Off;
    }
}

CircuitGraph build_array(const ArraySpec& spec, const StatePattern& pattern, const CellParamsd& params) {
    spec.validate();
    params.validate();
    for (const auto& [addr, state] : pattern.overrides) {
        (void)state;
        if (addr.row < 0 || addr.row >= spec.rows || addr.col < 0 || addr.col >= spec.cols)
            throw ValidationError("pattern: override outside the array");
    }

    CircuitGraph g;
    g.spec = spec;
    g.params = params;
    const int rc = spec.rows * spec.cols;
    const bool s1r1 = spec.kind == CellKind::S1R1;
    const int term_base = rc * (s1r1 ? 3 : 2);
    g.node_count = term_base + spec.cols + spec.rows;

    g.bl_terminals.resize(static_cast<std::size_t>(spec.cols));
    g.wl_terminals.resize(static_cast<std::size_t>(spec.rows));
    for (int c = 0; c < spec.cols; ++c) g.bl_terminals[static_cast<std::size_t>(c)] = term_base + c;
    for (int r = 0; r < spec.rows; ++r) g.wl_terminals[static_cast<std::size_t>(r)] = term_base + spec.cols + r;

    g.branches.reserve(static_cast<std::size_t>(3 * rc));
    // Bitline chains: driver terminal, then cells in order away from the driver.
    for (int c = 0; c < spec.cols; ++c) {
        NodeId prev = g.bl_terminals[static_cast<std::size_t>(c)];
        for (int k = 0; k < spec.rows; ++k) {
            const int r = spec.bl_driver == BitlineEnd::Top ? k : spec.rows - 1 - k;
            const NodeId n = g.bl_node(r, c);
            g.branches.push_back({BranchKind::Wire, prev, n, spec.r_wire_bl});
            prev = n;
        }
    }
    for (int r = 0; r < spec.rows; ++r) {
        NodeId prev = g.wl_terminals[static_cast<std::size_t>(r)];
        for (int k = 0; k < spec.cols; ++k) {
            const int c = spec.wl_driver == WordlineEnd::Left ? k : spec.cols - 1 - k;
            const NodeId n = g.wl_node(r, c);
            g.branches.push_back({BranchKind::Wire, prev, n, spec.r_wire_wl});
            prev = n;
        }
    }
    if (spec.c_cell > 0) {
        for (int r = 0; r < spec.rows; ++r)
            for (int c = 0; c < spec.cols; ++c)
                g.branches.push_back({BranchKind::Capacitor, g.wl_node(r, c), kGround, spec.c_cell});
    }

    g.cells.reserve(static_cast<std::size_t>(rc));
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            Cell cell;
            cell.addr = {r, c};
            cell.bl = g.bl_node(r, c);
            cell.wl = g.wl_node(r, c);
            if (s1r1) cell.mid = 2 * rc + r * spec.cols + c;
            g.cells.push_back(cell);
        }
    }
    apply_pattern(g, pattern);
    return g;
}

// ---------------------------------------------------------------------------

LineBias LineBias::all_floating(const ArraySpec& spec) {
    LineBias b;
    b.bitlines.assign(static_cast<std::size_t>(spec.cols), LineDrive::Floating());
    b.wordlines.assign(static_cast<std::size_t>(spec.rows), LineDrive::Floating());
    return b;
}

bool LineBias::any_driven() const {
    for (const auto& d : bitlines)
        if (d.driven) return true;
    for (const auto& d : wordlines)
        if (d.driven) return true;
    return false;
}

void LineBias::validate(const ArraySpec& spec) const {
    if (bitlines.size() != static_cast<std::size_t>(spec.cols) ||
        wordlines.size() != static_cast<std::size_t>(spec.rows))
        throw ValidationError("bias: one status per line required");
    for (const auto* family : {&bitlines, &wordlines})
        for (const auto& d : *family)
            if (!(d.series_r >= 0)) throw ValidationError("bias: series resistance must be >= 0");
    if (sense) {
        const int n = sense->family == LineFamily::Bitline ? spec.cols : spec.rows;
        if (sense->index < 0 || sense->index >= n) throw ValidationError("bias: sense line out of range");
    }
}

MagicCells place_magic_cells(const ArraySpec& spec) {
    if (spec.cols < 3) throw ValidationError("place_magic_cells: requires cols >= 3");
    const CellAddress out{spec.rows / 2, spec.cols / 2};
    if (out.col >= 2) return {{out.row, out.col - 2}, {out.row, out.col - 1}, out};
    return {{out.row, out.col - 1}, {out.row, out.col + 1}, out};
}

LineBias magic_bias(const ArraySpec& spec, const MagicCells& cells, double v_magic,
                    std::optional<double> v_iso_wl, std::optional<double> v_iso_bl,
                    const std::set<int>& active_rows) {
    LineBias b = LineBias::all_floating(spec);
    const double rd = spec.r_driver;
    for (int c = 0; c < spec.cols; ++c) {
        auto& d = b.bitlines[static_cast<std::size_t>(c)];
        if (c == cells.in1.col || c == cells.in2.col) d = LineDrive::Driven(v_magic, rd);
        else if (c == cells.out.col) d = LineDrive::Driven(0.0, rd);
        else if (v_iso_bl) d = LineDrive::Driven(*v_iso_bl, rd);
    }
    for (int r = 0; r < spec.rows; ++r) {
        if (active_rows.count(r) != 0U) continue;
        if (v_iso_wl) b.wordlines[static_cast<std::size_t>(r)] = LineDrive::Driven(*v_iso_wl, rd);
    }
    return b;
}

LineBias read_bias(const ArraySpec& spec, CellAddress target, double v_read, double r_sense) {
    if (target.row < 0 || target.row >= spec.rows || target.col < 0 || target.col >= spec.cols)
        throw ValidationError("read_bias: target outside the array");
    LineBias b = LineBias::all_floating(spec);
    const double rd = spec.r_driver;
    for (int c = 0; c < spec.cols; ++c)
        b.bitlines[static_cast<std::size_t>(c)] =
            LineDrive::Driven(c == target.col ? v_read : 2.0 * v_read / 3.0, rd);
    for (int r = 0; r < spec.rows; ++r)
        b.wordlines[static_cast<std::size_t>(r)] =
            r == target.row ? LineDrive::Driven(0.0, r_sense + rd) : LineDrive::Driven(v_read / 3.0, rd);
    b.sense = LineRef{LineFamily::Wordline, target.row};
    return b;
}

}  // namespace xbar
