#include <cstdio>
#include <numeric>
#include <sstream>

#include "xbar/crossbar.hpp"

namespace xbar {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct NodeNames {
    std::vector<NodeId> parent;

    explicit NodeNames(const CircuitGraph& g) : parent(static_cast<std::size_t>(g.node_count)) {
        std::iota(parent.begin(), parent.end(), 0);
        for (const Branch& b : g.branches)
            if (b.kind == BranchKind::Wire && b.value == 0.0) unite(b.a, b.b);
    }
    NodeId find(NodeId n) {
        while (parent[static_cast<std::size_t>(n)] != n) {
            parent[static_cast<std::size_t>(n)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(n)])];
            n = parent[static_cast<std::size_t>(n)];
        }
        return n;
    }
    // Larger ids win so merged lines are named after their terminal.
    void unite(NodeId a, NodeId b) {
        a = find(a), b = find(b);
        if (a == b) return;
        if (a < b) std::swap(a, b);
        parent[static_cast<std::size_t>(b)] = a;
    }
};

}  // namespace

std::string export_netlist(const CircuitGraph& g, const LineBias& bias) {
    bias.validate(g.spec);
    NodeNames names(g);
    auto node = [&](NodeId n) { return n == kGround ? std::string("0") : g.node_name(names.find(n)); };

    std::ostringstream os;
    os << "* " << g.spec.rows << "x" << g.spec.cols << " " << to_string(g.spec.kind) << " crossbar\n";
    os << "* r_wire_bl=" << num(g.spec.r_wire_bl) << " r_wire_wl=" << num(g.spec.r_wire_wl)
       << " c_cell=" << num(g.spec.c_cell) << "\n";
    os << ".subckt rram p n w=0\n* VTEAM RRAM: r_lrs=" << num(g.params.rram.r_lrs)
       << " lambda=" << num(g.params.rram.lambda) << " v_set=" << num(g.params.rram.v_set)
       << " v_reset=" << num(g.params.rram.v_reset) << "\n.ends rram\n";
    if (g.has_selectors()) {
        const auto& s = g.params.selector;
        os << ".subckt selector p n mode=0\n* IMT selector: v_th=" << num(s.v_th) << " v_hold=" << num(s.v_hold)
           << " r_on=" << num(s.r_on) << " alpha_s=" << num(s.alpha_s) << " beta_s=" << num(s.beta_s)
           << " v_s=" << num(s.v_s) << "\n.ends selector\n";
    }

    int wire = 0;
    int cap = 0;
    for (const Branch& b : g.branches) {
        if (b.kind == BranchKind::Wire) {
            if (b.value == 0.0) continue;
            os << "RW" << wire++ << " " << node(b.a) << " " << node(b.b) << " " << num(b.value) << "\n";
        } else {
            if (b.value == 0.0) continue;
            os << "C" << cap++ << " " << node(b.a) << " " << node(b.b) << " " << num(b.value) << "\n";
        }
    }
    for (const Cell& c : g.cells) {
        const std::string tag = std::to_string(c.addr.row) + "_" + std::to_string(c.addr.col);
        if (c.mid == kGround) {
            os << "XR" << tag << " " << node(c.bl) << " " << node(c.wl) << " rram w=" << num(c.rram.w) << "\n";
        } else {
            os << "XS" << tag << " " << node(c.bl) << " " << node(c.mid) << " selector mode="
               << (c.mode == SelectorMode::On ? 1 : 0) << "\n";
            os << "XR" << tag << " " << node(c.mid) << " " << node(c.wl) << " rram w=" << num(c.rram.w) << "\n";
        }
    }
    auto sources = [&](const char* prefix, const std::vector<LineDrive>& drives, const std::vector<NodeId>& terms) {
        for (std::size_t i = 0; i < drives.size(); ++i) {
            const LineDrive& d = drives[i];
            if (!d.driven) continue;
            const std::string name = std::string(prefix) + std::to_string(i);
            const std::string term = node(terms[i]);
            if (d.series_r > 0) {
                os << "V" << name << " " << name << "_src 0 DC " << num(d.volts) << "\n";
                os << "RS" << name << " " << name << "_src " << term << " " << num(d.series_r) << "\n";
            } else {
                os << "V" << name << " " << term << " 0 DC " << num(d.volts) << "\n";
            }
        }
    };
    sources("BL", bias.bitlines, g.bl_terminals);
    sources("WL", bias.wordlines, g.wl_terminals);
    os << ".end\n";
    return os.str();
}

}  // namespace xbar
