#include "xbar/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <queue>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

namespace xbar {

void SolverConfig::validate() const {
    if (!(dt > 0)) throw ValidationError("solver: dt must be > 0");
    if (!(newton_vtol > 0 && newton_itol > 0)) throw ValidationError("solver: tolerances must be > 0");
    if (max_newton_iters < 1) throw ValidationError("solver: max_newton_iters must be >= 1");
    if (max_mode_resolves < 0) throw ValidationError("solver: max_mode_resolves must be >= 0");
    if (!(ramp_time > 0 && ramp_step > 0)) throw ValidationError("solver: ramp_time and ramp_step must be > 0");
}

int SolverConfig::ramp_points() const {
    return std::max(1, static_cast<int>(std::ceil(ramp_time / ramp_step - 1e-9)));
}

Linearization linearize_rram(const VteamParamsd& p, RramStated s, double) {
    return {1.0 / effective_resistance(p, s), 0.0};
}

Linearization linearize_selector(const SelectorParamsd& p, SelectorMode m, double v_guess) {
    const double g = selector_conductance(p, m, v_guess);
    return {g, selector_current(p, m, v_guess) - g * v_guess};
}

double OperatingPoint::source_power(const LineBias& bias) const {
    double p = 0.0;
    for (std::size_t c = 0; c < bias.bitlines.size(); ++c)
        if (bias.bitlines[c].driven) p += bias.bitlines[c].volts * bitline_current(static_cast<Eigen::Index>(c));
    for (std::size_t r = 0; r < bias.wordlines.size(); ++r)
        if (bias.wordlines[r].driven) p += bias.wordlines[r].volts * wordline_current(static_cast<Eigen::Index>(r));
    return p;
}

const LineBias& DriveSchedule::at(double t) const {
    if (segments.empty() || segments.front().t_start > 0.0)
        throw SolverError(SolverError::Kind::ScheduleGap, "schedule does not start at t = 0");
    std::size_t k = 0;
    while (k + 1 < segments.size() && segments[k + 1].t_start <= t) ++k;
    return segments[k].bias;
}

const std::vector<double>& TransientResult::w_trace(CellAddress a) const {
    for (std::size_t i = 0; i < probe_cells.size(); ++i)
        if (probe_cells[i] == a) return w_traces[i];
    throw std::out_of_range("cell was not probed");
}

double TransientResult::power_at(std::size_t k) const {
    double p = 0.0;
    for (const auto& s : sources) p += s.volts[k] * s.current[k];
    return p;
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;

/// Nodal system for one graph with ideal wires collapsed into node groups.
/// Cells are condensed two-terminal elements between their rail groups; the
/// selector/RRAM junction of a 1S1R cell is solved locally.
class NetworkSolver {
public:
    NetworkSolver(const CircuitGraph& g, const SolverConfig& cfg) : g_(g), cfg_(cfg) {
        group_of_.resize(static_cast<std::size_t>(g.node_count));
        std::iota(group_of_.begin(), group_of_.end(), 0);
        for (const Branch& b : g.branches)
            if (b.kind == BranchKind::Wire && b.value == 0.0) unite(b.a, b.b);
        // Junction nodes of 1S1R cells are eliminated locally and get no group.
        mid_cell_.assign(group_of_.size(), -1);
        for (std::size_t k = 0; k < g.cells.size(); ++k)
            if (g.cells[k].mid != kGround) mid_cell_[static_cast<std::size_t>(g.cells[k].mid)] = static_cast<int>(k);
        std::vector<int> id(group_of_.size(), -1);
        std::vector<int> compact(group_of_.size(), -1);
        n_groups_ = 0;
        for (std::size_t n = 0; n < group_of_.size(); ++n) {
            if (mid_cell_[n] >= 0) continue;
            const auto root = static_cast<std::size_t>(find(static_cast<int>(n)));
            if (id[root] < 0) id[root] = n_groups_++;
            compact[n] = id[root];
        }
        group_of_ = std::move(compact);

        for (const Branch& b : g.branches) {
            if (b.kind == BranchKind::Wire) {
                if (b.value == 0.0) continue;
                const int ga = grp(b.a), gb = grp(b.b);
                if (ga != gb) wires_.push_back({ga, gb, 1.0 / b.value, {}});
            } else if (b.value > 0.0) {
                caps_.push_back({grp(b.a), b.value, -1});
            }
        }
        cells_.reserve(g.cells.size());
        for (const Cell& c : g.cells) cells_.push_back({grp(c.bl), grp(c.wl), {}});

        w_.reserve(g.cells.size());
        for (const Cell& c : g.cells) {
            w_.push_back(c.rram);
            mode_.push_back(c.mode);
        }
        r_cell_.resize(g.cells.size());
        for (std::size_t k = 0; k < g.cells.size(); ++k) r_cell_[k] = effective_resistance(g.params.rram, w_[k]);
        v_sel_.assign(g.cells.size(), 0.0);
        g_cell_.assign(g.cells.size(), 0.0);
        V_ = Eigen::VectorXd::Zero(n_groups_);
        V_prev_ = V_;
        F_ = V_;
    }

    int group(NodeId n) const { return grp(n); }
    double voltage(NodeId n) const {
        if (const int k = mid_cell_[static_cast<std::size_t>(n)]; k >= 0)
            return V_[cells_[static_cast<std::size_t>(k)].bl] - v_sel_[static_cast<std::size_t>(k)];
        return V_[grp(n)];
    }
    double cell_voltage(std::size_t k) const { return V_[cells_[k].bl] - V_[cells_[k].wl]; }
    const std::vector<RramStated>& states() const { return w_; }
    const std::vector<SelectorMode>& modes() const { return mode_; }

    /// Install a bias with every driven value multiplied by `scale`.
    void set_bias(const LineBias& bias, double scale, bool with_caps) {
        bias.validate(g_.spec);
        std::vector<char> fixed(static_cast<std::size_t>(n_groups_), 0);
        std::vector<double> fixed_v(static_cast<std::size_t>(n_groups_), 0.0);
        nortons_.clear();
        auto install = [&](const std::vector<LineDrive>& drives, const std::vector<NodeId>& terms,
                           LineFamily family) {
            for (std::size_t i = 0; i < drives.size(); ++i) {
                const LineDrive& d = drives[i];
                if (!d.driven) continue;
                const int gt = grp(terms[i]);
                if (d.series_r > 0.0) {
                    nortons_.push_back({gt, 1.0 / d.series_r, d.volts * scale, -1,
                                        LineRef{family, static_cast<int>(i)}});
                } else {
                    fixed[static_cast<std::size_t>(gt)] = 1;
                    fixed_v[static_cast<std::size_t>(gt)] = d.volts * scale;
                }
            }
        };
        install(bias.bitlines, g_.bl_terminals, LineFamily::Bitline);
        install(bias.wordlines, g_.wl_terminals, LineFamily::Wordline);

        if (fixed != fixed_ || with_caps != with_caps_ || !compiled_) {
            fixed_ = fixed;
            with_caps_ = with_caps;
            check_anchored();
            compile();
        }
        for (int gi = 0; gi < n_groups_; ++gi)
            if (fixed_[static_cast<std::size_t>(gi)]) V_[gi] = fixed_v[static_cast<std::size_t>(gi)];
        for (auto& nt : nortons_) nt.slot = slot(unknown_[static_cast<std::size_t>(nt.group)], unknown_[static_cast<std::size_t>(nt.group)]);
    }

    /// Newton iteration to the KCL solution. h is the step for capacitor
    /// companions (0 for DC). Returns the iteration count.
    int converge(double h) {
        if (h != h_) stale_ = true;
        h_ = h;
        double prev_norm = std::numeric_limits<double>::infinity();
        double last_dv = std::numeric_limits<double>::infinity();
        int since_refactor = 0;
        Eigen::VectorXd rhs(n_unknown_);
        for (int it = 0; it < cfg_.max_newton_iters; ++it) {
            evaluate();
            double norm = 0.0;
            for (int gi = 0; gi < n_groups_; ++gi) {
                const int u = unknown_[static_cast<std::size_t>(gi)];
                if (u < 0) continue;
                rhs[u] = -F_[gi];
                norm = std::max(norm, std::abs(F_[gi]));
            }
            if (!std::isfinite(norm))
                throw SolverError(SolverError::Kind::NonConvergence, "non-finite KCL residual");
            if (norm <= cfg_.newton_itol && (it == 0 || last_dv <= cfg_.newton_vtol)) return it;
            if (n_unknown_ == 0) return it;
            if (stale_ || (it > 0 && norm > 0.3 * prev_norm) || since_refactor >= 8) {
                factorize();
                since_refactor = 0;
            }
            const Eigen::VectorXd dx = ldlt_.solve(rhs);
            last_dv = 0.0;
            for (int gi = 0; gi < n_groups_; ++gi) {
                const int u = unknown_[static_cast<std::size_t>(gi)];
                if (u < 0) continue;
                V_[gi] += dx[u];
                last_dv = std::max(last_dv, std::abs(dx[u]));
            }
            prev_norm = norm;
            ++since_refactor;
        }
        throw SolverError(SolverError::Kind::NonConvergence,
                          "Newton did not converge in " + std::to_string(cfg_.max_newton_iters) + " iterations");
    }

    /// Apply the hysteresis rule at the present solution. Returns true when
    /// any selector changed mode.
    bool update_modes() {
        if (!g_.has_selectors()) return false;
        bool changed = false;
        for (std::size_t k = 0; k < mode_.size(); ++k) {
            const SelectorMode next = selector_next_mode(g_.params.selector, mode_[k], v_sel_[k]);
            if (next != mode_[k]) {
                mode_[k] = next;
                changed = true;
            }
        }
        if (changed) stale_ = true;
        return changed;
    }

    /// Solve, then re-solve after mode flips up to the configured cap.
    void solve_with_modes(double h) {
        converge(h);
        for (int k = 0; k < cfg_.max_mode_resolves; ++k) {
            if (!update_modes()) return;
            converge(h);
        }
        // Flips found after the last permitted re-solve carry into the next step.
        update_modes();
    }

    void integrate_states(double dt) {
        bool moved = false;
        for (std::size_t k = 0; k < w_.size(); ++k) {
            const double v_rram = cell_voltage(k) - v_sel_[k];
            const RramStated next = integrate_state(g_.params.rram, w_[k], v_rram, dt);
            if (next.w != w_[k].w) {
                w_[k] = next;
                r_cell_[k] = effective_resistance(g_.params.rram, next);
                moved = true;
            }
        }
        (void)moved;
    }

    void commit_history() { V_prev_ = V_; }

    /// Current delivered into the array by a line's source; 0 if floating.
    double source_current(const LineBias& bias, LineRef line) const {
        const LineDrive& d = bias.drive(line);
        if (!d.driven) return 0.0;
        const NodeId term = line.family == LineFamily::Bitline ? g_.bl_terminals[static_cast<std::size_t>(line.index)]
                                                               : g_.wl_terminals[static_cast<std::size_t>(line.index)];
        const int gt = grp(term);
        if (d.series_r > 0.0) {
            for (const auto& nt : nortons_)
                if (nt.line == line) return (nt.v_src - V_[gt]) * nt.g;
            return 0.0;
        }
        return F_[gt];
    }

    double max_residual() const {
        double norm = 0.0;
        for (int gi = 0; gi < n_groups_; ++gi)
            if (unknown_[static_cast<std::size_t>(gi)] >= 0) norm = std::max(norm, std::abs(F_[gi]));
        return norm;
    }

    void refresh() { evaluate(); }

private:
    struct Wire {
        int a, b;
        double g;
        int s[4];
    };
    struct Cap {
        int group;
        double c;
        int slot;
    };
    struct Norton {
        int group;
        double g;
        double v_src;
        int slot;
        LineRef line;
    };
    struct CellEl {
        int bl, wl;
        int s[4];
    };

    int find(int n) {
        while (group_of_[static_cast<std::size_t>(n)] != n) {
            group_of_[static_cast<std::size_t>(n)] = group_of_[static_cast<std::size_t>(group_of_[static_cast<std::size_t>(n)])];
            n = group_of_[static_cast<std::size_t>(n)];
        }
        return n;
    }
    void unite(int a, int b) {
        a = find(a), b = find(b);
        if (a != b) group_of_[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    }
    int grp(NodeId n) const { return group_of_[static_cast<std::size_t>(n)]; }

    void check_anchored() const {
        std::vector<std::vector<int>> adj(static_cast<std::size_t>(n_groups_));
        for (const auto& w : wires_) {
            adj[static_cast<std::size_t>(w.a)].push_back(w.b);
            adj[static_cast<std::size_t>(w.b)].push_back(w.a);
        }
        for (const auto& c : cells_) {
            adj[static_cast<std::size_t>(c.bl)].push_back(c.wl);
            adj[static_cast<std::size_t>(c.wl)].push_back(c.bl);
        }
        std::vector<char> seen(static_cast<std::size_t>(n_groups_), 0);
        std::queue<int> q;
        auto seed = [&](int gi) {
            if (!seen[static_cast<std::size_t>(gi)]) seen[static_cast<std::size_t>(gi)] = 1, q.push(gi);
        };
        for (int gi = 0; gi < n_groups_; ++gi)
            if (fixed_[static_cast<std::size_t>(gi)]) seed(gi);
        for (const auto& nt : nortons_) seed(nt.group);
        if (with_caps_)
            for (const auto& c : caps_) seed(c.group);
        while (!q.empty()) {
            const int n = q.front();
            q.pop();
            for (int m : adj[static_cast<std::size_t>(n)]) seed(m);
        }
        for (char s : seen)
            if (!s) throw SolverError(SolverError::Kind::SingularSystem, "network has nodes with no path to a driven line");
    }

    void compile() {
        unknown_.assign(static_cast<std::size_t>(n_groups_), -1);
        n_unknown_ = 0;
        for (int gi = 0; gi < n_groups_; ++gi)
            if (!fixed_[static_cast<std::size_t>(gi)]) unknown_[static_cast<std::size_t>(gi)] = n_unknown_++;

        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(n_unknown_) + 4 * (wires_.size() + cells_.size()));
        for (int u = 0; u < n_unknown_; ++u) trip.emplace_back(u, u, 0.0);
        auto pair = [&](int ga, int gb) {
            const int a = unknown_[static_cast<std::size_t>(ga)], b = unknown_[static_cast<std::size_t>(gb)];
            if (a >= 0 && b >= 0) {
                trip.emplace_back(a, b, 0.0);
                trip.emplace_back(b, a, 0.0);
            }
        };
        for (const auto& w : wires_) pair(w.a, w.b);
        for (const auto& c : cells_) pair(c.bl, c.wl);
        J_.resize(n_unknown_, n_unknown_);
        J_.setFromTriplets(trip.begin(), trip.end());
        J_.makeCompressed();

        auto fill4 = [&](int ga, int gb, int* s) {
            const int a = unknown_[static_cast<std::size_t>(ga)], b = unknown_[static_cast<std::size_t>(gb)];
            s[0] = slot(a, a);
            s[1] = slot(b, b);
            s[2] = (a >= 0 && b >= 0) ? slot(a, b) : -1;
            s[3] = (a >= 0 && b >= 0) ? slot(b, a) : -1;
        };
        for (auto& w : wires_) fill4(w.a, w.b, w.s);
        for (auto& c : cells_) fill4(c.bl, c.wl, c.s);
        for (auto& c : caps_) c.slot = slot(unknown_[static_cast<std::size_t>(c.group)], unknown_[static_cast<std::size_t>(c.group)]);
        if (n_unknown_ > 0) ldlt_.analyzePattern(J_);
        compiled_ = true;
        stale_ = true;
    }

    int slot(int row, int col) const {
        if (row < 0 || col < 0) return -1;
        const int* outer = J_.outerIndexPtr();
        const int* inner = J_.innerIndexPtr();
        const int* begin = inner + outer[col];
        const int* end = inner + outer[col + 1];
        const int* it = std::lower_bound(begin, end, row);
        return static_cast<int>(it - inner);
    }

    void evaluate() {
        F_.setZero();
        for (const auto& w : wires_) {
            const double i = w.g * (V_[w.a] - V_[w.b]);
            F_[w.a] += i;
            F_[w.b] -= i;
        }
        for (const auto& nt : nortons_) F_[nt.group] += nt.g * (V_[nt.group] - nt.v_src);
        if (h_ > 0.0)
            for (const auto& c : caps_) F_[c.group] += c.c / h_ * (V_[c.group] - V_prev_[c.group]);
        const bool sel = g_.has_selectors();
        for (std::size_t k = 0; k < cells_.size(); ++k) {
            const auto& c = cells_[k];
            const double v = V_[c.bl] - V_[c.wl];
            double i = 0.0;
            if (sel) {
                const SeriesPoint<double> sp = solve_series(g_.params.selector, mode_[k], r_cell_[k], v, v_sel_[k]);
                v_sel_[k] = sp.v_selector;
                g_cell_[k] = sp.conductance;
                i = sp.current;
            } else {
                g_cell_[k] = 1.0 / r_cell_[k];
                i = v * g_cell_[k];
            }
            F_[c.bl] += i;
            F_[c.wl] -= i;
        }
    }

    void factorize() {
        double* val = J_.valuePtr();
        std::fill(val, val + J_.nonZeros(), 0.0);
        auto add4 = [&](const int* s, double gv) {
            if (s[0] >= 0) val[s[0]] += gv;
            if (s[1] >= 0) val[s[1]] += gv;
            if (s[2] >= 0) val[s[2]] -= gv;
            if (s[3] >= 0) val[s[3]] -= gv;
        };
        for (const auto& w : wires_) add4(w.s, w.g);
        for (std::size_t k = 0; k < cells_.size(); ++k) add4(cells_[k].s, g_cell_[k]);
        for (const auto& nt : nortons_)
            if (nt.slot >= 0) val[nt.slot] += nt.g;
        if (h_ > 0.0)
            for (const auto& c : caps_)
                if (c.slot >= 0) val[c.slot] += c.c / h_;
        ldlt_.factorize(J_);
        if (ldlt_.info() != Eigen::Success)
            throw SolverError(SolverError::Kind::SingularSystem, "nodal matrix factorization failed");
        stale_ = false;
    }

    const CircuitGraph& g_;
    SolverConfig cfg_;
    std::vector<int> group_of_;
    std::vector<int> mid_cell_;
    int n_groups_ = 0;
    std::vector<Wire> wires_;
    std::vector<Cap> caps_;
    std::vector<Norton> nortons_;
    std::vector<CellEl> cells_;

    std::vector<char> fixed_;
    bool with_caps_ = false;
    bool compiled_ = false;
    std::vector<int> unknown_;
    int n_unknown_ = 0;
    SpMat J_;
    Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
    bool stale_ = true;
    double h_ = -1.0;

    std::vector<RramStated> w_;
    std::vector<SelectorMode> mode_;
    std::vector<double> r_cell_;
    std::vector<double> v_sel_;
    std::vector<double> g_cell_;
    Eigen::VectorXd V_;
    Eigen::VectorXd V_prev_;
    Eigen::VectorXd F_;
};

}  // namespace

OperatingPoint solve_dc(const CircuitGraph& graph, const LineBias& bias, const SolverConfig& config) {
    config.validate();
    bias.validate(graph.spec);
    if (!bias.any_driven()) throw SolverError(SolverError::Kind::SingularSystem, "no driven line");

    NetworkSolver ns(graph, config);
    // Without hysteretic devices the operating point does not depend on the
    // path taken, so the ramp collapses to its end point.
    const int points = graph.has_selectors() ? config.ramp_points() : 1;
    for (int k = 1; k <= points; ++k) {
        ns.set_bias(bias, static_cast<double>(k) / points, false);
        ns.solve_with_modes(0.0);
    }
    ns.refresh();

    OperatingPoint op;
    op.node_voltages.resize(graph.node_count);
    for (NodeId n = 0; n < graph.node_count; ++n) op.node_voltages[n] = ns.voltage(n);
    op.rram = ns.states();
    op.modes = ns.modes();
    op.bitline_current.resize(graph.spec.cols);
    op.wordline_current.resize(graph.spec.rows);
    for (int c = 0; c < graph.spec.cols; ++c) op.bitline_current[c] = ns.source_current(bias, {LineFamily::Bitline, c});
    for (int r = 0; r < graph.spec.rows; ++r) op.wordline_current[r] = ns.source_current(bias, {LineFamily::Wordline, r});
    op.max_kcl_residual = ns.max_residual();
    if (bias.sense) {
        const NodeId t = bias.sense->family == LineFamily::Bitline
                             ? graph.bl_terminals[static_cast<std::size_t>(bias.sense->index)]
                             : graph.wl_terminals[static_cast<std::size_t>(bias.sense->index)];
        op.sense_voltage = ns.voltage(t);
    }
    return op;
}

TransientResult solve_transient(const CircuitGraph& graph, const DriveSchedule& schedule, double duration,
                                const SolverConfig& config, const Probes& probes) {
    config.validate();
    if (!(duration > 0)) throw ValidationError("transient: duration must be > 0");
    schedule.at(0.0);  // throws ScheduleGap when the start is uncovered

    const long steps = std::max(1L, std::lround(duration / config.dt));
    TransientResult res;
    res.probe_nodes = probes.nodes;
    res.probe_cells = probes.cells;
    res.node_traces.assign(probes.nodes.size(), {});
    res.w_traces.assign(probes.cells.size(), {});
    res.mode_traces.assign(probes.cells.size(), {});
    for (const auto& seg : schedule.segments) {
        seg.bias.validate(graph.spec);
        auto add = [&](LineRef r) {
            for (const auto& s : res.sources)
                if (s.line == r) return;
            res.sources.push_back({r, {}, {}});
        };
        for (int c = 0; c < graph.spec.cols; ++c)
            if (seg.bias.bitlines[static_cast<std::size_t>(c)].driven) add({LineFamily::Bitline, c});
        for (int r = 0; r < graph.spec.rows; ++r)
            if (seg.bias.wordlines[static_cast<std::size_t>(r)].driven) add({LineFamily::Wordline, r});
    }
    std::sort(res.sources.begin(), res.sources.end(), [](const SourceTrace& a, const SourceTrace& b) {
        return std::pair(a.line.family, a.line.index) < std::pair(b.line.family, b.line.index);
    });
    std::vector<std::size_t> probe_idx;
    for (const auto& a : probes.cells) probe_idx.push_back(graph.index(a));
    res.ever_on.assign(graph.cells.size(), 0);

    NetworkSolver ns(graph, config);
    const auto reserve = static_cast<std::size_t>(steps + 1);
    res.time.reserve(reserve);

    auto record = [&](double t, const LineBias& bias) {
        res.time.push_back(t);
        for (std::size_t i = 0; i < probes.nodes.size(); ++i) res.node_traces[i].push_back(ns.voltage(probes.nodes[i]));
        for (std::size_t i = 0; i < probe_idx.size(); ++i) {
            res.w_traces[i].push_back(ns.states()[probe_idx[i]].w);
            res.mode_traces[i].push_back(ns.modes()[probe_idx[i]]);
        }
        for (auto& s : res.sources) {
            const LineDrive& d = bias.drive(s.line);
            s.volts.push_back(d.driven ? d.volts : 0.0);
            s.current.push_back(ns.source_current(bias, s.line));
        }
        const auto& modes = ns.modes();
        for (std::size_t k = 0; k < modes.size(); ++k)
            if (modes[k] == SelectorMode::On) res.ever_on[k] = 1;
    };

    // t = 0+: sources applied, capacitors still at 0 V. The wire RC settles in
    // femtoseconds, so selectors are not allowed to react to this instant.
    {
        const LineBias& b0 = schedule.at(0.0);
        ns.set_bias(b0, 1.0, true);
        ns.converge(config.dt * 1e-6);
        ns.refresh();
        record(0.0, b0);
    }
    for (long k = 1; k <= steps; ++k) {
        const double t = static_cast<double>(k) * config.dt;
        const LineBias& b = schedule.at(t);
        ns.set_bias(b, 1.0, true);
        ns.solve_with_modes(config.dt);
        ns.integrate_states(config.dt);
        ns.commit_history();
        ns.refresh();
        record(t, b);
    }
    res.final_rram = ns.states();
    res.final_modes = ns.modes();
    return res;
}

double measure_delay(const TransientResult& result, CellAddress cell, double w_target, double criterion, double t0) {
    if (!(criterion > 0 && criterion < 1)) throw ValidationError("measure_delay: criterion must be in (0, 1)");
    const auto& w = result.w_trace(cell);
    const auto& t = result.time;
    if (t.empty()) return kNeverSwitched;
    auto interp = [&](double tq) {
        if (tq <= t.front()) return w.front();
        for (std::size_t k = 1; k < t.size(); ++k)
            if (t[k] >= tq) return w[k - 1] + (w[k] - w[k - 1]) * (tq - t[k - 1]) / (t[k] - t[k - 1]);
        return w.back();
    };
    const double w0 = interp(t0);
    const double threshold = criterion * std::abs(w_target - w0);
    if (threshold == 0.0) return kNeverSwitched;
    double t_prev = t0;
    double d_prev = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (t[k] <= t0) continue;
        const double d = std::abs(w[k] - w0);
        if (d >= threshold) return t_prev + (threshold - d_prev) / (d - d_prev) * (t[k] - t_prev);
        t_prev = t[k];
        d_prev = d;
    }
    return kNeverSwitched;
}

PowerMeasure measure_power(const TransientResult& result, double t_a, double t_b) {
    const auto& t = result.time;
    if (!(t_b > t_a)) throw ValidationError("measure_power: window must have t_b > t_a");
    if (t.empty() || t_a < t.front() - 1e-18 || t_b > t.back() * (1 + 1e-12))
        throw ValidationError("measure_power: window outside the simulated span");
    double energy = 0.0;
    auto p_at = [&](double tq) {
        for (std::size_t k = 1; k < t.size(); ++k)
            if (t[k] >= tq) {
                const double f = (tq - t[k - 1]) / (t[k] - t[k - 1]);
                return result.power_at(k - 1) * (1 - f) + result.power_at(k) * f;
            }
        return result.power_at(t.size() - 1);
    };
    double t_prev = t_a;
    double p_prev = p_at(t_a);
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (t[k] <= t_a) continue;
        const double tk = std::min(t[k], t_b);
        const double pk = t[k] <= t_b ? result.power_at(k) : p_at(t_b);
        energy += 0.5 * (p_prev + pk) * (tk - t_prev);
        t_prev = tk;
        p_prev = pk;
        if (t[k] >= t_b) break;
    }
    return {energy / (t_b - t_a), energy};
}

void write_waveforms(std::ostream& os, const CircuitGraph& graph, const TransientResult& r) {
    os << "time";
    for (NodeId n : r.probe_nodes) os << ",v(" << graph.node_name(n) << ")";
    for (const auto& a : r.probe_cells) os << ",w(" << a.row << ":" << a.col << "),sel(" << a.row << ":" << a.col << ")";
    os << "\n";
    char buf[32];
    for (std::size_t k = 0; k < r.time.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.9g", r.time[k]);
        os << buf;
        for (const auto& tr : r.node_traces) {
            std::snprintf(buf, sizeof buf, "%.9g", tr[k]);
            os << "," << buf;
        }
        for (std::size_t i = 0; i < r.w_traces.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.9g", r.w_traces[i][k]);
            os << "," << buf << "," << (r.mode_traces[i][k] == SelectorMode::On ? 1 : 0);
        }
        os << "\n";
    }
}

}  // namespace xbar
