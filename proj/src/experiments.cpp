#include "xbar/experiments.hpp"

#include <atomic>
#include <cmath>
#include <condition_variable>
#include <map>
#include <mutex>
#include <thread>

namespace xbar {

const char* to_string(Study s) {
    switch (s) {
    case Study::Delay: return "delay";
    case Study::Power: return "power";
    case Study::Readout: return "readout";
    case Study::Cell: return "cell";
    }
    return "?";
}

std::optional<Study> parse_study(const std::string& s) {
    for (Study st : {Study::Delay, Study::Power, Study::Readout, Study::Cell})
        if (s == to_string(st)) return st;
    return std::nullopt;
}

void ExperimentConfig::validate() const {
    array.validate();
    device.validate();
    solver.validate();
    if (!(t_op > 0)) throw ValidationError("experiment: t_op must be > 0");
    if (!(r_sense > 0)) throw ValidationError("experiment: r_sense must be > 0");
    if (!(v_read > 0)) throw ValidationError("experiment: v_read must be > 0");
    if (!(delay_criterion > 0 && delay_criterion < 1))
        throw ValidationError("experiment: delay_criterion must be in (0, 1)");
    if (!(fit.t_set > 0 && fit.t_reset > 0)) throw ValidationError("fit: switching times must be > 0");
}

int read_logic(const VteamParamsd& p, RramStated s) {
    const double r_mid = 0.5 * (p.r_lrs + p.r_hrs());
    return effective_resistance(p, s) < r_mid ? 1 : 0;
}

namespace {

ArraySpec sized(const ExperimentConfig& cfg, int n, CellKind kind) {
    ArraySpec spec = cfg.array;
    spec.rows = n;
    spec.cols = n;
    spec.kind = kind;
    return spec;
}

StatePattern background(const ExperimentConfig& cfg) {
    if (cfg.background == StatePattern::Fill::Checkerboard) return StatePattern::checkerboard();
    return StatePattern::uniform(cfg.uniform_background);
}

ResistiveState state_of(int bit) { return bit != 0 ? ResistiveState::LRS : ResistiveState::HRS; }

// Shared body of the single-gate and half-row runs. The reported delay is the
// gate in the row of the central output cell.
ExperimentReport run_nor_rows(int n, CellKind kind, NorInputs in, const std::set<int>& active, Study study,
                              const ExperimentConfig& cfg) {
    cfg.validate();
    if (n < 4) throw ValidationError("MAGIC runs need N >= 4");
    const ArraySpec spec = sized(cfg, n, kind);
    const MagicCells gate = place_magic_cells(spec);
    const CircuitGraph g = build_nor_array(n, kind, in, active, cfg);
    const LineBias bias = magic_bias(spec, gate, cfg.v_magic, cfg.v_iso_wl, cfg.v_iso_bl, active);

    Probes probes;
    for (int r : active) probes.cells.push_back({r, gate.out.col});
    const TransientResult res = solve_transient(g, DriveSchedule::constant(bias), cfg.t_op, cfg.solver, probes);

    ExperimentReport rep;
    rep.size = n;
    rep.kind = kind;
    rep.study = study;
    rep.inputs = in;
    rep.delay = measure_delay(res, gate.out, cfg.device.rram.w_reset, cfg.delay_criterion);
    const PowerMeasure pm = measure_power(res, 0.0, cfg.t_op);
    rep.avg_power = pm.avg_power;
    rep.energy = pm.energy;
    rep.logical_correct = true;
    for (int r : active)
        if (read_logic(cfg.device.rram, res.final_rram[g.index({r, gate.out.col})]) != in.expected())
            rep.logical_correct = false;
    if (g.has_selectors()) {
        for (const Cell& c : g.cells) {
            const int col = c.addr.col;
            if (active.count(c.addr.row) != 0U || col == gate.in1.col || col == gate.in2.col || col == gate.out.col)
                continue;
            if (res.ever_on[g.index(c.addr)]) ++rep.isolation_violations;
        }
    }
    return rep;
}

}  // namespace

CircuitGraph build_nor_array(int n, CellKind kind, NorInputs in, const std::set<int>& active_rows,
                             const ExperimentConfig& cfg) {
    const ArraySpec spec = sized(cfg, n, kind);
    const MagicCells gate = place_magic_cells(spec);
    StatePattern pattern = background(cfg);
    // Non-gate cells on a floating gate row are held at HRS; an LRS cell there
    // ties the row to its isolation bitline.
    for (int r : active_rows) {
        for (int c = 0; c < n; ++c) pattern.overrides[{r, c}] = ResistiveState::HRS;
        pattern.overrides[{r, gate.in1.col}] = state_of(in.a);
        pattern.overrides[{r, gate.in2.col}] = state_of(in.b);
        pattern.overrides[{r, gate.out.col}] = ResistiveState::LRS;
    }
    return build_array(spec, pattern, cfg.device);
}

ExperimentReport run_magic_nor(int n, CellKind kind, NorInputs in, const ExperimentConfig& cfg) {
    return run_nor_rows(n, kind, in, {n / 2}, Study::Delay, cfg);
}

ExperimentReport run_power_halfrows(int n, CellKind kind, NorInputs in, const ExperimentConfig& cfg) {
    std::set<int> active;
    for (int r = n / 4; r < n / 4 + n / 2; ++r) active.insert(r);
    return run_nor_rows(n, kind, in, active, Study::Power, cfg);
}

ExperimentReport run_readout_margin(int n, CellKind kind, const ExperimentConfig& cfg) {
    cfg.validate();
    if (n < 1) throw ValidationError("readout: N must be >= 1");
    const ArraySpec spec = sized(cfg, n, kind);
    const CellAddress target{n / 2, n / 2};
    const LineBias bias = read_bias(spec, target, cfg.v_read, cfg.r_sense);

    auto sense = [&](ResistiveState selected, ResistiveState others) {
        StatePattern p = StatePattern::uniform(others);
        p.overrides[target] = selected;
        const CircuitGraph g = build_array(spec, p, cfg.device);
        const OperatingPoint op = solve_dc(g, bias, cfg.solver);
        for (std::size_t k = 0; k < g.cells.size(); ++k)
            if (op.rram[k].w != g.cells[k].rram.w) throw std::logic_error("read disturbed a device state");
        return op.sense_voltage;
    };
    const double v_lrs = sense(ResistiveState::LRS, ResistiveState::HRS);
    const double v_hrs = sense(ResistiveState::HRS, ResistiveState::LRS);

    ExperimentReport rep;
    rep.size = n;
    rep.kind = kind;
    rep.study = Study::Readout;
    rep.readout_margin = (v_lrs - v_hrs) / cfg.v_read;
    rep.logical_correct = true;
    return rep;
}

double full_switch_time(const TransientResult& result, CellAddress cell, double w_target, double tol) {
    const auto& w = result.w_trace(cell);
    const auto& t = result.time;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (std::abs(w[k] - w_target) > tol) continue;
        if (k == 0) return t[0];
        const double span = w[k - 1] - w[k];
        return t[k - 1] + (w[k - 1] - w_target) / span * (t[k] - t[k - 1]);
    }
    return kNeverSwitched;
}

ExperimentReport run_cell_set(const ExperimentConfig& cfg) {
    cfg.validate();
    ArraySpec spec;
    spec.rows = spec.cols = 1;
    spec.kind = CellKind::R1;
    spec.r_wire_bl = spec.r_wire_wl = 0.0;
    spec.c_cell = 0.0;
    const CircuitGraph g = build_array(spec, StatePattern::uniform(ResistiveState::HRS), cfg.device);
    LineBias bias = LineBias::all_floating(spec);
    bias.bitlines[0] = LineDrive::Driven(cfg.fit.v_pulse_set);
    bias.wordlines[0] = LineDrive::Driven(0.0);
    const double t_expect = closed_form_switch_time(cfg.device.rram, cfg.fit.v_pulse_set);
    const double duration = std::isfinite(t_expect) ? 2.0 * t_expect + 10 * cfg.solver.dt : cfg.t_op;
    const TransientResult res =
        solve_transient(g, DriveSchedule::constant(bias), duration, cfg.solver, {{}, {{0, 0}}});

    ExperimentReport rep;
    rep.size = 1;
    rep.kind = CellKind::R1;
    rep.study = Study::Cell;
    rep.delay = full_switch_time(res, {0, 0}, cfg.device.rram.w_set);
    rep.logical_correct = read_logic(cfg.device.rram, res.final_rram[0]) == 1;
    return rep;
}

void SweepPlan::validate() const {
    const bool only_cell = studies.size() == 1 && studies[0] == Study::Cell;
    if (sizes.empty() && !only_cell) throw ValidationError("sweep: size list is empty");
    if (kinds.empty()) throw ValidationError("sweep: kind list is empty");
    if (studies.empty()) throw ValidationError("sweep: study list is empty");
    for (int n : sizes)
        if (n < 4 || (n & (n - 1)) != 0 || n > 512)
            throw ValidationError("sweep: sizes must be powers of two in [4, 512], got " + std::to_string(n));
    for (Study s : studies)
        if ((s == Study::Delay || s == Study::Power) && inputs.empty())
            throw ValidationError("sweep: gate studies need at least one input combination");
    for (const auto& in : inputs)
        if ((in.a != 0 && in.a != 1) || (in.b != 0 && in.b != 1))
            throw ValidationError("sweep: inputs must be 0 or 1");
}

std::vector<ExperimentReport> run_sweep(const SweepPlan& plan, const ExperimentConfig& cfg, int threads,
                                        const RowSink& sink) {
    plan.validate();
    cfg.validate();

    std::vector<std::function<ExperimentReport()>> jobs;
    std::vector<ExperimentReport> skeleton;
    auto make_head = [](int n, CellKind kind, Study s) {
        ExperimentReport r;
        r.size = n, r.kind = kind, r.study = s;
        return r;
    };
    auto add = [&](ExperimentReport head, std::function<ExperimentReport()> job) {
        skeleton.push_back(std::move(head));
        jobs.push_back(std::move(job));
    };
    for (Study s : plan.studies)
        if (s == Study::Cell) add(make_head(1, CellKind::R1, Study::Cell), [&cfg] { return run_cell_set(cfg); });
    for (int n : plan.sizes) {
        for (CellKind kind : plan.kinds) {
            for (Study s : plan.studies) {
                if (s == Study::Readout) {
                    add(make_head(n, kind, s), [n, kind, &cfg] { return run_readout_margin(n, kind, cfg); });
                } else if (s == Study::Delay || s == Study::Power) {
                    for (NorInputs in : plan.inputs) {
                        ExperimentReport head = make_head(n, kind, s);
                        head.inputs = in;
                        if (s == Study::Delay)
                            add(head, [n, kind, in, &cfg] { return run_magic_nor(n, kind, in, cfg); });
                        else
                            add(head, [n, kind, in, &cfg] { return run_power_halfrows(n, kind, in, cfg); });
                    }
                }
            }
        }
    }

    std::vector<std::optional<ExperimentReport>> done(jobs.size());
    std::mutex mu;
    std::condition_variable cv;
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            ExperimentReport rep;
            try {
                rep = jobs[i]();
            } catch (const SolverError& e) {
                rep = skeleton[i];
                rep.error = std::string("SolverError(") + to_string(e.kind()) + "): " + e.what();
            } catch (const std::exception& e) {
                rep = skeleton[i];
                rep.error = e.what();
            }
            std::lock_guard lock(mu);
            done[i] = std::move(rep);
            cv.notify_all();
        }
    };

    const int n_workers = std::max(1, std::min<int>(threads, static_cast<int>(jobs.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < n_workers; ++t) pool.emplace_back(worker);

    std::vector<ExperimentReport> table;
    table.reserve(jobs.size());
    if (n_workers == 1) {
        worker();
        for (auto& r : done) {
            if (sink) sink(*r);
            table.push_back(std::move(*r));
        }
        return table;
    }
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] { return done[i].has_value(); });
        ExperimentReport r = std::move(*done[i]);
        lock.unlock();
        if (sink) sink(r);
        table.push_back(std::move(r));
    }
    for (auto& t : pool) t.join();
    return table;
}

RatioSummary compare_ratios(const std::vector<ExperimentReport>& table) {
    struct PerSize {
        std::map<NorInputs, double> power[2];
        std::optional<double> rm[2];
    };
    std::map<int, PerSize> by_size;
    for (const auto& r : table) {
        if (r.study != Study::Power && r.study != Study::Readout) continue;
        if (r.error)
            throw ValidationError("compare: failed row at size " + std::to_string(r.size) + " cannot be compared");
        PerSize& ps = by_size[r.size];
        const int k = r.kind == CellKind::R1 ? 0 : 1;
        if (r.study == Study::Power) {
            if (!r.inputs) throw ValidationError("compare: power row without inputs");
            ps.power[k][*r.inputs] = r.avg_power;
        } else {
            ps.rm[k] = r.readout_margin;
        }
    }
    if (by_size.empty()) throw ValidationError("compare: table has no power or readout rows");

    double log00 = 0, log_other = 0, log_rm = 0;
    int n00 = 0, n_other = 0, n_rm = 0;
    RatioSummary out;
    for (const auto& [n, ps] : by_size) {
        out.sizes.push_back(n);
        const std::string at = " at size " + std::to_string(n);
        if (ps.power[0].size() != ps.power[1].size()) throw ValidationError("compare: unmatched power rows" + at);
        double p_other[2] = {0, 0};
        bool any_other = false;
        for (const auto& [in, p1] : ps.power[0]) {
            auto it = ps.power[1].find(in);
            if (it == ps.power[1].end()) throw ValidationError("compare: unmatched power rows" + at);
            if (in == NorInputs{0, 0}) {
                log00 += std::log(p1 / it->second);
                ++n00;
            } else {
                p_other[0] += p1;
                p_other[1] += it->second;
                any_other = true;
            }
        }
        if (any_other) {
            log_other += std::log(p_other[0] / p_other[1]);
            ++n_other;
        }
        if (ps.rm[0].has_value() != ps.rm[1].has_value()) throw ValidationError("compare: unmatched readout rows" + at);
        if (ps.rm[0]) {
            log_rm += std::log(*ps.rm[1] / *ps.rm[0]);
            ++n_rm;
        }
    }
    if (n00 > 0) out.power_ratio_nor00 = std::exp(log00 / n00);
    if (n_other > 0) out.power_ratio_other = std::exp(log_other / n_other);
    if (n_rm > 0) out.rm_ratio = std::exp(log_rm / n_rm);
    return out;
}

}  // namespace xbar
