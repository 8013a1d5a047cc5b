#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "xbar/engine.hpp"

namespace xbar {

enum class Study { Delay, Power, Readout, Cell };

const char* to_string(Study s);
std::optional<Study> parse_study(const std::string& s);

/// Gate inputs, 1 = LRS, 0 = HRS.
struct NorInputs {
    int a = 0;
    int b = 0;

    int expected() const { return (a == 0 && b == 0) ? 1 : 0; }
    auto operator<=>(const NorInputs&) const = default;
};

inline const std::vector<NorInputs>& all_nor_inputs() {
    static const std::vector<NorInputs> v{{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    return v;
}

struct ExperimentConfig {
    ArraySpec array;  ///< parasitics and driver placement; rows/cols/kind are set per run
    CellParamsd device;
    SolverConfig solver;
    FitTargetsd fit;

    double v_magic = 3.0;
    double v_iso_wl = 1.0;
    double v_iso_bl = 2.0;
    double t_op = 20e-9;
    double v_read = 2.0;
    double r_sense = 100e3;
    double delay_criterion = 0.9;
    StatePattern::Fill background = StatePattern::Fill::Checkerboard;
    ResistiveState uniform_background = ResistiveState::HRS;  ///< used when background is Uniform

    bool operator==(const ExperimentConfig&) const = default;
    void validate() const;
};

struct ExperimentReport {
    int size = 0;
    CellKind kind = CellKind::R1;
    Study study = Study::Delay;
    std::optional<NorInputs> inputs;

    double delay = kNeverSwitched;  ///< seconds; Infinity when the output never switched
    double avg_power = std::numeric_limits<double>::quiet_NaN();
    double energy = std::numeric_limits<double>::quiet_NaN();
    double readout_margin = std::numeric_limits<double>::quiet_NaN();
    bool logical_correct = false;

    /// Selectors outside the active rows and the gate columns that were ON at
    /// any sample. Always 0 for 1R.
    int isolation_violations = 0;

    std::optional<std::string> error;  ///< set when the run failed; other fields are meaningless
};

/// Midpoint-resistance decision: logic 1 when R(w) is below (R_LRS + R_HRS)/2.
int read_logic(const VteamParamsd& p, RramStated s);

CircuitGraph build_nor_array(int n, CellKind kind, NorInputs in, const std::set<int>& active_rows,
                             const ExperimentConfig& cfg);

ExperimentReport run_magic_nor(int n, CellKind kind, NorInputs in, const ExperimentConfig& cfg);
ExperimentReport run_power_halfrows(int n, CellKind kind, NorInputs in, const ExperimentConfig& cfg);
ExperimentReport run_readout_margin(int n, CellKind kind, const ExperimentConfig& cfg);
/// Full SET time of one isolated RRAM under the SET fitting pulse.
ExperimentReport run_cell_set(const ExperimentConfig& cfg);

/// Time at which a probed cell's state first comes within `tol` of
/// `w_target`, interpolated between samples. Infinity if it never does.
double full_switch_time(const TransientResult& result, CellAddress cell, double w_target, double tol = 1e-9);

struct SweepPlan {
    std::vector<int> sizes;
    std::vector<CellKind> kinds{CellKind::R1, CellKind::S1R1};
    std::vector<Study> studies{Study::Delay, Study::Power, Study::Readout};
    std::vector<NorInputs> inputs = all_nor_inputs();

    bool operator==(const SweepPlan&) const = default;
    void validate() const;
};

/// Called once per row, in table order, from the calling thread.
using RowSink = std::function<void(const ExperimentReport&)>;

/// Rows are ordered cell study first, then size, kind, study, inputs.
std::vector<ExperimentReport> run_sweep(const SweepPlan& plan, const ExperimentConfig& cfg, int threads = 1,
                                        const RowSink& sink = {});

struct RatioSummary {
    double power_ratio_nor00 = std::numeric_limits<double>::quiet_NaN();  ///< R1 / S1R1
    double power_ratio_other = std::numeric_limits<double>::quiet_NaN();  ///< R1 / S1R1, NOR(0,1)+(1,0)+(1,1)
    double rm_ratio = std::numeric_limits<double>::quiet_NaN();           ///< S1R1 / R1
    std::vector<int> sizes;
};

/// Geometric means over sizes of the per-size kind ratios. Power uses the
/// half-row power rows.
RatioSummary compare_ratios(const std::vector<ExperimentReport>& table);

}  // namespace xbar
