#pragma once

#include <iosfwd>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "xbar/crossbar.hpp"

namespace xbar {

struct SolverConfig {
    double dt = 10e-12;           ///< transient step [s]
    double newton_vtol = 1e-6;    ///< max node update at convergence [V]
    double newton_itol = 1e-12;   ///< max KCL residual at convergence [A]
    int max_newton_iters = 50;
    int max_mode_resolves = 3;
    double ramp_time = 10e-9;     ///< nominal duration of the quasi-static DC ramp [s]
    double ramp_step = 0.25e-9;   ///< spacing of the DC ramp points [s]

    bool operator==(const SolverConfig&) const = default;
    void validate() const;
    int ramp_points() const;
};

/// First-order companion model i ~= g_eq * v + i_eq, tangent at v_guess.
struct Linearization {
    double g_eq;
    double i_eq;
};

Linearization linearize_rram(const VteamParamsd& p, RramStated s, double v_guess);
Linearization linearize_selector(const SelectorParamsd& p, SelectorMode m, double v_guess);

struct OperatingPoint {
    Eigen::VectorXd node_voltages;          ///< indexed by NodeId
    std::vector<RramStated> rram;           ///< per cell, row-major
    std::vector<SelectorMode> modes;        ///< per cell, row-major
    Eigen::VectorXd bitline_current;        ///< current delivered by each bitline source (0 when floating)
    Eigen::VectorXd wordline_current;
    double max_kcl_residual = 0.0;
    double sense_voltage = std::numeric_limits<double>::quiet_NaN();

    double source_power(const LineBias& bias) const;
};

/// Piecewise-constant bias program. Segment i applies for t >= t_start[i].
struct DriveSchedule {
    struct Segment {
        double t_start;
        LineBias bias;
    };
    std::vector<Segment> segments;

    static DriveSchedule constant(LineBias bias) { return {{{0.0, std::move(bias)}}}; }
    const LineBias& at(double t) const;
};

struct Probes {
    std::vector<NodeId> nodes;
    std::vector<CellAddress> cells;
};

struct SourceTrace {
    LineRef line;
    std::vector<double> volts;    ///< source value (0 while floating)
    std::vector<double> current;  ///< delivered into the array (0 while floating)
};

struct TransientResult {
    std::vector<double> time;
    std::vector<NodeId> probe_nodes;
    std::vector<std::vector<double>> node_traces;  ///< [probe][sample]
    std::vector<CellAddress> probe_cells;
    std::vector<std::vector<double>> w_traces;     ///< [probe][sample]
    std::vector<std::vector<SelectorMode>> mode_traces;
    std::vector<SourceTrace> sources;
    std::vector<RramStated> final_rram;
    std::vector<SelectorMode> final_modes;
    std::vector<char> ever_on;                     ///< per cell: selector was ON at some sample

    const std::vector<double>& w_trace(CellAddress a) const;
    /// Total power delivered by all sources at sample k.
    double power_at(std::size_t k) const;
};

/// Quasi-static operating point with frozen RRAM states. Sources ramp from 0
/// to their targets so selector modes resolve along the way.
OperatingPoint solve_dc(const CircuitGraph& graph, const LineBias& bias, const SolverConfig& config);

/// Fixed-step backward-Euler transient from a discharged start. RRAM states
/// and selector modes evolve; the input graph is not modified.
TransientResult solve_transient(const CircuitGraph& graph, const DriveSchedule& schedule, double duration,
                                const SolverConfig& config, const Probes& probes = {});

inline constexpr double kNeverSwitched = std::numeric_limits<double>::infinity();

/// First time after t0 at which the cell's state has covered `criterion` of
/// the way from w(t0) to w_target, interpolated between samples.
double measure_delay(const TransientResult& result, CellAddress cell, double w_target, double criterion,
                     double t0 = 0.0);

struct PowerMeasure {
    double avg_power;
    double energy;
};

/// Trapezoidal integral of delivered source power over [t_a, t_b].
PowerMeasure measure_power(const TransientResult& result, double t_a, double t_b);

/// CSV dump of probe traces: time, probed node voltages, probed cell states.
void write_waveforms(std::ostream& os, const CircuitGraph& graph, const TransientResult& result);

}  // namespace xbar
