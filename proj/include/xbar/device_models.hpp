#pragma once

// Compact models for the two devices in a 1S1R cell: a threshold-switching
// IMT selector with hysteresis and a VTEAM-style bipolar RRAM, plus their
// series composition. Everything here is a pure function of parameter records
// and explicit state values, templated on the scalar type.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "xbar/errors.hpp"

namespace xbar {

// ---------------------------------------------------------------------------
// Selector
// ---------------------------------------------------------------------------

enum class SelectorMode { Off, On };

inline const char* to_string(SelectorMode m) { return m == SelectorMode::On ? "on" : "off"; }

template <typename Scalar>
struct SelectorParams {
    Scalar v_th = Scalar(1.5);     ///< OFF -> ON threshold [V]
    Scalar v_hold = Scalar(1e-3);  ///< ON -> OFF threshold [V]
    Scalar r_on = Scalar(1e3);     ///< ON-state resistance [ohm]
    Scalar alpha_s = Scalar(0.1);  ///< OFF-branch exponential slope [V]
    Scalar beta_s = Scalar(1.5e6); ///< OFF-branch prefactor [ohm]
    Scalar v_s = Scalar(1.5);      ///< OFF-branch exponent offset [V]

    bool operator==(const SelectorParams&) const = default;

    void validate() const {
        if (!(v_hold > 0 && v_hold < v_th))
            throw ValidationError("selector: requires 0 < v_hold < v_th");
        if (!(r_on > 0)) throw ValidationError("selector: requires r_on > 0");
        if (!(alpha_s > 0)) throw ValidationError("selector: requires alpha_s > 0");
        if (!(beta_s > 0)) throw ValidationError("selector: requires beta_s > 0");
    }
};

/// Selector current. The OFF branch is a Poole-Frenkel-like exponential made
/// odd in v by evaluating it on |v| and restoring the sign.
template <typename Scalar>
Scalar selector_current(const SelectorParams<Scalar>& p, SelectorMode m, Scalar v) {
    using std::abs;
    using std::exp;
    if (m == SelectorMode::On) return v / p.r_on;
    const Scalar a = abs(v);
    const Scalar i = (a / p.beta_s) * exp((a - p.v_s) / p.alpha_s);
    return v < 0 ? -i : i;
}

/// dI/dV of selector_current; even in v.
template <typename Scalar>
Scalar selector_conductance(const SelectorParams<Scalar>& p, SelectorMode m, Scalar v) {
    using std::abs;
    using std::exp;
    if (m == SelectorMode::On) return Scalar(1) / p.r_on;
    const Scalar a = abs(v);
    return exp((a - p.v_s) / p.alpha_s) / p.beta_s * (Scalar(1) + a / p.alpha_s);
}

/// Hysteresis rule: OFF->ON at |v| >= v_th, ON->OFF at |v| <= v_hold.
template <typename Scalar>
SelectorMode selector_next_mode(const SelectorParams<Scalar>& p, SelectorMode m, Scalar v) {
    using std::abs;
    const Scalar a = abs(v);
    if (m == SelectorMode::Off) return a >= p.v_th ? SelectorMode::On : SelectorMode::Off;
    return a <= p.v_hold ? SelectorMode::Off : SelectorMode::On;
}

// ---------------------------------------------------------------------------
// RRAM (VTEAM)
// ---------------------------------------------------------------------------

enum class SwitchDirection { Set, Reset };

/// VTEAM constants. The state is normalized so w_set = 0 is LRS and w_reset = 1
/// is HRS; k_set is negative so that SET drives w toward w_set.
template <typename Scalar>
struct VteamParams {
    Scalar k_set = Scalar(-1.0 / 1.2e-9);
    Scalar k_reset = Scalar(1.0 / 6.6e-9);
    Scalar alpha_set = Scalar(1);
    Scalar alpha_reset = Scalar(1);
    Scalar v_set = Scalar(3);
    Scalar v_reset = Scalar(-1);
    Scalar w_set = Scalar(0);
    Scalar w_reset = Scalar(1);
    Scalar lambda = Scalar(4.6051701859880918);  // ln(100)
    Scalar r_lrs = Scalar(1e4);

    bool operator==(const VteamParams&) const = default;
    Scalar span() const { return w_reset - w_set; }
    Scalar r_hrs() const {
        using std::exp;
        return r_lrs * exp(lambda);
    }

    void validate() const {
        if (!(w_set < w_reset)) throw ValidationError("vteam: requires w_set < w_reset");
        if (!(v_reset < 0 && 0 < v_set)) throw ValidationError("vteam: requires v_reset < 0 < v_set");
        if (!(k_set < 0)) throw ValidationError("vteam: requires k_set < 0");
        if (!(k_reset > 0)) throw ValidationError("vteam: requires k_reset > 0");
        if (!(alpha_set > 0 && alpha_reset > 0)) throw ValidationError("vteam: requires alpha exponents > 0");
        if (!(lambda > 0)) throw ValidationError("vteam: requires lambda > 0 (r_hrs > r_lrs)");
        if (!(r_lrs > 0)) throw ValidationError("vteam: requires r_lrs > 0");
    }
};

template <typename Scalar>
struct RramState {
    Scalar w{};
};

template <typename Scalar>
Scalar effective_resistance(const VteamParams<Scalar>& p, RramState<Scalar> s) {
    using std::exp;
    return p.r_lrs * exp(p.lambda * (s.w - p.w_set) / p.span());
}

template <typename Scalar>
Scalar rram_current(const VteamParams<Scalar>& p, RramState<Scalar> s, Scalar v) {
    using std::exp;
    return exp(-p.lambda * (s.w - p.w_set) / p.span()) / p.r_lrs * v;
}

/// Rectangular window with hard bounds: motion is blocked only when it would
/// leave [w_set, w_reset].
template <typename Scalar>
Scalar window(const VteamParams<Scalar>& p, RramState<Scalar> s, SwitchDirection d) {
    if (d == SwitchDirection::Set) return s.w <= p.w_set ? Scalar(0) : Scalar(1);
    return s.w >= p.w_reset ? Scalar(0) : Scalar(1);
}

template <typename Scalar>
Scalar rram_dwdt(const VteamParams<Scalar>& p, RramState<Scalar> s, Scalar v) {
    using std::pow;
    if (v > p.v_set)
        return p.k_set * pow(v / p.v_set - Scalar(1), p.alpha_set) * window(p, s, SwitchDirection::Set);
    if (v < p.v_reset)
        return p.k_reset * pow(v / p.v_reset - Scalar(1), p.alpha_reset) *
               window(p, s, SwitchDirection::Reset);
    return Scalar(0);
}

/// Advance w under a constant device voltage. Internally sub-steps so that no
/// single update moves w by more than 1% of the state span.
template <typename Scalar>
RramState<Scalar> integrate_state(const VteamParams<Scalar>& p, RramState<Scalar> s, Scalar v, Scalar dt) {
    using std::abs;
    using std::ceil;
    if (!(dt > 0)) throw ValidationError("integrate_state: requires dt > 0");
    const Scalar rate = rram_dwdt(p, s, v);
    if (rate == Scalar(0)) return s;
    const Scalar max_move = Scalar(0.01) * p.span();
    const Scalar total = abs(rate * dt);
    const long n = total > max_move ? static_cast<long>(ceil(total / max_move)) : 1L;
    const Scalar h = dt / Scalar(n);
    for (long k = 0; k < n; ++k) {
        const Scalar r = rram_dwdt(p, s, v);
        if (r == Scalar(0)) break;
        s.w = std::clamp(s.w + r * h, p.w_set, p.w_reset);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

template <typename Scalar>
struct FitTargets {
    Scalar t_set = Scalar(1.2e-9);
    Scalar t_reset = Scalar(6.6e-9);
    Scalar v_pulse_set = Scalar(6);
    Scalar v_pulse_reset = Scalar(-2);

    bool operator==(const FitTargets&) const = default;
};

/// Time for a constant pulse to drive w from one bound to the other, from the
/// closed form of the rectangular-window rate. Infinity if the pulse is
/// sub-threshold.
template <typename Scalar>
Scalar closed_form_switch_time(const VteamParams<Scalar>& p, Scalar v) {
    using std::abs;
    const Scalar rate = rram_dwdt(p, RramState<Scalar>{(p.w_set + p.w_reset) / 2}, v);
    if (rate == Scalar(0)) return std::numeric_limits<Scalar>::infinity();
    return p.span() / abs(rate);
}

/// Integrate a constant pulse with step dt until w reaches the opposite bound;
/// the crossing is linearly interpolated inside the last step.
template <typename Scalar>
Scalar simulated_switch_time(const VteamParams<Scalar>& p, Scalar v, Scalar dt, Scalar t_max) {
    const bool set = v > 0;
    RramState<Scalar> s{set ? p.w_reset : p.w_set};
    const Scalar target = set ? p.w_set : p.w_reset;
    Scalar t = 0;
    while (t < t_max) {
        const RramState<Scalar> next = integrate_state(p, s, v, dt);
        if (next.w == s.w) break;
        if (next.w == target) {
            // The last step is clamped; recover the crossing from the rate.
            return t + std::min(dt, (target - s.w) / rram_dwdt(p, s, v));
        }
        s = next;
        t += dt;
    }
    return std::numeric_limits<Scalar>::infinity();
}

/// Choose k_set and k_reset so that the fitting pulses switch the device
/// end-to-end in exactly t_set and t_reset. The remaining fields of `fixed`
/// are kept. The result is checked by integration before being returned.
template <typename Scalar>
VteamParams<Scalar> fit_switching_rates(const FitTargets<Scalar>& t, VteamParams<Scalar> fixed) {
    using std::abs;
    using std::pow;
    if (!(t.t_set > 0 && t.t_reset > 0)) throw ValidationError("fit: switching times must be positive");
    if (!(t.v_pulse_set > fixed.v_set))
        throw ValidationError("fit: v_pulse_set must exceed v_set, no finite k_set exists");
    if (!(t.v_pulse_reset < fixed.v_reset))
        throw ValidationError("fit: v_pulse_reset must be below v_reset, no finite k_reset exists");
    if (!(fixed.w_set < fixed.w_reset)) throw ValidationError("fit: requires w_set < w_reset");

    const Scalar span = fixed.span();
    fixed.k_set = -span / (t.t_set * pow(t.v_pulse_set / fixed.v_set - Scalar(1), fixed.alpha_set));
    fixed.k_reset = span / (t.t_reset * pow(t.v_pulse_reset / fixed.v_reset - Scalar(1), fixed.alpha_reset));

    const Scalar got_set = simulated_switch_time(fixed, t.v_pulse_set, t.t_set / 1000, 10 * t.t_set);
    const Scalar got_reset = simulated_switch_time(fixed, t.v_pulse_reset, t.t_reset / 1000, 10 * t.t_reset);
    if (abs(got_set / t.t_set - 1) > Scalar(1e-3) || abs(got_reset / t.t_reset - 1) > Scalar(1e-3))
        throw ValidationError("fit: integrated switching times do not reproduce the targets");
    return fixed;
}

// ---------------------------------------------------------------------------
// 1S1R series composition
// ---------------------------------------------------------------------------

template <typename Scalar>
struct CellParams {
    SelectorParams<Scalar> selector;
    VteamParams<Scalar> rram;

    bool operator==(const CellParams&) const = default;
    void validate() const {
        selector.validate();
        rram.validate();
    }
};

/// Operating point of a selector in series with a resistor at a given total
/// voltage. `v_selector` is the drop across the selector; the remainder is
/// across the RRAM.
template <typename Scalar>
struct SeriesPoint {
    Scalar v_selector{};
    Scalar current{};
    Scalar conductance{};  ///< d(current)/d(total voltage)
};

/// Solve the selector/resistor divider for total voltage v. `guess` is a
/// warm start for the selector drop; the solve is bracketed so any guess is
/// safe.
template <typename Scalar>
SeriesPoint<Scalar> solve_series(const SelectorParams<Scalar>& sp, SelectorMode m, Scalar r_series, Scalar v,
                                 Scalar guess = Scalar(0)) {
    using std::abs;
    const Scalar g_r = Scalar(1) / r_series;
    if (m == SelectorMode::On) {
        const Scalar g_s = Scalar(1) / sp.r_on;
        const Scalar g = g_s * g_r / (g_s + g_r);
        return {v * g_r / (g_s + g_r), v * g, g};
    }
    if (v == Scalar(0)) {
        const Scalar g_s = selector_conductance(sp, m, Scalar(0));
        return {Scalar(0), Scalar(0), g_s * g_r / (g_s + g_r)};
    }
    // Odd symmetry: solve on |v|. Far from the root the exponential makes
    // plain Newton creep, so those steps are taken on the log of the balance.
    using std::exp;
    using std::log;
    const Scalar a = abs(v);
    const Scalar tol = Scalar(1e-13) * (a + Scalar(1));
    const Scalar e1 = std::numbers::e_v<Scalar>;
    Scalar lo = 0, hi = a;
    Scalar x = abs(guess);
    if (!(x > lo && x < hi)) x = a / 2;
    for (int it = 0; it < 200; ++it) {
        const Scalar e = exp((x - sp.v_s) / sp.alpha_s) / sp.beta_s;
        const Scalar i_sel = x * e;
        const Scalar i_res = (a - x) * g_r;
        const Scalar f = i_sel - i_res;
        if (f == Scalar(0)) break;
        if (f > 0) hi = x; else lo = x;
        Scalar next;
        if (i_sel > e1 * i_res || i_res > e1 * i_sel) {
            const Scalar fl = log(i_sel) - log(i_res);
            next = x - fl / (Scalar(1) / x + Scalar(1) / sp.alpha_s + Scalar(1) / (a - x));
        } else {
            next = x - f / (e * (Scalar(1) + x / sp.alpha_s) + g_r);
        }
        if (std::isfinite(next) && abs(next - x) <= tol) {
            x = std::clamp(next, lo, hi);
            break;
        }
        if (!(next > lo && next < hi) || !std::isfinite(next)) next = (lo + hi) / 2;
        x = next;
        if (hi - lo <= tol) break;
    }
    const Scalar g_s = selector_conductance(sp, m, x);
    const Scalar i = (a - x) * g_r;
    const Scalar sign = v < 0 ? Scalar(-1) : Scalar(1);
    return {sign * x, sign * i, g_s * g_r / (g_s + g_r)};
}

// ---------------------------------------------------------------------------
// Quasi-static I-V sweep of a single 1S1R cell
// ---------------------------------------------------------------------------

template <typename Scalar>
struct CellState {
    RramState<Scalar> rram;
    SelectorMode mode = SelectorMode::Off;
};

template <typename Scalar>
struct IvPoint {
    Scalar v{};
    Scalar i{};
};

template <typename Scalar>
struct IvSweep {
    std::vector<IvPoint<Scalar>> points;
    CellState<Scalar> final_state;
};

/// Linear voltage sweep from v_from to v_to at `rate` [V/s] across a selector
/// in series with the RRAM, with `steps` equal increments after the starting
/// point. Between points the RRAM state is integrated at the instantaneous
/// divider voltage, re-solving the divider whenever w has moved by 1% of its
/// span. The selector mode is updated at every point.
template <typename Scalar>
IvSweep<Scalar> iv_sweep(const CellParams<Scalar>& cell, CellState<Scalar> state, Scalar v_from, Scalar v_to,
                         Scalar rate, int steps = 1000) {
    using std::abs;
    if (!(rate > 0)) throw ValidationError("iv_sweep: rate must be positive");
    if (steps < 1) throw ValidationError("iv_sweep: steps must be >= 1");

    IvSweep<Scalar> out;
    out.points.reserve(static_cast<std::size_t>(steps) + 1);
    const Scalar dv = (v_to - v_from) / Scalar(steps);
    const Scalar dt = abs(dv) / rate;
    Scalar v_sel = 0;

    auto settle_mode = [&](Scalar v) {
        SeriesPoint<Scalar> sp{};
        for (int k = 0; k < 4; ++k) {
            sp = solve_series(cell.selector, state.mode, effective_resistance(cell.rram, state.rram), v, v_sel);
            v_sel = sp.v_selector;
            const SelectorMode next = selector_next_mode(cell.selector, state.mode, sp.v_selector);
            if (next == state.mode) break;
            state.mode = next;
        }
        return sp;
    };

    for (int k = 0; k <= steps; ++k) {
        const Scalar v = v_from + dv * Scalar(k);
        if (k > 0 && dt > 0) {
            Scalar remaining = dt;
            while (remaining > 0) {
                const SeriesPoint<Scalar> sp = settle_mode(v);
                const Scalar v_rram = v - sp.v_selector;
                const Scalar r = rram_dwdt(cell.rram, state.rram, v_rram);
                if (r == Scalar(0)) break;
                const Scalar h = std::min(remaining, Scalar(0.01) * cell.rram.span() / abs(r));
                state.rram = integrate_state(cell.rram, state.rram, v_rram, h);
                remaining -= h;
            }
        }
        const SeriesPoint<Scalar> sp = settle_mode(v);
        out.points.push_back({v, sp.current});
    }
    out.final_state = state;
    return out;
}

using SelectorParamsd = SelectorParams<double>;
using VteamParamsd = VteamParams<double>;
using RramStated = RramState<double>;
using FitTargetsd = FitTargets<double>;
using CellParamsd = CellParams<double>;
using CellStated = CellState<double>;

}  // namespace xbar
