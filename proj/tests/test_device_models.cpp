#include <doctest.h>

#include <cmath>

#include "xbar/device_models.hpp"
#include "xbar/engine.hpp"

using namespace xbar;

TEST_CASE("selector current branches") {
    const SelectorParamsd p;
    CHECK(selector_current(p, SelectorMode::Off, p.v_s) == doctest::Approx(p.v_s / p.beta_s).epsilon(1e-15));
    CHECK(selector_current(p, SelectorMode::On, 1.0) == doctest::Approx(1e-3).epsilon(1e-15));
    // hand value: e * (v_s + alpha) / beta
    const double v = p.v_s + p.alpha_s;
    CHECK(selector_current(p, SelectorMode::Off, v) == doctest::Approx(std::exp(1.0) * v / p.beta_s).epsilon(1e-14));
    CHECK(selector_current(p, SelectorMode::Off, -v) == doctest::Approx(-selector_current(p, SelectorMode::Off, v)));
    CHECK(selector_current(p, SelectorMode::Off, 0.0) == 0.0);
}

TEST_CASE("selector conductance matches central difference") {
    const SelectorParamsd p;
    for (double v : {-1.7, -0.4, 0.05, 0.9, 1.5, 1.62}) {
        const double h = 1e-6;
        const double fd =
            (selector_current(p, SelectorMode::Off, v + h) - selector_current(p, SelectorMode::Off, v - h)) / (2 * h);
        CHECK(selector_conductance(p, SelectorMode::Off, v) == doctest::Approx(fd).epsilon(1e-6));
    }
    const Linearization lin = linearize_selector(p, SelectorMode::Off, p.v_s);
    const double h = 1e-6;
    const double fd = (selector_current(p, SelectorMode::Off, p.v_s + h) - selector_current(p, SelectorMode::Off, p.v_s - h)) / (2 * h);
    CHECK(lin.g_eq == doctest::Approx(fd).epsilon(1e-6));
    CHECK(lin.g_eq * p.v_s + lin.i_eq == doctest::Approx(selector_current(p, SelectorMode::Off, p.v_s)).epsilon(1e-12));
    const Linearization on = linearize_selector(p, SelectorMode::On, 0.7);
    CHECK(on.g_eq == doctest::Approx(1.0 / p.r_on));
    CHECK(on.i_eq == doctest::Approx(0.0));
}

TEST_CASE("selector hysteresis") {
    const SelectorParamsd p;
    CHECK(selector_next_mode(p, SelectorMode::Off, p.v_th) == SelectorMode::On);
    CHECK(selector_next_mode(p, SelectorMode::Off, -p.v_th) == SelectorMode::On);
    CHECK(selector_next_mode(p, SelectorMode::Off, 0.5 * p.v_th) == SelectorMode::Off);
    CHECK(selector_next_mode(p, SelectorMode::On, 0.5 * p.v_th) == SelectorMode::On);
    CHECK(selector_next_mode(p, SelectorMode::On, 0.0) == SelectorMode::Off);
}

TEST_CASE("selector parameter invariants") {
    SelectorParamsd p;
    p.v_hold = p.v_th;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = {};
    p.r_on = 0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("rram current and resistance") {
    const VteamParamsd p;
    CHECK(rram_current(p, {p.w_set}, 0.1) == doctest::Approx(10e-6).epsilon(1e-14));
    CHECK(rram_current(p, {p.w_reset}, 0.7) == doctest::Approx(0.7 / p.r_hrs()).epsilon(1e-14));
    CHECK(rram_current(p, {0.37}, 0.0) == 0.0);
    CHECK(effective_resistance(p, {p.w_set}) == doctest::Approx(1e4));
    CHECK(effective_resistance(p, {0.5}) == doctest::Approx(1e5).epsilon(1e-12));
    CHECK(effective_resistance(p, {p.w_reset}) == doctest::Approx(1e6).epsilon(1e-12));
    const Linearization lin = linearize_rram(p, {0.3}, 1.234);
    CHECK(lin.g_eq == doctest::Approx(1.0 / effective_resistance(p, {0.3})));
    CHECK(lin.i_eq == 0.0);
}

TEST_CASE("rram state rate and window") {
    const VteamParamsd p;
    CHECK(rram_dwdt(p, {0.5}, 0.0) == 0.0);
    CHECK(rram_dwdt(p, {0.5}, 2.9) == 0.0);
    CHECK(rram_dwdt(p, {0.5}, -0.9) == 0.0);
    CHECK(rram_dwdt(p, {0.5}, 2 * p.v_set) == doctest::Approx(p.k_set));
    CHECK(rram_dwdt(p, {p.w_set}, p.v_set + 0.01) == 0.0);
    CHECK(window(p, {0.5}, SwitchDirection::Set) == 1.0);
    CHECK(window(p, {0.5}, SwitchDirection::Reset) == 1.0);
    CHECK(window(p, {p.w_reset}, SwitchDirection::Reset) == 0.0);
    CHECK(window(p, {p.w_reset}, SwitchDirection::Set) == 1.0);
}

TEST_CASE("state integration") {
    const VteamParamsd p;
    CHECK(integrate_state(p, {0.42}, 1.0, 1e-6).w == 0.42);
    // oracle: t = span / (|k_set| (v/v_set - 1))
    const double v = 6.0;
    const double t = p.span() / (-p.k_set * (v / p.v_set - 1));
    CHECK(t == doctest::Approx(1.2e-9).epsilon(1e-12));
    CHECK(integrate_state(p, {p.w_reset}, v, t).w == doctest::Approx(p.w_set));
    const double one = integrate_state(p, {0.9}, v, 2e-10).w;
    const double two = integrate_state(p, integrate_state(p, {0.9}, v, 1e-10), v, 1e-10).w;
    CHECK(two == doctest::Approx(one).epsilon(1e-9));
    CHECK(integrate_state(p, {0.1}, v, 1e-6).w == p.w_set);
    CHECK(integrate_state(p, {0.9}, -3.0, 1e-6).w == p.w_reset);
}

TEST_CASE("switching rate fit") {
    VteamParamsd fixed;
    fixed.k_set = -1;
    fixed.k_reset = 1;
    FitTargetsd t;
    t.t_set = 1.2e-9;
    t.t_reset = 6.6e-9;
    t.v_pulse_set = 2 * fixed.v_set;
    t.v_pulse_reset = 2 * fixed.v_reset;
    const VteamParamsd f = fit_switching_rates(t, fixed);
    CHECK(f.k_set == doctest::Approx(-fixed.span() / 1.2e-9).epsilon(1e-12));
    CHECK(f.k_reset == doctest::Approx(fixed.span() / 6.6e-9).epsilon(1e-12));
    CHECK(closed_form_switch_time(f, t.v_pulse_set) == doctest::Approx(1.2e-9).epsilon(1e-12));
    CHECK(simulated_switch_time(f, t.v_pulse_reset, 1e-12, 1e-7) == doctest::Approx(6.6e-9).epsilon(1e-6));

    FitTargetsd bad = t;
    bad.v_pulse_set = fixed.v_set;
    CHECK_THROWS_AS(fit_switching_rates(bad, fixed), ValidationError);
}

TEST_CASE("selector in series with a resistor") {
    const SelectorParamsd sp;
    for (SelectorMode m : {SelectorMode::Off, SelectorMode::On}) {
        for (double r : {1e4, 1e6}) {
            for (double v : {-3.0, -1.0, 0.0, 0.3, 1.6, 2.0, 3.0, 6.0}) {
                CAPTURE(v);
                CAPTURE(r);
                const auto pt = solve_series(sp, m, r, v, 0.0);
                const double i_res = (v - pt.v_selector) / r;
                CHECK(pt.current == doctest::Approx(i_res).epsilon(1e-12));
                // KCL at the junction, to 1e-9 relative or 1e-16 A
                const double i_sel = selector_current(sp, m, pt.v_selector);
                CHECK(std::abs(i_sel - i_res) <= 1e-9 * std::abs(i_res) + 1e-16);
                const double h = 1e-6;
                const double fd =
                    (solve_series(sp, m, r, v + h, pt.v_selector).current - solve_series(sp, m, r, v - h, pt.v_selector).current) /
                    (2 * h);
                CHECK(pt.conductance == doctest::Approx(fd).epsilon(1e-4));
                // warm start does not change the answer
                const auto warm = solve_series(sp, m, r, v, 0.8 * v);
                CHECK(warm.v_selector == doctest::Approx(pt.v_selector).epsilon(1e-9).scale(1e-12));
            }
        }
    }
}

TEST_CASE("1S1R I-V loop") {
    const CellParamsd cell;
    CellStated st{{cell.rram.w_reset}, SelectorMode::Off};
    const auto up = iv_sweep(cell, st, 0.0, 4.0, 1e8, 400);
    CHECK(up.points.front().i == 0.0);
    // forward branch jumps when the selector turns on
    double jump = 0;
    for (std::size_t k = 1; k < up.points.size(); ++k)
        jump = std::max(jump, up.points[k].i / std::max(up.points[k - 1].i, 1e-300));
    CHECK(jump > 10.0);
    CHECK(up.final_state.rram.w == doctest::Approx(cell.rram.w_set));
    const auto down = iv_sweep(cell, up.final_state, 4.0, 0.0, 1e8, 400);
    // reverse branch carries more current at the same bias: enclosed area
    double area = 0;
    for (std::size_t k = 0; k + 1 < up.points.size(); ++k) {
        const double v0 = up.points[k].v, v1 = up.points[k + 1].v;
        const double d0 = down.points[down.points.size() - 1 - k].i - up.points[k].i;
        const double d1 = down.points[down.points.size() - 2 - k].i - up.points[k + 1].i;
        area += 0.5 * (d0 + d1) * (v1 - v0);
    }
    CHECK(area > 0.0);
    CHECK(down.points.back().i == doctest::Approx(0.0));
}
