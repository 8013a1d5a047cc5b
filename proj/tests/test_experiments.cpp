#include <doctest.h>

#include <cmath>
#include <cstring>

#include "xbar/experiments.hpp"

using namespace xbar;

namespace {

ExperimentReport row(int n, CellKind kind, Study s, std::optional<NorInputs> in, double power, double rm) {
    ExperimentReport r;
    r.size = n;
    r.kind = kind;
    r.study = s;
    r.inputs = in;
    r.avg_power = power;
    r.readout_margin = rm;
    r.logical_correct = true;
    return r;
}

// Power and readout rows for one size with the given R1/S1R1 ratios.
void add_size(std::vector<ExperimentReport>& t, int n, double power_ratio, double rm_ratio) {
    for (NorInputs in : all_nor_inputs()) {
        t.push_back(row(n, CellKind::R1, Study::Power, in, power_ratio * 1e-3, NAN));
        t.push_back(row(n, CellKind::S1R1, Study::Power, in, 1e-3, NAN));
    }
    t.push_back(row(n, CellKind::R1, Study::Readout, std::nullopt, NAN, 0.1));
    t.push_back(row(n, CellKind::S1R1, Study::Readout, std::nullopt, NAN, 0.1 * rm_ratio));
}

}  // namespace

TEST_CASE("midpoint logic decision") {
    const VteamParamsd p;
    CHECK(read_logic(p, {p.w_set}) == 1);
    CHECK(read_logic(p, {p.w_reset}) == 0);
    CHECK(read_logic(p, {0.5}) == 1);  // 100 kohm < 505 kohm
    CHECK(read_logic(p, {0.99}) == 0);
}

TEST_CASE("NOR(0,0) never switches") {
    const ExperimentReport r = run_magic_nor(4, CellKind::S1R1, {0, 0}, ExperimentConfig{});
    CHECK(r.delay == kNeverSwitched);
    CHECK(r.logical_correct);
}

TEST_CASE("NOR(1,1) switches faster than NOR(0,1)") {
    const ExperimentConfig cfg;
    for (CellKind k : {CellKind::R1, CellKind::S1R1}) {
        const auto fast = run_magic_nor(8, k, {1, 1}, cfg);
        const auto slow = run_magic_nor(8, k, {0, 1}, cfg);
        CHECK(fast.delay < slow.delay);
        CHECK(fast.logical_correct);
        CHECK(slow.logical_correct);
    }
}

TEST_CASE("1x1 ideal readout margin is the two-divider closed form") {
    ExperimentConfig cfg;
    cfg.array.r_wire_bl = cfg.array.r_wire_wl = 0;
    cfg.array.c_cell = 0;
    const double rl = 1e4, rh = 1e6, rs = 1e5;
    const double expect = rs / (rs + rl) - rs / (rs + rh);
    CHECK(expect == doctest::Approx(0.818).epsilon(1e-3));
    const ExperimentReport r = run_readout_margin(1, CellKind::R1, cfg);
    CHECK(r.readout_margin == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("zero sources dissipate nothing") {
    ExperimentConfig cfg;
    cfg.v_magic = 0;
    cfg.v_iso_wl = 0;
    cfg.v_iso_bl = 0;
    const auto r = run_power_halfrows(4, CellKind::R1, {1, 1}, cfg);
    CHECK(r.avg_power == 0.0);
}

TEST_CASE("sweep row count and order") {
    SweepPlan plan;
    plan.sizes = {4};
    const auto rows = run_sweep(plan, ExperimentConfig{}, 2);
    // delay and power: 4 inputs x 2 kinds each; readout: one per kind
    CHECK(rows.size() == 4 * 2 * 2 + 2);
    CHECK(rows[0].kind == CellKind::R1);
    CHECK(rows[0].study == Study::Delay);
    CHECK(rows.back().kind == CellKind::S1R1);
    CHECK(rows.back().study == Study::Readout);
    for (const auto& r : rows) CHECK_FALSE(r.error);

    SweepPlan empty;
    CHECK_THROWS_AS(run_sweep(empty, ExperimentConfig{}), ValidationError);
}

TEST_CASE("sweep is deterministic across thread counts") {
    SweepPlan plan;
    plan.sizes = {4, 8};
    plan.studies = {Study::Delay, Study::Readout};
    std::vector<ExperimentReport> streamed;
    const auto a = run_sweep(plan, ExperimentConfig{}, 1);
    const auto b = run_sweep(plan, ExperimentConfig{}, 4, [&](const ExperimentReport& r) { streamed.push_back(r); });
    REQUIRE(a.size() == b.size());
    REQUIRE(streamed.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].size == b[k].size);
        CHECK(a[k].kind == b[k].kind);
        CHECK(a[k].inputs == b[k].inputs);
        CHECK(std::memcmp(&a[k].delay, &b[k].delay, sizeof(double)) == 0);
        CHECK(std::memcmp(&a[k].readout_margin, &b[k].readout_margin, sizeof(double)) == 0);
        CHECK(streamed[k].size == b[k].size);
    }
}

TEST_CASE("ratio summary") {
    std::vector<ExperimentReport> same;
    add_size(same, 4, 1.0, 1.0);
    add_size(same, 8, 1.0, 1.0);
    const RatioSummary one = compare_ratios(same);
    CHECK(one.power_ratio_nor00 == doctest::Approx(1.0));
    CHECK(one.power_ratio_other == doctest::Approx(1.0));
    CHECK(one.rm_ratio == doctest::Approx(1.0));

    std::vector<ExperimentReport> t;
    add_size(t, 4, 2.0, 2.0);
    add_size(t, 8, 8.0, 8.0);
    const RatioSummary g = compare_ratios(t);
    CHECK(g.power_ratio_nor00 == doctest::Approx(4.0));
    CHECK(g.power_ratio_other == doctest::Approx(4.0));
    CHECK(g.rm_ratio == doctest::Approx(4.0));
    CHECK(g.sizes == std::vector<int>{4, 8});

    t.pop_back();
    CHECK_THROWS_AS(compare_ratios(t), ValidationError);
}

TEST_CASE("isolation holds in a small 1S1R gate") {
    const auto r = run_power_halfrows(8, CellKind::S1R1, {0, 1}, ExperimentConfig{});
    CHECK(r.isolation_violations == 0);
    CHECK(r.logical_correct);
}
