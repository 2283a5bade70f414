#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "dpgen/ct_assign.hpp"
#include "dpgen/ct_wire.hpp"
#include "dpgen/ppg.hpp"

using namespace dpgen;

namespace {

// one 3:2 in one column: three bits in, two out
StageAssignment single_fa_assignment() {
    auto plans = plan_compressors(std::vector<int>{3});
    // t=3 plans a 2:2; build a 3-bit column with one 3:2 instead by hand
    StageAssignment a;
    a.columns = 2;
    a.stage_count = 1;
    a.f = {{1, 0}};
    a.h = {{0, 0}};
    a.pp = {{3, 0}, {1, 1}};
    (void)plans;
    return a;
}

} // namespace

TEST_CASE("forward evaluation of a lone 3:2 with simultaneous inputs") {
    StageAssignment a = single_fa_assignment();
    WiringPlan w;
    w.perm = {{{0, 1, 2}, {}}};
    DelayTable dt;
    ArrivalProfile in{{0, 0, 0}, {}};
    WiringEval ev = evaluate_wiring(a, w, dt, in);
    REQUIRE(ev.finals[0].size() == 1);
    REQUIRE(ev.finals[1].size() == 1);
    REQUIRE(ev.finals[0][0] == Catch::Approx(3.0)); // sum: two XOR levels
    REQUIRE(ev.finals[1][0] == Catch::Approx(2.5)); // carry
    REQUIRE(ev.max_delay == Catch::Approx(3.0));
}

TEST_CASE("the late input belongs on the carry-in port") {
    StageAssignment a = single_fa_assignment();
    DelayTable dt;
    ArrivalProfile in{{0, 0, 2.0}, {}};
    // enumerate all 3! port mappings
    std::vector<int> perm{0, 1, 2};
    double best = 1e18;
    std::vector<int> best_perm;
    std::sort(perm.begin(), perm.end());
    do {
        WiringPlan w;
        w.perm = {{perm, {}}};
        double d = evaluate_wiring(a, w, dt, in).max_delay;
        if (d < best - 1e-12) {
            best = d;
            best_perm = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    REQUIRE(best_perm[2] == 2); // late source drives cin (T_cs < T_as)
    REQUIRE(best == Catch::Approx(4.0)); // carry binds: max(2.5, 2.0 + T_cc)

    // the ILP agrees with the enumeration
    WireModel wm = build_wiring_model(a, dt, in);
    ilp::Solution sol = ilp::solve(wm.model);
    REQUIRE(sol.status == ilp::Status::Optimal);
    REQUIRE(sol.value(wm.m_id) == Catch::Approx(best));
}

TEST_CASE("empty tree passes arrivals through") {
    auto plans = plan_compressors(generate_and_array(2));
    StageAssignment a = greedy_assignment(plans);
    REQUIRE(a.stage_count == 0);
    DelayTable dt;
    ArrivalProfile in = zero_arrivals(a);
    in[1] = {0.5, 1.5};
    WiringPlan w;
    w.perm = {};
    WiringEval ev = evaluate_wiring(a, w, dt, in);
    REQUIRE(ev.finals[1][1] == Catch::Approx(1.5));
    REQUIRE(ev.max_delay == Catch::Approx(1.5));
}

TEST_CASE("permutation validity is enforced") {
    StageAssignment a = single_fa_assignment();
    WiringPlan w;
    w.perm = {{{0, 0, 2}, {}}}; // not a bijection
    DelayTable dt;
    ArrivalProfile in{{0, 0, 0}, {}};
    REQUIRE_THROWS_AS(evaluate_wiring(a, w, dt, in), Error);
}

TEST_CASE("width-8 wiring: ILP, evaluator and sampling agree") {
    auto plans = plan_compressors(generate_and_array(8));
    StageSolveResult stage = solve_stage_assignment(plans);
    DelayTable dt;
    ArrivalProfile in = zero_arrivals(stage.assignment);

    ilp::SolveOptions so;
    so.node_budget = 200000;
    WireSolveResult ws = solve_wiring(stage.assignment, dt, in, so);
    REQUIRE(ws.wiring.source == "ilp");
    double fwd = evaluate_wiring(stage.assignment, ws.wiring, dt, in).max_delay;
    REQUIRE(std::fabs(fwd - ws.wiring.objective) <= 1e-6);

    WiringDistribution dist = sample_random_wirings(stage.assignment, dt, 2000, 11, in);
    REQUIRE(dist.max > dist.min); // interconnect order matters
    REQUIRE(ws.wiring.objective <= dist.min + 1e-9);

    // greedy never beats the ILP result
    WiringPlan greedy = greedy_wiring(stage.assignment, dt, in);
    REQUIRE(ws.wiring.objective <= greedy.objective + 1e-9);
}

TEST_CASE("big-M linearization binds exactly on the chosen arcs") {
    auto plans = plan_compressors(generate_and_array(4));
    StageSolveResult stage = solve_stage_assignment(plans);
    DelayTable dt;
    ArrivalProfile in = zero_arrivals(stage.assignment);
    // non-uniform arrivals so stage-1 slices stay modeled
    for (auto& col : in)
        for (size_t b = 0; b < col.size(); ++b)
            col[b] = double(b) * 0.25;
    WireModel wm = build_wiring_model(stage.assignment, dt, in);
    ilp::Solution sol = ilp::solve(wm.model);
    REQUIRE(sol.status == ilp::Status::Optimal);
    int checked = 0;
    for (const auto& row : wm.slices)
        for (const auto& sv : row) {
            if (!sv.modeled)
                continue;
            for (int u = 0; u < sv.shape.m; ++u)
                for (int v = 0; v < sv.shape.m; ++v) {
                    if (sol.value(sv.z[size_t(u) * size_t(sv.shape.m) + size_t(v)]) < 0.5)
                        continue;
                    double src = sv.sources[size_t(u)].is_const()
                                     ? sv.sources[size_t(u)].constant
                                     : sol.value(sv.sources[size_t(u)].var);
                    double port = sv.ports[size_t(v)].is_const()
                                      ? sv.ports[size_t(v)].constant
                                      : sol.value(sv.ports[size_t(v)].var);
                    REQUIRE(std::fabs(src - port) <= 1e-6);
                    ++checked;
                }
        }
    REQUIRE(checked > 0);
}

TEST_CASE("sampling is reproducible and summary stats are consistent") {
    auto plans = plan_compressors(generate_and_array(6));
    StageAssignment a = greedy_assignment(plans);
    DelayTable dt;
    ArrivalProfile in = zero_arrivals(a);
    WiringDistribution d1 = sample_random_wirings(a, dt, 500, 99, in);
    WiringDistribution d2 = sample_random_wirings(a, dt, 500, 99, in);
    REQUIRE(d1.delays == d2.delays);
    WiringDistribution d3 = sample_random_wirings(a, dt, 500, 100, in);
    REQUIRE(d1.delays != d3.delays);
    REQUIRE(d1.min <= d1.mean);
    REQUIRE(d1.mean <= d1.max);
    REQUIRE(d1.spread_pct == Catch::Approx((d1.max - d1.min) / d1.min * 100.0));
}

TEST_CASE("a slice with more compressor ports than bits is a construction error") {
    StageAssignment bad = single_fa_assignment();
    bad.pp[0][0] = 2; // one 3:2 wants 3 ports
    DelayTable dt;
    ArrivalProfile in{{0, 0}, {}};
    REQUIRE_THROWS_WITH(build_wiring_model(bad, dt, in),
                        Catch::Matchers::ContainsSubstring("cardinality"));
}

TEST_CASE("evaluator and netlist agree on random trees and wirings") {
    // the three consumers of the slice source convention (model builder,
    // forward evaluator, netlist elaboration) must never drift apart
    Rng rng(2718);
    for (int trial = 0; trial < 40; ++trial) {
        int cols = 2 + int(rng.below(5));
        std::vector<int> heights;
        PartialProductMatrix ppm;
        ppm.width = cols;
        for (int j = 0; j < cols; ++j) {
            int h = 1 + int(rng.below(6));
            heights.push_back(h);
            std::vector<BitRef> col;
            for (int b = 0; b < h; ++b)
                col.push_back({cat("in_", j, "_", b), j});
            ppm.columns.push_back(col);
        }
        auto plans = plan_compressors(heights);
        while (int(ppm.columns.size()) < int(plans.size()))
            ppm.columns.push_back({});
        StageAssignment a = greedy_assignment(plans);
        DelayTable dt;
        ArrivalProfile in = zero_arrivals(a);
        for (auto& col : in)
            for (double& v : col)
                v = double(rng.below(8)) * 0.5;
        WiringPlan w = random_wiring(a, rng);
        double model_delay = evaluate_wiring(a, w, dt, in).max_delay;

        GateNetlist nl = elaborate_ct_only(ppm, a, w);
        // netlist report assumes inputs at t=0; fold arrivals in by checking
        // only the zero-arrival case at netlist level
        bool zero = true;
        for (const auto& col : in)
            for (double v : col)
                zero &= v == 0.0;
        if (zero) {
            REQUIRE(std::fabs(report(nl).critical_path - model_delay) <= 1e-6);
        } else {
            // arrival-aware cross-check via the wiring model decode instead
            WireModel wm = build_wiring_model(a, dt, in);
            hint_from_wiring(wm, a, w);
            ilp::SolveOptions so;
            so.node_budget = 2000;
            ilp::Solution sol = ilp::solve(wm.model, so);
            if (sol.usable()) {
                WiringPlan best = decode_wiring(wm, a, sol);
                double fwd = evaluate_wiring(a, best, dt, in).max_delay;
                REQUIRE(std::fabs(fwd - sol.value(wm.m_id)) <= 1e-6);
                REQUIRE(sol.value(wm.m_id) <= model_delay + 1e-9);
            }
        }
    }
}

TEST_CASE("a single-source slice is forced to the identity") {
    auto plans = plan_compressors(std::vector<int>{3});
    StageAssignment a = greedy_assignment(plans); // one 2:2 in column 0
    DelayTable dt;
    ArrivalProfile in{{0.0, 0.5, 1.0}, {}};
    WireModel wm = build_wiring_model(a, dt, in);
    // column 1 holds a lone passthrough in stage 1; it must not be modeled
    REQUIRE_FALSE(wm.slices[0][1].modeled);
    REQUIRE(wm.slices[0][0].modeled);
}
