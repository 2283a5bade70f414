#include <catch2/catch_amalgamated.hpp>

#include "dpgen/ct_plan.hpp"
#include "dpgen/ppg.hpp"

using namespace dpgen;

TEST_CASE("single column branches of the planning rule") {
    // t = 4: even branch
    auto p4 = plan_compressors(std::vector<int>{4});
    REQUIRE(p4[0].f == 1);
    REQUIRE(p4[0].h == 0);
    REQUIRE(p4[0].outputs == 2);
    REQUIRE(p4[0].carry_out == 1);

    // t = 3: parity fix with a single 2:2
    auto p3 = plan_compressors(std::vector<int>{3});
    REQUIRE(p3[0].f == 0);
    REQUIRE(p3[0].h == 1);
    REQUIRE(p3[0].outputs == 2);
    REQUIRE(p3[0].carry_out == 1);

    // t = 2: already two rows
    auto p2 = plan_compressors(std::vector<int>{2});
    REQUIRE(p2[0].f == 0);
    REQUIRE(p2[0].h == 0);
    REQUIRE(p2[0].outputs == 2);
    REQUIRE(p2[0].carry_out == 0);
}

TEST_CASE("carries ripple LSB to MSB and extend past the last column") {
    auto plans = plan_compressors(std::vector<int>{6});
    // 6 -> f=2, two carries into a fresh column, which needs no compressor
    REQUIRE(plans.size() == 2);
    REQUIRE(plans[0].f == 2);
    REQUIRE(plans[1].pp == 0);
    REQUIRE(plans[1].carry_in == 2);
    REQUIRE(plans[1].outputs == 2);
    for (const auto& p : plans)
        REQUIRE(p.outputs <= 2);
}

TEST_CASE("8-bit multiplier plan matches the counting oracle") {
    auto ppm = generate_and_array(8);
    auto plans = plan_compressors(ppm);
    // classic counts for the 8x8 AND array
    REQUIRE(total_f(plans) == 35);
    REQUIRE(total_h(plans) == 7);
    REQUIRE(plan_area(plans) == 3 * 35 + 2 * 7);
    // h is 0/1 everywhere, driven by the parity chain
    for (const auto& p : plans) {
        REQUIRE((p.h == 0 || p.h == 1));
        REQUIRE(p.carry_out == p.f + p.h);
    }
}

TEST_CASE("conservation per column") {
    for (int n : {3, 5, 8, 11}) {
        auto plans = plan_compressors(generate_and_array(n));
        for (const auto& p : plans) {
            int t = p.pp + p.carry_in;
            REQUIRE(p.outputs == t - 2 * p.f - p.h);
            if (t >= 1)
                REQUIRE((p.outputs == 1 || p.outputs == 2));
            else
                REQUIRE(p.outputs == 0);
        }
    }
}

TEST_CASE("minimum stage bound") {
    REQUIRE(min_stage_bound(2) == 0);
    REQUIRE(min_stage_bound(3) == 1); // log1.5(1.5) = 1
    REQUIRE(min_stage_bound(4) == 2);
    REQUIRE(min_stage_bound(8) == 4); // 1.5^4 = 5.06 >= 4 > 1.5^3 = 3.375
    REQUIRE(min_stage_bound(16) == 6);
    REQUIRE(min_stage_bound(1) == 0);
    REQUIRE_THROWS_AS(min_stage_bound(0), Error);
}

TEST_CASE("plan area unit cases") {
    std::vector<ColumnPlan> one(1);
    one[0].f = 1;
    REQUIRE(plan_area(one) == 3);
    one[0].f = 0;
    one[0].h = 1;
    REQUIRE(plan_area(one) == 2);
}

TEST_CASE("fused matrix plans stay legal") {
    auto ppm = inject_accumulator(generate_and_array(8), 16);
    auto plans = plan_compressors(ppm);
    REQUIRE(total_f(plans) == 48); // 80 bits collapse to 32
    int final_bits = 0;
    for (const auto& p : plans)
        final_bits += p.outputs;
    REQUIRE(final_bits == ppm.total_bits() - total_f(plans));
}
