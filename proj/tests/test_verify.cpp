#include <catch2/catch_amalgamated.hpp>

#include "dpgen/flow.hpp"
#include "dpgen/verify.hpp"

using namespace dpgen;
using namespace dpgen::verify;

TEST_CASE("simulate primitive cases") {
    GateNetlist nl;
    nl.name = "t";
    std::vector<int> a = nl.add_input("a", 1).nets;
    std::vector<int> b = nl.add_input("b", 1).nets;
    int y = nl.add_gate(GateKind::And, "y", {a[0], b[0]});
    nl.add_output("p", {y});
    auto out = simulate(nl, {{"a", 1}, {"b", 1}});
    REQUIRE(uint64_t(out["p"]) == 1);
    out = simulate(nl, {{"a", 1}, {"b", 0}});
    REQUIRE(uint64_t(out["p"]) == 0);
    REQUIRE_THROWS_WITH(simulate(nl, {{"a", 1}}), Catch::Matchers::ContainsSubstring("unassigned"));
}

TEST_CASE("simulate generated designs against integer cases") {
    GenOptions o;
    o.width = 4;
    GenResult mult = generate(o);
    auto out = simulate(mult.netlist, {{"a", 7}, {"b", 9}});
    REQUIRE(uint64_t(out["p"]) == 63);

    o.width = 8;
    o.fused = true;
    o.time_limit_s = 2;
    GenResult mac = generate(o);
    auto mo = simulate(mac.netlist, {{"a", 255}, {"b", 255}, {"c", 65535}});
    REQUIRE(uint64_t(mo["p"]) == 255 * 255 + 65535);
}

TEST_CASE("two evaluation orders agree") {
    GenOptions o;
    o.width = 6;
    GenResult r = generate(o);
    EquivalenceOptions eo;
    eo.random_vectors = 1000;
    eo.cross_check_orders = true;
    auto rep = check_equivalence(r.netlist, SpecKind::Mult, false, eo);
    REQUIRE(rep.pass);
}

TEST_CASE("exhaustive equivalence for an 8-bit multiplier") {
    GenOptions o;
    o.width = 8;
    o.time_limit_s = 2;
    GenResult r = generate(o);
    auto rep = check_equivalence(r.netlist, SpecKind::Mult, true);
    REQUIRE(rep.pass);
    REQUIRE(rep.vectors == 65536);
}

TEST_CASE("mutated netlists fail with a counterexample") {
    GenOptions o;
    o.width = 4;
    GenResult r = generate(o);
    // flip one XOR to XNOR
    for (Gate& g : r.netlist.gates)
        if (g.kind == GateKind::Xor) {
            g.kind = GateKind::Xnor;
            break;
        }
    auto rep = check_equivalence(r.netlist, SpecKind::Mult, true);
    REQUIRE_FALSE(rep.pass);
    REQUIRE_FALSE(rep.counterexample.empty());
    auto cx = nlohmann::json::parse(rep.counterexample);
    REQUIRE(cx.contains("a"));
    REQUIRE(cx.contains("expected_lo"));
}

TEST_CASE("exhaustive mode is capped at 20 input bits") {
    GenOptions o;
    o.width = 16;
    o.solver = SolverChoice::Greedy;
    GenResult r = generate(o);
    REQUIRE_THROWS_WITH(check_equivalence(r.netlist, SpecKind::Mult, true),
                        Catch::Matchers::ContainsSubstring("20"));
}

TEST_CASE("brute force compressor optimality on the worked instances") {
    auto b3 = brute_force_ct({3});
    REQUIRE(b3.min_area == 2); // one 2:2
    REQUIRE(b3.min_column_count[0] == 1);

    auto b4 = brute_force_ct({4});
    REQUIRE(b4.min_area == 3); // one 3:2
    REQUIRE(b4.min_column_count[0] == 1);

    auto b51 = brute_force_ct({5, 1});
    auto plan = plan_compressors(std::vector<int>{5, 1});
    REQUIRE(b51.min_area == plan_area(plan));
    for (size_t j = 0; j < plan.size(); ++j)
        REQUIRE(b51.min_column_count[j] == plan[j].f + plan[j].h);
}

TEST_CASE("brute force refuses oversized instances") {
    REQUIRE_THROWS_AS(brute_force_ct({7}), Error);
    REQUIRE_THROWS_AS(brute_force_ct({2, 2, 2, 2, 2}), Error);
}

TEST_CASE("planner is never beaten on enumerable instances") {
    // all height vectors with <= 3 columns and <= 5 bits here; the acceptance
    // suite covers the full <= 4 x <= 6 space
    for (int c0 = 0; c0 <= 5; ++c0)
        for (int c1 = 0; c0 + c1 <= 5; ++c1)
            for (int c2 = 0; c0 + c1 + c2 <= 5; ++c2) {
                std::vector<int> h{c0, c1, c2};
                if (c0 + c1 + c2 == 0)
                    continue;
                auto brute = brute_force_ct(h);
                auto plan = plan_compressors(h);
                INFO("heights " << c0 << "," << c1 << "," << c2);
                REQUIRE(brute.min_area == plan_area(plan));
                for (size_t j = 0; j < plan.size(); ++j)
                    REQUIRE(brute.min_column_count[j] == plan[j].f + plan[j].h);
            }
}
