#include <catch2/catch_amalgamated.hpp>

#include <fstream>

#include "dpgen/config.hpp"
#include "dpgen/flow.hpp"
#include "dpgen/verify.hpp"

using namespace dpgen;

TEST_CASE("multiplier pipeline end to end") {
    for (auto strat : {Strategy::Area, Strategy::Timing, Strategy::Tradeoff}) {
        GenOptions o;
        o.width = 4;
        o.strategy = strat;
        GenResult r = generate(o);
        auto eq = verify::check_equivalence(r.netlist, verify::SpecKind::Mult, true);
        INFO(strategy_name(strat));
        REQUIRE(eq.pass);
        REQUIRE(r.netlist.name == "mult4");
    }
}

TEST_CASE("fused mac pipeline defaults the accumulator to 2N") {
    GenOptions o;
    o.width = 4;
    o.fused = true;
    GenResult r = generate(o);
    REQUIRE(r.ppm.acc_width == 8);
    REQUIRE(r.netlist.name == "mac4x8");
    auto eq = verify::check_equivalence(r.netlist, verify::SpecKind::Mac, true);
    REQUIRE(eq.pass);
    // MAC output is 2N+1 bits wide
    REQUIRE(r.netlist.outputs[0].nets.size() == 9);
}

TEST_CASE("adder pipeline with a supplied profile") {
    AdderOptions o;
    o.width = 10;
    o.profile.assign(10, 0.0);
    for (int i = 0; i < 10; ++i)
        o.profile[size_t(i)] = double(std::min(i, 9 - i));
    AdderResult r = generate_adder(o);
    REQUIRE(r.netlist.name == "adder10");
    auto eq = verify::check_equivalence(r.netlist, verify::SpecKind::Add, true);
    REQUIRE(eq.pass);
    REQUIRE(r.graph.width == 10);
}

TEST_CASE("same options give byte-identical artifacts") {
    GenOptions o;
    o.width = 6;
    o.seed = 42;
    GenResult r1 = generate(o);
    GenResult r2 = generate(o);
    REQUIRE(emit_verilog(r1.netlist) == emit_verilog(r2.netlist));
    REQUIRE(bundle_to_json(r1, o).dump() == bundle_to_json(r2, o).dump());
    REQUIRE(report_to_json(r1, o).dump() == report_to_json(r2, o).dump());
}

TEST_CASE("bundle serialization round trips") {
    GenOptions o;
    o.width = 4;
    GenResult r = generate(o);
    nlohmann::ordered_json j = bundle_to_json(r, o);
    nlohmann::json parsed = nlohmann::json::parse(j.dump());
    StageAssignment a = assignment_from_json(parsed.at("assignment"));
    REQUIRE(a.stage_count == r.stage.assignment.stage_count);
    REQUIRE(a.pp == r.stage.assignment.pp);
    WiringPlan w = wiring_from_json(parsed.at("wiring"));
    REQUIRE(w.perm == r.wire.wiring.perm);
    PrefixGraph g = prefix_from_json(parsed.at("cpa"));
    REQUIRE(g.width == r.cpa.width);
    // evaluator reproduces the recorded CT delay from the bundle alone
    DelayTable dt;
    WiringEval ev = evaluate_wiring(a, w, dt, zero_arrivals(a));
    REQUIRE(ev.max_delay == Catch::Approx(r.ct_eval.max_delay));
}

TEST_CASE("prefix graph dot export names live nodes") {
    PrefixGraph g = build_sklansky(4);
    std::string dot = prefix_to_dot(g);
    REQUIRE(dot.find("digraph") != std::string::npos);
    REQUIRE(dot.find("[3:0]") != std::string::npos);
}

TEST_CASE("distribution exports") {
    auto plans = plan_compressors(generate_and_array(4));
    StageAssignment a = greedy_assignment(plans);
    DelayTable dt;
    WiringDistribution d = sample_random_wirings(a, dt, 50, 3, zero_arrivals(a));
    std::string csv = distribution_to_csv(d);
    REQUIRE(csv.rfind("trial,delay\n", 0) == 0);
    REQUIRE(std::count(csv.begin(), csv.end(), '\n') == 51);
    std::string svg = distribution_to_svg(d);
    REQUIRE(svg.find("<svg") != std::string::npos);
    REQUIRE(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("config file feeds the tables and flags override") {
    std::string path = "flow_test_config.tmp";
    {
        std::ofstream f(path);
        f << "# test config\n";
        f << "delay.fa_cs = 1.25\n";
        f << "fdc.k2 = 2.0\n";
        f << "area.xor = 1.5\n";
        f << "gate_delay.load_coef = 0.1\n";
        f << "solver_path = \"/opt/solver\"\n";
    }
    Config cfg = Config::from_file(path);
    DelayTable dt;
    cfg.apply(dt);
    REQUIRE(dt.fa_cs == Catch::Approx(1.25));
    REQUIRE(dt.fa_as == Catch::Approx(3.0)); // untouched default
    FdcModel m;
    cfg.apply(m);
    REQUIRE(m.k2 == Catch::Approx(2.0));
    AreaWeights w;
    cfg.apply(w);
    REQUIRE(w.xor_w == Catch::Approx(1.5));
    GateTiming t;
    cfg.apply(t);
    REQUIRE(t.load_coef == Catch::Approx(0.1));
    REQUIRE(cfg.solver_path() == "/opt/solver");
    REQUIRE_THROWS_AS(Config::from_file("no_such_config_file"), Error);
    std::remove(path.c_str());
}

TEST_CASE("fdc fitting flow beats depth-only on the generated corpus") {
    FitFlowResult r = fit_timing_flow(11, 24, 0.8);
    REQUIRE(r.samples == 24);
    REQUIRE(r.fdc_stats.r2 > r.depth_stats.r2);
}

TEST_CASE("strategy targets order the CPA structures") {
    GenOptions area;
    area.width = 8;
    area.strategy = Strategy::Area;
    area.time_limit_s = 2;
    GenOptions timing = area;
    timing.strategy = Strategy::Timing;
    GenResult ra = generate(area);
    GenResult rt = generate(timing);
    // timing never ends deeper, area never ends with more prefix nodes
    REQUIRE(analyze(rt.cpa).max_depth <= analyze(ra.cpa).max_depth);
    REQUIRE(analyze(ra.cpa).live_nodes <= analyze(rt.cpa).live_nodes);
    REQUIRE(rt.target_delay <= ra.target_delay);
}
