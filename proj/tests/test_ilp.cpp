#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "dpgen/ct_assign.hpp"
#include "dpgen/ilp.hpp"
#include "dpgen/ppg.hpp"

using namespace dpgen;
using namespace dpgen::ilp;

TEST_CASE("model building basics") {
    Model m;
    int y = m.add_binary("y");
    m.add_constraint("c0", {{y, 1}}, Sense::LE, 1);
    REQUIRE(m.vars.size() == 1);
    REQUIRE(m.constraints.size() == 1);
    REQUIRE_THROWS_AS(m.add_binary("y"), Error);
    REQUIRE_THROWS_AS(m.var("nope"), Error);
}

TEST_CASE("empty objective solves to zero") {
    Model m;
    m.add_integer("x", 0, 3);
    Solution s = solve(m);
    REQUIRE(s.status == Status::Optimal);
    REQUIRE(s.objective == 0.0);
}

TEST_CASE("bound contradiction is infeasible") {
    Model m;
    int x = m.add_integer("x", 0, 0);
    m.add_constraint("c", {{x, 1}}, Sense::GE, 1);
    Solution s = solve(m);
    REQUIRE(s.status == Status::Infeasible);
}

TEST_CASE("two-variable covering model") {
    Model m;
    int x = m.add_integer("x", 0, 5);
    int y = m.add_integer("y", 0, 5);
    m.add_constraint("c", {{x, 1}, {y, 1}}, Sense::GE, 3);
    m.set_objective(ObjSense::Minimize, {{x, 1}, {y, 1}});
    Solution s = solve(m);
    REQUIRE(s.status == Status::Optimal);
    REQUIRE(s.objective == Catch::Approx(3.0));
}

TEST_CASE("maximization is the mirrored minimization") {
    Model m;
    int x = m.add_integer("x", 0, 7);
    int y = m.add_integer("y", 0, 7);
    m.add_constraint("c", {{x, 2}, {y, 3}}, Sense::LE, 12);
    m.set_objective(ObjSense::Maximize, {{x, 1}, {y, 2}});
    Solution s = solve(m);
    REQUIRE(s.status == Status::Optimal);
    REQUIRE(s.objective == Catch::Approx(8.0)); // x=0, y=4
    REQUIRE(2 * s.value(x) + 3 * s.value(y) <= 12 + 1e-9);
}

TEST_CASE("3x3 assignment polytope equals the permutation minimum") {
    Rng rng(7);
    for (int trial = 0; trial < 5; ++trial) {
        double cost[3][3];
        for (auto& row : cost)
            for (double& c : row)
                c = double(rng.below(100));
        Model m;
        int z[3][3];
        LinExpr obj;
        for (int u = 0; u < 3; ++u)
            for (int v = 0; v < 3; ++v) {
                z[u][v] = m.add_binary(cat("z", u, v));
                obj.push_back({z[u][v], cost[u][v]});
            }
        for (int u = 0; u < 3; ++u) {
            LinExpr row, col;
            for (int v = 0; v < 3; ++v) {
                row.push_back({z[u][v], 1});
                col.push_back({z[v][u], 1});
            }
            m.add_constraint(cat("r", u), row, Sense::EQ, 1);
            m.add_constraint(cat("c", u), col, Sense::EQ, 1);
        }
        m.set_objective(ObjSense::Minimize, obj);
        Solution s = solve(m);
        REQUIRE(s.status == Status::Optimal);
        int perm[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
        double best = 1e18;
        for (auto& p : perm)
            best = std::min(best, cost[0][p[0]] + cost[1][p[1]] + cost[2][p[2]]);
        REQUIRE(s.objective == Catch::Approx(best));
    }
}

TEST_CASE("internal solver matches exhaustive enumeration on random binary models") {
    Rng rng(123);
    for (int trial = 0; trial < 30; ++trial) {
        int nvars = 4 + int(rng.below(9)); // 4..12 binaries
        Model m;
        for (int v = 0; v < nvars; ++v)
            m.add_binary(cat("b", v));
        int ncons = 2 + int(rng.below(5));
        for (int c = 0; c < ncons; ++c) {
            LinExpr e;
            for (int v = 0; v < nvars; ++v)
                if (rng.below(2))
                    e.push_back({v, double(int(rng.below(7)) - 3)});
            if (e.empty())
                e.push_back({0, 1.0});
            Sense s = rng.below(3) == 0 ? Sense::LE : rng.below(2) ? Sense::GE : Sense::EQ;
            double rhs = double(int(rng.below(7)) - 2);
            m.add_constraint(cat("c", c), e, s, rhs);
        }
        LinExpr obj;
        for (int v = 0; v < nvars; ++v)
            obj.push_back({v, double(int(rng.below(11)) - 5)});
        m.set_objective(ObjSense::Minimize, obj);

        Solution got = solve(m);
        // exhaustive reference
        bool any = false;
        double best = 1e18;
        for (uint32_t mask = 0; mask < (1u << nvars); ++mask) {
            std::vector<double> x(size_t(nvars), 0.0);
            for (int v = 0; v < nvars; ++v)
                x[size_t(v)] = (mask >> v) & 1;
            if (m.violation(x) <= 1e-9) {
                any = true;
                best = std::min(best, m.eval(m.objective, x));
            }
        }
        if (!any) {
            REQUIRE(got.status == Status::Infeasible);
        } else {
            REQUIRE(got.status == Status::Optimal);
            REQUIRE(got.objective == Catch::Approx(best));
            REQUIRE(m.violation(got.values) <= 1e-6);
        }
    }
}

TEST_CASE("budget exhaustion returns the incumbent as feasible") {
    // equality knapsack with an all-zero hint: the incumbent arrives on the
    // first dive, the optimality proof needs far more than the budget
    Model m;
    Rng rng(4);
    LinExpr parity, obj;
    for (int v = 0; v < 26; ++v) {
        int b = m.add_binary(cat("b", v));
        m.set_hint(b, 0);
        parity.push_back({b, double(1 + int(rng.below(5)))});
        obj.push_back({b, -double(1 + int(rng.below(9)))});
    }
    m.add_constraint("cap", parity, Sense::LE, 40);
    m.set_objective(ObjSense::Minimize, obj);
    SolveOptions so;
    so.node_budget = 60;
    Solution s = solve(m, so);
    REQUIRE(s.status == Status::Feasible);
    REQUIRE(m.violation(s.values) <= 1e-6);

    // with no usable incumbent at all the status is timeout
    SolveOptions tiny;
    tiny.node_budget = 1;
    Model hard;
    LinExpr sum;
    for (int v = 0; v < 20; ++v)
        sum.push_back({hard.add_binary(cat("h", v)), 1.0});
    hard.add_constraint("pick", sum, Sense::EQ, 10);
    Solution t = solve(hard, tiny);
    REQUIRE(t.status == Status::Timeout);
}

TEST_CASE("LP emission has the format skeleton") {
    Model m;
    int x = m.add_continuous("x", 0, kInf);
    m.add_constraint("c0", {{x, 1}}, Sense::GE, 2);
    m.set_objective(ObjSense::Minimize, {{x, 1}});
    std::string lp = emit_lp(m);
    REQUIRE(lp.find("Minimize") != std::string::npos);
    REQUIRE(lp.find("Subject To") != std::string::npos);
    REQUIRE(lp.find("x >= 2") != std::string::npos);
    REQUIRE(lp.find("End") != std::string::npos);
}

TEST_CASE("LP round trip preserves the stage model") {
    auto plans = plan_compressors(generate_and_array(4));
    StageModel sm = build_stage_model(plans, 4);
    std::string lp = emit_lp(sm.model);
    Model back = parse_lp(lp);
    REQUIRE(back.vars.size() == sm.model.vars.size());
    REQUIRE(back.constraints.size() == sm.model.constraints.size());
    // kinds and bounds survive
    for (size_t i = 0; i < back.vars.size(); ++i) {
        const Var& a = sm.model.vars[sm.model.var(back.vars[i].name)];
        REQUIRE(back.vars[i].kind == a.kind);
        REQUIRE(back.vars[i].lb == Catch::Approx(a.lb));
        REQUIRE(back.vars[i].ub == Catch::Approx(a.ub));
    }
    // a second round trip is a fixed point
    REQUIRE(emit_lp(parse_lp(emit_lp(back))) == emit_lp(back));
    // solving the parsed model gives the same optimum
    Solution s1 = solve(sm.model);
    Solution s2 = solve(back);
    REQUIRE(s1.status == Status::Optimal);
    REQUIRE(s2.status == Status::Optimal);
    REQUIRE(s1.objective == Catch::Approx(s2.objective));
}

TEST_CASE("binaries land in the Binaries section") {
    Model m;
    m.add_binary("z_pick");
    m.add_integer("k", 0, 3);
    m.add_constraint("c", {{0, 1}, {1, 1}}, Sense::LE, 3);
    std::string lp = emit_lp(m);
    auto bpos = lp.find("Binaries");
    REQUIRE(bpos != std::string::npos);
    REQUIRE(lp.find("z_pick", bpos) != std::string::npos);
    REQUIRE(lp.find("Generals") != std::string::npos);
}

TEST_CASE("external solver protocol") {
    // fake solver script: parses nothing, emits a valid solution for
    // {min x : x >= 2, x in [0,5]}
    std::string dir = "ilp_test_tmp";
    (void)!std::system(("mkdir -p " + dir).c_str());
    std::string exe = dir + "/fake_solver.sh";
    {
        std::ofstream f(exe);
        f << "#!/bin/sh\necho optimal > \"$2\"\necho x 2 >> \"$2\"\n";
    }
    (void)!std::system(("chmod +x " + exe).c_str());

    Model m;
    int x = m.add_integer("x", 0, 5);
    m.add_constraint("c", {{x, 1}}, Sense::GE, 2);
    m.set_objective(ObjSense::Minimize, {{x, 1}});

    SolveOptions so;
    so.external_solver = exe;
    so.work_dir = dir;
    Solution s = solve(m, so);
    REQUIRE(s.status == Status::Optimal);
    REQUIRE(s.value(x) == Catch::Approx(2));

    SECTION("missing executable names the configuration key") {
        SolveOptions bad;
        bad.external_solver = dir + "/no_such_solver";
        REQUIRE_THROWS_WITH(solve(m, bad), Catch::Matchers::ContainsSubstring("DPGEN_SOLVER"));
    }
    SECTION("malformed output is diagnosed with the offending line") {
        std::string broken = dir + "/broken_solver.sh";
        {
            std::ofstream f(broken);
            f << "#!/bin/sh\necho gibberish > \"$2\"\n";
        }
        (void)!std::system(("chmod +x " + broken).c_str());
        SolveOptions so2;
        so2.external_solver = broken;
        so2.work_dir = dir;
        REQUIRE_THROWS_WITH(solve(m, so2), Catch::Matchers::ContainsSubstring("line 1"));
    }
    SECTION("solutions violating the model are rejected") {
        std::string lying = dir + "/lying_solver.sh";
        {
            std::ofstream f(lying);
            f << "#!/bin/sh\necho optimal > \"$2\"\necho x 0 >> \"$2\"\n";
        }
        (void)!std::system(("chmod +x " + lying).c_str());
        SolveOptions so3;
        so3.external_solver = lying;
        so3.work_dir = dir;
        REQUIRE_THROWS_WITH(solve(m, so3), Catch::Matchers::ContainsSubstring("violates"));
    }
}
