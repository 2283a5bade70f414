#pragma once

// Assigns the planned per-column compressor counts to stages. The ILP model
// minimizes the stage count S; a greedy earliest-stage-first assignment is
// both the warm start and the no-solver fallback.

#include <vector>

#include "dpgen/ct_plan.hpp"
#include "dpgen/ilp.hpp"

namespace dpgen {

// Stage grid of a compressor tree. Stages are numbered 1..stage_count in
// reports; row i of the grids below holds stage i+1. pp[i][j] is the number of
// bits present in column j just before stage i+1 fires; pp[stage_count] is the
// final two-row output.
struct StageAssignment {
    int stage_count = 0;
    int columns = 0;
    std::vector<std::vector<int>> f;  // [stage][column]
    std::vector<std::vector<int>> h;  // [stage][column]
    std::vector<std::vector<int>> pp; // [stage 0..stage_count][column]
    bool optimal = false;             // proven stage-minimal by the solver
    std::string source;               // "ilp" or "greedy"

    int final_bits(int j) const { return pp[size_t(stage_count)][size_t(j)]; }
};

namespace detail {

inline void validate_assignment(const StageAssignment& a, const std::vector<ColumnPlan>& plans) {
    int C = a.columns;
    require(int(plans.size()) == C, "assignment/plan column mismatch");
    for (int j = 0; j < C; ++j) {
        int sf = 0, sh = 0;
        for (int i = 0; i < a.stage_count; ++i) {
            sf += a.f[size_t(i)][size_t(j)];
            sh += a.h[size_t(i)][size_t(j)];
        }
        require(sf == plans[size_t(j)].f && sh == plans[size_t(j)].h,
                "assignment violates planned counts in column ", j);
        require(a.pp[0][size_t(j)] == plans[size_t(j)].pp,
                "assignment initial row mismatch in column ", j);
        for (int i = 0; i < a.stage_count; ++i) {
            int fij = a.f[size_t(i)][size_t(j)];
            int hij = a.h[size_t(i)][size_t(j)];
            int avail = a.pp[size_t(i)][size_t(j)];
            require(3 * fij + 2 * hij <= avail, "slice (", i + 1, ",", j,
                    ") places more compressor inputs than bits available");
            int carry = j > 0 ? a.f[size_t(i)][size_t(j - 1)] + a.h[size_t(i)][size_t(j - 1)] : 0;
            int next = avail - 2 * fij - hij + carry;
            require(next == a.pp[size_t(i + 1)][size_t(j)],
                    "assignment pp recurrence broken at slice (", i + 1, ",", j, ")");
        }
        require(a.final_bits(j) <= 2, "column ", j, " not reduced to two rows");
    }
}

} // namespace detail

// Earliest-stage-first placement honoring the planned counts. Deterministic;
// used as the solver warm start and as the fallback backend.
inline StageAssignment greedy_assignment(const std::vector<ColumnPlan>& plans) {
    int C = int(plans.size());
    std::vector<int> avail(size_t(C), 0), f_rem(size_t(C), 0), h_rem(size_t(C), 0);
    for (int j = 0; j < C; ++j) {
        avail[size_t(j)] = plans[size_t(j)].pp;
        f_rem[size_t(j)] = plans[size_t(j)].f;
        h_rem[size_t(j)] = plans[size_t(j)].h;
    }
    StageAssignment a;
    a.columns = C;
    a.source = "greedy";
    a.pp.push_back(avail);
    int guard = 0;
    while (true) {
        bool remaining = false;
        for (int j = 0; j < C; ++j)
            remaining |= (f_rem[size_t(j)] + h_rem[size_t(j)]) > 0;
        if (!remaining)
            break;
        require(++guard <= 256, "greedy_assignment stalled");
        std::vector<int> fs(size_t(C), 0), hs(size_t(C), 0), next(size_t(C), 0);
        bool placed = false;
        for (int j = 0; j < C; ++j) {
            int cap = avail[size_t(j)];
            int fu = std::min(f_rem[size_t(j)], cap / 3);
            int hu = (h_rem[size_t(j)] > 0 && cap - 3 * fu >= 2) ? 1 : 0;
            fs[size_t(j)] = fu;
            hs[size_t(j)] = hu;
            placed |= (fu + hu) > 0;
        }
        require(placed, "greedy_assignment made no progress");
        for (int j = 0; j < C; ++j) {
            int carry = j > 0 ? fs[size_t(j - 1)] + hs[size_t(j - 1)] : 0;
            next[size_t(j)] = avail[size_t(j)] - 2 * fs[size_t(j)] - hs[size_t(j)] + carry;
            f_rem[size_t(j)] -= fs[size_t(j)];
            h_rem[size_t(j)] -= hs[size_t(j)];
        }
        a.f.push_back(fs);
        a.h.push_back(hs);
        a.pp.push_back(next);
        avail = next;
        ++a.stage_count;
    }
    if (a.stage_count == 0) {
        // nothing to compress; single identity row
        a.pp.assign(1, avail);
    }
    detail::validate_assignment(a, plans);
    return a;
}

// Stage-assignment ILP instance plus the variable ids needed to decode it.
struct StageModel {
    ilp::Model model;
    std::vector<ColumnPlan> plans;
    int stage_max = 0;
    std::vector<std::vector<int>> f_id, h_id, y_id; // [stage 1..stage_max][col], -1 if absent
    std::vector<std::vector<int>> pp_id;            // [row 0..stage_max][col]
    int s_id = -1;
    std::string warning;
};

// Eqs.: per-column count sums, pp recurrence, slice capacity, y-indicator
// stage linking, min S. Boundary rows are pinned: pp row 0 = initial heights,
// final row = the planned residuals (both follow from the count sums).
inline StageModel build_stage_model(const std::vector<ColumnPlan>& plans, int stage_max) {
    int C = int(plans.size());
    int bound = min_stage_bound(std::max(1, max_column_total(plans)));
    StageModel sm;
    sm.plans = plans;
    sm.stage_max = stage_max;
    ilp::Model& m = sm.model;

    sm.f_id.assign(size_t(stage_max), std::vector<int>(size_t(C), -1));
    sm.h_id.assign(size_t(stage_max), std::vector<int>(size_t(C), -1));
    sm.y_id.assign(size_t(stage_max), std::vector<int>(size_t(C), -1));
    sm.pp_id.assign(size_t(stage_max) + 1, std::vector<int>(size_t(C), -1));

    for (int i = 1; i <= stage_max; ++i) {
        for (int j = 0; j < C; ++j) {
            const ColumnPlan& p = plans[size_t(j)];
            // branch column-major, early stages first, so that carries into a
            // column are pinned before the column itself is enumerated
            int prio = 1000000 - (j * 64 + i) * 4;
            if (p.f > 0) {
                int v = m.add_integer(cat("f_", i, "_", j), 0, p.f);
                m.set_priority(v, prio);
                m.set_prefer_high(v, true);
                sm.f_id[size_t(i - 1)][size_t(j)] = v;
            }
            if (p.h > 0) {
                int v = m.add_integer(cat("h_", i, "_", j), 0, p.h);
                m.set_priority(v, prio - 1);
                m.set_prefer_high(v, true);
                sm.h_id[size_t(i - 1)][size_t(j)] = v;
            }
            if (p.f + p.h > 0) {
                int v = m.add_binary(cat("y_", i, "_", j));
                m.set_priority(v, 5);
                sm.y_id[size_t(i - 1)][size_t(j)] = v;
            }
        }
    }
    for (int i = 0; i <= stage_max; ++i) {
        for (int j = 0; j < C; ++j) {
            const ColumnPlan& p = plans[size_t(j)];
            int t = p.total();
            double lb = 0, ub = t;
            if (i == 0)
                lb = ub = p.pp;
            if (i == stage_max)
                lb = ub = p.outputs; // all compressors fired by then
            int v = m.add_integer(cat("pp_", i, "_", j), lb, ub);
            m.set_priority(v, -10);
            sm.pp_id[size_t(i)][size_t(j)] = v;
        }
    }
    sm.s_id = m.add_integer("S", 0, stage_max);
    m.set_priority(sm.s_id, 10);

    for (int j = 0; j < C; ++j) {
        const ColumnPlan& p = plans[size_t(j)];
        if (p.f > 0) {
            ilp::LinExpr e;
            for (int i = 1; i <= stage_max; ++i)
                e.push_back({sm.f_id[size_t(i - 1)][size_t(j)], 1});
            m.add_constraint(cat("sumf_", j), e, ilp::Sense::EQ, p.f);
        }
        if (p.h > 0) {
            ilp::LinExpr e;
            for (int i = 1; i <= stage_max; ++i)
                e.push_back({sm.h_id[size_t(i - 1)][size_t(j)], 1});
            m.add_constraint(cat("sumh_", j), e, ilp::Sense::EQ, p.h);
        }
        for (int i = 1; i <= stage_max; ++i) {
            // pp_{i,j} - 2 f_{i,j} - h_{i,j} + carries(i, j-1) = pp_{i+1,j}
            ilp::LinExpr e;
            e.push_back({sm.pp_id[size_t(i - 1)][size_t(j)], 1});
            int f = sm.f_id[size_t(i - 1)][size_t(j)];
            int h = sm.h_id[size_t(i - 1)][size_t(j)];
            if (f >= 0)
                e.push_back({f, -2});
            if (h >= 0)
                e.push_back({h, -1});
            if (j > 0) {
                int fl = sm.f_id[size_t(i - 1)][size_t(j - 1)];
                int hl = sm.h_id[size_t(i - 1)][size_t(j - 1)];
                if (fl >= 0)
                    e.push_back({fl, 1});
                if (hl >= 0)
                    e.push_back({hl, 1});
            }
            e.push_back({sm.pp_id[size_t(i)][size_t(j)], -1});
            m.add_constraint(cat("rec_", i, "_", j), e, ilp::Sense::EQ, 0);
            // 3 f + 2 h <= pp available in the slice
            if (f >= 0 || h >= 0) {
                ilp::LinExpr cap;
                if (f >= 0)
                    cap.push_back({f, 3});
                if (h >= 0)
                    cap.push_back({h, 2});
                cap.push_back({sm.pp_id[size_t(i - 1)][size_t(j)], -1});
                m.add_constraint(cat("cap_", i, "_", j), cap, ilp::Sense::LE, 0);
                // slice indicator: f + h <= M_j * y, M_j = F_j + H_j (tight);
                // y <= f + h makes it exact, pruning idle-slice symmetry
                int y = sm.y_id[size_t(i - 1)][size_t(j)];
                ilp::LinExpr ind;
                if (f >= 0)
                    ind.push_back({f, 1});
                if (h >= 0)
                    ind.push_back({h, 1});
                ilp::LinExpr ind_rev;
                ind_rev.push_back({y, 1.0});
                for (const auto& t : ind)
                    ind_rev.push_back({t.var, -1.0});
                ind.push_back({y, double(-(p.f + p.h))});
                m.add_constraint(cat("ind_", i, "_", j), ind, ilp::Sense::LE, 0);
                m.add_constraint(cat("ind2_", i, "_", j), ind_rev, ilp::Sense::LE, 0);
                // S >= i * y
                m.add_constraint(cat("stg_", i, "_", j),
                                 {{y, double(i)}, {sm.s_id, -1}}, ilp::Sense::LE, 0);
            }
        }
    }
    m.set_objective(ilp::ObjSense::Minimize, {{sm.s_id, 1}});
    if (stage_max < bound)
        sm.warning = cat("stage_max ", stage_max, " is below the stage floor ", bound,
                         "; the model is likely infeasible");
    return sm;
}

inline void hint_from_assignment(StageModel& sm, const StageAssignment& a) {
    ilp::Model& m = sm.model;
    for (int i = 0; i < sm.stage_max; ++i) {
        for (int j = 0; j < a.columns; ++j) {
            int fv = sm.f_id[size_t(i)][size_t(j)];
            int hv = sm.h_id[size_t(i)][size_t(j)];
            int yv = sm.y_id[size_t(i)][size_t(j)];
            int fval = i < a.stage_count ? a.f[size_t(i)][size_t(j)] : 0;
            int hval = i < a.stage_count ? a.h[size_t(i)][size_t(j)] : 0;
            if (fv >= 0)
                m.set_hint(fv, fval);
            if (hv >= 0)
                m.set_hint(hv, hval);
            if (yv >= 0)
                m.set_hint(yv, fval + hval > 0 ? 1 : 0);
        }
    }
    for (int i = 0; i <= sm.stage_max; ++i)
        for (int j = 0; j < a.columns; ++j) {
            int row = std::min(i, a.stage_count);
            m.set_hint(sm.pp_id[size_t(i)][size_t(j)], a.pp[size_t(row)][size_t(j)]);
        }
    m.set_hint(sm.s_id, a.stage_count);
}

inline StageAssignment extract_assignment(const StageModel& sm, const ilp::Solution& sol) {
    require(sol.usable(), "extract_assignment: solution status is ", ilp::status_name(sol.status));
    int C = int(sm.plans.size());
    int active = 0;
    for (int i = 1; i <= sm.stage_max; ++i)
        for (int j = 0; j < C; ++j) {
            int f = sm.f_id[size_t(i - 1)][size_t(j)];
            int h = sm.h_id[size_t(i - 1)][size_t(j)];
            double used = (f >= 0 ? sol.value(f) : 0) + (h >= 0 ? sol.value(h) : 0);
            if (used > 0.5)
                active = std::max(active, i);
        }
    StageAssignment a;
    a.columns = C;
    a.stage_count = active;
    a.source = "ilp";
    a.optimal = sol.status == ilp::Status::Optimal;
    for (int i = 0; i < active; ++i) {
        std::vector<int> fs(size_t(C), 0), hs(size_t(C), 0);
        for (int j = 0; j < C; ++j) {
            int f = sm.f_id[size_t(i)][size_t(j)];
            int h = sm.h_id[size_t(i)][size_t(j)];
            fs[size_t(j)] = f >= 0 ? int(std::lround(sol.value(f))) : 0;
            hs[size_t(j)] = h >= 0 ? int(std::lround(sol.value(h))) : 0;
        }
        a.f.push_back(fs);
        a.h.push_back(hs);
    }
    // recompute pp rows from the decoded grid rather than trusting the solver
    std::vector<int> row(size_t(C), 0);
    for (int j = 0; j < C; ++j)
        row[size_t(j)] = sm.plans[size_t(j)].pp;
    a.pp.push_back(row);
    for (int i = 0; i < active; ++i) {
        std::vector<int> next(size_t(C), 0);
        for (int j = 0; j < C; ++j) {
            int carry = j > 0 ? a.f[size_t(i)][size_t(j - 1)] + a.h[size_t(i)][size_t(j - 1)] : 0;
            next[size_t(j)] =
                row[size_t(j)] - 2 * a.f[size_t(i)][size_t(j)] - a.h[size_t(i)][size_t(j)] + carry;
        }
        a.pp.push_back(next);
        row = next;
    }
    detail::validate_assignment(a, sm.plans);
    return a;
}

struct StageSolveResult {
    StageAssignment assignment;
    ilp::Status status = ilp::Status::Optimal;
    int solved_s = 0;
    uint64_t nodes = 0;
};

// Full flow: greedy warm start, ILP solve, validated decode. stage_max <= 0
// selects min_stage_bound + 2.
inline StageSolveResult solve_stage_assignment(const std::vector<ColumnPlan>& plans,
                                               const ilp::SolveOptions& opts = {},
                                               int stage_max = 0) {
    int bound = min_stage_bound(std::max(1, max_column_total(plans)));
    StageAssignment greedy = greedy_assignment(plans);
    if (stage_max <= 0)
        stage_max = std::max(greedy.stage_count, bound + 2);
    StageModel sm = build_stage_model(plans, stage_max);
    hint_from_assignment(sm, greedy);
    ilp::Solution sol = ilp::solve(sm.model, opts);
    StageSolveResult r;
    r.status = sol.status;
    r.nodes = sol.nodes_explored;
    if (sol.usable()) {
        r.assignment = extract_assignment(sm, sol);
        r.solved_s = int(std::lround(sol.value(sm.s_id)));
    } else {
        r.assignment = greedy;
        r.solved_s = greedy.stage_count;
    }
    return r;
}

} // namespace dpgen
