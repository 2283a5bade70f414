#pragma once

// Interconnection-order optimization inside the compressor tree. Each slice
// (stage, column) receives a source vector of bits and maps it bijectively
// onto compressor input ports plus passthrough dummy ports; the mapping is
// optimized by one monolithic ILP per design, evaluated independently by
// forward propagation, and sampled by a seeded Monte-Carlo baseline.
//
// Source vector convention for slice (i+1, j), fixed and relied on by the
// model builder, the evaluator and netlist elaboration alike:
//   [ sums of slice (i,j): 3:2 sums in compressor order, then 2:2 sums ]
//   [ passthroughs of slice (i,j) in dummy-port order ]
//   [ carries of slice (i,j-1): 3:2 carries, then 2:2 carries ]
// Stage-1 sources are the initial column bits in matrix order.

#include <algorithm>
#include <vector>

#include "dpgen/ct_assign.hpp"
#include "dpgen/ilp.hpp"

namespace dpgen {

// Port-to-output delays of the compressor cells, normalized gate units:
// XOR 1.5, NAND/OAI/INV/AND 1.0. The a/b-to-sum path is two XORs, 1.5x the
// NAND+OAI carry chain.
struct DelayTable {
    double fa_as = 3.0, fa_bs = 3.0, fa_cs = 1.5; // 3:2 to sum
    double fa_ac = 2.5, fa_bc = 2.5, fa_cc = 2.0; // 3:2 to carry
    double ha_s = 1.5, ha_c = 1.0;                // 2:2

    double max_entry() const {
        return std::max({fa_as, fa_bs, fa_cs, fa_ac, fa_bc, fa_cc, ha_s, ha_c});
    }
};

struct SliceShape {
    int m = 0;  // bits present = sources = sinks
    int fa = 0; // 3:2 compressors
    int ha = 0; // 2:2 compressors
    int compressor_ports() const { return 3 * fa + 2 * ha; }
    int dummies() const { return m - compressor_ports(); }
};

inline SliceShape slice_shape(const StageAssignment& a, int stage, int col) {
    SliceShape s;
    s.m = a.pp[size_t(stage)][size_t(col)];
    s.fa = a.f[size_t(stage)][size_t(col)];
    s.ha = a.h[size_t(stage)][size_t(col)];
    require(s.dummies() >= 0, "slice (", stage + 1, ",", col,
            "): source/sink cardinality mismatch (", s.m, " bits, ", s.compressor_ports(),
            " compressor ports)");
    return s;
}

// Port legend within a slice: [0,3fa) 3:2 ports (a,b,cin per compressor),
// [3fa,3fa+2ha) 2:2 ports (a,b), rest dummy passthroughs.
enum class PortRole { FaA, FaB, FaC, HaA, HaB, Dummy };
struct PortInfo {
    PortRole role;
    int comp; // compressor index within its kind, or dummy index
};
inline PortInfo port_info(const SliceShape& s, int port) {
    if (port < 3 * s.fa)
        return {PortRole(port % 3), port / 3};
    int q = port - 3 * s.fa;
    if (q < 2 * s.ha)
        return {q % 2 == 0 ? PortRole::HaA : PortRole::HaB, q / 2};
    return {PortRole::Dummy, q - 2 * s.ha};
}

// perm[stage][col][u] = port index that source u drives
struct WiringPlan {
    std::vector<std::vector<std::vector<int>>> perm;
    double objective = 0.0; // critical delay of this wiring
    bool optimal = false;
    std::string source; // "ilp", "greedy", "random"
};

using ArrivalProfile = std::vector<std::vector<double>>; // [column][bit]

inline ArrivalProfile zero_arrivals(const StageAssignment& a) {
    ArrivalProfile p(size_t(a.columns));
    for (int j = 0; j < a.columns; ++j)
        p[size_t(j)].assign(size_t(a.pp[0][size_t(j)]), 0.0);
    return p;
}

struct WiringEval {
    std::vector<std::vector<double>> finals; // per-column output arrivals (t_j,0 / t_j,1)
    double max_delay = 0.0;
};

// Exact forward propagation of Eqs. s = max(a+T_as, b+T_bs, d+T_cs) etc.
inline WiringEval evaluate_wiring(const StageAssignment& a, const WiringPlan& w,
                                  const DelayTable& dt, const ArrivalProfile& inputs) {
    int C = a.columns;
    std::vector<std::vector<double>> cur(size_t(C), std::vector<double>{});
    for (int j = 0; j < C; ++j) {
        require(int(inputs[size_t(j)].size()) == a.pp[0][size_t(j)],
                "input arrival count mismatch in column ", j);
        cur[size_t(j)] = inputs[size_t(j)];
    }
    std::vector<std::vector<double>> sums(size_t(C), std::vector<double>{});
    auto passes = sums, carries = sums;
    for (int i = 0; i < a.stage_count; ++i) {
        for (int j = 0; j < C; ++j) {
            SliceShape sh = slice_shape(a, i, j);
            const std::vector<int>& perm = w.perm[size_t(i)][size_t(j)];
            require(int(perm.size()) == sh.m, "wiring permutation size mismatch at slice (",
                    i + 1, ",", j, ")");
            std::vector<double> port(size_t(sh.m), 0.0);
            std::vector<bool> hit(size_t(sh.m), false);
            for (int u = 0; u < sh.m; ++u) {
                int v = perm[size_t(u)];
                require(v >= 0 && v < sh.m && !hit[size_t(v)],
                        "wiring is not a permutation at slice (", i + 1, ",", j, ")");
                hit[size_t(v)] = true;
                port[size_t(v)] = cur[size_t(j)][size_t(u)];
            }
            std::vector<double> fa_s(size_t(sh.fa), 0.0), fa_c(size_t(sh.fa), 0.0);
            for (int k = 0; k < sh.fa; ++k) {
                double pa = port[size_t(3 * k)], pb = port[size_t(3 * k + 1)],
                       pc = port[size_t(3 * k + 2)];
                fa_s[size_t(k)] = std::max({pa + dt.fa_as, pb + dt.fa_bs, pc + dt.fa_cs});
                fa_c[size_t(k)] = std::max({pa + dt.fa_ac, pb + dt.fa_bc, pc + dt.fa_cc});
            }
            std::vector<double> ha_s(size_t(sh.ha), 0.0), ha_c(size_t(sh.ha), 0.0);
            for (int k = 0; k < sh.ha; ++k) {
                double pa = port[size_t(3 * sh.fa + 2 * k)], pb = port[size_t(3 * sh.fa + 2 * k + 1)];
                ha_s[size_t(k)] = std::max(pa, pb) + dt.ha_s;
                ha_c[size_t(k)] = std::max(pa, pb) + dt.ha_c;
            }
            sums[size_t(j)].clear();
            for (double v : fa_s)
                sums[size_t(j)].push_back(v);
            for (double v : ha_s)
                sums[size_t(j)].push_back(v);
            passes[size_t(j)].clear();
            for (int p = sh.compressor_ports(); p < sh.m; ++p)
                passes[size_t(j)].push_back(port[size_t(p)]);
            carries[size_t(j)].clear();
            for (double v : fa_c)
                carries[size_t(j)].push_back(v);
            for (double v : ha_c)
                carries[size_t(j)].push_back(v);
        }
        for (int j = 0; j < C; ++j) {
            std::vector<double> next;
            next.insert(next.end(), sums[size_t(j)].begin(), sums[size_t(j)].end());
            next.insert(next.end(), passes[size_t(j)].begin(), passes[size_t(j)].end());
            if (j > 0)
                next.insert(next.end(), carries[size_t(j - 1)].begin(),
                            carries[size_t(j - 1)].end());
            require(int(next.size()) == a.pp[size_t(i + 1)][size_t(j)],
                    "source assembly mismatch at stage ", i + 2, " column ", j);
            cur[size_t(j)] = std::move(next);
        }
    }
    WiringEval ev;
    ev.finals = cur;
    for (const auto& col : ev.finals)
        for (double v : col)
            ev.max_delay = std::max(ev.max_delay, v);
    return ev;
}

// Deterministic heuristic: per slice, earliest-arriving bits feed the
// compressors (per 3:2, the latest of its three goes to cin, the fast port);
// the latest bits pass through untouched.
inline WiringPlan greedy_wiring(const StageAssignment& a, const DelayTable& dt,
                                const ArrivalProfile& inputs) {
    int C = a.columns;
    WiringPlan w;
    w.source = "greedy";
    w.perm.assign(size_t(a.stage_count), {});
    std::vector<std::vector<double>> cur(size_t(C), std::vector<double>{});
    for (int j = 0; j < C; ++j)
        cur[size_t(j)] = inputs[size_t(j)];

    for (int i = 0; i < a.stage_count; ++i) {
        w.perm[size_t(i)].assign(size_t(C), {});
        for (int j = 0; j < C; ++j) {
            SliceShape sh = slice_shape(a, i, j);
            std::vector<int> order(size_t(sh.m), 0);
            for (int u = 0; u < sh.m; ++u)
                order[size_t(u)] = u;
            std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
                return cur[size_t(j)][size_t(x)] < cur[size_t(j)][size_t(y)];
            });
            std::vector<int> perm(size_t(sh.m), -1);
            int pos = 0;
            for (int k = 0; k < sh.fa; ++k) {
                perm[size_t(order[size_t(pos + 0)])] = 3 * k;     // a
                perm[size_t(order[size_t(pos + 1)])] = 3 * k + 1; // b
                perm[size_t(order[size_t(pos + 2)])] = 3 * k + 2; // cin gets the latest
                pos += 3;
            }
            for (int k = 0; k < sh.ha; ++k) {
                perm[size_t(order[size_t(pos + 0)])] = 3 * sh.fa + 2 * k;
                perm[size_t(order[size_t(pos + 1)])] = 3 * sh.fa + 2 * k + 1;
                pos += 2;
            }
            for (int d = 0; pos < sh.m; ++pos, ++d)
                perm[size_t(order[size_t(pos)])] = sh.compressor_ports() + d;
            w.perm[size_t(i)][size_t(j)] = perm;
        }
        // advance arrivals one stage to drive the next stage's sort
        StageAssignment prefix = a;
        prefix.stage_count = i + 1;
        prefix.f.assign(a.f.begin(), a.f.begin() + i + 1);
        prefix.h.assign(a.h.begin(), a.h.begin() + i + 1);
        prefix.pp.assign(a.pp.begin(), a.pp.begin() + i + 2);
        WiringPlan sofar;
        sofar.perm.assign(w.perm.begin(), w.perm.begin() + i + 1);
        cur = evaluate_wiring(prefix, sofar, dt, inputs).finals;
    }
    w.objective = evaluate_wiring(a, w, dt, inputs).max_delay;
    return w;
}

// ---------------------------------------------------------------------------
// ILP model: one m x m permutation matrix per slice that has a timing choice,
// continuous port/output arrival variables, min-max objective M.

struct WireModel {
    ilp::Model model;
    int stages = 0, columns = 0;
    double big_z = 0.0;

    struct SourceRef {
        int var = -1;
        double constant = 0.0;
        bool is_const() const { return var < 0; }
    };
    struct SliceVars {
        SliceShape shape;
        bool modeled = false;          // has z variables
        std::vector<int> z;            // row-major u*m+v, modeled only
        std::vector<SourceRef> sources;
        std::vector<SourceRef> ports;  // port arrivals (var if modeled, else forwarded)
        std::vector<int> fa_s, fa_c, ha_s, ha_c;
    };
    std::vector<std::vector<SliceVars>> slices; // [stage][col]
    std::vector<std::vector<SourceRef>> finals; // [col]
    int m_id = -1;
};

inline WireModel build_wiring_model(const StageAssignment& a, const DelayTable& dt,
                                    const ArrivalProfile& inputs) {
    using SourceRef = WireModel::SourceRef;
    WireModel wm;
    wm.stages = a.stage_count;
    wm.columns = a.columns;
    ilp::Model& m = wm.model;

    double max_in = 0;
    for (const auto& col : inputs)
        for (double v : col)
            max_in = std::max(max_in, v);
    // tight big-M: no arrival can exceed the worst chain through every stage
    double z_top = max_in + dt.max_entry() * double(a.stage_count + 1) + 1.0;
    wm.big_z = z_top;

    int C = a.columns;
    std::vector<std::vector<SourceRef>> cur(size_t(C), std::vector<SourceRef>{});
    for (int j = 0; j < C; ++j) {
        require(int(inputs[size_t(j)].size()) == a.pp[0][size_t(j)],
                "input arrival count mismatch in column ", j);
        for (double v : inputs[size_t(j)])
            cur[size_t(j)].push_back(SourceRef{-1, v});
    }

    auto equal_consts = [](const std::vector<SourceRef>& srcs) {
        for (const auto& s : srcs)
            if (!s.is_const() || s.constant != srcs[0].constant)
                return false;
        return true;
    };

    wm.slices.assign(size_t(a.stage_count), {});
    for (int i = 0; i < a.stage_count; ++i) {
        wm.slices[size_t(i)].assign(size_t(C), {});
        std::vector<std::vector<SourceRef>> sums(size_t(C), std::vector<SourceRef>{});
        auto passes = sums, carries = sums;
        for (int j = 0; j < C; ++j) {
            WireModel::SliceVars& sv = wm.slices[size_t(i)][size_t(j)];
            sv.shape = slice_shape(a, i, j);
            sv.sources = cur[size_t(j)];
            const SliceShape& sh = sv.shape;
            // a permutation only matters when there are compressors and the
            // sources are distinguishable
            bool identity = sh.compressor_ports() == 0 || sh.m <= 1 ||
                            equal_consts(sv.sources);
            if (identity) {
                sv.ports = sv.sources;
            } else {
                sv.modeled = true;
                sv.ports.resize(size_t(sh.m));
                for (int v = 0; v < sh.m; ++v) {
                    int pv = m.add_continuous(cat("p_", i + 1, "_", j, "_", v), 0, z_top);
                    sv.ports[size_t(v)] = SourceRef{pv, 0};
                }
                sv.z.resize(size_t(sh.m) * size_t(sh.m));
                for (int u = 0; u < sh.m; ++u)
                    for (int v = 0; v < sh.m; ++v) {
                        int zv = m.add_binary(cat("z_", i + 1, "_", j, "_", u, "_", v));
                        m.set_priority(zv, 50 - i);
                        sv.z[size_t(u) * size_t(sh.m) + size_t(v)] = zv;
                    }
                for (int u = 0; u < sh.m; ++u) {
                    ilp::LinExpr row, col;
                    for (int v = 0; v < sh.m; ++v) {
                        row.push_back({sv.z[size_t(u) * size_t(sh.m) + size_t(v)], 1});
                        col.push_back({sv.z[size_t(v) * size_t(sh.m) + size_t(u)], 1});
                    }
                    m.add_constraint(cat("zr_", i + 1, "_", j, "_", u), row, ilp::Sense::EQ, 1);
                    m.add_constraint(cat("zc_", i + 1, "_", j, "_", u), col, ilp::Sense::EQ, 1);
                }
                // |port_v - src_u| <= Z (1 - z_uv)
                for (int u = 0; u < sh.m; ++u) {
                    const SourceRef& src = sv.sources[size_t(u)];
                    for (int v = 0; v < sh.m; ++v) {
                        int zv = sv.z[size_t(u) * size_t(sh.m) + size_t(v)];
                        int pv = sv.ports[size_t(v)].var;
                        if (src.is_const()) {
                            m.add_constraint(cat("ze_", i + 1, "_", j, "_", u, "_", v, "_a"),
                                             {{pv, 1}, {zv, z_top}}, ilp::Sense::LE,
                                             z_top + src.constant);
                            m.add_constraint(cat("ze_", i + 1, "_", j, "_", u, "_", v, "_b"),
                                             {{pv, -1}, {zv, z_top}}, ilp::Sense::LE,
                                             z_top - src.constant);
                        } else {
                            m.add_constraint(cat("ze_", i + 1, "_", j, "_", u, "_", v, "_a"),
                                             {{pv, 1}, {src.var, -1}, {zv, z_top}},
                                             ilp::Sense::LE, z_top);
                            m.add_constraint(cat("ze_", i + 1, "_", j, "_", u, "_", v, "_b"),
                                             {{pv, -1}, {src.var, 1}, {zv, z_top}},
                                             ilp::Sense::LE, z_top);
                        }
                    }
                }
            }
            // compressor output timing
            auto out_ge = [&](int out, const SourceRef& in, double delay, const char* tag,
                              int k) {
                if (in.is_const()) {
                    m.add_constraint(cat(tag, i + 1, "_", j, "_", k), {{out, 1}},
                                     ilp::Sense::GE, in.constant + delay);
                } else {
                    m.add_constraint(cat(tag, i + 1, "_", j, "_", k),
                                     {{out, 1}, {in.var, -1}}, ilp::Sense::GE, delay);
                }
            };
            for (int k = 0; k < sh.fa; ++k) {
                int s = m.add_continuous(cat("s_", i + 1, "_", j, "_", k), 0, z_top);
                int c = m.add_continuous(cat("c_", i + 1, "_", j, "_", k), 0, z_top);
                sv.fa_s.push_back(s);
                sv.fa_c.push_back(c);
                const SourceRef& pa = sv.ports[size_t(3 * k)];
                const SourceRef& pb = sv.ports[size_t(3 * k + 1)];
                const SourceRef& pc = sv.ports[size_t(3 * k + 2)];
                out_ge(s, pa, dt.fa_as, "tsa_", k);
                out_ge(s, pb, dt.fa_bs, "tsb_", k);
                out_ge(s, pc, dt.fa_cs, "tsc_", k);
                out_ge(c, pa, dt.fa_ac, "tca_", k);
                out_ge(c, pb, dt.fa_bc, "tcb_", k);
                out_ge(c, pc, dt.fa_cc, "tcc_", k);
            }
            for (int k = 0; k < sh.ha; ++k) {
                int s = m.add_continuous(cat("hs_", i + 1, "_", j, "_", k), 0, z_top);
                int c = m.add_continuous(cat("hc_", i + 1, "_", j, "_", k), 0, z_top);
                sv.ha_s.push_back(s);
                sv.ha_c.push_back(c);
                const SourceRef& pa = sv.ports[size_t(3 * sh.fa + 2 * k)];
                const SourceRef& pb = sv.ports[size_t(3 * sh.fa + 2 * k + 1)];
                out_ge(s, pa, dt.ha_s, "hsa_", k);
                out_ge(s, pb, dt.ha_s, "hsb_", k);
                out_ge(c, pa, dt.ha_c, "hca_", k);
                out_ge(c, pb, dt.ha_c, "hcb_", k);
            }
            for (int k = 0; k < sh.fa; ++k) {
                sums[size_t(j)].push_back(SourceRef{sv.fa_s[size_t(k)], 0});
                carries[size_t(j)].push_back(SourceRef{sv.fa_c[size_t(k)], 0});
            }
            for (int k = 0; k < sh.ha; ++k)
                sums[size_t(j)].push_back(SourceRef{sv.ha_s[size_t(k)], 0});
            for (int k = 0; k < sh.ha; ++k)
                carries[size_t(j)].push_back(SourceRef{sv.ha_c[size_t(k)], 0});
            // note: carry vector order is 3:2 carries then 2:2 carries; the
            // loop above interleaves sums already in that order
            for (int p = sh.compressor_ports(); p < sh.m; ++p)
                passes[size_t(j)].push_back(sv.ports[size_t(p)]);
        }
        for (int j = 0; j < C; ++j) {
            std::vector<SourceRef> next;
            next.insert(next.end(), sums[size_t(j)].begin(), sums[size_t(j)].end());
            next.insert(next.end(), passes[size_t(j)].begin(), passes[size_t(j)].end());
            if (j > 0)
                next.insert(next.end(), carries[size_t(j - 1)].begin(),
                            carries[size_t(j - 1)].end());
            require(int(next.size()) == a.pp[size_t(i + 1)][size_t(j)],
                    "source assembly mismatch at stage ", i + 2, " column ", j);
            cur[size_t(j)] = std::move(next);
        }
    }
    wm.finals = cur;
    wm.m_id = m.add_continuous("M", 0, z_top);
    for (int j = 0; j < C; ++j) {
        for (size_t b = 0; b < wm.finals[size_t(j)].size(); ++b) {
            const SourceRef& s = wm.finals[size_t(j)][b];
            if (s.is_const())
                m.add_constraint(cat("fin_", j, "_", b), {{wm.m_id, 1}}, ilp::Sense::GE,
                                 s.constant);
            else
                m.add_constraint(cat("fin_", j, "_", b), {{wm.m_id, 1}, {s.var, -1}},
                                 ilp::Sense::GE, 0);
        }
    }
    m.set_objective(ilp::ObjSense::Minimize, {{wm.m_id, 1}});
    return wm;
}

// Warm start: z hints from an existing wiring (the solver re-derives the
// continuous arrival chain by propagation).
inline void hint_from_wiring(WireModel& wm, const StageAssignment& a, const WiringPlan& w) {
    for (int i = 0; i < a.stage_count; ++i)
        for (int j = 0; j < a.columns; ++j) {
            WireModel::SliceVars& sv = wm.slices[size_t(i)][size_t(j)];
            if (!sv.modeled)
                continue;
            const std::vector<int>& perm = w.perm[size_t(i)][size_t(j)];
            for (int u = 0; u < sv.shape.m; ++u)
                for (int v = 0; v < sv.shape.m; ++v)
                    wm.model.set_hint(sv.z[size_t(u) * size_t(sv.shape.m) + size_t(v)],
                                      perm[size_t(u)] == v ? 1 : 0);
        }
}

inline WiringPlan decode_wiring(const WireModel& wm, const StageAssignment& a,
                                const ilp::Solution& sol) {
    require(sol.usable(), "decode_wiring: solution status is ", ilp::status_name(sol.status));
    WiringPlan w;
    w.source = "ilp";
    w.optimal = sol.status == ilp::Status::Optimal;
    w.objective = sol.value(wm.m_id);
    w.perm.assign(size_t(a.stage_count), {});
    for (int i = 0; i < a.stage_count; ++i) {
        w.perm[size_t(i)].assign(size_t(a.columns), {});
        for (int j = 0; j < a.columns; ++j) {
            const WireModel::SliceVars& sv = wm.slices[size_t(i)][size_t(j)];
            std::vector<int> perm(size_t(sv.shape.m), 0);
            if (!sv.modeled) {
                for (int u = 0; u < sv.shape.m; ++u)
                    perm[size_t(u)] = u;
            } else {
                for (int u = 0; u < sv.shape.m; ++u) {
                    int chosen = -1;
                    for (int v = 0; v < sv.shape.m; ++v)
                        if (sol.value(sv.z[size_t(u) * size_t(sv.shape.m) + size_t(v)]) > 0.5) {
                            require(chosen < 0, "z row ", u, " selects two ports");
                            chosen = v;
                        }
                    require(chosen >= 0, "z row ", u, " selects no port");
                    perm[size_t(u)] = chosen;
                }
            }
            w.perm[size_t(i)][size_t(j)] = perm;
        }
    }
    return w;
}

struct WiringDistribution {
    std::vector<double> delays; // per trial
    double min = 0, max = 0, mean = 0;
    double spread_pct = 0; // (max - min) / min * 100
};

inline WiringPlan random_wiring(const StageAssignment& a, Rng& rng) {
    WiringPlan w;
    w.source = "random";
    w.perm.assign(size_t(a.stage_count), {});
    for (int i = 0; i < a.stage_count; ++i) {
        w.perm[size_t(i)].assign(size_t(a.columns), {});
        for (int j = 0; j < a.columns; ++j) {
            int mm = a.pp[size_t(i)][size_t(j)];
            std::vector<int> perm(size_t(mm), 0);
            for (int u = 0; u < mm; ++u)
                perm[size_t(u)] = u;
            rng.shuffle(perm);
            w.perm[size_t(i)][size_t(j)] = perm;
        }
    }
    return w;
}

inline WiringDistribution sample_random_wirings(const StageAssignment& a, const DelayTable& dt,
                                                int trials, uint64_t seed,
                                                const ArrivalProfile& inputs) {
    require(trials >= 1, "sample_random_wirings: trials must be >= 1");
    WiringDistribution d;
    Rng rng(seed);
    d.delays.reserve(size_t(trials));
    for (int t = 0; t < trials; ++t) {
        WiringPlan w = random_wiring(a, rng);
        d.delays.push_back(evaluate_wiring(a, w, dt, inputs).max_delay);
    }
    d.min = *std::min_element(d.delays.begin(), d.delays.end());
    d.max = *std::max_element(d.delays.begin(), d.delays.end());
    double s = 0;
    for (double v : d.delays)
        s += v;
    d.mean = s / double(d.delays.size());
    d.spread_pct = d.min > 0 ? (d.max - d.min) / d.min * 100.0 : 0.0;
    return d;
}

struct WireSolveResult {
    WiringPlan wiring;
    ilp::Status status = ilp::Status::Optimal;
    uint64_t nodes = 0;
};

// Full flow: greedy warm start, monolithic ILP, decode + cross-check against
// the forward evaluator.
inline WireSolveResult solve_wiring(const StageAssignment& a, const DelayTable& dt,
                                    const ArrivalProfile& inputs,
                                    const ilp::SolveOptions& opts = {}) {
    WireSolveResult r;
    WiringPlan greedy = greedy_wiring(a, dt, inputs);
    if (a.stage_count == 0) {
        r.wiring = greedy;
        r.wiring.source = "ilp";
        r.wiring.optimal = true;
        r.status = ilp::Status::Optimal;
        return r;
    }
    WireModel wm = build_wiring_model(a, dt, inputs);
    hint_from_wiring(wm, a, greedy);
    ilp::Solution sol = ilp::solve(wm.model, opts);
    r.status = sol.status;
    r.nodes = sol.nodes_explored;
    if (sol.usable()) {
        r.wiring = decode_wiring(wm, a, sol);
        double fwd = evaluate_wiring(a, r.wiring, dt, inputs).max_delay;
        require(std::fabs(fwd - r.wiring.objective) <= 1e-6,
                "wiring ILP objective ", r.wiring.objective,
                " disagrees with forward propagation ", fwd);
    } else {
        r.wiring = greedy;
    }
    return r;
}

} // namespace dpgen
