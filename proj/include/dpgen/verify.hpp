#pragma once

// Ground-truth checks: bit-accurate netlist simulation (two independent
// evaluation orders, 64 vectors per pass), equivalence against integer
// arithmetic, and the exhaustive compressor-tree optimality enumerator.

#include <map>
#include <string>
#include <vector>

#include "dpgen/ct_plan.hpp"
#include "dpgen/netlist.hpp"
#include "json.hpp"

namespace dpgen {
namespace verify {

using u128 = unsigned __int128;

inline uint64_t gate_eval64(GateKind k, const std::vector<uint64_t>& in) {
    switch (k) {
    case GateKind::And: return in[0] & in[1];
    case GateKind::Nand: return ~(in[0] & in[1]);
    case GateKind::Nor: return ~(in[0] | in[1]);
    case GateKind::Xor: return in[0] ^ in[1];
    case GateKind::Xnor: return ~(in[0] ^ in[1]);
    case GateKind::Oai21: return ~((in[0] | in[1]) & in[2]);
    case GateKind::Aoi21: return ~((in[0] & in[1]) | in[2]);
    case GateKind::Inv: return ~in[0];
    }
    return 0;
}

// 64 input vectors per call, one per bit lane. Values are given per input
// port, lane-major; ports are at most 64 bits wide.
struct Batch64 {
    std::map<std::string, std::vector<uint64_t>> port_values; // port -> per-lane value
    int lanes = 64;
};

inline std::vector<uint64_t> net_values_forward(const GateNetlist& nl, const Batch64& in) {
    std::vector<uint64_t> val(size_t(nl.net_count()), 0);
    for (const NetPort& p : nl.inputs) {
        auto it = in.port_values.find(p.name);
        require(it != in.port_values.end(), "simulate: input '", p.name, "' unassigned");
        const std::vector<uint64_t>& lanes = it->second;
        require(int(lanes.size()) >= in.lanes, "simulate: too few lanes for '", p.name, "'");
        for (size_t b = 0; b < p.nets.size(); ++b) {
            uint64_t word = 0;
            for (int l = 0; l < in.lanes; ++l)
                word |= ((lanes[size_t(l)] >> b) & 1ull) << l;
            val[size_t(p.nets[b])] = word;
        }
    }
    for (int n = 0; n < nl.net_count(); ++n) {
        if (nl.net_driver[size_t(n)] == GateNetlist::kConst1)
            val[size_t(n)] = ~0ull;
    }
    // gates were appended in creation order, which is topological by
    // construction of the elaborators; verify while evaluating
    std::vector<char> done(size_t(nl.net_count()), 0);
    for (const NetPort& p : nl.inputs)
        for (int n : p.nets)
            done[size_t(n)] = 1;
    for (int n = 0; n < nl.net_count(); ++n)
        if (nl.net_driver[size_t(n)] == GateNetlist::kConst0 ||
            nl.net_driver[size_t(n)] == GateNetlist::kConst1)
            done[size_t(n)] = 1;
    std::vector<uint64_t> ins;
    for (const Gate& g : nl.gates) {
        ins.clear();
        for (int in_net : g.ins) {
            require(done[size_t(in_net)], "netlist gates are not in topological order at net ",
                    nl.net_name[size_t(in_net)]);
            ins.push_back(val[size_t(in_net)]);
        }
        val[size_t(g.out)] = gate_eval64(g.kind, ins);
        done[size_t(g.out)] = 1;
    }
    return val;
}

// Independent evaluation order: memoized recursion from the outputs
// (reverse-topological), for cross-checking the forward pass.
inline std::vector<uint64_t> net_values_memo(const GateNetlist& nl, const Batch64& in) {
    std::vector<uint64_t> val(size_t(nl.net_count()), 0);
    std::vector<char> done(size_t(nl.net_count()), 0);
    for (const NetPort& p : nl.inputs) {
        auto it = in.port_values.find(p.name);
        require(it != in.port_values.end(), "simulate: input '", p.name, "' unassigned");
        for (size_t b = 0; b < p.nets.size(); ++b) {
            uint64_t word = 0;
            for (int l = 0; l < in.lanes; ++l)
                word |= ((it->second[size_t(l)] >> b) & 1ull) << l;
            val[size_t(p.nets[b])] = word;
            done[size_t(p.nets[b])] = 1;
        }
    }
    for (int n = 0; n < nl.net_count(); ++n) {
        int d = nl.net_driver[size_t(n)];
        if (d == GateNetlist::kConst0 || d == GateNetlist::kConst1) {
            val[size_t(n)] = d == GateNetlist::kConst1 ? ~0ull : 0;
            done[size_t(n)] = 1;
        }
    }
    std::vector<int> stack;
    for (auto it = nl.outputs.rbegin(); it != nl.outputs.rend(); ++it)
        for (auto nit = it->nets.rbegin(); nit != it->nets.rend(); ++nit)
            stack.push_back(*nit);
    while (!stack.empty()) {
        int n = stack.back();
        if (done[size_t(n)]) {
            stack.pop_back();
            continue;
        }
        int d = nl.net_driver[size_t(n)];
        require(d >= 0, "undriven net ", nl.net_name[size_t(n)]);
        const Gate& g = nl.gates[size_t(d)];
        bool ready = true;
        for (int in_net : g.ins)
            if (!done[size_t(in_net)]) {
                stack.push_back(in_net);
                ready = false;
            }
        if (!ready)
            continue;
        std::vector<uint64_t> ins;
        for (int in_net : g.ins)
            ins.push_back(val[size_t(in_net)]);
        val[size_t(n)] = gate_eval64(g.kind, ins);
        done[size_t(n)] = 1;
        stack.pop_back();
    }
    return val;
}

inline u128 read_output(const std::vector<uint64_t>& val, const NetPort& port, int lane) {
    u128 out = 0;
    for (size_t b = 0; b < port.nets.size(); ++b)
        out |= u128((val[size_t(port.nets[b])] >> lane) & 1ull) << b;
    return out;
}

// Single-vector simulation: assignment of every primary input, values by port.
inline std::map<std::string, u128> simulate(const GateNetlist& nl,
                                            const std::map<std::string, uint64_t>& inputs) {
    Batch64 b;
    b.lanes = 1;
    for (const NetPort& p : nl.inputs) {
        auto it = inputs.find(p.name);
        require(it != inputs.end(), "simulate: input '", p.name, "' unassigned");
        b.port_values[p.name] = std::vector<uint64_t>{it->second};
    }
    std::vector<uint64_t> val = net_values_forward(nl, b);
    std::map<std::string, u128> out;
    for (const NetPort& p : nl.outputs)
        out[p.name] = read_output(val, p, 0);
    return out;
}

// ---------------------------------------------------------------------------
// Equivalence checking against the integer oracle

enum class SpecKind { Mult, Mac, Add };

struct EquivalenceReport {
    bool pass = true;
    uint64_t vectors = 0;
    std::string counterexample; // JSON, empty when pass
};

namespace detail {

inline u128 oracle(SpecKind k, uint64_t a, uint64_t b, uint64_t c) {
    switch (k) {
    case SpecKind::Mult: return u128(a) * b;
    case SpecKind::Mac: return u128(a) * b + c;
    case SpecKind::Add: return u128(a) + b;
    }
    return 0;
}

inline uint64_t mask_bits(int w) { return w >= 64 ? ~0ull : ((1ull << w) - 1); }

} // namespace detail

struct EquivalenceOptions {
    uint64_t random_vectors = 1000000;
    uint64_t seed = 1;
    bool cross_check_orders = false; // also compare the two evaluation orders
};

// Drives (a, b[, c]) against the output port "p"/"s" and the integer oracle.
// Exhaustive mode enumerates all input combinations (total input bits <= 20);
// random mode uses seeded vectors plus structured corners.
inline EquivalenceReport check_equivalence(const GateNetlist& nl, SpecKind kind, bool exhaustive,
                                           const EquivalenceOptions& opts = {}) {
    int wa = 0, wb = 0, wc = 0;
    for (const NetPort& p : nl.inputs) {
        if (p.name == "a")
            wa = int(p.nets.size());
        else if (p.name == "b")
            wb = int(p.nets.size());
        else if (p.name == "c")
            wc = int(p.nets.size());
    }
    require(wa > 0 && wb > 0, "netlist lacks a/b inputs");
    require(kind != SpecKind::Mac || wc > 0, "MAC netlist lacks the accumulator input");
    const NetPort* out = nullptr;
    for (const NetPort& p : nl.outputs)
        if (p.name == "p" || p.name == "s")
            out = &p;
    require(out, "netlist lacks a product/sum output");

    EquivalenceReport rep;
    int total_bits = wa + wb + wc;

    auto run_batch = [&](const std::vector<uint64_t>& av, const std::vector<uint64_t>& bv,
                         const std::vector<uint64_t>& cv, int lanes) {
        Batch64 batch;
        batch.lanes = lanes;
        batch.port_values["a"] = av;
        batch.port_values["b"] = bv;
        if (wc > 0)
            batch.port_values["c"] = cv;
        std::vector<uint64_t> val = net_values_forward(nl, batch);
        if (opts.cross_check_orders) {
            std::vector<uint64_t> val2 = net_values_memo(nl, batch);
            for (const NetPort& p : nl.outputs)
                for (int n : p.nets)
                    require(val[size_t(n)] == val2[size_t(n)],
                            "forward and memoized simulation orders disagree");
        }
        for (int l = 0; l < lanes; ++l) {
            u128 got = read_output(val, *out, l);
            u128 want = detail::oracle(kind, av[size_t(l)], bv[size_t(l)],
                                       wc > 0 ? cv[size_t(l)] : 0);
            ++rep.vectors;
            if (got != want) {
                rep.pass = false;
                nlohmann::ordered_json cx;
                cx["a"] = av[size_t(l)];
                cx["b"] = bv[size_t(l)];
                if (wc > 0)
                    cx["c"] = cv[size_t(l)];
                cx["expected_lo"] = uint64_t(want);
                cx["expected_hi"] = uint64_t(want >> 64);
                cx["got_lo"] = uint64_t(got);
                cx["got_hi"] = uint64_t(got >> 64);
                rep.counterexample = cx.dump();
                return false;
            }
        }
        return true;
    };

    if (exhaustive) {
        require(total_bits <= 20, "exhaustive equivalence capped at 20 input bits, got ",
                total_bits);
        uint64_t total = 1ull << total_bits;
        std::vector<uint64_t> av, bv, cv;
        for (uint64_t base = 0; base < total; base += 64) {
            int lanes = int(std::min<uint64_t>(64, total - base));
            av.assign(size_t(lanes), 0);
            bv.assign(size_t(lanes), 0);
            cv.assign(size_t(lanes), 0);
            for (int l = 0; l < lanes; ++l) {
                uint64_t idx = base + uint64_t(l);
                av[size_t(l)] = idx & detail::mask_bits(wa);
                bv[size_t(l)] = (idx >> wa) & detail::mask_bits(wb);
                cv[size_t(l)] = (idx >> (wa + wb)) & detail::mask_bits(wc);
            }
            if (!run_batch(av, bv, cv, lanes))
                return rep;
        }
        return rep;
    }

    // corners first: 0, 1, max, alternating patterns, then seeded random
    std::vector<uint64_t> corner = {0,
                                    1,
                                    detail::mask_bits(wa),
                                    0xAAAAAAAAAAAAAAAAull,
                                    0x5555555555555555ull,
                                    1ull << (wa > 1 ? wa - 1 : 0)};
    std::vector<uint64_t> av, bv, cv;
    for (uint64_t x : corner)
        for (uint64_t y : corner) {
            av.push_back(x & detail::mask_bits(wa));
            bv.push_back(y & detail::mask_bits(wb));
            cv.push_back((x ^ y) & detail::mask_bits(wc));
        }
    while (av.size() % 64 != 0) {
        av.push_back(0);
        bv.push_back(0);
        cv.push_back(0);
    }
    for (size_t base = 0; base < av.size(); base += 64) {
        std::vector<uint64_t> a64(av.begin() + base, av.begin() + base + 64);
        std::vector<uint64_t> b64(bv.begin() + base, bv.begin() + base + 64);
        std::vector<uint64_t> c64(cv.begin() + base, cv.begin() + base + 64);
        if (!run_batch(a64, b64, c64, 64))
            return rep;
    }
    Rng rng(opts.seed);
    uint64_t remaining = opts.random_vectors;
    while (remaining > 0) {
        int lanes = int(std::min<uint64_t>(64, remaining));
        av.assign(64, 0);
        bv.assign(64, 0);
        cv.assign(64, 0);
        for (int l = 0; l < lanes; ++l) {
            av[size_t(l)] = rng.next() & detail::mask_bits(wa);
            bv[size_t(l)] = rng.next() & detail::mask_bits(wb);
            cv[size_t(l)] = rng.next() & detail::mask_bits(wc);
        }
        if (!run_batch(av, bv, cv, lanes))
            return rep;
        remaining -= uint64_t(lanes);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Brute-force compressor-tree optimality: exhaustive search over every legal
// (3:2, 2:2) placement reaching at most two outputs per column. Executable
// form of the area- and per-column-count minimality proofs.

struct BruteForceCt {
    int min_area = -1;
    std::vector<int> min_column_count; // per column, minimum over all legal configs
    uint64_t configs = 0;
};

namespace detail {

struct BruteState {
    const std::vector<int>* heights;
    int max_columns;
    BruteForceCt* out;
    std::vector<int> counts; // compressors used per column so far
};

inline void brute_recurse(BruteState& st, int col, int carry, int area) {
    int pp = col < int(st.heights->size()) ? (*st.heights)[size_t(col)] : 0;
    int t = pp + carry;
    if (col >= int(st.heights->size()) && t == 0) {
        // complete configuration
        st.out->configs++;
        if (st.out->min_area < 0 || area < st.out->min_area)
            st.out->min_area = area;
        for (size_t j = 0; j < st.counts.size(); ++j)
            if (st.out->min_column_count[j] < 0 || st.counts[j] < st.out->min_column_count[j])
                st.out->min_column_count[j] = st.counts[j];
        return;
    }
    require(col < st.max_columns, "brute_force_ct: carry chain exceeded the column cap");
    // enumerate every (f, h) with a feasible firing order and <= 2 residual
    // bits; firing 3:2s first, the i-th needs t - 2(i-1) >= 3 bits present
    for (int f = 0; f == 0 || t >= 2 * f + 1; ++f) {
        for (int h = 0;; ++h) {
            int n = t - 2 * f - h;
            if (n < 0 || (f + h >= 1 && n < 1))
                break;
            if (n <= 2) {
                if (size_t(col) < st.counts.size())
                    st.counts[size_t(col)] = f + h;
                brute_recurse(st, col + 1, f + h, area + 3 * f + 2 * h);
                if (size_t(col) < st.counts.size())
                    st.counts[size_t(col)] = 0;
            }
            // keep scanning: larger h lowers n toward the window
        }
    }
}

} // namespace detail

inline BruteForceCt brute_force_ct(const std::vector<int>& heights) {
    int total = 0;
    for (int h : heights)
        total += h;
    require(total <= 6 && int(heights.size()) <= 4,
            "brute_force_ct instance too large (<= 6 bits across <= 4 columns)");
    BruteForceCt out;
    // track per-column minima across the original columns plus carry
    // overflow; a 2:2-only chain can ripple one column per remaining bit
    int cols_tracked = int(heights.size()) + 10;
    out.min_column_count.assign(size_t(cols_tracked), -1);
    detail::BruteState st{&heights, cols_tracked, &out, std::vector<int>(size_t(cols_tracked), 0)};
    detail::brute_recurse(st, 0, 0, 0);
    require(out.min_area >= 0, "brute_force_ct found no legal configuration");
    return out;
}

} // namespace verify
} // namespace dpgen
