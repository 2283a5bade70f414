#pragma once

// Flat structural netlist of primitive gates, elaborated from the compressor
// plan plus the prefix graph; emitted as Verilog and JSON, with area and
// longest-path reports.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "dpgen/cpa.hpp"
#include "dpgen/ct_wire.hpp"
#include "dpgen/ppg.hpp"
#include "json.hpp"

namespace dpgen {

enum class GateKind { And, Nand, Nor, Xor, Xnor, Oai21, Aoi21, Inv };

inline const char* gate_kind_name(GateKind k) {
    switch (k) {
    case GateKind::And: return "AND";
    case GateKind::Nand: return "NAND";
    case GateKind::Nor: return "NOR";
    case GateKind::Xor: return "XOR";
    case GateKind::Xnor: return "XNOR";
    case GateKind::Oai21: return "OAI21";
    case GateKind::Aoi21: return "AOI21";
    case GateKind::Inv: return "INV";
    }
    return "?";
}

inline GateKind gate_kind_from_name(const std::string& s) {
    for (GateKind k : {GateKind::And, GateKind::Nand, GateKind::Nor, GateKind::Xor,
                       GateKind::Xnor, GateKind::Oai21, GateKind::Aoi21, GateKind::Inv})
        if (s == gate_kind_name(k))
            return k;
    fail("unknown gate kind '", s, "'");
}

// Normalized per-kind cell area; makes the documented compressor cells cost
// 3.5 (3:2) and 1.75 (2:2).
struct AreaWeights {
    double xor_w = 1.0, xnor_w = 1.0, aoi_w = 0.75, oai_w = 0.75;
    double and_w = 0.75, nand_w = 0.5, nor_w = 0.5, inv_w = 0.25;

    double of(GateKind k) const {
        switch (k) {
        case GateKind::And: return and_w;
        case GateKind::Nand: return nand_w;
        case GateKind::Nor: return nor_w;
        case GateKind::Xor: return xor_w;
        case GateKind::Xnor: return xnor_w;
        case GateKind::Oai21: return oai_w;
        case GateKind::Aoi21: return aoi_w;
        case GateKind::Inv: return inv_w;
        }
        return 0;
    }
};

// Per-kind propagation delay, plus an optional per-fanout load term (default
// off so the CT evaluators agree exactly; the FDC fitting flow turns it on).
struct GateTiming {
    double xor_d = 1.5, xnor_d = 1.5;
    double and_d = 1.0, nand_d = 1.0, nor_d = 1.0, inv_d = 1.0;
    double oai_d = 1.0, aoi_d = 1.0;
    double load_coef = 0.0;

    double of(GateKind k) const {
        switch (k) {
        case GateKind::And: return and_d;
        case GateKind::Nand: return nand_d;
        case GateKind::Nor: return nor_d;
        case GateKind::Xor: return xor_d;
        case GateKind::Xnor: return xnor_d;
        case GateKind::Oai21: return oai_d;
        case GateKind::Aoi21: return aoi_d;
        case GateKind::Inv: return inv_d;
        }
        return 0;
    }
};

struct Gate {
    GateKind kind;
    int out = -1;
    std::vector<int> ins;
};

struct NetPort {
    std::string name;
    std::vector<int> nets; // bit 0 first
};

class GateNetlist {
public:
    std::string name;

    // net driver codes
    static constexpr int kUndriven = -1;
    static constexpr int kInputDriven = -2;
    static constexpr int kConst0 = -3;
    static constexpr int kConst1 = -4;

    std::vector<std::string> net_name;
    std::vector<int> net_driver; // gate index or code above
    std::vector<Gate> gates;
    std::vector<NetPort> inputs, outputs;

    int net_count() const { return int(net_name.size()); }
    int gate_count() const { return int(gates.size()); }

    int add_net(const std::string& n) {
        auto [it, inserted] = index_.emplace(n, net_count());
        require(inserted, "duplicate net name '", n, "'");
        (void)it;
        net_name.push_back(n);
        net_driver.push_back(kUndriven);
        return net_count() - 1;
    }

    int find_net(const std::string& n) const {
        auto it = index_.find(n);
        require(it != index_.end(), "unknown net '", n, "'");
        return it->second;
    }
    bool has_net(const std::string& n) const { return index_.count(n) != 0; }

    int const_net(bool one) {
        int& cache = one ? const1_ : const0_;
        if (cache < 0) {
            cache = add_net(one ? "const1" : "const0");
            net_driver[size_t(cache)] = one ? kConst1 : kConst0;
        }
        return cache;
    }

    NetPort& add_input(const std::string& pname, int width) {
        NetPort p;
        p.name = pname;
        for (int i = 0; i < width; ++i) {
            int n = add_net(cat(pname, "_", i));
            net_driver[size_t(n)] = kInputDriven;
            p.nets.push_back(n);
        }
        inputs.push_back(std::move(p));
        return inputs.back();
    }

    void add_output(const std::string& pname, std::vector<int> nets) {
        for (int n : nets)
            require(net_driver[size_t(n)] != kUndriven, "output '", pname,
                    "' references undriven net ", net_name[size_t(n)]);
        outputs.push_back({pname, std::move(nets)});
    }

    int add_gate(GateKind kind, const std::string& out_name, std::vector<int> ins) {
        size_t want = kind == GateKind::Inv ? 1 : (kind == GateKind::Oai21 || kind == GateKind::Aoi21) ? 3 : 2;
        require(ins.size() == want, "gate ", gate_kind_name(kind), " wants ", want, " inputs");
        for (int n : ins)
            require(n >= 0 && n < net_count(), "gate input net out of range");
        int out = add_net(out_name);
        net_driver[size_t(out)] = int(gates.size());
        gates.push_back({kind, out, std::move(ins)});
        return out;
    }

private:
    std::map<std::string, int> index_;
    int const0_ = -1, const1_ = -1;
};

// ---------------------------------------------------------------------------
// Compressor cells. The 3:2 reproduces the port delay table exactly under the
// default GateTiming: a/b->s two XNORs (3.0), cin->s one XNOR (1.5),
// a/b->cout XNOR+OAI (2.5), cin->cout INV+OAI (2.0).

namespace detail {

struct CompOut {
    int sum, carry;
};

inline CompOut emit_full_adder(GateNetlist& nl, const std::string& prefix, int a, int b, int cin) {
    int xn = nl.add_gate(GateKind::Xnor, prefix + "_xn", {a, b});
    int s = nl.add_gate(GateKind::Xnor, prefix + "_s", {xn, cin});
    int n1 = nl.add_gate(GateKind::Nand, prefix + "_n", {a, b});
    int dn = nl.add_gate(GateKind::Inv, prefix + "_dn", {cin});
    int co = nl.add_gate(GateKind::Oai21, prefix + "_co", {xn, dn, n1});
    return {s, co};
}

inline CompOut emit_half_adder(GateNetlist& nl, const std::string& prefix, int a, int b) {
    int s = nl.add_gate(GateKind::Xor, prefix + "_s", {a, b});
    int co = nl.add_gate(GateKind::And, prefix + "_co", {a, b});
    return {s, co};
}

} // namespace detail

// Elaborates the compressor tree over the given initial column nets,
// following the wiring permutations; returns the final row nets per column.
// Source assembly matches the ct_wire convention bit for bit.
inline std::vector<std::vector<int>> elaborate_ct_core(GateNetlist& nl,
                                                       const StageAssignment& a,
                                                       const WiringPlan& w,
                                                       std::vector<std::vector<int>> cur) {
    int C = a.columns;
    require(int(cur.size()) == C, "initial column count mismatch");
    for (int j = 0; j < C; ++j)
        require(int(cur[size_t(j)].size()) == a.pp[0][size_t(j)],
                "initial bits of column ", j, " do not match the assignment");
    for (int i = 0; i < a.stage_count; ++i) {
        std::vector<std::vector<int>> sums(size_t(C), std::vector<int>{});
        auto passes = sums, carries = sums;
        for (int j = 0; j < C; ++j) {
            SliceShape sh = slice_shape(a, i, j);
            const std::vector<int>& perm = w.perm[size_t(i)][size_t(j)];
            require(int(perm.size()) == sh.m, "wiring size mismatch at slice (", i + 1, ",", j,
                    ")");
            std::vector<int> port(size_t(sh.m), -1);
            for (int u = 0; u < sh.m; ++u)
                port[size_t(perm[size_t(u)])] = cur[size_t(j)][size_t(u)];
            for (int k = 0; k < sh.fa; ++k) {
                auto out = detail::emit_full_adder(nl, cat("ct_s", i + 1, "_c", j, "_f", k),
                                                   port[size_t(3 * k)], port[size_t(3 * k + 1)],
                                                   port[size_t(3 * k + 2)]);
                sums[size_t(j)].push_back(out.sum);
                carries[size_t(j)].push_back(out.carry);
            }
            for (int k = 0; k < sh.ha; ++k) {
                auto out = detail::emit_half_adder(nl, cat("ct_s", i + 1, "_c", j, "_h", k),
                                                   port[size_t(3 * sh.fa + 2 * k)],
                                                   port[size_t(3 * sh.fa + 2 * k + 1)]);
                sums[size_t(j)].push_back(out.sum);
                carries[size_t(j)].push_back(out.carry);
            }
            for (int p = sh.compressor_ports(); p < sh.m; ++p)
                passes[size_t(j)].push_back(port[size_t(p)]);
        }
        for (int j = 0; j < C; ++j) {
            std::vector<int> next;
            next.insert(next.end(), sums[size_t(j)].begin(), sums[size_t(j)].end());
            next.insert(next.end(), passes[size_t(j)].begin(), passes[size_t(j)].end());
            if (j > 0)
                next.insert(next.end(), carries[size_t(j - 1)].begin(),
                            carries[size_t(j - 1)].end());
            require(int(next.size()) == a.pp[size_t(i + 1)][size_t(j)],
                    "net assembly mismatch at stage ", i + 2, " column ", j);
            cur[size_t(j)] = std::move(next);
        }
    }
    return cur;
}

// Standalone compressor-tree netlist: the column bits are primary inputs and
// the two output rows are primary outputs (timing reference for the wiring
// evaluators).
inline GateNetlist elaborate_ct_only(const PartialProductMatrix& ppm, const StageAssignment& a,
                                     const WiringPlan& w) {
    GateNetlist nl;
    nl.name = cat("ct", ppm.width);
    std::vector<std::vector<int>> cur(size_t(a.columns));
    for (int j = 0; j < a.columns; ++j) {
        for (const BitRef& bit : ppm.columns[size_t(j)]) {
            int n = nl.add_net(bit.name);
            nl.net_driver[size_t(n)] = GateNetlist::kInputDriven;
            cur[size_t(j)].push_back(n);
        }
        NetPort p;
        p.name = cat("col", j);
        p.nets = cur[size_t(j)];
        if (!p.nets.empty())
            nl.inputs.push_back(p);
    }
    auto rows = elaborate_ct_core(nl, a, w, cur);
    std::vector<int> row0, row1;
    for (int j = 0; j < a.columns; ++j) {
        const auto& r = rows[size_t(j)];
        row0.push_back(r.empty() ? nl.const_net(false) : r[0]);
        row1.push_back(r.size() > 1 ? r[1] : nl.const_net(false));
    }
    nl.add_output("row0", row0);
    nl.add_output("row1", row1);
    return nl;
}

// ---------------------------------------------------------------------------
// Prefix adder elaboration. Black nodes are AOI21+NAND or OAI21+NOR pairs in
// alternating polarity; blue nodes a single AOI21/OAI21; polarity mismatches
// between fan-ins are patched with inverters.

namespace detail {

struct PgSignal {
    int g = -1, p = -1;
    int phase = 0; // 0: true polarity, 1: complemented
};

// Emits the prefix network for graph g over per-bit (g_i, p_i) nets; returns
// per prefix node its (G, P, phase). P may be -1 for blue nodes.
inline std::vector<PgSignal> emit_prefix_nodes(GateNetlist& nl, const PrefixGraph& g,
                                               const std::vector<PgSignal>& leaf,
                                               const std::string& prefix) {
    GraphInfo info = analyze(g);
    std::vector<PgSignal> sig(g.nodes.size());
    for (int i = 0; i < g.width; ++i)
        sig[size_t(i)] = leaf[size_t(i)];
    // memoized inverters: inverted copies of a node's G / P nets
    std::map<int, int> g_inv, p_inv;
    auto inv_of = [&](std::map<int, int>& memo, int node, int net, const char* tag) {
        auto it = memo.find(node);
        if (it != memo.end())
            return it->second;
        int n = nl.add_gate(GateKind::Inv, cat(prefix, "_inv", tag, "_", node), {net});
        memo.emplace(node, n);
        return n;
    };
    // topological order by DFS over live nodes
    std::vector<int> topo;
    std::vector<int> state(g.nodes.size(), 0);
    for (int bit = 0; bit < g.width; ++bit) {
        std::vector<int> stack{g.output[size_t(bit)]};
        while (!stack.empty()) {
            int id = stack.back();
            if (state[size_t(id)] == 2 || g.nodes[size_t(id)].is_input()) {
                state[size_t(id)] = 2;
                stack.pop_back();
                continue;
            }
            const PrefixNode& nd = g.nodes[size_t(id)];
            if (state[size_t(id)] == 0) {
                state[size_t(id)] = 1;
                if (state[size_t(nd.tf)] != 2)
                    stack.push_back(nd.tf);
                if (state[size_t(nd.ntf)] != 2)
                    stack.push_back(nd.ntf);
            } else {
                state[size_t(id)] = 2;
                topo.push_back(id);
                stack.pop_back();
            }
        }
    }
    for (int id : topo) {
        const PrefixNode& nd = g.nodes[size_t(id)];
        PgSignal tf = sig[size_t(nd.tf)];
        PgSignal ntf = sig[size_t(nd.ntf)];
        // align fan-in phases (invert the minority side)
        if (tf.phase != ntf.phase) {
            ntf.g = inv_of(g_inv, nd.ntf, ntf.g, "g");
            if (ntf.p >= 0 && info.kind[size_t(id)] != PrefixKind::Blue)
                ntf.p = inv_of(p_inv, nd.ntf, ntf.p, "p");
            ntf.phase = tf.phase;
        }
        PgSignal out;
        out.phase = 1 - tf.phase;
        std::string base = cat(prefix, "_n", id);
        if (tf.phase == 0) {
            // positive in, complemented out: AOI21 + NAND
            out.g = nl.add_gate(GateKind::Aoi21, base + "_g", {tf.p, ntf.g, tf.g});
            if (info.kind[size_t(id)] != PrefixKind::Blue)
                out.p = nl.add_gate(GateKind::Nand, base + "_p", {tf.p, ntf.p});
        } else {
            // complemented in, positive out: OAI21 + NOR
            out.g = nl.add_gate(GateKind::Oai21, base + "_g", {tf.p, ntf.g, tf.g});
            if (info.kind[size_t(id)] != PrefixKind::Blue)
                out.p = nl.add_gate(GateKind::Nor, base + "_p", {tf.p, ntf.p});
        }
        sig[size_t(id)] = out;
    }
    return sig;
}

// Full adder stage on two rows; returns sum nets (width + 1 with carry-out).
inline std::vector<int> emit_prefix_adder(GateNetlist& nl, const PrefixGraph& g,
                                          const std::vector<int>& row0,
                                          const std::vector<int>& row1,
                                          const std::string& prefix) {
    int w = g.width;
    require(int(row0.size()) == w && int(row1.size()) == w, "prefix adder row width mismatch");
    std::vector<PgSignal> leaf(size_t(g.nodes.size()));
    for (int i = 0; i < w; ++i) {
        PgSignal s;
        s.g = nl.add_gate(GateKind::And, cat(prefix, "_g", i), {row0[size_t(i)], row1[size_t(i)]});
        s.p = nl.add_gate(GateKind::Xor, cat(prefix, "_p", i), {row0[size_t(i)], row1[size_t(i)]});
        s.phase = 0;
        leaf[size_t(i)] = s;
    }
    std::vector<PgSignal> sig = emit_prefix_nodes(nl, g, leaf, prefix);
    std::vector<int> sum;
    sum.push_back(leaf[0].p); // s_0 = p_0 (c_in = 0)
    for (int i = 1; i < w; ++i) {
        const PgSignal& carry = sig[size_t(g.output[size_t(i - 1)])];
        GateKind k = carry.phase == 0 ? GateKind::Xor : GateKind::Xnor;
        sum.push_back(nl.add_gate(k, cat(prefix, "_s", i), {leaf[size_t(i)].p, carry.g}));
    }
    const PgSignal& last = sig[size_t(g.output[size_t(w - 1)])];
    int cout = last.g;
    if (last.phase == 1)
        cout = nl.add_gate(GateKind::Inv, cat(prefix, "_cout"), {last.g});
    sum.push_back(cout);
    return sum;
}

} // namespace detail

// Full multiplier / fused MAC netlist: AND-array PPG, compressor tree, prefix
// CPA. The prefix graph must span exactly the columns whose final rows hold
// two bits.
inline GateNetlist elaborate(const PartialProductMatrix& ppm, const StageAssignment& a,
                             const WiringPlan& w, const PrefixGraph& cpa) {
    GateNetlist nl;
    int N = ppm.width;
    nl.name = ppm.is_fused ? cat("mac", N, "x", ppm.acc_width) : cat("mult", N);
    std::vector<int> a_nets = nl.add_input("a", N).nets;
    std::vector<int> b_nets = nl.add_input("b", N).nets;
    std::vector<int> acc_nets;
    if (ppm.is_fused && ppm.acc_width > 0)
        acc_nets = nl.add_input("c", ppm.acc_width).nets;

    // PPG: one AND per partial product; accumulator bits pass straight in
    std::vector<std::vector<int>> cur(size_t(a.columns));
    for (int j = 0; j < a.columns; ++j) {
        if (j >= ppm.column_count())
            continue;
        for (const BitRef& bit : ppm.columns[size_t(j)]) {
            if (bit.name.rfind("acc_", 0) == 0) {
                int idx = std::stoi(bit.name.substr(4));
                cur[size_t(j)].push_back(acc_nets.at(size_t(idx)));
            } else {
                // pp_<i>_<k> = a_i & b_k
                size_t us = bit.name.find('_', 3);
                int i = std::stoi(bit.name.substr(3, us - 3));
                int k = std::stoi(bit.name.substr(us + 1));
                cur[size_t(j)].push_back(nl.add_gate(GateKind::And, bit.name,
                                                     {a_nets[size_t(i)], b_nets[size_t(k)]}));
            }
        }
    }

    auto rows = elaborate_ct_core(nl, a, w, cur);

    // columns below the CPA pass through; the CPA spans the two-bit columns
    int C = a.columns;
    int lo = C;
    for (int j = 0; j < C; ++j)
        if (int(rows[size_t(j)].size()) >= 2) {
            lo = j;
            break;
        }
    std::vector<int> product;
    for (int j = 0; j < lo; ++j) {
        require(rows[size_t(j)].size() == 1, "column ", j, " below the CPA must hold one bit");
        product.push_back(rows[size_t(j)][0]);
    }
    int span = C - lo;
    require(span == cpa.width, "prefix graph width ", cpa.width, " does not match the CPA span ",
            span);
    std::vector<int> row0, row1;
    for (int j = lo; j < C; ++j) {
        const auto& r = rows[size_t(j)];
        require(!r.empty() && r.size() <= 2, "dangling CT output at column ", j);
        row0.push_back(r[0]);
        row1.push_back(r.size() > 1 ? r[1] : nl.const_net(false));
    }
    std::vector<int> sum = detail::emit_prefix_adder(nl, cpa, row0, row1, "cpa");
    for (int n : sum)
        product.push_back(n);
    nl.add_output("p", product);
    return nl;
}

// Standalone prefix adder netlist over two width-bit inputs.
inline GateNetlist elaborate_adder(const PrefixGraph& g) {
    GateNetlist nl;
    nl.name = cat("adder", g.width);
    std::vector<int> a_nets = nl.add_input("a", g.width).nets;
    std::vector<int> b_nets = nl.add_input("b", g.width).nets;
    std::vector<int> sum = detail::emit_prefix_adder(nl, g, a_nets, b_nets, "cpa");
    nl.add_output("s", sum);
    return nl;
}

// ---------------------------------------------------------------------------
// Reports: area by per-kind weights, longest path by topological traversal.

struct NetlistReport {
    double area = 0;
    double critical_path = 0;
    std::vector<std::pair<std::string, std::vector<double>>> output_arrivals;
};

inline NetlistReport report(const GateNetlist& nl, const GateTiming& t = {},
                            const AreaWeights& w = {}) {
    NetlistReport rep;
    for (const Gate& g : nl.gates)
        rep.area += w.of(g.kind);

    // fanout counts for the optional load term
    std::vector<int> fanout(size_t(nl.net_count()), 0);
    if (t.load_coef != 0)
        for (const Gate& g : nl.gates)
            for (int in : g.ins)
                fanout[size_t(in)]++;

    // Kahn traversal over gates
    std::vector<int> pending(nl.gates.size(), 0);
    std::vector<std::vector<int>> consumers(size_t(nl.net_count()));
    for (size_t gi = 0; gi < nl.gates.size(); ++gi) {
        for (int in : nl.gates[gi].ins) {
            if (nl.net_driver[size_t(in)] >= 0) {
                ++pending[gi];
                consumers[size_t(in)].push_back(int(gi));
            }
        }
    }
    std::vector<double> arrival(size_t(nl.net_count()), 0.0);
    std::vector<int> ready;
    for (size_t gi = 0; gi < nl.gates.size(); ++gi)
        if (pending[gi] == 0)
            ready.push_back(int(gi));
    size_t processed = 0;
    for (size_t q = 0; q < ready.size(); ++q) {
        const Gate& g = nl.gates[size_t(ready[q])];
        ++processed;
        double in_max = 0;
        for (int in : g.ins)
            in_max = std::max(in_max, arrival[size_t(in)]);
        double d = t.of(g.kind);
        if (t.load_coef != 0)
            d += t.load_coef * double(fanout[size_t(g.out)]);
        arrival[size_t(g.out)] = in_max + d;
        rep.critical_path = std::max(rep.critical_path, arrival[size_t(g.out)]);
        for (int gi : consumers[size_t(g.out)])
            if (--pending[size_t(gi)] == 0)
                ready.push_back(gi);
    }
    if (processed != nl.gates.size()) {
        std::string loop;
        for (size_t gi = 0; gi < nl.gates.size(); ++gi)
            if (pending[gi] > 0) {
                loop += loop.empty() ? "" : ", ";
                loop += nl.net_name[size_t(nl.gates[gi].out)];
                if (loop.size() > 120)
                    break;
            }
        fail("netlist contains a combinational cycle through: ", loop);
    }
    for (const NetPort& p : nl.outputs) {
        std::vector<double> arr;
        for (int n : p.nets)
            arr.push_back(arrival[size_t(n)]);
        rep.output_arrivals.push_back({p.name, arr});
    }
    return rep;
}

// ---------------------------------------------------------------------------
// JSON round trip (schema version 1)

inline nlohmann::ordered_json netlist_to_json(const GateNetlist& nl) {
    nlohmann::ordered_json j;
    j["schema"] = "dpgen-netlist";
    j["version"] = 1;
    j["name"] = nl.name;
    auto ports = [&](const std::vector<NetPort>& ps) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const NetPort& p : ps) {
            nlohmann::ordered_json e;
            e["name"] = p.name;
            nlohmann::ordered_json nets = nlohmann::ordered_json::array();
            for (int n : p.nets)
                nets.push_back(nl.net_name[size_t(n)]);
            e["nets"] = nets;
            arr.push_back(e);
        }
        return arr;
    };
    j["inputs"] = ports(nl.inputs);
    j["outputs"] = ports(nl.outputs);
    nlohmann::ordered_json gates = nlohmann::ordered_json::array();
    for (const Gate& g : nl.gates) {
        nlohmann::ordered_json e;
        e["kind"] = gate_kind_name(g.kind);
        e["out"] = nl.net_name[size_t(g.out)];
        nlohmann::ordered_json ins = nlohmann::ordered_json::array();
        for (int in : g.ins)
            ins.push_back(nl.net_name[size_t(in)]);
        e["ins"] = ins;
        gates.push_back(e);
    }
    j["gates"] = gates;
    return j;
}

inline GateNetlist netlist_from_json(const nlohmann::json& j) {
    require(j.value("schema", "") == "dpgen-netlist", "not a dpgen netlist document");
    require(j.value("version", 0) == 1, "unsupported netlist schema version");
    GateNetlist nl;
    nl.name = j.at("name").get<std::string>();
    for (const auto& p : j.at("inputs")) {
        NetPort port;
        port.name = p.at("name").get<std::string>();
        for (const auto& n : p.at("nets")) {
            int id = nl.add_net(n.get<std::string>());
            nl.net_driver[size_t(id)] = GateNetlist::kInputDriven;
            port.nets.push_back(id);
        }
        nl.inputs.push_back(port);
    }
    for (const auto& g : j.at("gates")) {
        GateKind kind = gate_kind_from_name(g.at("kind").get<std::string>());
        std::vector<int> ins;
        for (const auto& n : g.at("ins")) {
            std::string nm = n.get<std::string>();
            if (!nl.has_net(nm)) {
                if (nm == "const0" || nm == "const1") {
                    ins.push_back(nl.const_net(nm == "const1"));
                    continue;
                }
            }
            ins.push_back(nl.find_net(nm));
        }
        nl.add_gate(kind, g.at("out").get<std::string>(), ins);
    }
    for (const auto& p : j.at("outputs")) {
        std::vector<int> nets;
        for (const auto& n : p.at("nets")) {
            std::string nm = n.get<std::string>();
            if (!nl.has_net(nm) && (nm == "const0" || nm == "const1")) {
                nets.push_back(nl.const_net(nm == "const1"));
                continue;
            }
            nets.push_back(nl.find_net(nm));
        }
        nl.add_output(p.at("name").get<std::string>(), nets);
    }
    return nl;
}

// ---------------------------------------------------------------------------
// Structural Verilog emission. Primitive gates use built-in Verilog
// primitives; OAI21/AOI21 are companion modules emitted alongside.

namespace detail {

inline const std::set<std::string>& verilog_reserved() {
    static const std::set<std::string> words = {
        "always", "and", "assign", "begin", "buf", "case", "casex", "casez", "default",
        "define", "else", "end", "endcase", "endfunction", "endmodule", "endtask", "for",
        "forever", "function", "if", "inout", "input", "integer", "module", "nand",
        "negedge", "nor", "not", "or", "output", "parameter", "posedge", "reg", "repeat",
        "signed", "task", "tri", "wand", "while", "wire", "wor", "xnor", "xor"};
    return words;
}

inline bool verilog_name_ok(const std::string& s) {
    if (s.empty() || verilog_reserved().count(s))
        return false;
    if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_'))
        return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$'))
            return false;
    return true;
}

} // namespace detail

inline std::string emit_verilog(const GateNetlist& nl, const std::string& module_name = "") {
    std::string mod = module_name.empty() ? nl.name : module_name;
    std::string renames;
    auto fix_name = [&](const std::string& n, int uniq) {
        if (detail::verilog_name_ok(n))
            return n;
        std::string r = cat("n", uniq, "_renamed");
        renames += cat("// renamed: ", n, " -> ", r, "\n");
        return r;
    };
    mod = fix_name(mod, 0);

    // map nets to verilog expressions; port bits use vector indexing
    std::vector<std::string> expr(size_t(nl.net_count()));
    std::vector<bool> is_port_net(size_t(nl.net_count()), false);
    auto map_ports = [&](const std::vector<NetPort>& ports) {
        for (const NetPort& p : ports)
            for (size_t b = 0; b < p.nets.size(); ++b) {
                expr[size_t(p.nets[b])] = cat(p.name, "[", b, "]");
                is_port_net[size_t(p.nets[b])] = true;
            }
    };
    map_ports(nl.inputs);
    // output ports get dedicated vector names; internal nets keep their own
    for (int n = 0; n < nl.net_count(); ++n) {
        if (nl.net_driver[size_t(n)] == GateNetlist::kConst0)
            expr[size_t(n)] = "1'b0";
        else if (nl.net_driver[size_t(n)] == GateNetlist::kConst1)
            expr[size_t(n)] = "1'b1";
        else if (expr[size_t(n)].empty())
            expr[size_t(n)] = fix_name(nl.net_name[size_t(n)], n);
    }

    std::string out;
    out += cat("// ", mod, ": generated gate-level netlist\n");
    out += renames;
    out += cat("module ", mod, " (");
    bool first = true;
    for (const NetPort& p : nl.inputs) {
        out += cat(first ? "" : ", ", p.name);
        first = false;
    }
    for (const NetPort& p : nl.outputs) {
        out += cat(first ? "" : ", ", p.name);
        first = false;
    }
    out += ");\n";
    for (const NetPort& p : nl.inputs)
        out += cat("  input [", p.nets.size() - 1, ":0] ", p.name, ";\n");
    for (const NetPort& p : nl.outputs)
        out += cat("  output [", p.nets.size() - 1, ":0] ", p.name, ";\n");
    for (int n = 0; n < nl.net_count(); ++n) {
        int drv = nl.net_driver[size_t(n)];
        if (drv == GateNetlist::kInputDriven || drv == GateNetlist::kConst0 ||
            drv == GateNetlist::kConst1 || is_port_net[size_t(n)])
            continue;
        out += cat("  wire ", expr[size_t(n)], ";\n");
    }
    int uid = 0;
    for (const Gate& g : nl.gates) {
        std::string ins;
        for (int in : g.ins)
            ins += cat(", ", expr[size_t(in)]);
        switch (g.kind) {
        case GateKind::And: out += cat("  and u", uid, " (", expr[size_t(g.out)], ins, ");\n"); break;
        case GateKind::Nand: out += cat("  nand u", uid, " (", expr[size_t(g.out)], ins, ");\n"); break;
        case GateKind::Nor: out += cat("  nor u", uid, " (", expr[size_t(g.out)], ins, ");\n"); break;
        case GateKind::Xor: out += cat("  xor u", uid, " (", expr[size_t(g.out)], ins, ");\n"); break;
        case GateKind::Xnor: out += cat("  xnor u", uid, " (", expr[size_t(g.out)], ins, ");\n"); break;
        case GateKind::Inv: out += cat("  not u", uid, " (", expr[size_t(g.out)], ins, ");\n"); break;
        case GateKind::Oai21:
            out += cat("  OAI21 u", uid, " (", expr[size_t(g.out)], ins, ");\n");
            break;
        case GateKind::Aoi21:
            out += cat("  AOI21 u", uid, " (", expr[size_t(g.out)], ins, ");\n");
            break;
        }
        ++uid;
    }
    // connect output port bits
    for (const NetPort& p : nl.outputs)
        for (size_t b = 0; b < p.nets.size(); ++b)
            out += cat("  assign ", p.name, "[", b, "] = ", expr[size_t(p.nets[b])], ";\n");
    out += "endmodule\n";
    bool use_oai = false, use_aoi = false;
    for (const Gate& g : nl.gates) {
        use_oai |= g.kind == GateKind::Oai21;
        use_aoi |= g.kind == GateKind::Aoi21;
    }
    if (use_oai)
        out += "\nmodule OAI21 (output y, input a, input b, input c);\n"
               "  assign y = ~((a | b) & c);\nendmodule\n";
    if (use_aoi)
        out += "\nmodule AOI21 (output y, input a, input b, input c);\n"
               "  assign y = ~((a & b) | c);\nendmodule\n";
    return out;
}

} // namespace dpgen
