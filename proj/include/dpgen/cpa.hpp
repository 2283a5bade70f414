#pragma once

// Prefix-graph carry propagate adder: arrival-profile segmentation, region
// initial structures (ripple / Sklansky / carry-increment), the FDC path
// timing model, and the iterative depth-opt / fanout-opt refinement.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "dpgen/common.hpp"

namespace dpgen {

enum class PrefixKind { Input, Black, Blue, Dead };

struct PrefixNode {
    int msb = 0, lsb = 0;
    int tf = -1;  // trivial fan-in: shares this node's msb
    int ntf = -1; // non-trivial fan-in: covers the remaining lsb range
    bool is_input() const { return tf < 0; }
};

struct PrefixGraph {
    int width = 0;
    std::vector<PrefixNode> nodes; // ids 0..width-1 are the pg inputs
    std::vector<int> output;       // per bit, the node covering [i:0]
    std::vector<double> arrival;   // per-bit input arrival times

    static PrefixGraph inputs_only(int width) {
        require(width >= 1, "prefix graph width must be >= 1");
        PrefixGraph g;
        g.width = width;
        g.nodes.resize(size_t(width));
        for (int i = 0; i < width; ++i)
            g.nodes[size_t(i)] = {i, i, -1, -1};
        g.output.assign(size_t(width), -1);
        g.output[0] = 0;
        g.arrival.assign(size_t(width), 0.0);
        return g;
    }

    int add_node(int tf, int ntf) {
        const PrefixNode& a = nodes[size_t(tf)];
        const PrefixNode& b = nodes[size_t(ntf)];
        require(a.lsb == b.msb + 1, "prefix combine is not contiguous: [", a.msb, ":", a.lsb,
                "] o [", b.msb, ":", b.lsb, "]");
        nodes.push_back({a.msb, b.lsb, tf, ntf});
        return int(nodes.size()) - 1;
    }

    int node_span(int id) const { return nodes[size_t(id)].msb - nodes[size_t(id)].lsb + 1; }
};

// ---------------------------------------------------------------------------
// Derived per-node information (depth, liveness, kind, fanout)

struct GraphInfo {
    std::vector<int> depth;
    std::vector<bool> live;
    std::vector<PrefixKind> kind;
    std::vector<int> fo_black, fo_blue; // live prefix-node consumers by kind
    int live_nodes = 0;                 // live non-input prefix nodes
    int max_depth = 0;
};

inline GraphInfo analyze(const PrefixGraph& g) {
    size_t n = g.nodes.size();
    GraphInfo info;
    info.depth.assign(n, -1);
    info.live.assign(n, false);
    info.kind.assign(n, PrefixKind::Dead);
    info.fo_black.assign(n, 0);
    info.fo_blue.assign(n, 0);

    // depth with cycle detection (iterative DFS)
    std::vector<int> state(n, 0);
    std::vector<int> stack;
    for (size_t root = 0; root < n; ++root) {
        if (info.depth[root] >= 0)
            continue;
        stack.push_back(int(root));
        while (!stack.empty()) {
            int id = stack.back();
            const PrefixNode& nd = g.nodes[size_t(id)];
            if (state[size_t(id)] == 0) {
                state[size_t(id)] = 1;
                if (!nd.is_input()) {
                    for (int ch : {nd.tf, nd.ntf}) {
                        require(ch >= 0 && ch < int(n), "prefix node fan-in out of range");
                        require(state[size_t(ch)] != 1, "prefix graph contains a cycle");
                        if (info.depth[size_t(ch)] < 0)
                            stack.push_back(ch);
                    }
                }
            } else {
                stack.pop_back();
                if (state[size_t(id)] == 2)
                    continue;
                state[size_t(id)] = 2;
                if (nd.is_input())
                    info.depth[size_t(id)] = 0;
                else
                    info.depth[size_t(id)] =
                        1 + std::max(info.depth[size_t(nd.tf)], info.depth[size_t(nd.ntf)]);
            }
        }
    }

    // liveness from outputs
    std::vector<int> work;
    for (int b = 0; b < g.width; ++b)
        if (g.output[size_t(b)] >= 0)
            work.push_back(g.output[size_t(b)]);
    for (size_t w = 0; w < work.size(); ++w) {
        int id = work[w];
        if (info.live[size_t(id)])
            continue;
        info.live[size_t(id)] = true;
        const PrefixNode& nd = g.nodes[size_t(id)];
        if (!nd.is_input()) {
            work.push_back(nd.tf);
            work.push_back(nd.ntf);
        }
    }

    // prefix fanout among live nodes; blue = live node no live prefix consumer
    std::vector<int> consumers(n, 0);
    for (size_t id = 0; id < n; ++id) {
        if (!info.live[id] || g.nodes[id].is_input())
            continue;
        consumers[size_t(g.nodes[id].tf)]++;
        consumers[size_t(g.nodes[id].ntf)]++;
    }
    for (size_t id = 0; id < n; ++id) {
        if (!info.live[id]) {
            info.kind[id] = PrefixKind::Dead;
        } else if (g.nodes[id].is_input()) {
            info.kind[id] = PrefixKind::Input;
        } else if (consumers[id] == 0) {
            info.kind[id] = PrefixKind::Blue;
        } else {
            info.kind[id] = PrefixKind::Black;
        }
        if (info.kind[id] == PrefixKind::Black || info.kind[id] == PrefixKind::Blue)
            ++info.live_nodes;
        info.max_depth = std::max(info.max_depth, info.depth[id]);
    }
    for (size_t id = 0; id < n; ++id) {
        if (!info.live[id] || g.nodes[id].is_input())
            continue;
        for (int ch : {g.nodes[id].tf, g.nodes[id].ntf}) {
            if (info.kind[id] == PrefixKind::Blue)
                info.fo_blue[size_t(ch)]++;
            else
                info.fo_black[size_t(ch)]++;
        }
    }
    return info;
}

// Structural validity: contiguous fan-in ranges, acyclicity, one [i:0] output
// per bit. Throws on violation.
inline void validate_graph(const PrefixGraph& g) {
    require(int(g.output.size()) == g.width, "output table size mismatch");
    require(int(g.nodes.size()) >= g.width, "missing pg input nodes");
    for (int i = 0; i < g.width; ++i) {
        const PrefixNode& nd = g.nodes[size_t(i)];
        require(nd.is_input() && nd.msb == i && nd.lsb == i, "node ", i, " is not the pg input ",
                i);
    }
    for (size_t id = size_t(g.width); id < g.nodes.size(); ++id) {
        const PrefixNode& nd = g.nodes[id];
        require(!nd.is_input(), "non-input node expected at id ", id);
        const PrefixNode& tf = g.nodes[size_t(nd.tf)];
        const PrefixNode& ntf = g.nodes[size_t(nd.ntf)];
        require(tf.msb == nd.msb, "tf of node ", id, " does not share its msb");
        require(tf.lsb == ntf.msb + 1, "fan-in ranges of node ", id, " are not contiguous");
        require(ntf.lsb == nd.lsb, "ntf of node ", id, " does not reach the node lsb");
    }
    for (int b = 0; b < g.width; ++b) {
        int id = g.output[size_t(b)];
        require(id >= 0 && id < int(g.nodes.size()), "bit ", b, " has no [", b, ":0] output node");
        require(g.nodes[size_t(id)].msb == b && g.nodes[size_t(id)].lsb == 0,
                "output node of bit ", b, " covers the wrong range");
    }
    analyze(g); // cycle check lives there
}

// Transitive fan-in cone of the [bit:0] output node, ids ascending.
struct Subtree {
    int root = -1;
    std::vector<int> nodes; // cone, ascending ids (inputs included)
    std::vector<bool> in_cone;
};

inline Subtree extract_subtree(const PrefixGraph& g, int bit) {
    require(bit >= 0 && bit < g.width, "extract_subtree: bit out of range");
    Subtree t;
    t.root = g.output[size_t(bit)];
    t.in_cone.assign(g.nodes.size(), false);
    std::vector<int> work{t.root};
    while (!work.empty()) {
        int id = work.back();
        work.pop_back();
        if (t.in_cone[size_t(id)])
            continue;
        t.in_cone[size_t(id)] = true;
        const PrefixNode& nd = g.nodes[size_t(id)];
        if (!nd.is_input()) {
            work.push_back(nd.tf);
            work.push_back(nd.ntf);
        }
    }
    for (size_t id = 0; id < t.in_cone.size(); ++id)
        if (t.in_cone[id])
            t.nodes.push_back(int(id));
    return t;
}

// ---------------------------------------------------------------------------
// FDC timing model: d = k0*F_black + k1*F_blue + k2*N_black + k3*N_blue + b
// over the worst root-to-leaf path of a bit's sub-prefix tree, with fanouts
// counted in the full graph.

struct FdcModel {
    double k0 = 0.5, k1 = 0.5, k2 = 1.0, k3 = 0.5, b = 1.0;
};

struct FdcFeatures {
    double f_black = 0, f_blue = 0;
    int n_black = 0, n_blue = 0;
};

inline double fdc_delay(const FdcFeatures& f, const FdcModel& m) {
    return m.k0 * f.f_black + m.k1 * f.f_blue + m.k2 * double(f.n_black) +
           m.k3 * double(f.n_blue) + m.b;
}

struct FdcPath {
    FdcFeatures features;
    std::vector<int> path; // root first, leaf (pg input) last
};

// One O(n) pass over the cone: per node, the max accumulated delay toward the
// leaves under `model`, then the argmax walk collecting features.
inline FdcPath fdc_critical_path(const PrefixGraph& g, const GraphInfo& info, int bit,
                                 const FdcModel& model) {
    Subtree t = extract_subtree(g, bit);
    std::vector<double> best(g.nodes.size(), 0.0);
    auto contrib = [&](int id) -> double {
        if (g.nodes[size_t(id)].is_input())
            return 0.0;
        if (info.kind[size_t(id)] == PrefixKind::Blue)
            return model.k3;
        return model.k0 * double(info.fo_black[size_t(id)]) +
               model.k1 * double(info.fo_blue[size_t(id)]) + model.k2;
    };
    // topological order within the cone via DFS (ids are not topological once
    // transforms have rewired fan-ins)
    std::vector<int> topo;
    {
        std::vector<int> state(g.nodes.size(), 0);
        std::vector<int> stack{t.root};
        while (!stack.empty()) {
            int id = stack.back();
            const PrefixNode& nd = g.nodes[size_t(id)];
            if (state[size_t(id)] == 0) {
                state[size_t(id)] = 1;
                if (!nd.is_input()) {
                    if (state[size_t(nd.tf)] == 0)
                        stack.push_back(nd.tf);
                    if (state[size_t(nd.ntf)] == 0)
                        stack.push_back(nd.ntf);
                }
            } else {
                stack.pop_back();
                if (state[size_t(id)] == 1) {
                    state[size_t(id)] = 2;
                    topo.push_back(id);
                }
            }
        }
    }
    for (int id : topo) {
        const PrefixNode& nd = g.nodes[size_t(id)];
        double base = nd.is_input() ? 0.0
                                    : std::max(best[size_t(nd.tf)], best[size_t(nd.ntf)]);
        best[size_t(id)] = base + contrib(id);
    }
    FdcPath out;
    int id = t.root;
    while (true) {
        out.path.push_back(id);
        const PrefixNode& nd = g.nodes[size_t(id)];
        if (nd.is_input())
            break;
        if (info.kind[size_t(id)] == PrefixKind::Blue) {
            out.features.n_blue++;
        } else {
            out.features.n_black++;
            out.features.f_black += double(info.fo_black[size_t(id)]);
            out.features.f_blue += double(info.fo_blue[size_t(id)]);
        }
        id = best[size_t(nd.ntf)] >= best[size_t(nd.tf)] ? nd.ntf : nd.tf;
    }
    return out;
}

inline FdcFeatures fdc_features(const PrefixGraph& g, int bit,
                                const FdcModel& model = FdcModel{}) {
    GraphInfo info = analyze(g);
    return fdc_critical_path(g, info, bit, model).features;
}

// ---------------------------------------------------------------------------
// Least-squares fitting

struct FitStats {
    double r2 = 0;
    double mape = 0; // percent
};

// Ordinary least squares with intercept. rows[i] are the regressors of
// sample i. Throws on a rank-deficient design matrix.
inline std::vector<double> linear_fit(const std::vector<std::vector<double>>& rows,
                                      const std::vector<double>& y, FitStats* stats = nullptr) {
    size_t n = rows.size();
    require(n >= 1 && n == y.size(), "linear_fit: bad sample shape");
    size_t k = rows[0].size() + 1; // + intercept
    std::vector<std::vector<long double>> ata(k, std::vector<long double>(k, 0));
    std::vector<long double> aty(k, 0);
    for (size_t i = 0; i < n; ++i) {
        std::vector<long double> x(k, 1.0L);
        for (size_t c = 0; c + 1 < k; ++c)
            x[c] = rows[i][c];
        for (size_t r = 0; r < k; ++r) {
            aty[r] += x[r] * y[i];
            for (size_t c = 0; c < k; ++c)
                ata[r][c] += x[r] * x[c];
        }
    }
    // Gaussian elimination with partial pivoting
    std::vector<size_t> perm(k);
    for (size_t i = 0; i < k; ++i)
        perm[i] = i;
    for (size_t col = 0; col < k; ++col) {
        size_t piv = col;
        for (size_t r = col + 1; r < k; ++r)
            if (std::fabs(double(ata[r][col])) > std::fabs(double(ata[piv][col])))
                piv = r;
        std::swap(ata[col], ata[piv]);
        std::swap(aty[col], aty[piv]);
        require(std::fabs(double(ata[col][col])) > 1e-9,
                "linear_fit: rank-deficient design matrix; provide more diverse samples");
        for (size_t r = 0; r < k; ++r) {
            if (r == col)
                continue;
            long double factor = ata[r][col] / ata[col][col];
            for (size_t c = col; c < k; ++c)
                ata[r][c] -= factor * ata[col][c];
            aty[r] -= factor * aty[col];
        }
    }
    std::vector<double> coef(k);
    for (size_t i = 0; i < k; ++i)
        coef[i] = double(aty[i] / ata[i][i]);
    if (stats) {
        double ybar = 0;
        for (double v : y)
            ybar += v;
        ybar /= double(n);
        double ss_res = 0, ss_tot = 0, mape = 0;
        size_t mape_n = 0;
        for (size_t i = 0; i < n; ++i) {
            double pred = coef[k - 1];
            for (size_t c = 0; c + 1 < k; ++c)
                pred += coef[c] * rows[i][c];
            ss_res += (y[i] - pred) * (y[i] - pred);
            ss_tot += (y[i] - ybar) * (y[i] - ybar);
            if (std::fabs(y[i]) > 1e-12) {
                mape += std::fabs((y[i] - pred) / y[i]);
                ++mape_n;
            }
        }
        stats->r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
        stats->mape = mape_n ? 100.0 * mape / double(mape_n) : 0.0;
    }
    return coef;
}

struct FdcSample {
    FdcFeatures features;
    double delay = 0;
};

// Least squares with k0..k3 kept non-negative (delay must grow with fanout
// and depth): active-set clipping, dropping the most negative coefficient and
// refitting until all remaining ones are admissible.
inline FdcModel fit_fdc(const std::vector<FdcSample>& samples, FitStats* stats = nullptr) {
    require(samples.size() >= 5, "fit_fdc: need at least 5 samples, got ", samples.size());
    std::vector<std::vector<double>> full;
    std::vector<double> y;
    for (const auto& s : samples) {
        full.push_back({s.features.f_black, s.features.f_blue, double(s.features.n_black),
                        double(s.features.n_blue)});
        y.push_back(s.delay);
    }
    std::vector<int> active{0, 1, 2, 3};
    std::vector<double> k(4, 0.0);
    double b = 0;
    while (true) {
        std::vector<std::vector<double>> rows;
        for (const auto& r : full) {
            std::vector<double> row;
            for (int a : active)
                row.push_back(r[size_t(a)]);
            rows.push_back(row);
        }
        std::vector<double> c = linear_fit(rows, y, stats);
        int worst = -1;
        double worst_v = -1e-12;
        for (size_t i = 0; i < active.size(); ++i)
            if (c[i] < worst_v) {
                worst_v = c[i];
                worst = int(i);
            }
        if (worst < 0) {
            k.assign(4, 0.0);
            for (size_t i = 0; i < active.size(); ++i)
                k[size_t(active[i])] = c[i];
            b = c[active.size()];
            break;
        }
        active.erase(active.begin() + worst);
        require(!active.empty(), "fit_fdc: no admissible non-negative fit");
    }
    FdcModel m;
    m.k0 = k[0];
    m.k1 = k[1];
    m.k2 = k[2];
    m.k3 = k[3];
    m.b = b;
    return m;
}

// ---------------------------------------------------------------------------
// Region segmentation and initial structures

struct Regions {
    int r1_end = 0; // region1 = [0, r1_end)
    int r2_end = 0; // region2 = [r1_end, r2_end), region3 = [r2_end, width)
};

// region2 = longest contiguous run of bits arriving within eps of the latest;
// region1/region3 are the slopes on either side (possibly empty).
inline Regions segment_regions(const std::vector<double>& arrival, double eps = 1.5) {
    require(!arrival.empty(), "segment_regions: empty profile");
    double peak = *std::max_element(arrival.begin(), arrival.end());
    int best_lo = 0, best_hi = -1;
    int i = 0, n = int(arrival.size());
    while (i < n) {
        if (arrival[size_t(i)] >= peak - eps) {
            int j = i;
            while (j + 1 < n && arrival[size_t(j + 1)] >= peak - eps)
                ++j;
            if (j - i > best_hi - best_lo) {
                best_lo = i;
                best_hi = j;
            }
            i = j + 1;
        } else {
            ++i;
        }
    }
    return Regions{best_lo, best_hi + 1};
}

namespace detail {

// Sklansky tree over local bits [lo, hi] of g; returns per local bit the node
// covering [bit : lo].
inline std::vector<int> build_sklansky_span(PrefixGraph& g, int lo, int hi) {
    int n = hi - lo + 1;
    std::vector<int> cur(size_t(n), 0);
    for (int x = 0; x < n; ++x)
        cur[size_t(x)] = lo + x; // pg inputs
    for (int level = 1; (1 << (level - 1)) < n; ++level) {
        int half = 1 << (level - 1);
        int mask = (1 << level) - 1;
        for (int x = 0; x < n; ++x) {
            if ((x & half) == 0)
                continue;
            int block_start = x & ~mask;
            int partner = block_start + half - 1;
            cur[size_t(x)] = g.add_node(cur[size_t(x)], cur[size_t(partner)]);
        }
    }
    return cur;
}

} // namespace detail

struct InitialCpaOptions {
    double block_step = 1.5; // region-3 block granularity in arrival units
};

// Region1: serial ripple chain. Region2: Sklansky over its bits, combined
// with region1's final carry. Region3: carry-increment blocks sized by the
// arrival slope, rippling one node per block.
inline PrefixGraph build_initial_cpa(const Regions& r, int width,
                                     const std::vector<double>& arrival,
                                     const InitialCpaOptions& opts = {}) {
    require(int(arrival.size()) == width, "arrival profile width mismatch");
    require(r.r1_end >= 0 && r.r1_end <= r.r2_end && r.r2_end <= width,
            "regions do not partition the width");
    PrefixGraph g = PrefixGraph::inputs_only(width);
    g.arrival = arrival;

    int prev = -1; // node covering [i-1 : 0]
    for (int i = 0; i < r.r1_end; ++i) {
        int node = i == 0 ? 0 : g.add_node(i, prev);
        g.output[size_t(i)] = node;
        prev = node;
    }
    if (r.r2_end > r.r1_end) {
        int lo = r.r1_end, hi = r.r2_end - 1;
        std::vector<int> local = detail::build_sklansky_span(g, lo, hi);
        for (int x = 0; x <= hi - lo; ++x) {
            int node = local[size_t(x)];
            if (prev >= 0)
                node = g.add_node(node, prev);
            g.output[size_t(lo + x)] = node;
        }
        prev = g.output[size_t(hi)];
    }
    if (width > r.r2_end) {
        require(prev >= 0, "region3 requires a carry from the lower regions");
        double top = arrival[size_t(r.r2_end - 1 >= 0 ? r.r2_end - 1 : 0)];
        int i = r.r2_end;
        while (i < width) {
            // block = run of bits within one arrival step
            int bhi = i;
            auto key = [&](int bit) {
                return int(std::floor((top - arrival[size_t(bit)]) /
                                          std::max(opts.block_step, 1e-9) +
                                      1e-9));
            };
            while (bhi + 1 < width && key(bhi + 1) == key(i))
                ++bhi;
            int chain = -1;
            for (int b = i; b <= bhi; ++b) {
                chain = b == i ? b : g.add_node(b, chain);
                g.output[size_t(b)] = g.add_node(chain, prev);
            }
            prev = g.output[size_t(bhi)];
            i = bhi + 1;
        }
    }
    validate_graph(g);
    return g;
}

// Full-width Sklansky graph (the node-count baseline for area comparisons).
inline PrefixGraph build_sklansky(int width, const std::vector<double>& arrival = {}) {
    PrefixGraph g = PrefixGraph::inputs_only(width);
    if (!arrival.empty()) {
        require(int(arrival.size()) == width, "arrival profile width mismatch");
        g.arrival = arrival;
    }
    std::vector<int> local = detail::build_sklansky_span(g, 0, width - 1);
    for (int x = 0; x < width; ++x)
        g.output[size_t(x)] = local[size_t(x)];
    validate_graph(g);
    return g;
}

inline PrefixGraph build_ripple(int width, const std::vector<double>& arrival = {}) {
    Regions r{width, width};
    std::vector<double> a = arrival.empty() ? std::vector<double>(size_t(width), 0.0) : arrival;
    return build_initial_cpa(r, width, a);
}

// ---------------------------------------------------------------------------
// Transformations (Alg. "GraphOpt"): insert s = tf(p) o tf(ntf(p)), then
// tf(p) <- s, ntf(p) <- ntf(ntf(p)). Covered range of p is unchanged and the
// node count grows by exactly one.

struct TransformRecord {
    int p = -1, s = -1, old_tf = -1, old_ntf = -1;
};

inline bool graph_opt_applicable(const PrefixGraph& g, int p) {
    if (p < 0 || p >= int(g.nodes.size()) || g.nodes[size_t(p)].is_input())
        return false;
    return !g.nodes[size_t(g.nodes[size_t(p)].ntf)].is_input();
}

inline TransformRecord apply_graph_opt(PrefixGraph& g, int p) {
    require(graph_opt_applicable(g, p), "transform inapplicable at node ", p);
    PrefixNode& pn = g.nodes[size_t(p)];
    int nt = pn.ntf;
    TransformRecord rec{p, -1, pn.tf, pn.ntf};
    int s = g.add_node(pn.tf, g.nodes[size_t(nt)].tf);
    rec.s = s;
    g.nodes[size_t(p)].tf = s;
    g.nodes[size_t(p)].ntf = g.nodes[size_t(nt)].ntf;
    return rec;
}

inline void undo_graph_opt(PrefixGraph& g, const TransformRecord& rec) {
    require(rec.s == int(g.nodes.size()) - 1, "undo out of order");
    g.nodes[size_t(rec.p)].tf = rec.old_tf;
    g.nodes[size_t(rec.p)].ntf = rec.old_ntf;
    g.nodes.pop_back();
}

// Mirrored re-bracketing: where the trivial side is the deep one, unpeel it:
// with tf(p) = (a, b), set tf(p) <- a and ntf(p) <- new node (b, ntf(p)).
// Also adds exactly one node; the exact inverse of the transform above.
inline bool inverse_opt_applicable(const PrefixGraph& g, int p) {
    if (p < 0 || p >= int(g.nodes.size()) || g.nodes[size_t(p)].is_input())
        return false;
    return !g.nodes[size_t(g.nodes[size_t(p)].tf)].is_input();
}

inline int depth_after_inverse_opt(const PrefixGraph& g, const GraphInfo& info, int p) {
    const PrefixNode& pn = g.nodes[size_t(p)];
    const PrefixNode& tf = g.nodes[size_t(pn.tf)];
    int merged = 1 + std::max(info.depth[size_t(tf.ntf)], info.depth[size_t(pn.ntf)]);
    return 1 + std::max(info.depth[size_t(tf.tf)], merged);
}

inline TransformRecord apply_inverse_opt(PrefixGraph& g, int p) {
    require(inverse_opt_applicable(g, p), "inverse transform inapplicable at node ", p);
    PrefixNode& pn = g.nodes[size_t(p)];
    int old_tf = pn.tf, old_ntf = pn.ntf;
    const PrefixNode& tf = g.nodes[size_t(old_tf)];
    int merged = g.add_node(tf.ntf, old_ntf);
    g.nodes[size_t(p)].tf = g.nodes[size_t(old_tf)].tf;
    g.nodes[size_t(p)].ntf = merged;
    return {p, merged, old_tf, old_ntf};
}

// Depth of p after the transform, without applying it.
inline int depth_after_opt(const PrefixGraph& g, const GraphInfo& info, int p) {
    const PrefixNode& pn = g.nodes[size_t(p)];
    const PrefixNode& nt = g.nodes[size_t(pn.ntf)];
    int s_depth = 1 + std::max(info.depth[size_t(pn.tf)], info.depth[size_t(nt.tf)]);
    return 1 + std::max(s_depth, info.depth[size_t(nt.ntf)]);
}

// depth-opt: applicable only where it strictly reduces the node's depth
// (which therefore never increases any depth in the graph)
inline std::optional<TransformRecord> depth_opt(PrefixGraph& g, int p) {
    if (!graph_opt_applicable(g, p))
        return std::nullopt;
    GraphInfo info = analyze(g);
    if (depth_after_opt(g, info, p) >= info.depth[size_t(p)])
        return std::nullopt;
    return apply_graph_opt(g, p);
}

inline std::optional<TransformRecord> fanout_opt(PrefixGraph& g, int p) {
    if (!graph_opt_applicable(g, p))
        return std::nullopt;
    return apply_graph_opt(g, p);
}

// ---------------------------------------------------------------------------
// Timing-driven refinement loop

struct OptimizeOptions {
    int max_transforms = 0;               // 0: defaults to 10 * width
    bool fanout_pick_level_siblings = false; // alternative "maximum siblings" reading
    // invoked after every kept transform (validation / equivalence hooks)
    std::function<void(const PrefixGraph&)> on_transform;
};

struct OptimizeReport {
    int transforms = 0;
    int depth_opts = 0;
    int fanout_opts = 0;
    bool all_met = false;
    std::vector<double> fdc; // final per-bit FDC delay
};

inline int depth_floor(int span) {
    int d = 0;
    while ((1 << d) < span)
        ++d;
    return d; // ceil(log2(span))
}

// Iterates MSB to LSB over bits violating their FDC budget c[j]; applies
// depth-opt while the bit's subtree exceeds ceil(log2(span))+1, fanout-opt
// otherwise. Best effort: stops at the transform cap or when no transform
// helps.
inline OptimizeReport optimize_cpa(PrefixGraph& g, const std::vector<double>& constraints,
                                   const FdcModel& model, const OptimizeOptions& opts = {}) {
    require(int(constraints.size()) == g.width, "constraint vector width mismatch");
    int cap = opts.max_transforms > 0 ? opts.max_transforms : 10 * g.width;
    OptimizeReport rep;

    auto bit_delay = [&](const GraphInfo& info, int bit) {
        return fdc_delay(fdc_critical_path(g, info, bit, model).features, model);
    };

    bool progress = true;
    while (progress && rep.transforms < cap) {
        progress = false;
        for (int j = g.width - 1; j >= 0 && rep.transforms < cap; --j) {
            GraphInfo info = analyze(g);
            double dj = bit_delay(info, j);
            if (dj <= constraints[size_t(j)] + 1e-9)
                continue;
            Subtree t = extract_subtree(g, j);
            int span = j + 1;
            int root_depth = info.depth[size_t(t.root)];
            bool try_depth = root_depth > depth_floor(span) + 1;
            bool applied = false;
            if (try_depth) {
                // walk the deepest root-to-leaf path; restructure its
                // bottom-most strictly-improving node so chains collapse
                // bottom-up instead of serializing at the root
                int best = -1;
                bool best_inverse = false;
                int id = t.root;
                while (!g.nodes[size_t(id)].is_input()) {
                    if (graph_opt_applicable(g, id) &&
                        depth_after_opt(g, info, id) < info.depth[size_t(id)]) {
                        best = id; // deeper along the walk = lower depth value
                        best_inverse = false;
                    } else if (inverse_opt_applicable(g, id) &&
                               depth_after_inverse_opt(g, info, id) < info.depth[size_t(id)]) {
                        best = id;
                        best_inverse = true;
                    }
                    const PrefixNode& nd = g.nodes[size_t(id)];
                    id = info.depth[size_t(nd.ntf)] >= info.depth[size_t(nd.tf)] ? nd.ntf
                                                                                 : nd.tf;
                }
                if (best >= 0) {
                    if (best_inverse)
                        apply_inverse_opt(g, best);
                    else
                        apply_graph_opt(g, best);
                    ++rep.depth_opts;
                    applied = true;
                } else {
                    // no direct gain: cascade depth-neutral transforms down the
                    // critical path (each sinks the shallow trivial fan-in one
                    // level); keep the sequence only if it ends in a strict gain
                    std::vector<TransformRecord> trail;
                    int p = t.root;
                    GraphInfo cur = info;
                    bool gained = false;
                    while (int(trail.size()) <= root_depth + 2) {
                        if (g.nodes[size_t(p)].is_input() || !graph_opt_applicable(g, p))
                            break;
                        const PrefixNode& pn = g.nodes[size_t(p)];
                        if (cur.depth[size_t(pn.ntf)] < cur.depth[size_t(pn.tf)]) {
                            // critical path continues on the trivial side; the
                            // transform cannot shorten it from here
                            p = pn.tf;
                            continue;
                        }
                        int before = cur.depth[size_t(p)];
                        int after = depth_after_opt(g, cur, p);
                        if (after < before) {
                            trail.push_back(apply_graph_opt(g, p));
                            gained = true;
                            break;
                        }
                        if (after > before)
                            break;
                        TransformRecord rec = apply_graph_opt(g, p);
                        trail.push_back(rec);
                        cur = analyze(g);
                        p = rec.s;
                    }
                    if (gained) {
                        rep.depth_opts += int(trail.size());
                        applied = true;
                    } else {
                        for (auto it = trail.rbegin(); it != trail.rend(); ++it)
                            undo_graph_opt(g, *it);
                    }
                }
            }
            if (!applied) {
                // fanout-opt on the FDC-critical path: relieve the most loaded
                // ntf driver (or the node at the most populated depth level
                // under the alternative reading); keep only strict improvements
                FdcPath crit = fdc_critical_path(g, info, j, model);
                std::vector<int> cands;
                for (int id : crit.path)
                    if (graph_opt_applicable(g, id))
                        cands.push_back(id);
                auto score = [&](int id) {
                    const PrefixNode& nd = g.nodes[size_t(id)];
                    if (opts.fanout_pick_level_siblings) {
                        int lvl = info.depth[size_t(id)];
                        int siblings = 0;
                        for (size_t o = 0; o < g.nodes.size(); ++o)
                            if (info.live[o] && info.depth[o] == lvl)
                                ++siblings;
                        return siblings;
                    }
                    return info.fo_black[size_t(nd.ntf)] + info.fo_blue[size_t(nd.ntf)];
                };
                std::stable_sort(cands.begin(), cands.end(),
                                 [&](int a, int b) { return score(a) > score(b); });
                for (int id : cands) {
                    TransformRecord rec = apply_graph_opt(g, id);
                    GraphInfo after = analyze(g);
                    double dj2 = bit_delay(after, j);
                    // a fanout move must improve this bit without pushing any
                    // bit past its depth guard (else depth work ping-pongs)
                    bool depth_safe = true;
                    for (int b = 0; b < g.width && depth_safe; ++b) {
                        int db = after.depth[size_t(g.output[size_t(b)])];
                        int was = info.depth[size_t(g.output[size_t(b)])];
                        if (db > std::max(was, depth_floor(b + 1) + 1))
                            depth_safe = false;
                    }
                    if (depth_safe && dj2 < dj - 1e-9) {
                        ++rep.fanout_opts;
                        applied = true;
                        break;
                    }
                    undo_graph_opt(g, rec);
                }
            }
            if (applied) {
                ++rep.transforms;
                progress = true;
                if (opts.on_transform)
                    opts.on_transform(g);
            }
        }
        // converged when a full sweep makes no change
    }
    GraphInfo info = analyze(g);
    rep.all_met = true;
    rep.fdc.resize(size_t(g.width));
    for (int j = 0; j < g.width; ++j) {
        rep.fdc[size_t(j)] = bit_delay(info, j);
        if (rep.fdc[size_t(j)] > constraints[size_t(j)] + 1e-9)
            rep.all_met = false;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Functional evaluation (64 test vectors per call via bit-lanes)

struct GraphEval64 {
    std::vector<uint64_t> sum;  // per bit
    uint64_t carry_out = 0;
};

inline GraphEval64 eval_prefix_graph64(const PrefixGraph& g, const std::vector<uint64_t>& a,
                                       const std::vector<uint64_t>& b) {
    size_t n = g.nodes.size();
    std::vector<uint64_t> G(n), P(n);
    std::vector<char> done(n, 0);
    for (int i = 0; i < g.width; ++i) {
        G[size_t(i)] = a[size_t(i)] & b[size_t(i)];
        P[size_t(i)] = a[size_t(i)] ^ b[size_t(i)];
        done[size_t(i)] = 1;
    }
    std::vector<int> stack;
    for (int bit = 0; bit < g.width; ++bit) {
        stack.push_back(g.output[size_t(bit)]);
        while (!stack.empty()) {
            int id = stack.back();
            if (done[size_t(id)]) {
                stack.pop_back();
                continue;
            }
            const PrefixNode& nd = g.nodes[size_t(id)];
            if (!done[size_t(nd.tf)] || !done[size_t(nd.ntf)]) {
                if (!done[size_t(nd.tf)])
                    stack.push_back(nd.tf);
                if (!done[size_t(nd.ntf)])
                    stack.push_back(nd.ntf);
                continue;
            }
            G[size_t(id)] = G[size_t(nd.tf)] | (P[size_t(nd.tf)] & G[size_t(nd.ntf)]);
            P[size_t(id)] = P[size_t(nd.tf)] & P[size_t(nd.ntf)];
            done[size_t(id)] = 1;
            stack.pop_back();
        }
    }
    GraphEval64 out;
    out.sum.resize(size_t(g.width));
    uint64_t carry = 0; // c_in = 0
    for (int i = 0; i < g.width; ++i) {
        out.sum[size_t(i)] = P[size_t(i)] ^ carry;
        carry = G[size_t(g.output[size_t(i)])];
    }
    out.carry_out = carry;
    return out;
}

// Randomized adder equivalence for wide graphs (64 vectors per batch).
inline bool prefix_graph_adds_on_random(const PrefixGraph& g, int batches, uint64_t seed) {
    require(g.width <= 63, "random prefix check limited to width 63");
    Rng rng(seed);
    for (int bt = 0; bt < batches; ++bt) {
        std::vector<uint64_t> av(size_t(g.width), 0), bv(size_t(g.width), 0);
        std::vector<uint64_t> a(64), b(64);
        for (int l = 0; l < 64; ++l) {
            a[size_t(l)] = rng.next() & ((1ull << g.width) - 1);
            b[size_t(l)] = rng.next() & ((1ull << g.width) - 1);
            for (int bit = 0; bit < g.width; ++bit) {
                av[size_t(bit)] |= ((a[size_t(l)] >> bit) & 1) << l;
                bv[size_t(bit)] |= ((b[size_t(l)] >> bit) & 1) << l;
            }
        }
        GraphEval64 ev = eval_prefix_graph64(g, av, bv);
        for (int l = 0; l < 64; ++l) {
            uint64_t got = 0;
            for (int bit = 0; bit < g.width; ++bit)
                got |= ((ev.sum[size_t(bit)] >> l) & 1) << bit;
            got |= ((ev.carry_out >> l) & 1) << g.width;
            if (got != a[size_t(l)] + b[size_t(l)])
                return false;
        }
    }
    return true;
}

// Exhaustive adder equivalence for widths where 2^(2W) is tractable.
inline bool prefix_graph_adds_correctly(const PrefixGraph& g, uint64_t* counterexample = nullptr) {
    int w = g.width;
    require(w <= 10, "exhaustive prefix check limited to width 10");
    uint64_t total = 1ull << (2 * w);
    for (uint64_t base = 0; base < total; base += 64) {
        std::vector<uint64_t> av(size_t(w), 0), bv(size_t(w), 0);
        uint64_t lanes = std::min<uint64_t>(64, total - base);
        for (uint64_t l = 0; l < lanes; ++l) {
            uint64_t idx = base + l;
            uint64_t a = idx & ((1ull << w) - 1), b = idx >> w;
            for (int bit = 0; bit < w; ++bit) {
                av[size_t(bit)] |= ((a >> bit) & 1) << l;
                bv[size_t(bit)] |= ((b >> bit) & 1) << l;
            }
        }
        GraphEval64 ev = eval_prefix_graph64(g, av, bv);
        for (uint64_t l = 0; l < lanes; ++l) {
            uint64_t idx = base + l;
            uint64_t a = idx & ((1ull << w) - 1), b = idx >> w;
            uint64_t got = 0;
            for (int bit = 0; bit < w; ++bit)
                got |= ((ev.sum[size_t(bit)] >> l) & 1) << bit;
            got |= ((ev.carry_out >> l) & 1) << w;
            if (got != a + b) {
                if (counterexample)
                    *counterexample = idx;
                return false;
            }
        }
    }
    return true;
}

} // namespace dpgen
