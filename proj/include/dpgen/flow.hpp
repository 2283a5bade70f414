#pragma once

// End-to-end generation pipelines shared by the CLI and the test suites:
// plan -> stage assignment -> interconnect -> CPA refinement -> netlist,
// plus serialization of every intermediate artifact.

#include <fstream>

#include "dpgen/ct_assign.hpp"
#include "dpgen/ct_plan.hpp"
#include "dpgen/ct_wire.hpp"
#include "dpgen/cpa.hpp"
#include "dpgen/netlist.hpp"
#include "dpgen/ppg.hpp"
#include "dpgen/verify.hpp"
#include "json.hpp"

namespace dpgen {

enum class Strategy { Area, Timing, Tradeoff };

inline const char* strategy_name(Strategy s) {
    switch (s) {
    case Strategy::Area: return "area";
    case Strategy::Timing: return "timing";
    case Strategy::Tradeoff: return "tradeoff";
    }
    return "?";
}

inline Strategy strategy_from_name(const std::string& s) {
    if (s == "area")
        return Strategy::Area;
    if (s == "timing")
        return Strategy::Timing;
    if (s == "tradeoff")
        return Strategy::Tradeoff;
    fail("unknown strategy '", s, "' (expected area, timing or tradeoff)");
}

enum class SolverChoice { Internal, Greedy, External };

struct GenOptions {
    int width = 8;
    bool fused = false;
    int acc_width = -1;      // fused only; -1 = default 2N
    double acc_arrival = 0;  // arrival time of accumulator bits at the CT
    Strategy strategy = Strategy::Tradeoff;
    double target_delay = 0; // 0: derived from the strategy
    SolverChoice solver = SolverChoice::Internal;
    std::string external_solver;
    double time_limit_s = 3600;
    uint64_t seed = 1;
    std::string work_dir = ".";

    DelayTable delays;
    FdcModel fdc;
    AreaWeights areas;
    GateTiming gate_timing;
    double region_eps = 1.5;
    double block_step = 1.5;
    int cpa_transform_cap = 0; // 0: optimize_cpa default
};

struct GenResult {
    PartialProductMatrix ppm;
    std::vector<ColumnPlan> plans;
    StageSolveResult stage;
    WireSolveResult wire;
    WiringEval ct_eval;
    int cpa_lo = 0;
    std::vector<double> cpa_profile;
    Regions regions;
    PrefixGraph cpa;
    OptimizeReport cpa_opt;
    double target_delay = 0;
    GateNetlist netlist;
    NetlistReport report;
    std::vector<std::string> warnings;
};

inline ilp::SolveOptions make_solve_options(const GenOptions& o) {
    ilp::SolveOptions so;
    so.time_limit_s = o.time_limit_s;
    so.work_dir = o.work_dir;
    if (o.solver == SolverChoice::External)
        so.external_solver = o.external_solver;
    return so;
}

// CPA input arrival profile over the two-row columns: the latest of each
// column's final bits.
inline std::vector<double> cpa_arrival_profile(const StageAssignment& a, const WiringEval& ev,
                                               int lo) {
    std::vector<double> profile;
    for (int j = lo; j < a.columns; ++j) {
        double m = 0;
        for (double v : ev.finals[size_t(j)])
            m = std::max(m, v);
        profile.push_back(m);
    }
    return profile;
}

inline int cpa_low_column(const StageAssignment& a) {
    for (int j = 0; j < a.columns; ++j)
        if (a.final_bits(j) >= 2)
            return j;
    return a.columns;
}

// Strategy targets: `timing` pushes every bit toward its depth floor, `area`
// keeps the initial structure, `tradeoff` aims halfway between the two.
inline double derive_target_delay(Strategy strategy, const std::vector<double>& arrivals,
                                  const PrefixGraph& initial, const FdcModel& fdc) {
    int w = initial.width;
    double d0 = 0;  // initial structure
    double dmin = 0; // depth-floor estimate, fanout-free
    GraphInfo info = analyze(initial);
    for (int j = 0; j < w; ++j) {
        double fj = fdc_delay(fdc_critical_path(initial, info, j, fdc).features, fdc);
        d0 = std::max(d0, arrivals[size_t(j)] + fj);
        double floor_delay = fdc.k2 * double(depth_floor(j + 1) + 1) + fdc.b;
        dmin = std::max(dmin, arrivals[size_t(j)] + floor_delay);
    }
    switch (strategy) {
    case Strategy::Area: return d0 + 1.0;
    case Strategy::Timing: return dmin;
    case Strategy::Tradeoff: return (d0 + dmin) / 2.0;
    }
    return d0;
}

inline GenResult generate(const GenOptions& o) {
    GenResult r;
    require(o.width >= 2, "width must be >= 2");
    r.ppm = generate_and_array(o.width);
    if (o.fused) {
        int aw = o.acc_width < 0 ? 2 * o.width : o.acc_width;
        std::string warn;
        r.ppm = inject_accumulator(r.ppm, aw, &warn);
        if (!warn.empty())
            r.warnings.push_back(warn);
    }
    r.plans = plan_compressors(r.ppm);

    ilp::SolveOptions so = make_solve_options(o);
    if (o.solver == SolverChoice::Greedy) {
        r.stage.assignment = greedy_assignment(r.plans);
        r.stage.status = ilp::Status::Feasible;
        r.stage.solved_s = r.stage.assignment.stage_count;
        r.warnings.push_back("stage assignment from the greedy fallback (not stage-proven)");
    } else {
        r.stage = solve_stage_assignment(r.plans, so);
        if (r.stage.status == ilp::Status::Feasible)
            r.warnings.push_back("stage ILP hit its budget; best incumbent kept");
        if (r.stage.status == ilp::Status::Infeasible)
            throw InfeasibleError("stage assignment ILP infeasible");
    }
    const StageAssignment& assign = r.stage.assignment;

    ArrivalProfile inputs = zero_arrivals(assign);
    if (o.fused && o.acc_arrival != 0) {
        for (int j = 0; j < assign.columns && j < r.ppm.column_count(); ++j)
            for (size_t b = 0; b < r.ppm.columns[size_t(j)].size(); ++b)
                if (r.ppm.columns[size_t(j)][b].name.rfind("acc_", 0) == 0)
                    inputs[size_t(j)][b] = o.acc_arrival;
    }
    if (o.solver == SolverChoice::Greedy) {
        r.wire.wiring = greedy_wiring(assign, o.delays, inputs);
        r.wire.status = ilp::Status::Feasible;
    } else {
        r.wire = solve_wiring(assign, o.delays, inputs, so);
        if (r.wire.status == ilp::Status::Feasible)
            r.warnings.push_back("wiring ILP hit its budget; best incumbent kept");
    }
    r.ct_eval = evaluate_wiring(assign, r.wire.wiring, o.delays, inputs);

    r.cpa_lo = cpa_low_column(assign);
    r.cpa_profile = cpa_arrival_profile(assign, r.ct_eval, r.cpa_lo);
    int span = assign.columns - r.cpa_lo;
    require(span >= 1, "degenerate design: no CPA columns");
    r.regions = segment_regions(r.cpa_profile, o.region_eps);
    r.cpa = build_initial_cpa(r.regions, span, r.cpa_profile, {o.block_step});

    r.target_delay = o.target_delay > 0
                         ? o.target_delay
                         : derive_target_delay(o.strategy, r.cpa_profile, r.cpa, o.fdc);
    std::vector<double> constraints(size_t(span), 0.0);
    for (int j = 0; j < span; ++j)
        constraints[size_t(j)] = r.target_delay - r.cpa_profile[size_t(j)];
    OptimizeOptions oo;
    oo.max_transforms = o.cpa_transform_cap;
    r.cpa_opt = optimize_cpa(r.cpa, constraints, o.fdc, oo);
    validate_graph(r.cpa);

    r.netlist = elaborate(r.ppm, assign, r.wire.wiring, r.cpa);
    r.report = report(r.netlist, o.gate_timing, o.areas);
    return r;
}

// Standalone prefix adder generation (uniform or supplied arrival profile).
struct AdderOptions {
    int width = 16;
    Strategy strategy = Strategy::Tradeoff;
    double target_delay = 0;
    std::vector<double> profile; // empty: all zero
    FdcModel fdc;
    AreaWeights areas;
    GateTiming gate_timing;
    double region_eps = 1.5;
    double block_step = 1.5;
};

struct AdderResult {
    std::vector<double> profile;
    Regions regions;
    PrefixGraph graph;
    OptimizeReport opt;
    double target_delay = 0;
    GateNetlist netlist;
    NetlistReport report;
};

inline AdderResult generate_adder(const AdderOptions& o) {
    AdderResult r;
    require(o.width >= 1, "adder width must be >= 1");
    r.profile = o.profile.empty() ? std::vector<double>(size_t(o.width), 0.0) : o.profile;
    require(int(r.profile.size()) == o.width, "profile width mismatch");
    r.regions = segment_regions(r.profile, o.region_eps);
    r.graph = build_initial_cpa(r.regions, o.width, r.profile, {o.block_step});
    r.target_delay = o.target_delay > 0
                         ? o.target_delay
                         : derive_target_delay(o.strategy, r.profile, r.graph, o.fdc);
    std::vector<double> constraints(size_t(o.width), 0.0);
    for (int j = 0; j < o.width; ++j)
        constraints[size_t(j)] = r.target_delay - r.profile[size_t(j)];
    r.opt = optimize_cpa(r.graph, constraints, o.fdc);
    validate_graph(r.graph);
    r.netlist = elaborate_adder(r.graph);
    r.report = report(r.netlist, o.gate_timing, o.areas);
    return r;
}

// ---------------------------------------------------------------------------
// Serialization of the intermediate artifacts

inline nlohmann::ordered_json plans_to_json(const std::vector<ColumnPlan>& plans) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& p : plans) {
        nlohmann::ordered_json e;
        e["pp"] = p.pp;
        e["f"] = p.f;
        e["h"] = p.h;
        e["carry_in"] = p.carry_in;
        e["carry_out"] = p.carry_out;
        e["outputs"] = p.outputs;
        arr.push_back(e);
    }
    return arr;
}

inline nlohmann::ordered_json assignment_to_json(const StageAssignment& a) {
    nlohmann::ordered_json j;
    j["stages"] = a.stage_count;
    j["columns"] = a.columns;
    j["source"] = a.source;
    j["optimal"] = a.optimal;
    j["f"] = a.f;
    j["h"] = a.h;
    j["pp"] = a.pp;
    return j;
}

inline StageAssignment assignment_from_json(const nlohmann::json& j) {
    StageAssignment a;
    a.stage_count = j.at("stages").get<int>();
    a.columns = j.at("columns").get<int>();
    a.source = j.value("source", "json");
    a.optimal = j.value("optimal", false);
    a.f = j.at("f").get<std::vector<std::vector<int>>>();
    a.h = j.at("h").get<std::vector<std::vector<int>>>();
    a.pp = j.at("pp").get<std::vector<std::vector<int>>>();
    return a;
}

inline nlohmann::ordered_json wiring_to_json(const WiringPlan& w) {
    nlohmann::ordered_json j;
    j["source"] = w.source;
    j["optimal"] = w.optimal;
    j["objective"] = w.objective;
    j["perm"] = w.perm;
    return j;
}

inline WiringPlan wiring_from_json(const nlohmann::json& j) {
    WiringPlan w;
    w.source = j.value("source", "json");
    w.optimal = j.value("optimal", false);
    w.objective = j.value("objective", 0.0);
    w.perm = j.at("perm").get<std::vector<std::vector<std::vector<int>>>>();
    return w;
}

inline nlohmann::ordered_json prefix_to_json(const PrefixGraph& g) {
    nlohmann::ordered_json j;
    j["width"] = g.width;
    j["arrival"] = g.arrival;
    nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
    for (size_t id = size_t(g.width); id < g.nodes.size(); ++id) {
        nlohmann::ordered_json e;
        e["msb"] = g.nodes[id].msb;
        e["lsb"] = g.nodes[id].lsb;
        e["tf"] = g.nodes[id].tf;
        e["ntf"] = g.nodes[id].ntf;
        nodes.push_back(e);
    }
    j["nodes"] = nodes;
    j["output"] = g.output;
    return j;
}

inline PrefixGraph prefix_from_json(const nlohmann::json& j) {
    PrefixGraph g = PrefixGraph::inputs_only(j.at("width").get<int>());
    g.arrival = j.at("arrival").get<std::vector<double>>();
    for (const auto& e : j.at("nodes")) {
        int id = g.add_node(e.at("tf").get<int>(), e.at("ntf").get<int>());
        require(g.nodes[size_t(id)].msb == e.at("msb").get<int>() &&
                    g.nodes[size_t(id)].lsb == e.at("lsb").get<int>(),
                "prefix node range mismatch in JSON");
    }
    g.output = j.at("output").get<std::vector<int>>();
    validate_graph(g);
    return g;
}

inline std::string prefix_to_dot(const PrefixGraph& g) {
    GraphInfo info = analyze(g);
    std::string out = "digraph prefix {\n  rankdir=BT;\n";
    for (size_t id = 0; id < g.nodes.size(); ++id) {
        if (!info.live[id])
            continue;
        const PrefixNode& nd = g.nodes[id];
        const char* shade = info.kind[id] == PrefixKind::Blue    ? "lightblue"
                            : info.kind[id] == PrefixKind::Black ? "gray30"
                                                                 : "white";
        out += cat("  n", id, " [label=\"[", nd.msb, ":", nd.lsb, "]\", style=filled, fillcolor=",
                   shade, info.kind[id] == PrefixKind::Black ? ", fontcolor=white" : "", "];\n");
    }
    for (size_t id = size_t(g.width); id < g.nodes.size(); ++id) {
        if (!info.live[id])
            continue;
        out += cat("  n", g.nodes[id].tf, " -> n", id, ";\n");
        out += cat("  n", g.nodes[id].ntf, " -> n", id, ";\n");
    }
    out += "}\n";
    return out;
}

inline nlohmann::ordered_json report_to_json(const GenResult& r, const GenOptions& o) {
    nlohmann::ordered_json j;
    j["design"] = r.netlist.name;
    j["width"] = o.width;
    j["fused"] = o.fused;
    if (o.fused)
        j["acc_width"] = r.ppm.acc_width;
    j["strategy"] = strategy_name(o.strategy);
    j["seed"] = o.seed;
    j["plan"] = {{"total_3_2", total_f(r.plans)},
                 {"total_2_2", total_h(r.plans)},
                 {"compressor_area", plan_area(r.plans)},
                 {"stage_floor", min_stage_bound(std::max(1, r.ppm.max_height()))}};
    j["stage"] = {{"count", r.stage.assignment.stage_count},
                  {"solved_s", r.stage.solved_s},
                  {"status", ilp::status_name(r.stage.status)},
                  {"source", r.stage.assignment.source}};
    j["wiring"] = {{"critical_delay", r.ct_eval.max_delay},
                   {"status", ilp::status_name(r.wire.status)},
                   {"source", r.wire.wiring.source}};
    GraphInfo info = analyze(r.cpa);
    j["cpa"] = {{"span", r.cpa.width},
                {"low_column", r.cpa_lo},
                {"regions", {r.regions.r1_end, r.regions.r2_end, r.cpa.width}},
                {"target_delay", r.target_delay},
                {"transforms", r.cpa_opt.transforms},
                {"constraints_met", r.cpa_opt.all_met},
                {"prefix_nodes", info.live_nodes},
                {"depth", info.max_depth}};
    j["netlist"] = {{"gates", r.netlist.gate_count()},
                    {"area", r.report.area},
                    {"critical_path", r.report.critical_path}};
    nlohmann::ordered_json arrivals = nlohmann::ordered_json::array();
    for (double v : r.cpa_profile)
        arrivals.push_back(v);
    j["cpa_arrival_profile"] = arrivals;
    j["warnings"] = r.warnings;
    return j;
}

// Design bundle: everything needed to re-verify or re-report a generated
// design without re-running the solvers.
inline nlohmann::ordered_json bundle_to_json(const GenResult& r, const GenOptions& o) {
    nlohmann::ordered_json j;
    j["schema"] = "dpgen-bundle";
    j["version"] = 1;
    j["width"] = o.width;
    j["fused"] = o.fused;
    j["acc_width"] = r.ppm.acc_width;
    j["seed"] = o.seed;
    j["strategy"] = strategy_name(o.strategy);
    j["plans"] = plans_to_json(r.plans);
    j["assignment"] = assignment_to_json(r.stage.assignment);
    j["wiring"] = wiring_to_json(r.wire.wiring);
    j["cpa"] = prefix_to_json(r.cpa);
    j["report"] = report_to_json(r, o);
    return j;
}

// ---------------------------------------------------------------------------
// Random-wiring distribution export: CSV plus a simple SVG histogram.

inline std::string distribution_to_csv(const WiringDistribution& d) {
    std::string out = "trial,delay\n";
    for (size_t i = 0; i < d.delays.size(); ++i)
        out += cat(i, ",", d.delays[i], "\n");
    return out;
}

inline std::string distribution_to_svg(const WiringDistribution& d, int bins = 30) {
    double lo = d.min, hi = d.max;
    if (hi <= lo)
        hi = lo + 1;
    std::vector<int> counts(size_t(bins), 0);
    for (double v : d.delays) {
        int b = int((v - lo) / (hi - lo) * bins);
        counts[size_t(std::min(b, bins - 1))]++;
    }
    int peak = 1;
    for (int c : counts)
        peak = std::max(peak, c);
    int W = 640, H = 360, margin = 40;
    std::string svg =
        cat("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"", W, "\" height=\"", H, "\">\n");
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    double bw = double(W - 2 * margin) / bins;
    for (int b = 0; b < bins; ++b) {
        double h = double(counts[size_t(b)]) / peak * (H - 2 * margin);
        svg += cat("<rect x=\"", margin + b * bw, "\" y=\"", H - margin - h, "\" width=\"",
                   bw * 0.9, "\" height=\"", h, "\" fill=\"#4994c4\"/>\n");
    }
    svg += cat("<text x=\"", margin, "\" y=\"", H - 8, "\" font-size=\"12\">min ", d.min,
               "</text>\n");
    svg += cat("<text x=\"", W - margin - 120, "\" y=\"", H - 8, "\" font-size=\"12\">max ",
               d.max, "</text>\n");
    svg += cat("<text x=\"", margin, "\" y=\"16\" font-size=\"12\">critical path delay, ",
               d.delays.size(), " random wirings, spread ", d.spread_pct, "%</text>\n");
    svg += "</svg>\n";
    return svg;
}

// ---------------------------------------------------------------------------
// FDC fitting flow on a self-generated adder corpus: gate-level longest-path
// delays (with a load-aware timing table) are the ground truth.

struct FitFlowResult {
    FdcModel model;
    FitStats fdc_stats;
    FitStats depth_stats;
    int samples = 0;
};

// One corpus adder: a seeded mix of ripple / Sklansky / region-mixed /
// depth-optimized structures. The mix spans low-fanout chains and
// high-fanout trees so fanout and depth decorrelate in the fit.
inline PrefixGraph corpus_adder(int width, int variant, Rng& rng) {
    PrefixGraph g;
    switch (variant % 5) {
    case 0: g = build_ripple(width); break;
    case 1: g = build_sklansky(width); break;
    case 2: {
        // trapezoid profile, mixed regions
        std::vector<double> prof(size_t(width), 0.0);
        for (int i = 0; i < width; ++i)
            prof[size_t(i)] = double(std::min(i, width - 1 - i)) * 1.0;
        g = build_initial_cpa(segment_regions(prof, 1.5), width, prof);
        break;
    }
    case 3: {
        // fully depth-optimized ripple: minimal depth, concentrated fanout
        g = build_ripple(width);
        std::vector<double> tight(size_t(width), -1e9);
        OptimizeOptions oo;
        oo.max_transforms = 4 * width;
        optimize_cpa(g, tight, FdcModel{}, oo);
        break;
    }
    default: {
        g = build_ripple(width);
        int churn = 2 + int(rng.below(uint64_t(2 * width)));
        for (int t = 0; t < churn; ++t) {
            int id = int(rng.below(g.nodes.size()));
            if (graph_opt_applicable(g, id))
                apply_graph_opt(g, id);
        }
        break;
    }
    }
    validate_graph(g);
    return g;
}

// Fits FDC coefficients against per-bit gate-level arrivals of `corpus_size`
// generated adders (three bits sampled per adder; the sum bit j+1 is the one
// driven by bit j's carry cone). Also fits a depth-only reference model on
// the same data for the fidelity comparison.
inline FitFlowResult fit_timing_flow(uint64_t seed, int corpus_size = 60,
                                     double load_coef = 0.8) {
    Rng rng(seed);
    GateTiming truth;
    truth.load_coef = load_coef; // fanout-sensitive ground truth
    FdcModel probe;              // default model steers the path extraction
    std::vector<FdcSample> samples;
    std::vector<std::vector<double>> depth_rows;
    std::vector<double> truths;
    const int widths[] = {8, 12, 16, 20, 24, 32, 40, 48};
    for (int v = 0; v < corpus_size; ++v) {
        int width = widths[v % 8];
        PrefixGraph g = corpus_adder(width, v, rng);
        GateNetlist nl = elaborate_adder(g);
        NetlistReport rep = report(nl, truth);
        const std::vector<double>& sum_arr = rep.output_arrivals[0].second;
        GraphInfo info = analyze(g);
        for (int bit : {g.width - 1, g.width - 2, 3 * g.width / 4, g.width / 2,
                        g.width / 4, 3}) {
            FdcFeatures f = fdc_critical_path(g, info, bit, probe).features;
            double measured = sum_arr[size_t(bit + 1)];
            samples.push_back({f, measured});
            depth_rows.push_back({double(info.depth[size_t(g.output[size_t(bit)])])});
            truths.push_back(measured);
        }
    }
    FitFlowResult r;
    r.samples = corpus_size;
    r.model = fit_fdc(samples, &r.fdc_stats);
    linear_fit(depth_rows, truths, &r.depth_stats);
    return r;
}

// ---------------------------------------------------------------------------
// small file helpers

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    require(f.good(), "cannot open ", path, " for writing");
    f << content;
    require(f.good(), "write to ", path, " failed");
}

inline std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    require(f.good(), "cannot open ", path);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

} // namespace dpgen
