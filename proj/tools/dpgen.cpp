// dpgen: gate-level multiplier / fused-MAC / prefix-adder generator CLI.
//
// Exit codes: 0 success (including solver budget hit with a usable incumbent,
// reported as a warning), 1 internal error, 2 configuration error,
// 3 infeasible model, 4 verification failure.

#include <atomic>
#include <filesystem>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "dpgen/config.hpp"
#include "dpgen/flow.hpp"

namespace fs = std::filesystem;
using namespace dpgen;

namespace {

struct CommonOpts {
    std::string out_dir = "out";
    std::string config_path;
    std::string solver = "internal";
    double time_limit = 3600;
    uint64_t seed = 1;
};

void add_common(CLI::App* cmd, CommonOpts& c, bool with_solver = true) {
    cmd->add_option("--out-dir", c.out_dir, "output directory");
    cmd->add_option("--config", c.config_path, "key = value config file");
    cmd->add_option("--seed", c.seed, "RNG seed (same flags + seed -> identical outputs)");
    if (with_solver) {
        cmd->add_option("--solver", c.solver,
                        "internal | external:<path> | greedy (heuristic fallback)");
        cmd->add_option("--time-limit", c.time_limit,
                        "solver limit in seconds; mapped to a deterministic node budget");
    }
}

Config load_config(const CommonOpts& c) {
    if (c.config_path.empty())
        return Config{};
    return Config::from_file(c.config_path);
}

void apply_solver(GenOptions& g, const CommonOpts& c, const Config& cfg) {
    if (c.solver == "internal") {
        g.solver = SolverChoice::Internal;
    } else if (c.solver == "greedy") {
        g.solver = SolverChoice::Greedy;
    } else if (c.solver.rfind("external", 0) == 0) {
        g.solver = SolverChoice::External;
        g.external_solver =
            c.solver.size() > 9 && c.solver[8] == ':' ? c.solver.substr(9) : cfg.solver_path();
        require(!g.external_solver.empty(),
                "external solver requested but no path given (use --solver external:<path>, the "
                "solver_path config key, or DPGEN_SOLVER)");
    } else {
        fail("unknown --solver '", c.solver, "'");
    }
    g.time_limit_s = c.time_limit;
}

void write_design(const GenResult& r, const GenOptions& o, const std::string& out_dir) {
    fs::create_directories(out_dir);
    std::string base = out_dir + "/" + r.netlist.name;
    write_file(base + ".v", emit_verilog(r.netlist));
    write_file(base + ".json", netlist_to_json(r.netlist).dump(2) + "\n");
    write_file(base + ".report.json", report_to_json(r, o).dump(2) + "\n");
    write_file(base + ".bundle.json", bundle_to_json(r, o).dump(2) + "\n");
    std::cout << r.netlist.name << ": " << r.netlist.gate_count() << " gates, area "
              << r.report.area << ", critical path " << r.report.critical_path
              << " (CT delay " << r.ct_eval.max_delay << ", CT stages "
              << r.stage.assignment.stage_count << ")\n";
    std::cout << "wrote " << base << ".v, .json, .report.json, .bundle.json\n";
    for (const std::string& w : r.warnings)
        std::cerr << "warning: " << w << "\n";
}

GenOptions make_gen_options(const CommonOpts& c, const Config& cfg, int width, bool fused,
                            int acc_width, const std::string& strategy, double target_delay) {
    GenOptions g;
    g.width = width;
    g.fused = fused;
    g.acc_width = acc_width;
    g.strategy = strategy_from_name(strategy);
    g.target_delay = target_delay;
    g.seed = c.seed;
    g.work_dir = c.out_dir;
    apply_solver(g, c, cfg);
    cfg.apply(g.delays);
    cfg.apply(g.fdc);
    cfg.apply(g.areas);
    cfg.apply(g.gate_timing);
    g.region_eps = cfg.num("cpa.region_eps", g.region_eps);
    g.block_step = cfg.num("cpa.block_step", g.block_step);
    return g;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    size_t pos = 0;
    while (pos <= s.size()) {
        size_t comma = s.find(',', pos);
        if (comma == std::string::npos)
            comma = s.size();
        if (comma > pos)
            out.push_back(s.substr(pos, comma - pos));
        pos = comma + 1;
    }
    return out;
}

int run_verify(const std::string& path, const std::string& spec, const std::string& mode,
               uint64_t vectors, uint64_t seed) {
    nlohmann::json j = nlohmann::json::parse(read_file(path));
    GateNetlist nl;
    if (j.value("schema", "") == "dpgen-bundle")
        fail("verify expects the netlist JSON (<design>.json), not the bundle");
    nl = netlist_from_json(j);

    verify::SpecKind kind;
    std::string sp = spec;
    if (sp == "auto") {
        if (nl.name.rfind("mult", 0) == 0)
            sp = "mult";
        else if (nl.name.rfind("mac", 0) == 0)
            sp = "mac";
        else if (nl.name.rfind("adder", 0) == 0)
            sp = "add";
        else
            fail("cannot infer --spec from design name '", nl.name, "'");
    }
    kind = sp == "mult"   ? verify::SpecKind::Mult
           : sp == "mac"  ? verify::SpecKind::Mac
           : sp == "add"  ? verify::SpecKind::Add
                          : throw Error("unknown --spec " + sp);

    int total_bits = 0;
    for (const NetPort& p : nl.inputs)
        total_bits += int(p.nets.size());
    bool exhaustive = mode == "exhaustive" || (mode == "auto" && total_bits <= 20);
    verify::EquivalenceOptions eo;
    eo.random_vectors = vectors;
    eo.seed = seed;
    eo.cross_check_orders = true;
    auto rep = verify::check_equivalence(nl, kind, exhaustive, eo);
    if (rep.pass) {
        std::cout << "PASS " << nl.name << ": " << rep.vectors << " vectors ("
                  << (exhaustive ? "exhaustive" : "random+corners") << ")\n";
        return 0;
    }
    std::cout << "FAIL " << nl.name << ": counterexample " << rep.counterexample << "\n";
    return 4;
}

int run_report(const std::string& path, const std::string& out_dir, int distribution,
               uint64_t dist_seed, const Config& cfg) {
    nlohmann::json j = nlohmann::json::parse(read_file(path));
    fs::create_directories(out_dir);
    GateTiming gt;
    AreaWeights aw;
    DelayTable dt;
    cfg.apply(gt);
    cfg.apply(aw);
    cfg.apply(dt);
    if (j.value("schema", "") == "dpgen-netlist") {
        GateNetlist nl = netlist_from_json(j);
        NetlistReport rep = report(nl, gt, aw);
        nlohmann::ordered_json out;
        out["design"] = nl.name;
        out["gates"] = nl.gate_count();
        out["area"] = rep.area;
        out["critical_path"] = rep.critical_path;
        for (const auto& [port, arr] : rep.output_arrivals)
            out["arrivals"][port] = arr;
        write_file(out_dir + "/" + nl.name + ".report.json", out.dump(2) + "\n");
        std::cout << nl.name << ": area " << rep.area << ", critical path " << rep.critical_path
                  << "\n";
        return 0;
    }
    require(j.value("schema", "") == "dpgen-bundle", "unrecognized input document");
    StageAssignment a = assignment_from_json(j.at("assignment"));
    WiringPlan w = wiring_from_json(j.at("wiring"));
    ArrivalProfile inputs = zero_arrivals(a);
    WiringEval ev = evaluate_wiring(a, w, dt, inputs);
    nlohmann::ordered_json out;
    out["ct_critical_delay"] = ev.max_delay;
    out["report"] = j.value("report", nlohmann::json::object());
    if (distribution > 0) {
        WiringDistribution dist = sample_random_wirings(a, dt, distribution, dist_seed, inputs);
        write_file(out_dir + "/wiring_distribution.csv", distribution_to_csv(dist));
        write_file(out_dir + "/wiring_distribution.svg", distribution_to_svg(dist));
        out["distribution"] = {{"trials", distribution},
                               {"min", dist.min},
                               {"max", dist.max},
                               {"mean", dist.mean},
                               {"spread_pct", dist.spread_pct},
                               {"optimized_delay", ev.max_delay}};
        std::cout << "distribution over " << distribution << " random wirings: min " << dist.min
                  << ", max " << dist.max << ", spread " << dist.spread_pct
                  << "% (optimized: " << ev.max_delay << ")\n";
    }
    write_file(out_dir + "/bundle.report.json", out.dump(2) + "\n");
    return 0;
}

int run_sweep(const CommonOpts& c, const Config& cfg, const std::string& widths_s,
              const std::string& strategies_s, bool fused, int jobs) {
    std::vector<int> widths;
    for (const std::string& w : split_list(widths_s))
        widths.push_back(std::stoi(w));
    std::vector<std::string> strategies = split_list(strategies_s);
    require(!widths.empty() && !strategies.empty(), "empty sweep grid");

    struct Job {
        int width;
        std::string strategy;
        GenOptions opts;
        GenResult result;
        std::string error;
    };
    std::vector<Job> grid;
    try {
        for (int w : widths)
            for (const std::string& s : strategies) {
                Job job;
                job.width = w;
                job.strategy = s;
                job.opts = make_gen_options(c, cfg, w, fused, -1, s, 0);
                grid.push_back(std::move(job));
            }
    } catch (const Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    std::atomic<size_t> next{0};
    auto worker = [&] {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= grid.size())
                return;
            try {
                grid[i].result = generate(grid[i].opts);
            } catch (const std::exception& e) {
                grid[i].error = e.what();
            }
        }
    };
    int nthreads = std::max(1, std::min<int>(jobs, int(grid.size())));
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t)
        pool.emplace_back(worker);
    for (auto& t : pool)
        t.join();

    fs::create_directories(c.out_dir);
    std::string csv = "width,strategy,fused,gates,area,critical_path,ct_delay,ct_stages,"
                      "prefix_nodes,pareto\n";
    for (size_t i = 0; i < grid.size(); ++i) {
        Job& job = grid[i];
        require(job.error.empty(), "sweep design width ", job.width, " strategy ", job.strategy,
                " failed: ", job.error);
        std::string suffix = "_" + job.strategy;
        GenResult& r = job.result;
        r.netlist.name += suffix;
        write_design(r, job.opts, c.out_dir);
        bool pareto = true;
        for (size_t k = 0; k < grid.size(); ++k) {
            if (k == i || grid[k].width != job.width)
                continue;
            const GenResult& o = grid[k].result;
            bool dominates = o.report.area <= r.report.area &&
                             o.report.critical_path <= r.report.critical_path &&
                             (o.report.area < r.report.area ||
                              o.report.critical_path < r.report.critical_path);
            if (dominates)
                pareto = false;
        }
        GraphInfo gi = analyze(r.cpa);
        csv += cat(job.width, ",", job.strategy, ",", fused ? 1 : 0, ",",
                   r.netlist.gate_count(), ",", r.report.area, ",", r.report.critical_path, ",",
                   r.ct_eval.max_delay, ",", r.stage.assignment.stage_count, ",", gi.live_nodes,
                   ",", pareto ? 1 : 0, "\n");
    }
    write_file(c.out_dir + "/pareto.csv", csv);
    std::cout << "wrote " << c.out_dir << "/pareto.csv (" << grid.size() << " designs)\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dpgen: area/delay-optimized multiplier, fused-MAC and prefix-adder generator"};
    app.require_subcommand(1);

    // gen-mult
    auto* mult = app.add_subcommand("gen-mult", "generate an NxN unsigned multiplier");
    CommonOpts mult_c;
    int mult_width = 8;
    std::string mult_strategy = "tradeoff";
    double mult_target = 0;
    mult->add_option("--width", mult_width, "operand width N")->required();
    mult->add_option("--strategy", mult_strategy, "area | timing | tradeoff");
    mult->add_option("--target-delay", mult_target, "explicit CPA target delay (model units)");
    add_common(mult, mult_c);

    // gen-mac
    auto* mac = app.add_subcommand("gen-mac", "generate a fused multiply-accumulator a*b+c");
    CommonOpts mac_c;
    int mac_width = 8, mac_acc = -1;
    double mac_acc_arrival = 0;
    std::string mac_strategy = "tradeoff";
    double mac_target = 0;
    mac->add_option("--width", mac_width, "operand width N")->required();
    mac->add_option("--acc-width", mac_acc, "accumulator width (default 2N)");
    mac->add_option("--acc-arrival", mac_acc_arrival,
                    "arrival time of accumulator bits at the compressor tree");
    mac->add_option("--strategy", mac_strategy, "area | timing | tradeoff");
    mac->add_option("--target-delay", mac_target, "explicit CPA target delay (model units)");
    add_common(mac, mac_c);

    // gen-adder
    auto* adder = app.add_subcommand("gen-adder", "generate a standalone prefix adder");
    CommonOpts adder_c;
    int adder_width = 16;
    std::string adder_strategy = "tradeoff", adder_profile;
    double adder_target = 0;
    adder->add_option("--width", adder_width, "adder width")->required();
    adder->add_option("--strategy", adder_strategy, "area | timing | tradeoff");
    adder->add_option("--target-delay", adder_target, "explicit target delay (model units)");
    adder->add_option("--profile", adder_profile, "per-bit arrival profile file (one value/line)");
    add_common(adder, adder_c, false);

    // verify
    auto* ver = app.add_subcommand("verify", "re-check an emitted design against the arithmetic oracle");
    std::string ver_path, ver_mode = "auto", ver_spec = "auto";
    uint64_t ver_vectors = 1000000, ver_seed = 1;
    ver->add_option("netlist", ver_path, "<design>.json netlist file")->required();
    ver->add_option("--mode", ver_mode, "exhaustive | random | auto");
    ver->add_option("--spec", ver_spec, "mult | mac | add | auto");
    ver->add_option("--vectors", ver_vectors, "random vector count");
    ver->add_option("--seed", ver_seed, "random vector seed");

    // report
    auto* rep = app.add_subcommand("report", "area/timing report for an emitted design");
    std::string rep_path, rep_out = "out";
    std::string rep_config;
    int rep_dist = 0;
    uint64_t rep_dist_seed = 1;
    rep->add_option("input", rep_path, "<design>.json or <design>.bundle.json")->required();
    rep->add_option("--out-dir", rep_out, "output directory");
    rep->add_option("--config", rep_config, "key = value config file");
    rep->add_option("--distribution", rep_dist,
                    "also sample N random wirings (bundle input only; writes CSV + SVG)");
    rep->add_option("--dist-seed", rep_dist_seed, "distribution seed");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "strategy/width grid with a Pareto CSV");
    CommonOpts sweep_c;
    std::string sweep_widths = "8,16", sweep_strategies = "area,timing,tradeoff";
    bool sweep_fused = false;
    int sweep_jobs = int(std::thread::hardware_concurrency());
    sweep->add_option("--widths", sweep_widths, "comma-separated operand widths");
    sweep->add_option("--strategies", sweep_strategies, "comma-separated strategies");
    sweep->add_flag("--mac", sweep_fused, "sweep fused MACs instead of multipliers");
    sweep->add_option("--jobs", sweep_jobs, "parallel workers");
    add_common(sweep, sweep_c);

    // fit-timing
    auto* fit = app.add_subcommand("fit-timing", "fit FDC coefficients on a generated adder corpus");
    std::string fit_out = "out";
    uint64_t fit_seed = 1;
    int fit_corpus = 60;
    double fit_load = 0.8;
    fit->add_option("--out-dir", fit_out, "output directory");
    fit->add_option("--seed", fit_seed, "corpus seed");
    fit->add_option("--corpus", fit_corpus, "number of adders (>= 5)");
    fit->add_option("--load-coef", fit_load, "per-fanout delay of the ground-truth timing");

    CLI11_PARSE(app, argc, argv);

    try {
        if (mult->parsed() || mac->parsed()) {
            const bool fused = mac->parsed();
            CommonOpts& c = fused ? mac_c : mult_c;
            Config cfg;
            try {
                cfg = load_config(c);
            } catch (const Error& e) {
                std::cerr << "config error: " << e.what() << "\n";
                return 2;
            }
            GenOptions g;
            try {
                g = make_gen_options(c, cfg, fused ? mac_width : mult_width, fused,
                                     fused ? mac_acc : -1,
                                     fused ? mac_strategy : mult_strategy,
                                     fused ? mac_target : mult_target);
            } catch (const Error& e) {
                std::cerr << "config error: " << e.what() << "\n";
                return 2;
            }
            if (fused)
                g.acc_arrival = mac_acc_arrival;
            GenResult r = generate(g);
            write_design(r, g, c.out_dir);
            return 0;
        }
        if (adder->parsed()) {
            Config cfg;
            try {
                cfg = load_config(adder_c);
            } catch (const Error& e) {
                std::cerr << "config error: " << e.what() << "\n";
                return 2;
            }
            AdderOptions o;
            o.width = adder_width;
            o.strategy = strategy_from_name(adder_strategy);
            o.target_delay = adder_target;
            cfg.apply(o.fdc);
            cfg.apply(o.areas);
            cfg.apply(o.gate_timing);
            if (!adder_profile.empty()) {
                std::istringstream is(read_file(adder_profile));
                double v;
                while (is >> v)
                    o.profile.push_back(v);
            }
            AdderResult r = generate_adder(o);
            fs::create_directories(adder_c.out_dir);
            std::string base = adder_c.out_dir + "/" + r.netlist.name;
            write_file(base + ".v", emit_verilog(r.netlist));
            write_file(base + ".json", netlist_to_json(r.netlist).dump(2) + "\n");
            write_file(base + ".prefix.json", prefix_to_json(r.graph).dump(2) + "\n");
            write_file(base + ".prefix.dot", prefix_to_dot(r.graph));
            GraphInfo gi = analyze(r.graph);
            std::cout << r.netlist.name << ": " << gi.live_nodes << " prefix nodes, depth "
                      << gi.max_depth << ", area " << r.report.area << ", critical path "
                      << r.report.critical_path << "\n";
            std::cout << "wrote " << base << ".v, .json, .prefix.json, .prefix.dot\n";
            return 0;
        }
        if (ver->parsed())
            return run_verify(ver_path, ver_spec, ver_mode, ver_vectors, ver_seed);
        if (rep->parsed()) {
            Config cfg;
            try {
                if (!rep_config.empty())
                    cfg = Config::from_file(rep_config);
            } catch (const Error& e) {
                std::cerr << "config error: " << e.what() << "\n";
                return 2;
            }
            return run_report(rep_path, rep_out, rep_dist, rep_dist_seed, cfg);
        }
        if (sweep->parsed()) {
            Config cfg;
            try {
                cfg = load_config(sweep_c);
            } catch (const Error& e) {
                std::cerr << "config error: " << e.what() << "\n";
                return 2;
            }
            return run_sweep(sweep_c, cfg, sweep_widths, sweep_strategies, sweep_fused,
                             sweep_jobs);
        }
        if (fit->parsed()) {
            FitFlowResult r = fit_timing_flow(fit_seed, fit_corpus, fit_load);
            fs::create_directories(fit_out);
            nlohmann::ordered_json j;
            j["samples"] = r.samples;
            j["fdc"] = {{"k0", r.model.k0}, {"k1", r.model.k1}, {"k2", r.model.k2},
                        {"k3", r.model.k3}, {"b", r.model.b}};
            j["fdc_r2"] = r.fdc_stats.r2;
            j["fdc_mape_pct"] = r.fdc_stats.mape;
            j["depth_only_r2"] = r.depth_stats.r2;
            j["depth_only_mape_pct"] = r.depth_stats.mape;
            write_file(fit_out + "/fdc_fit.json", j.dump(2) + "\n");
            std::cout << "FDC fit over " << r.samples << " adders: R2 " << r.fdc_stats.r2
                      << " (MAPE " << r.fdc_stats.mape << "%), depth-only R2 "
                      << r.depth_stats.r2 << "\n";
            std::cout << "wrote " << fit_out << "/fdc_fit.json\n";
            return 0;
        }
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
