#pragma once

// Flat key = value configuration (TOML-style scalars, # comments). Known keys
// feed the delay table, FDC coefficients, area weights, gate timing and the
// external solver path; command-line flags override file values.

#include <cstdlib>
#include <fstream>
#include <map>
#include <string>

#include "dpgen/ct_wire.hpp"
#include "dpgen/cpa.hpp"
#include "dpgen/netlist.hpp"

namespace dpgen {

class Config {
public:
    static Config from_file(const std::string& path) {
        std::ifstream f(path);
        require(f.good(), "cannot open config file ", path);
        Config c;
        std::string line;
        int lineno = 0;
        while (std::getline(f, line)) {
            ++lineno;
            size_t hash = line.find('#');
            if (hash != std::string::npos)
                line = line.substr(0, hash);
            auto trim = [](std::string s) {
                size_t b = s.find_first_not_of(" \t\r");
                size_t e = s.find_last_not_of(" \t\r");
                return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
            };
            std::string t = trim(line);
            if (t.empty())
                continue;
            size_t eq = t.find('=');
            require(eq != std::string::npos, path, ":", lineno, ": expected key = value");
            std::string key = trim(t.substr(0, eq));
            std::string val = trim(t.substr(eq + 1));
            if (val.size() >= 2 && val.front() == '"' && val.back() == '"')
                val = val.substr(1, val.size() - 2);
            require(!key.empty(), path, ":", lineno, ": empty key");
            c.kv_[key] = val;
        }
        return c;
    }

    bool has(const std::string& key) const { return kv_.count(key) != 0; }
    std::string str(const std::string& key, const std::string& dflt = "") const {
        auto it = kv_.find(key);
        return it == kv_.end() ? dflt : it->second;
    }
    double num(const std::string& key, double dflt) const {
        auto it = kv_.find(key);
        if (it == kv_.end())
            return dflt;
        char* end = nullptr;
        double v = std::strtod(it->second.c_str(), &end);
        require(end && *end == '\0', "config key ", key, ": '", it->second, "' is not a number");
        return v;
    }

    void apply(DelayTable& d) const {
        d.fa_as = num("delay.fa_as", d.fa_as);
        d.fa_bs = num("delay.fa_bs", d.fa_bs);
        d.fa_cs = num("delay.fa_cs", d.fa_cs);
        d.fa_ac = num("delay.fa_ac", d.fa_ac);
        d.fa_bc = num("delay.fa_bc", d.fa_bc);
        d.fa_cc = num("delay.fa_cc", d.fa_cc);
        d.ha_s = num("delay.ha_s", d.ha_s);
        d.ha_c = num("delay.ha_c", d.ha_c);
    }
    void apply(FdcModel& m) const {
        m.k0 = num("fdc.k0", m.k0);
        m.k1 = num("fdc.k1", m.k1);
        m.k2 = num("fdc.k2", m.k2);
        m.k3 = num("fdc.k3", m.k3);
        m.b = num("fdc.b", m.b);
    }
    void apply(AreaWeights& w) const {
        w.xor_w = num("area.xor", w.xor_w);
        w.xnor_w = num("area.xnor", w.xnor_w);
        w.aoi_w = num("area.aoi", w.aoi_w);
        w.oai_w = num("area.oai", w.oai_w);
        w.and_w = num("area.and", w.and_w);
        w.nand_w = num("area.nand", w.nand_w);
        w.nor_w = num("area.nor", w.nor_w);
        w.inv_w = num("area.inv", w.inv_w);
    }
    void apply(GateTiming& t) const {
        t.xor_d = num("gate_delay.xor", t.xor_d);
        t.xnor_d = num("gate_delay.xnor", t.xnor_d);
        t.and_d = num("gate_delay.and", t.and_d);
        t.nand_d = num("gate_delay.nand", t.nand_d);
        t.nor_d = num("gate_delay.nor", t.nor_d);
        t.inv_d = num("gate_delay.inv", t.inv_d);
        t.oai_d = num("gate_delay.oai", t.oai_d);
        t.aoi_d = num("gate_delay.aoi", t.aoi_d);
        t.load_coef = num("gate_delay.load_coef", t.load_coef);
    }

    // external solver path: flag > config > environment
    std::string solver_path() const {
        if (has("solver_path"))
            return str("solver_path");
        const char* env = std::getenv("DPGEN_SOLVER");
        return env ? env : "";
    }

private:
    std::map<std::string, std::string> kv_;
};

} // namespace dpgen
