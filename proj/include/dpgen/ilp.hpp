#pragma once

// Small linear/integer model builder with two solve paths: a propagation-based
// exact branch-and-bound for the models this toolkit emits, and LP-format file
// exchange with an external solver executable.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dpgen/common.hpp"

namespace dpgen::ilp {

enum class VarKind { Continuous, Integer, Binary };
enum class Sense { LE, GE, EQ };
enum class ObjSense { Minimize, Maximize };
enum class Status { Optimal, Feasible, Infeasible, Timeout };

inline const char* status_name(Status s) {
    switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Feasible: return "feasible";
    case Status::Infeasible: return "infeasible";
    case Status::Timeout: return "timeout";
    }
    return "?";
}

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFeasTol = 1e-6;

struct Var {
    std::string name;
    VarKind kind = VarKind::Continuous;
    double lb = 0.0;
    double ub = kInf;
    int branch_priority = 0;    // higher branches earlier
    bool prefer_high = false;   // value ordering when no hint is set
    std::optional<double> hint; // warm-start value
};

struct LinTerm {
    int var = -1;
    double coef = 0.0;
};

using LinExpr = std::vector<LinTerm>;

struct Constraint {
    std::string name;
    LinExpr terms;
    Sense sense = Sense::LE;
    double rhs = 0.0;
};

struct Model {
    std::vector<Var> vars;
    std::vector<Constraint> constraints;
    ObjSense obj_sense = ObjSense::Minimize;
    LinExpr objective;

    int add_var(const std::string& name, VarKind kind, double lb, double ub) {
        require(!name.empty(), "add_var: empty name");
        auto [it, inserted] = var_index_.emplace(name, int(vars.size()));
        require(inserted, "add_var: duplicate variable '", name, "'");
        (void)it;
        if (kind == VarKind::Binary) {
            lb = std::max(lb, 0.0);
            ub = std::min(ub, 1.0);
        }
        require(lb <= ub, "add_var: empty domain for '", name, "'");
        vars.push_back({name, kind, lb, ub, 0, false, std::nullopt});
        return int(vars.size()) - 1;
    }
    int add_binary(const std::string& name) { return add_var(name, VarKind::Binary, 0, 1); }
    int add_integer(const std::string& name, double lb, double ub) {
        return add_var(name, VarKind::Integer, lb, ub);
    }
    int add_continuous(const std::string& name, double lb, double ub) {
        return add_var(name, VarKind::Continuous, lb, ub);
    }

    int var(const std::string& name) const {
        auto it = var_index_.find(name);
        require(it != var_index_.end(), "unknown variable '", name, "'");
        return it->second;
    }
    bool has_var(const std::string& name) const { return var_index_.count(name) != 0; }

    void add_constraint(const std::string& name, LinExpr terms, Sense sense, double rhs) {
        require(!terms.empty(), "add_constraint '", name, "': empty expression");
        for (const auto& t : terms)
            require(t.var >= 0 && t.var < int(vars.size()),
                    "add_constraint '", name, "': unknown variable index");
        constraints.push_back({name, std::move(terms), sense, rhs});
    }

    void set_objective(ObjSense sense, LinExpr terms) {
        for (const auto& t : terms)
            require(t.var >= 0 && t.var < int(vars.size()), "set_objective: unknown variable index");
        obj_sense = sense;
        objective = std::move(terms);
    }

    void set_hint(int v, double value) { vars[size_t(v)].hint = value; }
    void set_priority(int v, int prio) { vars[size_t(v)].branch_priority = prio; }
    void set_prefer_high(int v, bool p) { vars[size_t(v)].prefer_high = p; }

    double eval(const LinExpr& e, const std::vector<double>& x) const {
        double s = 0;
        for (const auto& t : e)
            s += t.coef * x[size_t(t.var)];
        return s;
    }

    // max violation across all constraints and variable bounds
    double violation(const std::vector<double>& x) const {
        double worst = 0;
        for (const auto& c : constraints) {
            double a = eval(c.terms, x);
            double v = 0;
            if (c.sense == Sense::LE)
                v = a - c.rhs;
            else if (c.sense == Sense::GE)
                v = c.rhs - a;
            else
                v = std::fabs(a - c.rhs);
            worst = std::max(worst, v);
        }
        for (size_t i = 0; i < vars.size(); ++i) {
            worst = std::max(worst, vars[i].lb - x[i]);
            worst = std::max(worst, x[i] - vars[i].ub);
            if (vars[i].kind != VarKind::Continuous)
                worst = std::max(worst, std::fabs(x[i] - std::round(x[i])));
        }
        return worst;
    }

private:
    std::map<std::string, int> var_index_;
};

struct Solution {
    Status status = Status::Timeout;
    std::vector<double> values;
    double objective = 0.0;
    uint64_t nodes_explored = 0;
    std::string note;

    double value(int var) const { return values.at(size_t(var)); }
    bool usable() const { return status == Status::Optimal || status == Status::Feasible; }
};

// ---------------------------------------------------------------------------
// LP-format emission / parsing (CPLEX LP style, the subset we emit)

namespace detail {
inline std::string num_str(double v) {
    if (v == std::floor(v) && std::fabs(v) < 1e15) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.0f", v);
        return buf;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void emit_expr(std::string& out, const Model& m, const LinExpr& e) {
    bool first = true;
    for (const auto& t : e) {
        double c = t.coef;
        if (c == 0)
            continue;
        if (first) {
            if (c < 0)
                out += "- ";
            first = false;
        } else {
            out += (c < 0) ? " - " : " + ";
        }
        double a = std::fabs(c);
        if (a != 1.0) {
            out += num_str(a);
            out += ' ';
        }
        out += m.vars[size_t(t.var)].name;
    }
    if (first)
        out += "0 dummy_zero"; // never produced by our builders
}
} // namespace detail

inline std::string emit_lp(const Model& m) {
    std::string out;
    out += (m.obj_sense == ObjSense::Minimize) ? "Minimize\n" : "Maximize\n";
    out += " obj: ";
    if (m.objective.empty())
        out += "0 " + (m.vars.empty() ? std::string("x0_unused") : m.vars[0].name);
    else
        detail::emit_expr(out, m, m.objective);
    out += "\nSubject To\n";
    for (size_t i = 0; i < m.constraints.size(); ++i) {
        const auto& c = m.constraints[i];
        out += ' ';
        out += c.name.empty() ? cat("c", i) : c.name;
        out += ": ";
        detail::emit_expr(out, m, c.terms);
        out += (c.sense == Sense::LE) ? " <= " : (c.sense == Sense::GE) ? " >= " : " = ";
        out += detail::num_str(c.rhs);
        out += '\n';
    }
    out += "Bounds\n";
    for (const auto& v : m.vars) {
        out += ' ';
        if (v.lb == -kInf && v.ub == kInf) {
            out += v.name + " free";
        } else if (v.ub == kInf) {
            out += detail::num_str(v.lb) + " <= " + v.name;
        } else {
            out += detail::num_str(v.lb) + " <= " + v.name + " <= " + detail::num_str(v.ub);
        }
        out += '\n';
    }
    std::string generals, binaries;
    for (const auto& v : m.vars) {
        if (v.kind == VarKind::Integer)
            generals += ' ' + v.name + '\n';
        else if (v.kind == VarKind::Binary)
            binaries += ' ' + v.name + '\n';
    }
    if (!generals.empty())
        out += "Generals\n" + generals;
    if (!binaries.empty())
        out += "Binaries\n" + binaries;
    out += "End\n";
    return out;
}

namespace detail {

struct LpTokens {
    std::vector<std::string> toks;
    size_t pos = 0;
    bool done() const { return pos >= toks.size(); }
    const std::string& peek() const { return toks[pos]; }
    std::string take() { return toks[pos++]; }
};

inline std::string lower(std::string s) {
    for (char& c : s)
        c = char(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

inline bool is_num_start(const std::string& t) {
    return !t.empty() && (std::isdigit(static_cast<unsigned char>(t[0])) || t[0] == '.');
}

inline LpTokens lp_tokenize(const std::string& text) {
    LpTokens out;
    size_t i = 0;
    auto issep = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (i < text.size()) {
        char c = text[i];
        if (issep(c)) {
            ++i;
            continue;
        }
        if (c == '\\') { // comment to end of line
            while (i < text.size() && text[i] != '\n')
                ++i;
            continue;
        }
        if (c == '<' || c == '>') {
            std::string t(1, c);
            if (i + 1 < text.size() && text[i + 1] == '=')
                t += '=', ++i;
            else
                t += '=';
            out.toks.push_back(t == "<=" || t == "<" ? "<=" : t);
            ++i;
            continue;
        }
        if (c == '=' || c == '+' || c == '-' || c == ':') {
            out.toks.push_back(std::string(1, c));
            ++i;
            continue;
        }
        size_t j = i;
        while (j < text.size() && !issep(text[j]) && text[j] != ':' && text[j] != '<' &&
               text[j] != '>' && text[j] != '=') {
            if (text[j] == '+' || text[j] == '-') {
                // signs bind into a token only as part of a numeric exponent
                bool exponent = j > i && (text[j - 1] == 'e' || text[j - 1] == 'E') &&
                                is_num_start(text.substr(i, 1));
                if (!exponent)
                    break;
            }
            ++j;
        }
        out.toks.push_back(text.substr(i, j - i));
        i = j;
    }
    return out;
}

} // namespace detail

// Parses the LP subset produced by emit_lp (plus minor variations). Variables
// referenced before their Bounds/Generals/Binaries lines default to
// continuous [0, inf).
inline Model parse_lp(const std::string& text) {
    using namespace detail;
    Model m;
    auto tokens = lp_tokenize(text);
    std::map<std::string, int> seen;
    auto var_of = [&](const std::string& name) {
        auto it = seen.find(name);
        if (it != seen.end())
            return it->second;
        int id = m.add_var(name, VarKind::Continuous, 0, kInf);
        seen.emplace(name, id);
        return id;
    };

    enum Section { None, Objective, Constraints, Bounds, Generals, Binaries };
    Section sec = None;
    ObjSense osense = ObjSense::Minimize;

    auto section_of = [&](size_t& consumed) -> std::optional<Section> {
        if (tokens.done())
            return std::nullopt;
        std::string t = lower(tokens.peek());
        consumed = 1;
        if (t == "minimize" || t == "minimise" || t == "min") return Objective;
        if (t == "maximize" || t == "maximise" || t == "max") {
            osense = ObjSense::Maximize;
            return Objective;
        }
        if (t == "subject") {
            if (tokens.pos + 1 < tokens.toks.size() && lower(tokens.toks[tokens.pos + 1]) == "to") {
                consumed = 2;
                return Constraints;
            }
        }
        if (t == "st" || t == "s.t.") return Constraints;
        if (t == "bounds" || t == "bound") return Bounds;
        if (t == "generals" || t == "general" || t == "integers" || t == "integer") return Generals;
        if (t == "binaries" || t == "binary" || t == "bin") return Binaries;
        if (t == "end") return None;
        return std::nullopt;
    };

    // expression parser: [label:] [sign] [num] name ... until sense token or section
    auto parse_expr = [&](LinExpr& expr) {
        double sign = 1.0;
        std::optional<double> coef;
        while (!tokens.done()) {
            const std::string& t = tokens.peek();
            if (t == "+") {
                sign = 1.0;
                tokens.take();
                continue;
            }
            if (t == "-") {
                sign = -sign;
                tokens.take();
                continue;
            }
            if (t == "<=" || t == ">=" || t == "=")
                break;
            size_t consumed = 0;
            if (!coef && sign == 1.0) {
                auto s = section_of(consumed);
                if (s || lower(t) == "end")
                    break;
            }
            if (is_num_start(t)) {
                coef = sign * std::strtod(tokens.take().c_str(), nullptr);
                sign = 1.0;
                continue;
            }
            // variable
            std::string name = tokens.take();
            expr.push_back({var_of(name), coef.value_or(sign)});
            coef.reset();
            sign = 1.0;
        }
        require(!coef, "parse_lp: dangling coefficient");
    };

    int anon = 0;
    while (!tokens.done()) {
        size_t consumed = 0;
        if (auto s = section_of(consumed)) {
            for (size_t k = 0; k < consumed; ++k)
                tokens.take();
            if (lower(tokens.toks[tokens.pos - consumed]) == "end")
                break;
            sec = *s;
            if (sec == Objective) {
                // optional "obj:" label
                if (!tokens.done() && tokens.pos + 1 < tokens.toks.size() &&
                    tokens.toks[tokens.pos + 1] == ":") {
                    tokens.take();
                    tokens.take();
                }
                LinExpr e;
                parse_expr(e);
                m.set_objective(osense, e);
                sec = None;
            }
            continue;
        }
        if (sec == Constraints) {
            std::string name;
            if (tokens.pos + 1 < tokens.toks.size() && tokens.toks[tokens.pos + 1] == ":") {
                name = tokens.take();
                tokens.take();
            } else {
                name = cat("c", anon++);
            }
            LinExpr e;
            parse_expr(e);
            require(!tokens.done(), "parse_lp: constraint '", name, "' missing sense");
            std::string st = tokens.take();
            Sense sense = st == "<=" ? Sense::LE : st == ">=" ? Sense::GE : Sense::EQ;
            require(!tokens.done(), "parse_lp: constraint '", name, "' missing rhs");
            double sign = 1.0;
            while (!tokens.done() && (tokens.peek() == "-" || tokens.peek() == "+")) {
                if (tokens.take() == "-")
                    sign = -sign;
            }
            double rhs = sign * std::strtod(tokens.take().c_str(), nullptr);
            m.add_constraint(name, e, sense, rhs);
            continue;
        }
        if (sec == Bounds) {
            // forms: "l <= x <= u" | "l <= x" | "x <= u" | "x >= l" | "x = v" | "x free"
            double sign = 1.0;
            while (!tokens.done() && (tokens.peek() == "-" || tokens.peek() == "+"))
                if (tokens.take() == "-")
                    sign = -sign;
            require(!tokens.done(), "parse_lp: truncated bounds line");
            std::string first = tokens.take();
            if (is_num_start(first) || lower(first) == "inf" || lower(first) == "infinity") {
                double lo = lower(first) == "inf" || lower(first) == "infinity"
                                ? sign * kInf
                                : sign * std::strtod(first.c_str(), nullptr);
                require(!tokens.done() && tokens.take() == "<=", "parse_lp: malformed bounds");
                int v = var_of(tokens.take());
                m.vars[size_t(v)].lb = lo;
                if (!tokens.done() && tokens.peek() == "<=") {
                    tokens.take();
                    double s2 = 1.0;
                    while (!tokens.done() && (tokens.peek() == "-" || tokens.peek() == "+"))
                        if (tokens.take() == "-")
                            s2 = -s2;
                    std::string u = tokens.take();
                    m.vars[size_t(v)].ub = lower(u) == "inf" || lower(u) == "infinity"
                                               ? s2 * kInf
                                               : s2 * std::strtod(u.c_str(), nullptr);
                }
            } else {
                int v = var_of(first);
                if (!tokens.done() && lower(tokens.peek()) == "free") {
                    tokens.take();
                    m.vars[size_t(v)].lb = -kInf;
                    m.vars[size_t(v)].ub = kInf;
                } else if (!tokens.done()) {
                    std::string op = tokens.take();
                    double s2 = 1.0;
                    while (!tokens.done() && (tokens.peek() == "-" || tokens.peek() == "+"))
                        if (tokens.take() == "-")
                            s2 = -s2;
                    double val = s2 * std::strtod(tokens.take().c_str(), nullptr);
                    if (op == "<=")
                        m.vars[size_t(v)].ub = val;
                    else if (op == ">=")
                        m.vars[size_t(v)].lb = val;
                    else if (op == "=")
                        m.vars[size_t(v)].lb = m.vars[size_t(v)].ub = val;
                    else
                        fail("parse_lp: malformed bounds line near '", op, "'");
                }
            }
            continue;
        }
        if (sec == Generals || sec == Binaries) {
            std::string name = tokens.take();
            int v = var_of(name);
            if (sec == Generals) {
                m.vars[size_t(v)].kind = VarKind::Integer;
            } else {
                m.vars[size_t(v)].kind = VarKind::Binary;
                m.vars[size_t(v)].lb = std::max(m.vars[size_t(v)].lb, 0.0);
                m.vars[size_t(v)].ub = std::min(m.vars[size_t(v)].ub, 1.0);
            }
            continue;
        }
        fail("parse_lp: unexpected token '", tokens.peek(), "'");
    }
    return m;
}

// ---------------------------------------------------------------------------
// Bounded-variable phase-1 simplex: decides feasibility of
//   { x : sense(row . x, rhs), l <= x <= u }  over the continuous relaxation.
// Used by the branch-and-bound as a sound pruning device (LP-infeasible
// implies no integer point in the subtree). Dense tableau; fine for the
// model sizes this toolkit emits.

enum class LpFeas { Feasible, Infeasible, Unknown };

class Phase1Lp {
public:
    // extra_row, when non-null, is appended as `expr <= extra_rhs`
    // (the incumbent cutoff)
    static LpFeas check(const Model& m, const std::vector<double>& lo,
                        const std::vector<double>& hi, const LinExpr* extra_row,
                        double extra_rhs) {
        size_t n = m.vars.size();
        size_t rows = m.constraints.size() + (extra_row ? 1 : 0);
        for (size_t i = 0; i < n; ++i)
            if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]))
                return LpFeas::Unknown;
        size_t ncols = n + rows + rows; // structural + slack + artificial
        std::vector<double> T(rows * ncols, 0.0);
        std::vector<double> rhs0(rows, 0.0); // row activity target (via slack bounds)
        std::vector<double> l(ncols), u(ncols);
        for (size_t i = 0; i < n; ++i) {
            l[i] = lo[i];
            u[i] = hi[i];
        }
        auto put_row = [&](size_t r, const LinExpr& terms, Sense sense, double rhs) {
            for (const auto& t : terms)
                T[r * ncols + size_t(t.var)] += t.coef;
            size_t s = n + r;
            T[r * ncols + s] = -1.0; // a.x - s = 0
            switch (sense) {
            case Sense::LE: l[s] = -kBig, u[s] = rhs; break;
            case Sense::GE: l[s] = rhs, u[s] = kBig; break;
            case Sense::EQ: l[s] = u[s] = rhs; break;
            }
            rhs0[r] = rhs;
        };
        for (size_t r = 0; r < m.constraints.size(); ++r)
            put_row(r, m.constraints[r].terms, m.constraints[r].sense, m.constraints[r].rhs);
        if (extra_row)
            put_row(rows - 1, *extra_row, Sense::LE, extra_rhs);

        // start: structural vars at the bound closest to zero, slacks clamped,
        // artificials absorb the residual
        std::vector<double> x(ncols, 0.0);
        std::vector<int> status(ncols, kAtLo); // nonbasic position
        for (size_t i = 0; i < n; ++i) {
            x[i] = (std::fabs(l[i]) <= std::fabs(u[i])) ? l[i] : u[i];
            status[i] = x[i] == l[i] ? kAtLo : kAtUp;
        }
        std::vector<double> act(rows, 0.0);
        for (size_t r = 0; r < rows; ++r) {
            double a = 0;
            for (size_t i = 0; i < n; ++i)
                a += T[r * ncols + i] * x[i];
            act[r] = a;
            size_t s = n + r;
            // nonbasic variables must sit exactly on a bound: park the slack
            // on its finite (rhs) side and let the artificial take the rest
            if (std::isfinite(u[s]) && (!std::isfinite(l[s]) || l[s] < -kBig / 2)) {
                x[s] = u[s];
                status[s] = kAtUp;
            } else {
                x[s] = l[s];
                status[s] = kAtLo;
            }
            size_t av = n + rows + r;
            double resid = a - x[s]; // a.x - s
            if (resid >= 0) {
                T[r * ncols + av] = -1.0;
            } else {
                T[r * ncols + av] = 1.0;
            }
            l[av] = 0;
            u[av] = kBig;
            x[av] = std::fabs(resid);
        }
        // canonicalize: basis = artificials; scale rows so basic coef is +1
        std::vector<int> basis(rows);
        for (size_t r = 0; r < rows; ++r) {
            size_t av = n + rows + r;
            basis[r] = int(av);
            double coef = T[r * ncols + av];
            if (coef != 1.0)
                for (size_t cck = 0; cck < ncols; ++cck)
                    T[r * ncols + cck] = -T[r * ncols + cck];
            status[av] = kBasic;
        }
        // phase-1 objective: min sum of artificials; reduced cost row
        std::vector<double> d(ncols, 0.0); // reduced costs (c_j - z_j)
        for (size_t j = 0; j < ncols; ++j) {
            double z = 0;
            for (size_t r = 0; r < rows; ++r)
                z += T[r * ncols + j]; // c_B = 1 on artificials
            d[j] = (j >= n + rows ? 1.0 : 0.0) - z;
        }
        double obj = 0;
        for (size_t r = 0; r < rows; ++r)
            obj += x[size_t(basis[r])];

        const double tol = 1e-7;
        size_t max_iters = 50 * (rows + n) + 1000;
        for (size_t iter = 0; iter < max_iters; ++iter) {
            if (obj <= 1e-6)
                return LpFeas::Feasible;
            bool bland = iter > max_iters / 2;
            // entering variable
            size_t enter = ncols;
            double best = -tol;
            int dir = 0;
            for (size_t j = 0; j < ncols; ++j) {
                if (status[j] == kBasic)
                    continue;
                if (l[j] == u[j])
                    continue;
                if (j >= n + rows)
                    continue; // artificials never re-enter
                double dj = d[j];
                double gain = 0;
                int dj_dir = 0;
                if (status[j] == kAtLo && dj < -tol) {
                    gain = dj;
                    dj_dir = 1;
                } else if (status[j] == kAtUp && dj > tol) {
                    gain = -dj;
                    dj_dir = -1;
                } else {
                    continue;
                }
                if (bland) {
                    enter = j;
                    dir = dj_dir;
                    break;
                }
                if (gain < best) {
                    best = gain;
                    enter = j;
                    dir = dj_dir;
                }
            }
            if (enter == ncols)
                return obj > 1e-6 ? LpFeas::Infeasible : LpFeas::Feasible;
            // ratio test: entering moves by delta * dir
            double delta = u[enter] - l[enter]; // bound flip cap
            size_t leave_row = rows;
            for (size_t r = 0; r < rows; ++r) {
                double a = T[r * ncols + enter] * dir;
                if (std::fabs(a) < 1e-11)
                    continue;
                size_t b = size_t(basis[r]);
                double room = a > 0 ? (x[b] - l[b]) / a : (x[b] - u[b]) / a;
                if (room < delta - 1e-12) {
                    delta = room;
                    leave_row = r;
                }
            }
            if (delta >= kBig / 2)
                return LpFeas::Unknown; // unbounded phase-1: numerical trouble
            delta = std::max(delta, 0.0);
            // apply the move
            for (size_t r = 0; r < rows; ++r)
                x[size_t(basis[r])] -= delta * dir * T[r * ncols + enter];
            x[enter] += delta * dir;
            obj = 0;
            for (size_t r = 0; r < rows; ++r)
                if (size_t(basis[r]) >= n + rows)
                    obj += x[size_t(basis[r])];
            if (leave_row == rows) {
                // bound flip, basis unchanged
                status[enter] = status[enter] == kAtLo ? kAtUp : kAtLo;
                continue;
            }
            // pivot
            size_t lv = size_t(basis[leave_row]);
            double piv = T[leave_row * ncols + enter];
            for (size_t j = 0; j < ncols; ++j)
                T[leave_row * ncols + j] /= piv;
            for (size_t r = 0; r < rows; ++r) {
                if (r == leave_row)
                    continue;
                double f = T[r * ncols + enter];
                if (std::fabs(f) < 1e-13)
                    continue;
                for (size_t j = 0; j < ncols; ++j)
                    T[r * ncols + j] -= f * T[leave_row * ncols + j];
            }
            double fd = d[enter];
            if (std::fabs(fd) > 1e-13)
                for (size_t j = 0; j < ncols; ++j)
                    d[j] -= fd * T[leave_row * ncols + j];
            basis[leave_row] = int(enter);
            status[enter] = kBasic;
            status[lv] = (x[lv] <= l[lv] + 1e-9) ? kAtLo : kAtUp;
            x[lv] = status[lv] == kAtLo ? l[lv] : u[lv];
        }
        return LpFeas::Unknown;
    }

private:
    static constexpr int kAtLo = 0, kAtUp = 1, kBasic = 2;
    static constexpr double kBig = 1e15;
};

// ---------------------------------------------------------------------------
// Internal exact solver: DFS branch-and-bound over integer variables with
// feasibility-based interval propagation, restarted on each incumbent so the
// tightened cutoff (plus an LP feasibility check on small models) prunes from
// the root. Deterministic: the search budget is a node count derived from the
// time limit, never wall-clock.

struct SolveOptions {
    double time_limit_s = 3600.0;
    uint64_t node_budget = 0;      // 0: derived as time_limit_s * kNodesPerSecond
    std::string external_solver;   // when set, solve via LP file + this executable
    std::string work_dir = ".";    // scratch dir for external solve
};

constexpr uint64_t kNodesPerSecond = 50000;

class BranchAndBound {
public:
    explicit BranchAndBound(const Model& m) : m_(m) {
        size_t n = m.vars.size();
        lo_.resize(n);
        hi_.resize(n);
        for (size_t i = 0; i < n; ++i) {
            lo_[i] = m.vars[i].lb;
            hi_[i] = m.vars[i].ub;
            if (m.vars[i].kind != VarKind::Continuous) {
                require(std::isfinite(lo_[i]) && std::isfinite(hi_[i]),
                        "internal solver needs finite bounds on integer variable '",
                        m.vars[i].name, "'");
                lo_[i] = std::ceil(lo_[i] - 1e-9);
                hi_[i] = std::floor(hi_[i] + 1e-9);
            }
        }
        occ_.resize(n);
        for (size_t ci = 0; ci < m.constraints.size(); ++ci)
            for (const auto& t : m.constraints[ci].terms)
                occ_[size_t(t.var)].push_back(int(ci));
        queued_.assign(m.constraints.size(), 0);
        obj_member_.assign(n, 0);
        for (const auto& t : m.objective)
            obj_member_[size_t(t.var)] = 1;
        // objective normalized to minimization
        obj_ = m.objective;
        obj_sign_ = (m.obj_sense == ObjSense::Maximize) ? -1.0 : 1.0;
        for (auto& t : obj_)
            t.coef *= obj_sign_;
        obj_integral_ = true;
        for (const auto& t : obj_) {
            if (m.vars[size_t(t.var)].kind == VarKind::Continuous ||
                t.coef != std::round(t.coef))
                obj_integral_ = false;
        }
        branch_order_ = make_branch_order();
    }

    Solution run(uint64_t node_budget) {
        Solution sol;
        best_obj_ = kInf;
        nodes_ = 0;
        lp_ok_ = m_.constraints.size() <= 1500 && m_.vars.size() <= 1500;
        bool exhausted = true;
        bool budget_hit = false;

        // restart loop: every new incumbent tightens the cutoff and the search
        // resumes from the root, where propagation plus the LP feasibility
        // check prune hardest
        while (true) {
            std::vector<Frame> stack;
            stack.push_back(Frame{});
            trail_mark_.assign(1, trail_.size());
            enqueue_all();
            bool improved = false;
            if (!propagate()) {
                undo_to(0);
                trail_mark_.clear();
                break; // nothing below the cutoff (or root infeasible)
            }
            if (lp_prune(1)) {
                undo_to(0);
                trail_mark_.clear();
                break;
            }
            improved = dive(stack);
            while (!stack.empty() && !improved) {
                if (nodes_ >= node_budget) {
                    budget_hit = true;
                    break;
                }
                Frame& f = stack.back();
                if (f.next_child >= f.children.size()) {
                    undo_to(trail_mark_.back());
                    trail_mark_.pop_back();
                    stack.pop_back();
                    continue;
                }
                const BoundSet& child = f.children[f.next_child++];
                ++nodes_;
                size_t mark = trail_.size();
                bool ok = true;
                for (const auto& bc : child.changes) {
                    if (!apply_bound(bc.var, bc.is_upper, bc.value)) {
                        ok = false;
                        break;
                    }
                }
                if (ok)
                    ok = propagate();
                if (ok && lp_prune(stack.size() + 1))
                    ok = false;
                if (!ok) {
                    undo_to(mark);
                    continue;
                }
                trail_mark_.push_back(mark);
                stack.push_back(Frame{});
                improved = dive(stack);
            }
            undo_to(0);
            trail_mark_.clear();
            if (budget_hit) {
                exhausted = false;
                break;
            }
            if (!improved)
                break; // search space exhausted under the current cutoff
        }
        sol.nodes_explored = nodes_;
        if (best_obj_ < kInf) {
            sol.status = exhausted ? Status::Optimal : Status::Feasible;
            sol.values = best_values_;
            sol.objective = obj_sign_ * best_obj_;
            double v = m_.violation(sol.values);
            require(v <= kFeasTol, "internal solver produced infeasible solution (violation ", v,
                    ")");
        } else {
            sol.status = exhausted ? Status::Infeasible : Status::Timeout;
        }
        return sol;
    }

private:
    struct BoundChange {
        int var;
        bool is_upper;
        double value;
    };
    struct BoundSet {
        std::vector<BoundChange> changes;
    };
    struct Frame {
        std::vector<BoundSet> children;
        size_t next_child = 0;
    };

    const Model& m_;
    std::vector<double> lo_, hi_;
    std::vector<std::vector<int>> occ_;
    LinExpr obj_;
    double obj_sign_ = 1.0;
    bool obj_integral_ = false;
    std::vector<int> branch_order_;

    std::vector<std::pair<int, std::pair<bool, double>>> trail_; // var, (is_upper, old)
    std::vector<size_t> trail_mark_;
    std::vector<int> queue_;      // dirty constraints
    std::vector<char> queued_;
    std::vector<char> obj_member_;
    bool cutoff_dirty_ = false;
    double best_obj_ = kInf;
    std::vector<double> best_values_;
    uint64_t nodes_ = 0;
    bool lp_ok_ = false;

    std::vector<int> make_branch_order() const {
        std::vector<int> order;
        for (size_t i = 0; i < m_.vars.size(); ++i)
            if (m_.vars[i].kind != VarKind::Continuous)
                order.push_back(int(i));
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return m_.vars[size_t(a)].branch_priority > m_.vars[size_t(b)].branch_priority;
        });
        return order;
    }

    void touch(int v) {
        for (int ci : occ_[size_t(v)])
            if (!queued_[size_t(ci)]) {
                queued_[size_t(ci)] = 1;
                queue_.push_back(ci);
            }
        if (obj_member_[size_t(v)])
            cutoff_dirty_ = true;
    }
    bool set_lo(int v, double val) {
        if (m_.vars[size_t(v)].kind != VarKind::Continuous)
            val = std::ceil(val - 1e-9);
        if (val <= lo_[size_t(v)] + 1e-12)
            return true;
        trail_.push_back({v, {false, lo_[size_t(v)]}});
        lo_[size_t(v)] = val;
        touch(v);
        return val <= hi_[size_t(v)] + 1e-9;
    }
    bool set_hi(int v, double val) {
        if (m_.vars[size_t(v)].kind != VarKind::Continuous)
            val = std::floor(val + 1e-9);
        if (val >= hi_[size_t(v)] - 1e-12)
            return true;
        trail_.push_back({v, {true, hi_[size_t(v)]}});
        hi_[size_t(v)] = val;
        touch(v);
        return lo_[size_t(v)] <= val + 1e-9;
    }
    bool apply_bound(int var, bool is_upper, double value) {
        return is_upper ? set_hi(var, value) : set_lo(var, value);
    }
    void undo_to(size_t mark) {
        while (trail_.size() > mark) {
            auto [v, chg] = trail_.back();
            trail_.pop_back();
            if (chg.first)
                hi_[size_t(v)] = chg.second;
            else
                lo_[size_t(v)] = chg.second;
        }
    }

    // one-sided propagation for sum(terms) <= rhs
    // returns false on proven infeasibility
    bool propagate_le(const LinExpr& terms, double rhs, bool& changed) {
        double minact = 0;
        for (const auto& t : terms)
            minact += t.coef > 0 ? t.coef * lo_[size_t(t.var)] : t.coef * hi_[size_t(t.var)];
        if (minact > rhs + kFeasTol)
            return false;
        double slack = rhs - minact;
        for (const auto& t : terms) {
            double a = t.coef;
            if (a > 0) {
                double allowed = lo_[size_t(t.var)] + slack / a;
                if (allowed < hi_[size_t(t.var)] - 1e-9) {
                    if (!set_hi(t.var, allowed))
                        return false;
                    changed = true;
                }
            } else if (a < 0) {
                double allowed = hi_[size_t(t.var)] + slack / a; // a < 0: lowers the floor
                if (allowed > lo_[size_t(t.var)] + 1e-9) {
                    if (!set_lo(t.var, allowed))
                        return false;
                    changed = true;
                }
            }
        }
        return true;
    }

    bool propagate_constraint(const Constraint& c, bool& changed) {
        if (c.sense == Sense::LE)
            return propagate_le(c.terms, c.rhs, changed);
        if (c.sense == Sense::GE) {
            neg_buf_.clear();
            for (const auto& t : c.terms)
                neg_buf_.push_back({t.var, -t.coef});
            return propagate_le(neg_buf_, -c.rhs, changed);
        }
        if (!propagate_le(c.terms, c.rhs, changed))
            return false;
        neg_buf_.clear();
        for (const auto& t : c.terms)
            neg_buf_.push_back({t.var, -t.coef});
        return propagate_le(neg_buf_, -c.rhs, changed);
    }

    void drain_queue() {
        for (int ci : queue_)
            queued_[size_t(ci)] = 0;
        queue_.clear();
        cutoff_dirty_ = false;
    }

    // worklist fixpoint over dirty constraints; bound changes re-enqueue
    // their consumers via touch()
    bool propagate() {
        uint64_t pops = 0;
        const uint64_t cap = 1000 + 64 * uint64_t(m_.constraints.size() + 1);
        if (best_obj_ < kInf)
            cutoff_dirty_ = true;
        while (!queue_.empty() || cutoff_dirty_) {
            if (++pops > cap) {
                drain_queue();
                return true; // give up on the fixpoint, soundly
            }
            bool changed = false;
            if (cutoff_dirty_) {
                cutoff_dirty_ = false;
                if (best_obj_ < kInf && !obj_.empty()) {
                    double cutoff = obj_integral_ ? best_obj_ - 1 + 1e-7 : best_obj_ - 1e-6;
                    if (!propagate_le(obj_, cutoff, changed)) {
                        drain_queue();
                        return false;
                    }
                }
                continue;
            }
            int ci = queue_.back();
            queue_.pop_back();
            queued_[size_t(ci)] = 0;
            if (!propagate_constraint(m_.constraints[size_t(ci)], changed)) {
                drain_queue();
                return false;
            }
        }
        return true;
    }

    void enqueue_all() {
        drain_queue();
        for (size_t ci = 0; ci < m_.constraints.size(); ++ci) {
            queued_[ci] = 1;
            queue_.push_back(int(ci));
        }
    }

    int pick_branch_var() const {
        for (int v : branch_order_)
            if (hi_[size_t(v)] - lo_[size_t(v)] > 0.5)
                return v;
        return -1;
    }

    // LP feasibility prune at the top of the tree once a cutoff exists: at
    // the restart root for every objective (one tableau per incumbent), a
    // little deeper for integral objectives where refutations are common.
    bool lp_prune(size_t depth) {
        if (!lp_ok_ || best_obj_ >= kInf || obj_.empty())
            return false;
        if (depth > (obj_integral_ ? size_t(2) : size_t(1)))
            return false;
        double cutoff = obj_integral_ ? best_obj_ - 1 + 1e-7 : best_obj_ - 1e-6;
        return Phase1Lp::check(m_, lo_, hi_, &obj_, cutoff) == LpFeas::Infeasible;
    }

    // Expands the current node; when an unfixed integer remains, pushes its
    // children onto the frame. Returns true if a new incumbent was recorded.
    bool dive(std::vector<Frame>& stack) {
        Frame& f = stack.back();
        int v = pick_branch_var();
        if (v < 0) {
            return try_incumbent();
        }
        const Var& var = m_.vars[size_t(v)];
        double l = lo_[size_t(v)], u = hi_[size_t(v)];
        double target;
        if (var.hint && *var.hint >= l - 1e-9 && *var.hint <= u + 1e-9)
            target = std::round(*var.hint);
        else
            target = var.prefer_high ? u : l;
        target = std::min(std::max(target, l), u);
        // child order: fix target first, then the rest of the domain
        BoundSet fix;
        fix.changes.push_back({v, false, target});
        fix.changes.push_back({v, true, target});
        f.children.push_back(fix);
        if (target + 0.5 < u) {
            BoundSet above;
            above.changes.push_back({v, false, target + 1});
            f.children.push_back(above);
        }
        if (target - 0.5 > l) {
            BoundSet below;
            below.changes.push_back({v, true, target - 1});
            f.children.push_back(below);
        }
        // prefer_high explores the upper remainder before the lower remainder;
        // the order above already does (fix, above, below)
        return false;
    }

    bool try_incumbent() {
        // all integers fixed; pin continuous vars at their objective-preferred
        // propagated bound and verify
        std::vector<double> x(m_.vars.size());
        std::vector<double> objc(m_.vars.size(), 0.0);
        for (const auto& t : obj_)
            objc[size_t(t.var)] += t.coef;
        for (size_t i = 0; i < x.size(); ++i) {
            if (m_.vars[i].kind != VarKind::Continuous) {
                x[i] = lo_[i];
            } else {
                double pick = objc[i] < 0 ? hi_[i] : lo_[i];
                if (!std::isfinite(pick))
                    pick = objc[i] < 0 ? 1e18 : (std::isfinite(lo_[i]) ? lo_[i] : 0.0);
                x[i] = pick;
            }
        }
        double viol = m_.violation(x);
        if (viol > kFeasTol)
            fail("internal backend cannot resolve the continuous block of this model "
                 "(fixed-integer refinement violates a constraint by ",
                 viol, "); use the external solver backend");
        double obj = 0;
        for (const auto& t : obj_)
            obj += t.coef * x[size_t(t.var)];
        if (obj < best_obj_ - 1e-9) {
            best_obj_ = obj;
            best_values_ = x;
            return true;
        }
        return false;
    }

    mutable LinExpr neg_buf_;
};

inline Solution solve_internal(const Model& m, const SolveOptions& opts = {}) {
    BranchAndBound bb(m);
    uint64_t budget = opts.node_budget;
    if (budget == 0)
        budget = uint64_t(std::max(1.0, opts.time_limit_s) * double(kNodesPerSecond));
    return bb.run(budget);
}

// ---------------------------------------------------------------------------
// External backend: writes model.lp, runs `<solver> <model.lp> <out.sol>`,
// reads back `status\n(name value\n)*`. The solution is re-checked against the
// model before being surfaced.

inline Solution solve_external(const Model& m, const SolveOptions& opts) {
    const std::string& exe = opts.external_solver;
    require(!exe.empty(),
            "external solver not configured: set the DPGEN_SOLVER environment variable or the "
            "solver_path config key");
    {
        std::ifstream probe(exe);
        require(probe.good(), "external solver executable '", exe,
                "' not found (configured via DPGEN_SOLVER / solver_path)");
    }
    std::string lp_path = opts.work_dir + "/dpgen_model.lp";
    std::string sol_path = opts.work_dir + "/dpgen_model.sol";
    {
        std::ofstream f(lp_path);
        require(f.good(), "cannot write ", lp_path);
        f << emit_lp(m);
    }
    std::remove(sol_path.c_str());
    std::string cmd = "\"" + exe + "\" \"" + lp_path + "\" \"" + sol_path + "\"";
    int rc = std::system(cmd.c_str());
    require(rc == 0, "external solver exited with status ", rc, " (command: ", cmd, ")");
    std::ifstream f(sol_path);
    require(f.good(), "external solver produced no solution file at ", sol_path);

    Solution sol;
    std::string line;
    bool have_status = false;
    std::map<std::string, double> vals;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream is(line);
        if (!have_status) {
            std::string st;
            is >> st;
            if (st == "optimal")
                sol.status = Status::Optimal;
            else if (st == "feasible")
                sol.status = Status::Feasible;
            else if (st == "infeasible")
                sol.status = Status::Infeasible;
            else if (st == "timeout")
                sol.status = Status::Timeout;
            else
                fail("cannot parse external solver output line ", lineno, ": '", line, "'");
            have_status = true;
            continue;
        }
        std::string name;
        double v;
        if (!(is >> name >> v))
            fail("cannot parse external solver output line ", lineno, ": '", line, "'");
        vals[name] = v;
    }
    require(have_status, "external solver output is empty");
    if (sol.status == Status::Optimal || sol.status == Status::Feasible) {
        sol.values.assign(m.vars.size(), 0.0);
        for (size_t i = 0; i < m.vars.size(); ++i) {
            auto it = vals.find(m.vars[i].name);
            double v = it != vals.end() ? it->second
                                        : (std::isfinite(m.vars[i].lb) ? m.vars[i].lb : 0.0);
            if (m.vars[i].kind != VarKind::Continuous)
                v = std::round(v);
            sol.values[i] = v;
        }
        double viol = m.violation(sol.values);
        require(viol <= 1e-5, "external solver solution violates the model by ", viol);
        sol.objective = m.eval(m.objective, sol.values);
    }
    return sol;
}

inline Solution solve(const Model& m, const SolveOptions& opts = {}) {
    if (!opts.external_solver.empty())
        return solve_external(m, opts);
    return solve_internal(m, opts);
}

} // namespace dpgen::ilp
