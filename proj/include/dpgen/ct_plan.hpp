#pragma once

// Per-column compressor counts for the two-row compression problem: as few
// compressors as possible, at most one 2:2 per column (parity fix), carries
// rippling LSB to MSB.

#include <vector>

#include "dpgen/ppg.hpp"

namespace dpgen {

struct ColumnPlan {
    int pp = 0;        // initial partial products in this column
    int f = 0;         // 3:2 compressors (F_j)
    int h = 0;         // 2:2 compressors (H_j), 0 or 1
    int carry_in = 0;  // C_{j-1}
    int carry_out = 0; // C_j = F_j + H_j
    int outputs = 0;   // residual bits after compression

    int total() const { return pp + carry_in; }
};

inline std::vector<ColumnPlan> plan_compressors(const std::vector<int>& heights) {
    std::vector<ColumnPlan> plans;
    plans.reserve(heights.size() + 1);
    int carry = 0;
    for (int pp : heights) {
        require(pp >= 0, "plan_compressors: negative column height");
        ColumnPlan p;
        p.pp = pp;
        p.carry_in = carry;
        int t = pp + carry;
        if (t <= 2) {
            // already at most two rows; Alg. 1 as printed would go negative here
            p.f = 0;
            p.h = 0;
        } else if (t % 2 == 0) {
            p.f = (t - 2) / 2;
            p.h = 0;
        } else {
            p.h = 1;
            p.f = (t - 3) / 2;
        }
        p.carry_out = p.f + p.h;
        p.outputs = t - 2 * p.f - p.h;
        carry = p.carry_out;
        plans.push_back(p);
    }
    // carries past the last column ripple into fresh columns
    while (carry > 0) {
        ColumnPlan p;
        p.pp = 0;
        p.carry_in = carry;
        int t = carry;
        if (t > 2) {
            if (t % 2 == 0) {
                p.f = (t - 2) / 2;
            } else {
                p.h = 1;
                p.f = (t - 3) / 2;
            }
        }
        p.carry_out = p.f + p.h;
        p.outputs = t - 2 * p.f - p.h;
        carry = p.carry_out;
        plans.push_back(p);
    }
    return plans;
}

inline std::vector<ColumnPlan> plan_compressors(const PartialProductMatrix& ppm) {
    return plan_compressors(ppm.heights());
}

// ceil(log_{3/2}(max_total / 2)), floored at 0. Exact integer arithmetic:
// smallest s >= 0 with 2 * 3^s >= max_total * 2^s.
inline int min_stage_bound(int max_total) {
    require(max_total >= 1, "min_stage_bound: max_total must be >= 1");
    unsigned __int128 lhs = 2; // 2 * 3^s
    unsigned __int128 rhs = max_total; // max_total * 2^s
    int s = 0;
    while (lhs < rhs) {
        lhs *= 3;
        rhs *= 2;
        ++s;
        require(s < 200, "min_stage_bound: max_total out of range");
    }
    return s;
}

inline int max_column_total(const std::vector<ColumnPlan>& plans) {
    int m = 0;
    for (const auto& p : plans)
        m = std::max(m, p.total());
    return m;
}

// Normalized compressor area, 3 units per 3:2 and 2 per 2:2 (a 3:2 is ~1.5x
// the area of a 2:2 in NAND/OAI CMOS).
inline int plan_area(const std::vector<ColumnPlan>& plans) {
    int a = 0;
    for (const auto& p : plans)
        a += 3 * p.f + 2 * p.h;
    return a;
}

inline int total_f(const std::vector<ColumnPlan>& plans) {
    int n = 0;
    for (const auto& p : plans)
        n += p.f;
    return n;
}

inline int total_h(const std::vector<ColumnPlan>& plans) {
    int n = 0;
    for (const auto& p : plans)
        n += p.h;
    return n;
}

} // namespace dpgen
