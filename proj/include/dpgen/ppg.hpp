#pragma once

// Partial product generation: the AND-array matrix for N x N unsigned
// multiplication, plus accumulator injection for fused MACs.

#include <algorithm>
#include <string>
#include <vector>

#include "dpgen/common.hpp"

namespace dpgen {

// One partial-product bit. The name is stable across runs (pp_<i>_<k> for the
// AND of a_i and b_k, acc_<j> for accumulator bits) so that netlist emission
// and wiring permutations are reproducible.
struct BitRef {
    std::string name;
    int column = 0;
};

struct PartialProductMatrix {
    int width = 0;                          // N
    std::vector<std::vector<BitRef>> columns; // index j = bit weight
    bool is_fused = false;
    int acc_width = 0;

    int column_count() const { return int(columns.size()); }
    int height(int j) const { return int(columns[size_t(j)].size()); }
    int max_height() const {
        int m = 0;
        for (const auto& c : columns)
            m = std::max(m, int(c.size()));
        return m;
    }
    int total_bits() const {
        int t = 0;
        for (const auto& c : columns)
            t += int(c.size());
        return t;
    }
    std::vector<int> heights() const {
        std::vector<int> h;
        h.reserve(columns.size());
        for (const auto& c : columns)
            h.push_back(int(c.size()));
        return h;
    }
};

inline PartialProductMatrix generate_and_array(int width) {
    require(width >= 2, "generate_and_array: width must be >= 2, got ", width);
    PartialProductMatrix ppm;
    ppm.width = width;
    ppm.columns.resize(size_t(2 * width - 1));
    for (int i = 0; i < width; ++i) {
        for (int k = 0; k < width; ++k) {
            int j = i + k;
            ppm.columns[size_t(j)].push_back({cat("pp_", i, "_", k), j});
        }
    }
    return ppm;
}

// Adds one accumulator bit acc_j to every column j < acc_width. Columns beyond
// the plain array's 2N-1 are created as needed (widened matrix); acc_width = 0
// is a no-op. Returns the extended matrix; *warning, when given, receives a
// human-readable note for the no-op and widening cases.
inline PartialProductMatrix inject_accumulator(const PartialProductMatrix& ppm, int acc_width,
                                               std::string* warning = nullptr) {
    require(acc_width >= 0, "inject_accumulator: negative acc_width");
    require(acc_width <= 2 * ppm.width,
            "inject_accumulator: acc_width ", acc_width, " exceeds 2*width = ", 2 * ppm.width);
    PartialProductMatrix out = ppm;
    if (acc_width == 0) {
        if (warning)
            *warning = "acc_width = 0: accumulator injection is a no-op";
        return out;
    }
    if (acc_width > ppm.column_count()) {
        if (warning)
            *warning = cat("matrix widened from ", ppm.column_count(), " to ", acc_width,
                           " columns to fit the accumulator");
        out.columns.resize(size_t(acc_width));
    }
    for (int j = 0; j < acc_width; ++j)
        out.columns[size_t(j)].push_back({cat("acc_", j), j});
    out.is_fused = true;
    out.acc_width = acc_width;
    return out;
}

} // namespace dpgen
