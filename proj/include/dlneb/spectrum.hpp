#pragma once

#include "dlneb/common.hpp"
#include "dlneb/network.hpp"
#include "dlneb/roots.hpp"

#include <limits>
#include <vector>

namespace dlneb {

struct TargetSpectrum {
    Matrix U;             // d_L x d_L
    Matrix V;             // d_0 x d_0
    Vector y;             // d_min singular values, nonincreasing
    int r_Y = 0;          // rank
    int p_Y = 0;          // number of distinct positive values
    std::vector<int> s;   // 0 = s_0 < ... < s_{p_Y} = r_Y
    std::vector<int> h;   // h_i = s_i - s_{i-1}, i = 1..p_Y (stored 0-based)
    double delta_y = std::numeric_limits<double>::infinity();
    double grouping_tol = 1e-8;

    int d0() const { return static_cast<int>(V.rows()); }
    int dL() const { return static_cast<int>(U.rows()); }
    int d_min() const { return static_cast<int>(y.size()); }
    double y1() const { return y.size() > 0 ? y(0) : 0.0; }
    // Block (0-based) containing 0-based index j < r_Y.
    int block_of(int j) const;
    // Representative value of block b (its first entry).
    double block_value(int b) const { return y(s[static_cast<std::size_t>(b)]); }
    // y_{s_{p_Y}}: smallest distinct positive value.
    double smallest_positive() const { return p_Y > 0 ? block_value(p_Y - 1) : 0.0; }
    Matrix sigma_matrix() const; // d_L x d_0 diagonal embedding of y
};

TargetSpectrum analyze_target(const Matrix& Y, double grouping_tol = 1e-8);

struct RootValueSet {
    std::vector<double> values; // ascending, values[0] = 0
    double delta_sigma = std::numeric_limits<double>::infinity();
};

RootValueSet build_root_value_set(const TargetSpectrum& spec, const RegParams& reg, int L);

} // namespace dlneb
