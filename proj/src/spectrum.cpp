#include "dlneb/spectrum.hpp"

#include <algorithm>
#include <cmath>

namespace dlneb {

int TargetSpectrum::block_of(int j) const {
    for (int b = 0; b < p_Y; ++b)
        if (j < s[static_cast<std::size_t>(b + 1)]) return b;
    throw std::out_of_range("block_of: index is not in a positive block");
}

Matrix TargetSpectrum::sigma_matrix() const {
    Matrix S = Matrix::Zero(dL(), d0());
    for (int i = 0; i < d_min(); ++i) S(i, i) = y(i);
    return S;
}

TargetSpectrum analyze_target(const Matrix& Y, double grouping_tol) {
    if (!Y.allFinite()) throw DomainError("analyze_target: target has non-finite entries");
    if (grouping_tol < 0.0) throw DomainError("analyze_target: grouping tolerance must be >= 0");
    TargetSpectrum t;
    t.grouping_tol = grouping_tol;
    Eigen::JacobiSVD<Matrix> svd(Y, Eigen::ComputeFullU | Eigen::ComputeFullV);
    t.U = svd.matrixU();
    t.V = svd.matrixV();
    t.y = svd.singularValues();

    const double y1 = t.y.size() > 0 ? t.y(0) : 0.0;
    const double thresh = 1e-12 * y1;
    t.r_Y = 0;
    for (int i = 0; i < t.y.size(); ++i)
        if (t.y(i) > thresh && t.y(i) > 0.0) t.r_Y = i + 1;
    // Values below the rank threshold are exact zeros from here on.
    for (int i = t.r_Y; i < t.y.size(); ++i) t.y(i) = 0.0;

    t.s.push_back(0);
    for (int i = 1; i < t.r_Y; ++i)
        if (t.y(i - 1) - t.y(i) > grouping_tol * y1) t.s.push_back(i);
    if (t.r_Y > 0) t.s.push_back(t.r_Y);
    t.p_Y = static_cast<int>(t.s.size()) - 1;
    for (int b = 0; b < t.p_Y; ++b) t.h.push_back(t.s[static_cast<std::size_t>(b + 1)] - t.s[static_cast<std::size_t>(b)]);

    // Gaps between consecutive distinct values, plus the gap to zero when a
    // zero value is present or when it is the only available gap.
    t.delta_y = std::numeric_limits<double>::infinity();
    for (int b = 0; b + 1 < t.p_Y; ++b) t.delta_y = std::min(t.delta_y, t.block_value(b) - t.block_value(b + 1));
    if (t.p_Y >= 1 && (t.r_Y < t.d_min() || t.p_Y == 1))
        t.delta_y = std::min(t.delta_y, t.smallest_positive());
    return t;
}

RootValueSet build_root_value_set(const TargetSpectrum& spec, const RegParams& reg, int L) {
    if (L < 2) throw DomainError("build_root_value_set: L must be >= 2");
    std::vector<double> all{0.0};
    for (int i = 0; i < spec.d_min(); ++i)
        for (const auto& r : solve_scalar_equation(spec.y(i), reg.lambda_prod, L)) all.push_back(r.value);
    std::sort(all.begin(), all.end());
    const double tol = 1e-9 * std::max(1.0, all.back());
    RootValueSet out;
    for (double v : all)
        if (out.values.empty() || v - out.values.back() > tol) out.values.push_back(v);
    for (std::size_t k = 1; k < out.values.size(); ++k)
        out.delta_sigma = std::min(out.delta_sigma, out.values[k] - out.values[k - 1]);
    return out;
}

} // namespace dlneb
