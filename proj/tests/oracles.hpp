#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls the production routine it is meant to check.

#include "dlneb/instance.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using dlneb::Matrix;
using dlneb::Vector;
using dlneb::WeightStack;

// Dense scan + bisection for the positive roots of
// x^{2L-2} - sqrt(lam) y x^{L-2} + lam on (0, max(1, sqrt(lam) y)].
inline std::vector<double> brute_force_roots(double y, double lam, int L, int n = 1000000) {
    const double sl = std::sqrt(lam);
    auto q = [&](double x) { return std::pow(x, 2 * L - 2) - sl * y * std::pow(x, L - 2) + lam; };
    const double hi = std::max(1.0, sl * y);
    std::vector<double> roots{0.0};
    double xa = 0.0, fa = q(0.0);
    for (int k = 1; k <= n; ++k) {
        const double xb = hi * k / n;
        const double fb = q(xb);
        if ((fa < 0) != (fb < 0)) {
            double a = xa, b = xb, f = fa;
            for (int it = 0; it < 200; ++it) {
                const double m = 0.5 * (a + b);
                const double fm = q(m);
                if ((fm < 0) == (f < 0)) {
                    a = m;
                    f = fm;
                } else {
                    b = m;
                }
            }
            roots.push_back(0.5 * (a + b));
        }
        xa = xb;
        fa = fb;
    }
    return roots;
}

// Central differences over every entry of every layer.
inline WeightStack fd_gradient(const std::function<double(const WeightStack&)>& f, const WeightStack& W,
                               double h = 1e-5) {
    WeightStack g = W;
    WeightStack Wp = W;
    for (int l = 1; l <= W.L(); ++l) {
        for (Eigen::Index j = 0; j < W[l].cols(); ++j) {
            for (Eigen::Index i = 0; i < W[l].rows(); ++i) {
                const double x = W[l](i, j);
                Wp[l](i, j) = x + h;
                const double fp = f(Wp);
                Wp[l](i, j) = x - h;
                const double fm = f(Wp);
                Wp[l](i, j) = x;
                g[l](i, j) = (fp - fm) / (2 * h);
            }
        }
    }
    return g;
}

inline Matrix gaussian(int r, int c, std::mt19937_64& gen, double sd = 1.0) {
    std::normal_distribution<double> nd(0.0, sd);
    Matrix M(r, c);
    for (int j = 0; j < c; ++j)
        for (int i = 0; i < r; ++i) M(i, j) = nd(gen);
    return M;
}

inline Matrix uniform(int r, int c, std::mt19937_64& gen, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> ud(lo, hi);
    Matrix M(r, c);
    for (int j = 0; j < c; ++j)
        for (int i = 0; i < r; ++i) M(i, j) = ud(gen);
    return M;
}

inline WeightStack random_stack(const std::vector<int>& dims, std::mt19937_64& gen, double sd = 1.0) {
    WeightStack W;
    for (std::size_t l = 1; l < dims.size(); ++l) W.layers.push_back(gaussian(dims[l], dims[l - 1], gen, sd));
    return W;
}

inline WeightStack unit_direction(const std::vector<int>& dims, std::mt19937_64& gen) {
    WeightStack E = random_stack(dims, gen);
    return E * (1.0 / E.norm());
}

// Per-layer gradient from the textbook formula, products recomputed per layer.
inline WeightStack naive_gradient(const WeightStack& W, const Matrix& T, const std::vector<double>& lam) {
    const int L = W.L();
    auto prod = [&](int i, int j) {
        Matrix P = Matrix::Identity(j == 1 ? W[1].cols() : W[j - 1].rows(), j == 1 ? W[1].cols() : W[j - 1].rows());
        for (int l = j; l <= i; ++l) P = W[l] * P;
        return P;
    };
    const Matrix R = prod(L, 1) - T;
    WeightStack g = W;
    for (int l = 1; l <= L; ++l) g[l] = 2.0 * prod(L, l + 1).transpose() * R * prod(l - 1, 1).transpose() + 2.0 * lam[l - 1] * W[l];
    return g;
}

// Random instance satisfying the width assumption: d_0, d_L in [lo, hi], hidden widths >= min(d_0, d_L).
inline std::vector<int> random_dims(int L, std::mt19937_64& gen, int lo = 1, int hi = 8) {
    std::uniform_int_distribution<int> ud(lo, hi);
    std::vector<int> d(static_cast<std::size_t>(L + 1));
    d[0] = ud(gen);
    d[static_cast<std::size_t>(L)] = ud(gen);
    const int m = std::min(d[0], d[static_cast<std::size_t>(L)]);
    std::uniform_int_distribution<int> hd(m, hi);
    for (int l = 1; l < L; ++l) d[static_cast<std::size_t>(l)] = hd(gen);
    return d;
}

inline std::vector<double> random_lambdas(int L, std::mt19937_64& gen, double lo = 1e-3, double hi = 1.0) {
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    std::vector<double> lam(static_cast<std::size_t>(L));
    for (auto& v : lam) v = std::exp(u(gen));
    return lam;
}

// OLS slope and R^2 of y against x.
struct Fit {
    double slope, intercept, r2;
};
inline Fit ols(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    const double b = sxy / sxx;
    return {b, my - b * mx, syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0};
}

// Column-by-column forward pass with scalar loops; act: 0 identity, 1 relu,
// 2 leaky (0.01), 3 tanh. Empty b means no biases.
inline double naive_mlp_loss(const std::vector<Matrix>& W, const std::vector<Vector>& b, const Matrix& X,
                             const Matrix& Y, const std::vector<double>& lam, int act) {
    auto s = [act](double v) {
        switch (act) {
        case 1: return v > 0 ? v : 0.0;
        case 2: return v > 0 ? v : 0.01 * v;
        case 3: return std::tanh(v);
        default: return v;
        }
    };
    const std::size_t L = W.size();
    double total = 0.0;
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
        std::vector<double> h(X.col(c).data(), X.col(c).data() + X.rows());
        for (std::size_t l = 0; l < L; ++l) {
            std::vector<double> z;
            for (Eigen::Index i = 0; i < W[l].rows(); ++i) {
                double acc = b.empty() ? 0.0 : b[l](i);
                for (std::size_t j = 0; j < h.size(); ++j) acc += W[l](i, static_cast<Eigen::Index>(j)) * h[j];
                z.push_back(l + 1 < L ? s(acc) : acc);
            }
            h = std::move(z);
        }
        for (Eigen::Index i = 0; i < Y.rows(); ++i) {
            const double r = h[static_cast<std::size_t>(i)] - Y(i, c);
            total += r * r;
        }
    }
    for (std::size_t l = 0; l < L; ++l) {
        total += lam[l] * W[l].squaredNorm();
        if (!b.empty()) total += lam[l] * b[l].squaredNorm();
    }
    return total;
}

} // namespace oracle
