#include "dlneb/roots.hpp"

#include "dlneb/common.hpp"
#include "dlneb/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dlneb {

namespace {

double ipow(double x, int n) {
    double r = 1.0;
    for (int k = 0; k < n; ++k) r *= x;
    return r;
}

} // namespace

double root_poly(double x, double y, double lambda, int L) {
    return ipow(x, 2 * L - 2) - std::sqrt(lambda) * y * ipow(x, L - 2) + lambda;
}

double root_poly_deriv(double x, double y, double lambda, int L) {
    double d = (2.0 * L - 2.0) * ipow(x, 2 * L - 3);
    if (L > 2) d -= std::sqrt(lambda) * y * (L - 2.0) * ipow(x, L - 3);
    return d;
}

double root_bracket(double y, double lambda, int L) { return std::pow(std::sqrt(lambda) * y, 1.0 / L); }

std::vector<ScalarRoot> solve_scalar_equation(double y, double lambda, int L, const RootSolverOptions& opt) {
    if (!(y >= 0.0) || !std::isfinite(y)) throw DomainError("solve_scalar_equation: y must be finite and >= 0");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("solve_scalar_equation: lambda must be > 0");
    if (L < 2) throw DomainError("solve_scalar_equation: L must be >= 2");

    const double sl = std::sqrt(lambda);
    const double scale = lambda + sl * y;

    std::vector<ScalarRoot> roots;
    // f'(0) = q(0) vanishes only for L = 2 with lambda = y^2.
    const double q0 = L == 2 ? lambda - sl * y : lambda;
    roots.push_back({0.0, 0.0, std::abs(q0) <= opt.degeneracy_tol * scale});
    if (y == 0.0) return roots;

    const double B = root_bracket(y, lambda, L);
    auto q = [&](double x) { return root_poly(x, y, lambda, L); };
    auto is_degenerate = [&](double x) {
        return std::abs(root_poly_deriv(x, y, lambda, L)) * x <= opt.degeneracy_tol * scale;
    };

    // For L >= 3, q has a single positive stationary point (its minimum).
    double xc = -1.0;
    if (L >= 3) {
        xc = std::pow(sl * y * (L - 2.0) / (2.0 * L - 2.0), 1.0 / L);
        if (std::abs(q(xc)) <= opt.tangency_tol * scale) {
            roots.push_back({xc, std::abs(q(xc)), true});
            return roots;
        }
    }

    const int n = opt.grid_intervals;
    std::vector<double> grid(static_cast<std::size_t>(n + 1));
    for (int k = 0; k <= n; ++k) grid[static_cast<std::size_t>(k)] = B * static_cast<double>(k) / n;
    grid.back() = B;
    if (xc > 0.0 && xc < B) {
        grid.push_back(xc);
        std::sort(grid.begin(), grid.end());
    }
    std::vector<double> vals(grid.size());
    kernels::poly_eval(grid, 2 * L - 2, L - 2, sl * y, lambda, vals);

    const double width_tol = opt.bisection_tol * std::max(B, 1e-300);
    auto refine = [&](double a, double b, double fa) {
        for (int it = 0; it < 400 && (b - a) > width_tol; ++it) {
            const double m = 0.5 * (a + b);
            if (m <= a || m >= b) break;
            const double fm = q(m);
            if (!std::isfinite(fm)) {
                std::ostringstream os;
                os << "root solver: non-finite q at " << m << " in [" << a << ", " << b << "]";
                throw SolverError(os.str());
            }
            if (fm == 0.0) return m;
            if ((fm < 0.0) == (fa < 0.0)) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        double x = 0.5 * (a + b);
        const double fx = q(x);
        const double dx = root_poly_deriv(x, y, lambda, L);
        if (dx != 0.0) {
            const double xn = x - fx / dx;
            if (xn >= a && xn <= b && std::abs(q(xn)) <= std::abs(fx)) x = xn;
        }
        return x;
    };

    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double a = grid[k], b = grid[k + 1];
        const double fa = vals[k], fb = vals[k + 1];
        if (!std::isfinite(fa) || !std::isfinite(fb)) throw SolverError("root solver: non-finite value on bracket grid");
        if (a > 0.0 && fa == 0.0) {
            roots.push_back({a, 0.0, is_degenerate(a)});
            continue;
        }
        if ((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0)) {
            const double x = refine(a, b, fa);
            roots.push_back({x, std::abs(q(x)), is_degenerate(x)});
        }
    }

    for (const auto& r : roots) {
        if (r.residual > 1e-12 * scale) {
            std::ostringstream os;
            os << "root solver: residual " << r.residual << " at " << r.value << " exceeds tolerance (y=" << y
               << ", lambda=" << lambda << ", L=" << L << ")";
            throw SolverError(os.str());
        }
    }
    return roots;
}

} // namespace dlneb
