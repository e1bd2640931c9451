#pragma once

#include <vector>

namespace dlneb {

struct ScalarRoot {
    double value = 0.0;
    double residual = 0.0; // |q(value)| for positive roots, 0 for the zero root
    bool degenerate = false; // double root of f(s) = s^{2L-1} - sqrt(lam) y s^{L-1} + lam s
};

struct RootSolverOptions {
    int grid_intervals = 4096;
    double bisection_tol = 1e-14; // relative to the bracket bound
    double degeneracy_tol = 1e-7;
    double tangency_tol = 1e-12;
};

// All nonnegative roots of s^{2L-1} - sqrt(lam) y s^{L-1} + lam s = 0, ascending,
// always starting with 0. Positive roots are roots of
// q(x) = x^{2L-2} - sqrt(lam) y x^{L-2} + lam on (0, (sqrt(lam) y)^{1/L}].
std::vector<ScalarRoot> solve_scalar_equation(double y, double lambda, int L, const RootSolverOptions& opt = {});

// q and q' as above (x > 0).
double root_poly(double x, double y, double lambda, int L);
double root_poly_deriv(double x, double y, double lambda, int L);

// Upper bracket (sqrt(lam) y)^{1/L}.
double root_bracket(double y, double lambda, int L);

} // namespace dlneb
