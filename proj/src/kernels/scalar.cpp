#include "dlneb/kernels.hpp"

namespace dlneb::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum_sq(const double* a, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
    return s;
}

double diff_sq(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void poly_eval(const double* x, std::size_t n, int p, int m, double c, double d, double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        double xp = 1.0;
        double xm = 1.0;
        for (int k = 0; k < p; ++k) {
            xp = xp * x[i];
            if (k < m) xm = xm * x[i];
        }
        out[i] = (xp - c * xm) + d;
    }
}

} // namespace dlneb::kernels::scalar
