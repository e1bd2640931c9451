#include "dlneb/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define DLNEB_HAVE_X86 1
#include <immintrin.h>
#endif

namespace dlneb::kernels::avx2 {

#ifdef DLNEB_HAVE_X86

bool supported() {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2");
}

namespace {

__attribute__((target("avx2"))) double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

} // namespace

// Plain mul/add throughout: no FMA, so axpy and poly_eval round exactly like
// the scalar reference.

__attribute__((target("avx2"))) double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
        acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

__attribute__((target("avx2"))) double sum_sq(const double* a, std::size_t n) {
    return dot(a, a, n);
}

__attribute__((target("avx2"))) double diff_sq(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    double s = hsum(acc);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

__attribute__((target("avx2"))) void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d r = _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
        _mm256_storeu_pd(y + i, r);
    }
    for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

__attribute__((target("avx2"))) void poly_eval(const double* x, std::size_t n, int p, int m, double c,
                                               double d, double* out) {
    const __m256d vc = _mm256_set1_pd(c);
    const __m256d vd = _mm256_set1_pd(d);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vx = _mm256_loadu_pd(x + i);
        __m256d xp = _mm256_set1_pd(1.0);
        __m256d xm = _mm256_set1_pd(1.0);
        for (int k = 0; k < p; ++k) {
            xp = _mm256_mul_pd(xp, vx);
            if (k < m) xm = _mm256_mul_pd(xm, vx);
        }
        const __m256d r = _mm256_add_pd(_mm256_sub_pd(xp, _mm256_mul_pd(vc, xm)), vd);
        _mm256_storeu_pd(out + i, r);
    }
    if (i < n) scalar::poly_eval(x + i, n - i, p, m, c, d, out + i);
}

#else

bool supported() { return false; }
double dot(const double* a, const double* b, std::size_t n) { return scalar::dot(a, b, n); }
double sum_sq(const double* a, std::size_t n) { return scalar::sum_sq(a, n); }
double diff_sq(const double* a, const double* b, std::size_t n) { return scalar::diff_sq(a, b, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) { scalar::axpy(alpha, x, y, n); }
void poly_eval(const double* x, std::size_t n, int p, int m, double c, double d, double* out) {
    scalar::poly_eval(x, n, p, m, c, d, out);
}

#endif

} // namespace dlneb::kernels::avx2
