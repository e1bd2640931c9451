#pragma once

#include <cstddef>
#include <span>

// Flat double-precision kernels used on the hot paths (GD update, norms over
// whole weight stacks, bracket-grid evaluation in the root solver). Each has a
// scalar reference and an AVX2 variant; the variant is picked once at startup.
namespace dlneb::kernels {

enum class Isa { Scalar, Avx2 };

Isa active_isa();
const char* isa_name(Isa isa);

// Force a specific implementation (tests and benchmarking). Returns false if
// the CPU does not support it.
bool force_isa(Isa isa);
void reset_isa();

double dot(std::span<const double> a, std::span<const double> b);
double sum_sq(std::span<const double> a);
double diff_sq(std::span<const double> a, std::span<const double> b);
// y <- y + alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
// out[k] = x^p - c * x^m + d, p >= m >= 0
void poly_eval(std::span<const double> x, int p, int m, double c, double d, std::span<double> out);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double sum_sq(const double* a, std::size_t n);
double diff_sq(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void poly_eval(const double* x, std::size_t n, int p, int m, double c, double d, double* out);
} // namespace scalar

namespace avx2 {
bool supported();
double dot(const double* a, const double* b, std::size_t n);
double sum_sq(const double* a, std::size_t n);
double diff_sq(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void poly_eval(const double* x, std::size_t n, int p, int m, double c, double d, double* out);
} // namespace avx2

} // namespace dlneb::kernels
