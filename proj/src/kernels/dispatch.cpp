#include "dlneb/kernels.hpp"

#include <atomic>
#include <stdexcept>

namespace dlneb::kernels {

namespace {

Isa detect() { return avx2::supported() ? Isa::Avx2 : Isa::Scalar; }

std::atomic<Isa>& current() {
    static std::atomic<Isa> isa{detect()};
    return isa;
}

void check_sizes(std::size_t a, std::size_t b) {
    if (a != b) throw std::invalid_argument("kernels: span length mismatch");
}

} // namespace

Isa active_isa() { return current().load(std::memory_order_relaxed); }

const char* isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool force_isa(Isa isa) {
    if (isa == Isa::Avx2 && !avx2::supported()) return false;
    current().store(isa, std::memory_order_relaxed);
    return true;
}

void reset_isa() { current().store(detect(), std::memory_order_relaxed); }

double dot(std::span<const double> a, std::span<const double> b) {
    check_sizes(a.size(), b.size());
    return active_isa() == Isa::Avx2 ? avx2::dot(a.data(), b.data(), a.size())
                                     : scalar::dot(a.data(), b.data(), a.size());
}

double sum_sq(std::span<const double> a) {
    return active_isa() == Isa::Avx2 ? avx2::sum_sq(a.data(), a.size()) : scalar::sum_sq(a.data(), a.size());
}

double diff_sq(std::span<const double> a, std::span<const double> b) {
    check_sizes(a.size(), b.size());
    return active_isa() == Isa::Avx2 ? avx2::diff_sq(a.data(), b.data(), a.size())
                                     : scalar::diff_sq(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    check_sizes(x.size(), y.size());
    if (active_isa() == Isa::Avx2)
        avx2::axpy(alpha, x.data(), y.data(), x.size());
    else
        scalar::axpy(alpha, x.data(), y.data(), x.size());
}

void poly_eval(std::span<const double> x, int p, int m, double c, double d, std::span<double> out) {
    check_sizes(x.size(), out.size());
    if (p < m || m < 0) throw std::invalid_argument("poly_eval: need p >= m >= 0");
    if (active_isa() == Isa::Avx2)
        avx2::poly_eval(x.data(), x.size(), p, m, c, d, out.data());
    else
        scalar::poly_eval(x.data(), x.size(), p, m, c, d, out.data());
}

} // namespace dlneb::kernels
