#include "dlneb/network.hpp"

#include "dlneb/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dlneb {

namespace {

std::span<const double> flat(const Matrix& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }
std::span<double> flat(Matrix& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }

void require_same_shape(const WeightStack& a, const WeightStack& b) {
    if (a.L() != b.L()) throw ShapeError("weight stacks differ in depth");
    for (int l = 1; l <= a.L(); ++l)
        if (a[l].rows() != b[l].rows() || a[l].cols() != b[l].cols())
            throw ShapeError("weight stacks differ in layer " + std::to_string(l) + " shape");
}

} // namespace

DimChain DimChain::make(std::vector<int> dims) {
    if (dims.size() < 3) throw ShapeError("dimension chain needs L >= 2 (at least 3 entries)");
    for (int d : dims)
        if (d < 1) throw ShapeError("dimension entries must be >= 1");
    return DimChain{std::move(dims)};
}

int DimChain::d_min() const { return std::min(dims.front(), dims.back()); }

int DimChain::d_max() const { return *std::max_element(dims.begin(), dims.end()); }

bool DimChain::assumption1() const {
    const int hidden = *std::min_element(dims.begin() + 1, dims.end() - 1);
    return hidden >= d_min();
}

RegParams RegParams::make(std::vector<double> lambdas) {
    if (lambdas.size() < 2) throw ShapeError("need at least two regularization weights");
    RegParams r;
    r.lambda_prod = 1.0;
    for (double v : lambdas) {
        if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("regularization weights must be positive and finite");
        r.lambda_prod *= v;
    }
    r.lambda_min = *std::min_element(lambdas.begin(), lambdas.end());
    r.lambda_max = *std::max_element(lambdas.begin(), lambdas.end());
    r.lambdas = std::move(lambdas);
    return r;
}

RegParams RegParams::uniform(int L, double lambda_l) {
    return make(std::vector<double>(static_cast<std::size_t>(L), lambda_l));
}

double RegParams::sqrt_prod() const { return std::sqrt(lambda_prod); }

WeightStack WeightStack::zeros(const DimChain& dims) {
    WeightStack W;
    for (int l = 1; l <= dims.L(); ++l) W.layers.push_back(Matrix::Zero(dims.d(l), dims.d(l - 1)));
    return W;
}

DimChain WeightStack::dims() const {
    std::vector<int> d;
    if (layers.empty()) throw ShapeError("empty weight stack");
    d.push_back(static_cast<int>(layers.front().cols()));
    for (const auto& m : layers) d.push_back(static_cast<int>(m.rows()));
    return DimChain::make(std::move(d));
}

double WeightStack::norm_sq() const {
    double s = 0.0;
    for (const auto& m : layers) s += kernels::sum_sq(flat(m));
    return s;
}

double WeightStack::norm() const { return std::sqrt(norm_sq()); }

double WeightStack::dot(const WeightStack& o) const {
    require_same_shape(*this, o);
    double s = 0.0;
    for (std::size_t i = 0; i < layers.size(); ++i) s += kernels::dot(flat(layers[i]), flat(o.layers[i]));
    return s;
}

double WeightStack::dist_sq(const WeightStack& o) const {
    require_same_shape(*this, o);
    double s = 0.0;
    for (std::size_t i = 0; i < layers.size(); ++i) s += kernels::diff_sq(flat(layers[i]), flat(o.layers[i]));
    return s;
}

void WeightStack::axpy(double alpha, const WeightStack& x) {
    require_same_shape(*this, x);
    for (std::size_t i = 0; i < layers.size(); ++i) kernels::axpy(alpha, flat(x.layers[i]), flat(layers[i]));
}

WeightStack WeightStack::operator+(const WeightStack& o) const {
    require_same_shape(*this, o);
    WeightStack r = *this;
    for (std::size_t i = 0; i < layers.size(); ++i) r.layers[i] += o.layers[i];
    return r;
}

WeightStack WeightStack::operator-(const WeightStack& o) const {
    require_same_shape(*this, o);
    WeightStack r = *this;
    for (std::size_t i = 0; i < layers.size(); ++i) r.layers[i] -= o.layers[i];
    return r;
}

WeightStack WeightStack::operator*(double s) const {
    WeightStack r = *this;
    for (auto& m : r.layers) m *= s;
    return r;
}

void check_chain(const WeightStack& W) {
    if (W.L() < 2) throw ShapeError("weight stack needs L >= 2 layers");
    for (int l = 2; l <= W.L(); ++l) {
        if (W[l].cols() != W[l - 1].rows()) {
            std::ostringstream os;
            os << "layer " << l << " has " << W[l].cols() << " columns but layer " << l - 1 << " has "
               << W[l - 1].rows() << " rows";
            throw ShapeError(os.str());
        }
    }
}

void check_shapes(const WeightStack& W, const Matrix& Y) {
    check_chain(W);
    if (Y.rows() != W[W.L()].rows() || Y.cols() != W[1].cols()) {
        std::ostringstream os;
        os << "target is " << Y.rows() << "x" << Y.cols() << ", network maps " << W[1].cols() << " -> "
           << W[W.L()].rows();
        throw ShapeError(os.str());
    }
}

Matrix partial_product(const WeightStack& W, int i, int j) {
    const int L = W.L();
    if (j == i + 1) {
        if (i < 0 || i > L) throw std::out_of_range("partial_product: empty range index out of range");
        const Eigen::Index n = i == 0 ? W[1].cols() : W[i].rows();
        return Matrix::Identity(n, n);
    }
    if (j < 1 || i > L || j > i) throw std::out_of_range("partial_product: need 1 <= j <= i <= L");
    Matrix P = W[j];
    for (int l = j + 1; l <= i; ++l) P = W[l] * P;
    return P;
}

LossGrad loss_grad(const WeightStack& W, const Matrix& T, const std::vector<double>& lam) {
    check_shapes(W, T);
    const int L = W.L();
    if (static_cast<int>(lam.size()) != L) throw ShapeError("regularization length differs from depth");

    // prefix[l] = W_{l:1}, prefix[0] = I
    std::vector<Matrix> prefix(static_cast<std::size_t>(L + 1));
    prefix[0] = Matrix::Identity(W[1].cols(), W[1].cols());
    prefix[1] = W[1];
    for (int l = 2; l <= L; ++l) prefix[static_cast<std::size_t>(l)] = W[l] * prefix[static_cast<std::size_t>(l - 1)];

    LossGrad out;
    const Matrix R = prefix[static_cast<std::size_t>(L)] - T;
    out.value = R.squaredNorm();
    out.grad.layers.resize(static_cast<std::size_t>(L));

    // B = W_{L:l+1}^T R, accumulated from the top.
    Matrix B = R;
    for (int l = L; l >= 1; --l) {
        const double lam_l = lam[static_cast<std::size_t>(l - 1)];
        out.value += lam_l * W[l].squaredNorm();
        Matrix g = 2.0 * B * prefix[static_cast<std::size_t>(l - 1)].transpose();
        g += (2.0 * lam_l) * W[l];
        out.grad[l] = std::move(g);
        if (l > 1) B = W[l].transpose() * B;
    }
    return out;
}

double loss(const WeightStack& W, const Matrix& T, const std::vector<double>& lam) {
    check_shapes(W, T);
    if (static_cast<int>(lam.size()) != W.L()) throw ShapeError("regularization length differs from depth");
    Matrix P = W[1];
    for (int l = 2; l <= W.L(); ++l) P = W[l] * P;
    double v = (P - T).squaredNorm();
    for (int l = 1; l <= W.L(); ++l) v += lam[static_cast<std::size_t>(l - 1)] * W[l].squaredNorm();
    return v;
}

double loss_increment(const WeightStack& W0, const WeightStack& E, const Matrix& T, const std::vector<double>& lam) {
    check_shapes(W0, T);
    const int L = W0.L();
    if (static_cast<int>(lam.size()) != L) throw ShapeError("regularization length differs from depth");
    if (E.dims().dims != W0.dims().dims) throw ShapeError("increment does not match the stack");
    // prefix[l] = (W0)_{l:1}; suffix runs over W0 + E from the top
    std::vector<Matrix> prefix{Matrix::Identity(W0[1].cols(), W0[1].cols())};
    for (int l = 1; l < L; ++l) prefix.push_back(W0[l] * prefix.back());
    Matrix suffix = Matrix::Identity(W0[L].rows(), W0[L].rows());
    Matrix dP = Matrix::Zero(T.rows(), T.cols());
    double reg_part = 0.0;
    for (int l = L; l >= 1; --l) {
        dP += suffix * E[l] * prefix[static_cast<std::size_t>(l - 1)];
        suffix = suffix * (W0[l] + E[l]);
        reg_part += lam[static_cast<std::size_t>(l - 1)] * (2.0 * W0[l].cwiseProduct(E[l]).sum() + E[l].squaredNorm());
    }
    const Matrix R0 = W0[L] * prefix.back() - T;
    return 2.0 * dP.cwiseProduct(R0).sum() + dP.squaredNorm() + reg_part;
}

double loss_increment_F(const WeightStack& W0, const WeightStack& E, const Matrix& Y, const RegParams& reg) {
    return loss_increment(W0, E, Y, reg.lambdas);
}

double loss_F(const WeightStack& W, const Matrix& Y, const RegParams& reg) { return loss(W, Y, reg.lambdas); }

WeightStack grad_F(const WeightStack& W, const Matrix& Y, const RegParams& reg) {
    return loss_grad(W, Y, reg.lambdas).grad;
}

LossGrad loss_grad_F(const WeightStack& W, const Matrix& Y, const RegParams& reg) {
    return loss_grad(W, Y, reg.lambdas);
}

namespace {
std::vector<double> uniform_lambda(const RegParams& reg) {
    return std::vector<double>(reg.lambdas.size(), reg.lambda_prod);
}
} // namespace

double loss_G(const WeightStack& W, const Matrix& Y, const RegParams& reg) {
    return loss(W, reg.sqrt_prod() * Y, uniform_lambda(reg));
}

WeightStack grad_G(const WeightStack& W, const Matrix& Y, const RegParams& reg) {
    return loss_grad(W, reg.sqrt_prod() * Y, uniform_lambda(reg)).grad;
}

LossGrad loss_grad_G(const WeightStack& W, const Matrix& Y, const RegParams& reg) {
    return loss_grad(W, reg.sqrt_prod() * Y, uniform_lambda(reg));
}

LossGrad loss_grad_target(const WeightStack& W, const Matrix& Y, const RegParams& reg, Target t) {
    return t == Target::F ? loss_grad_F(W, Y, reg) : loss_grad_G(W, Y, reg);
}

WeightStack rescale_F_to_G(const WeightStack& W, const RegParams& reg) {
    if (W.L() != reg.L()) throw ShapeError("regularization length differs from depth");
    WeightStack r = W;
    for (int l = 1; l <= W.L(); ++l) r[l] *= std::sqrt(reg.lambda(l));
    return r;
}

WeightStack rescale_G_to_F(const WeightStack& W, const RegParams& reg) {
    if (W.L() != reg.L()) throw ShapeError("regularization length differs from depth");
    WeightStack r = W;
    for (int l = 1; l <= W.L(); ++l) r[l] /= std::sqrt(reg.lambda(l));
    return r;
}

double layer_scale(const RegParams& reg, int l, Target t) {
    return t == Target::F ? 1.0 / std::sqrt(reg.lambda(l)) : 1.0;
}

} // namespace dlneb
