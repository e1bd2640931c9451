#pragma once

#include "dlneb/common.hpp"

#include <vector>

namespace dlneb {

struct DimChain {
    std::vector<int> dims; // d_0, ..., d_L

    static DimChain make(std::vector<int> dims);

    int L() const { return static_cast<int>(dims.size()) - 1; }
    int d(int l) const { return dims.at(static_cast<std::size_t>(l)); }
    int d_min() const; // min(d_0, d_L)
    int d_max() const; // max over all d_l
    bool assumption1() const;
};

struct RegParams {
    std::vector<double> lambdas; // lambda_1, ..., lambda_L
    double lambda_prod = 1.0;
    double lambda_min = 1.0;
    double lambda_max = 1.0;

    static RegParams make(std::vector<double> lambdas);
    static RegParams uniform(int L, double lambda_l);

    int L() const { return static_cast<int>(lambdas.size()); }
    double lambda(int l) const { return lambdas.at(static_cast<std::size_t>(l - 1)); } // 1-based
    double sqrt_prod() const;
};

// Layer l (1-based) has shape d_l x d_{l-1}; stored at layers[l-1].
struct WeightStack {
    std::vector<Matrix> layers;

    WeightStack() = default;
    explicit WeightStack(std::vector<Matrix> ls) : layers(std::move(ls)) {}
    static WeightStack zeros(const DimChain& dims);

    int L() const { return static_cast<int>(layers.size()); }
    Matrix& operator[](int l) { return layers.at(static_cast<std::size_t>(l - 1)); }
    const Matrix& operator[](int l) const { return layers.at(static_cast<std::size_t>(l - 1)); }

    DimChain dims() const;
    double norm_sq() const;
    double norm() const;
    double dot(const WeightStack& o) const;
    double dist_sq(const WeightStack& o) const;
    void axpy(double alpha, const WeightStack& x); // this += alpha * x
    WeightStack operator+(const WeightStack& o) const;
    WeightStack operator-(const WeightStack& o) const;
    WeightStack operator*(double s) const;
};

void check_chain(const WeightStack& W); // L >= 2 and consecutive layers compose
void check_shapes(const WeightStack& W, const Matrix& Y);

// W_{i:j} = W_i ... W_j (1-based). j = i + 1 is the empty product: identity of
// size d_i (so W_{0:1} = I_{d_0} and W_{L:L+1} = I_{d_L}).
Matrix partial_product(const WeightStack& W, int i, int j);

struct LossGrad {
    double value = 0.0;
    WeightStack grad;
};

// Shared core: sum ||W_{L:1} - T||^2 + sum_l lam[l] ||W_l||^2 with prefix and
// suffix products cached in one sweep.
LossGrad loss_grad(const WeightStack& W, const Matrix& T, const std::vector<double>& lam);
double loss(const WeightStack& W, const Matrix& T, const std::vector<double>& lam);

double loss_F(const WeightStack& W, const Matrix& Y, const RegParams& reg);
WeightStack grad_F(const WeightStack& W, const Matrix& Y, const RegParams& reg);
LossGrad loss_grad_F(const WeightStack& W, const Matrix& Y, const RegParams& reg);

double loss_G(const WeightStack& W, const Matrix& Y, const RegParams& reg);
WeightStack grad_G(const WeightStack& W, const Matrix& Y, const RegParams& reg);
LossGrad loss_grad_G(const WeightStack& W, const Matrix& Y, const RegParams& reg);

LossGrad loss_grad_target(const WeightStack& W, const Matrix& Y, const RegParams& reg, Target t);

// loss(W0 + E) - loss(W0) without subtracting two O(1) values: the product
// difference is expanded as sum_l (W0+E)_{L:l+1} E_l (W0)_{l-1:1}.
double loss_increment(const WeightStack& W0, const WeightStack& E, const Matrix& T, const std::vector<double>& lam);
double loss_increment_F(const WeightStack& W0, const WeightStack& E, const Matrix& Y, const RegParams& reg);

WeightStack rescale_F_to_G(const WeightStack& W, const RegParams& reg);
WeightStack rescale_G_to_F(const WeightStack& W, const RegParams& reg);

// Per-layer singular-value scale between the two problems: a layer of the
// F-problem carrying G-singular value sigma has sigma * layer_scale(l).
double layer_scale(const RegParams& reg, int l, Target t);

} // namespace dlneb
