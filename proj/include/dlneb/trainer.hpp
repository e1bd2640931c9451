#pragma once

#include "dlneb/critical_set.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dlneb {

enum class ModelKind { Linear, LinearBias, Nonlinear };
enum class Activation { Identity, Relu, LeakyRelu, Tanh };

const char* to_string(ModelKind k);
const char* to_string(Activation a);

struct ModelSpec {
    ModelKind kind = ModelKind::Linear;
    Activation activation = Activation::Identity;
    std::optional<Matrix> X; // d_0 x N input; identity when absent

    bool has_bias() const { return kind != ModelKind::Linear; }
    void validate(const DimChain& dims, const Matrix& Y) const;
};

// Weights plus per-layer biases (b[l-1] in R^{d_l}; empty for the linear kind).
struct Params {
    WeightStack W;
    std::vector<Vector> b;

    double norm_sq() const;
    double norm() const;
    void axpy(double alpha, const Params& x);
    Params operator-(const Params& o) const;
};

struct ModelLossGrad {
    double value = 0.0;
    Params grad;
};

// sum_i ||f(x_i) - y_i||^2 + sum_l lambda_l (||W_l||^2 + ||b_l||^2), gradient by
// layerwise backpropagation. With kind = Linear and no X this is F itself.
ModelLossGrad model_loss_grad(const ModelSpec& model, const Params& theta, const Matrix& Y, const RegParams& reg);
double model_loss(const ModelSpec& model, const Params& theta, const Matrix& Y, const RegParams& reg);
Matrix model_forward(const ModelSpec& model, const Params& theta);

enum class InitScheme { NearCritical, UniformFan, Gaussian };
const char* to_string(InitScheme s);

struct TrainConfig {
    double lr = 4.5e-4;
    long max_iters = 200000;
    double grad_sq_tol = 1e-6;
    double fval_change_tol = 1e-7;
    std::uint64_t seed = 0;
    InitScheme init = InitScheme::NearCritical;
    double init_scale = 0.01; // perturbation scale (near-critical) or entry sd (gaussian)
    long log_stride = 0;      // store every k-th iterate; 0 stores none

    void validate() const;
};

// Starting point. NearCritical needs `center` (W* + scale * Delta, biases
// scale * Delta); UniformFan draws W_l in +-sqrt(6/(fan_in + fan_out)) and
// b_l in +-1/sqrt(fan_in).
Params initialize(const ModelSpec& model, const DimChain& dims, const TrainConfig& cfg,
                  const WeightStack* center = nullptr);

enum class Termination { Converged, MaxIterations };
const char* to_string(Termination t);

struct Trajectory {
    std::vector<double> F;        // F(W^k), k = 0..n
    std::vector<double> grad_sq;  // ||grad F(W^k)||^2, k = 0..n
    std::vector<double> step_sq;  // ||W^{k+1} - W^k||^2 as applied, k = 0..n-1
    std::vector<long> iterate_index;
    std::vector<Params> iterates; // W^k at iterate_index
    Params final;
    double lr = 0.0;
    double wall_seconds = 0.0;
    Termination reason = Termination::MaxIterations;
    bool monotone = true;         // F nonincreasing up to 1e-12 relative

    long steps() const { return static_cast<long>(step_sq.size()); }
};

// Plain GD. Stops when grad_sq <= tol and |F_k - F_{k-1}| <= tol both hold, or
// at max_iters. A non-finite loss raises DivergenceError carrying the last
// finite weights (then biases, as column matrices).
Trajectory train(const ModelSpec& model, const Matrix& Y, const RegParams& reg, const TrainConfig& cfg,
                 Params theta0);

struct RateFit {
    double rate = 0.0;      // exp(slope)
    double slope = 0.0;
    double r_squared = 0.0;
    int points = 0;
    int trimmed = 0;        // final steps excluded for the F_end reference bias
};

// OLS of log(F_k - F_end) against k over the last `tail_fraction` of the
// sequence, keeping gaps above 1e-14. Needs at least 20 such points. A known
// limit can be passed as f_ref; otherwise the last value is used, and the
// final steps it visibly biases are trimmed from the window.
RateFit estimate_linear_rate(const std::vector<double>& F, double tail_fraction = 0.5,
                             std::optional<double> f_ref = std::nullopt);
inline RateFit estimate_linear_rate(const Trajectory& traj, double tail_fraction = 0.5) {
    return estimate_linear_rate(traj.F, tail_fraction);
}

struct Section4Config {
    int d0 = 10;
    int dL = 20;
    int hidden = 32;
    double lambda_l = 1e-4;
    double lr = 4.5e-4;
    long max_iters = 400000;
    double init_scale = 0.01;
    double tail_fraction = 0.5;
    std::uint64_t y_seed = 0;
    std::uint64_t init_seed = 1;
    std::vector<int> depths{2, 4, 6};
};

struct Section4Row {
    int L = 0;
    std::string center; // "optimal" or "suboptimal"
    double F_center = 0.0;
    double F_global = 0.0;
    double F_end = 0.0;
    double rate = 0.0;
    double r_squared = 0.0;
    long iterations = 0;
    Termination reason = Termination::MaxIterations;
};

std::vector<Section4Row> reproduce_section4(const Section4Config& cfg);

} // namespace dlneb
