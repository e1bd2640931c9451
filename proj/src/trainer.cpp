#include "dlneb/trainer.hpp"

#include "dlneb/kernels.hpp"
#include "dlneb/rng.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace dlneb {

const char* to_string(ModelKind k) {
    switch (k) {
    case ModelKind::Linear: return "linear";
    case ModelKind::LinearBias: return "linear-with-bias";
    case ModelKind::Nonlinear: return "nonlinear";
    }
    return "?";
}

const char* to_string(Activation a) {
    switch (a) {
    case Activation::Identity: return "identity";
    case Activation::Relu: return "relu";
    case Activation::LeakyRelu: return "leaky-relu";
    case Activation::Tanh: return "tanh";
    }
    return "?";
}

const char* to_string(InitScheme s) {
    switch (s) {
    case InitScheme::NearCritical: return "near-critical";
    case InitScheme::UniformFan: return "uniform-fan";
    case InitScheme::Gaussian: return "gaussian";
    }
    return "?";
}

const char* to_string(Termination t) {
    return t == Termination::Converged ? "converged" : "max-iterations";
}

void ModelSpec::validate(const DimChain& dims, const Matrix& Y) const {
    if (kind != ModelKind::Nonlinear && activation != Activation::Identity)
        throw ShapeError("activation must be identity for linear models");
    if (kind == ModelKind::Nonlinear && activation == Activation::Identity)
        throw ShapeError("nonlinear model needs a non-identity activation");
    const Eigen::Index n = X ? X->cols() : dims.d(0);
    if (X && X->rows() != dims.d(0)) throw ShapeError("X must have d_0 rows");
    if (Y.rows() != dims.d(dims.L()) || Y.cols() != n) throw ShapeError("Y must be d_L x N");
}

double Params::norm_sq() const {
    double s = W.norm_sq();
    for (const auto& v : b) s += kernels::sum_sq({v.data(), static_cast<std::size_t>(v.size())});
    return s;
}

double Params::norm() const { return std::sqrt(norm_sq()); }

void Params::axpy(double alpha, const Params& x) {
    W.axpy(alpha, x.W);
    for (std::size_t l = 0; l < b.size(); ++l)
        kernels::axpy(alpha, {x.b[l].data(), static_cast<std::size_t>(x.b[l].size())},
                      {b[l].data(), static_cast<std::size_t>(b[l].size())});
}

Params Params::operator-(const Params& o) const {
    Params r{W - o.W, b};
    for (std::size_t l = 0; l < b.size(); ++l) r.b[l] -= o.b[l];
    return r;
}

namespace {

Matrix activate(const Matrix& z, Activation a) {
    switch (a) {
    case Activation::Identity: return z;
    case Activation::Relu: return z.cwiseMax(0.0);
    case Activation::LeakyRelu: return z.unaryExpr([](double v) { return v > 0.0 ? v : 0.01 * v; });
    case Activation::Tanh: return z.array().tanh().matrix();
    }
    return z;
}

// Derivative at z; subgradient 0 at the ReLU kink.
Matrix activate_prime(const Matrix& z, Activation a) {
    switch (a) {
    case Activation::Identity: return Matrix::Ones(z.rows(), z.cols());
    case Activation::Relu: return z.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
    case Activation::LeakyRelu: return z.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.01; });
    case Activation::Tanh: return (1.0 - z.array().tanh().square()).matrix();
    }
    return z;
}

struct ForwardPass {
    std::vector<Matrix> z; // pre-activations, z[l-1] for layer l
    std::vector<Matrix> a; // a[0] = X, a[l] = sigma(z_l) for l < L
};

ForwardPass forward_pass(const ModelSpec& model, const Params& theta) {
    const int L = theta.W.L();
    const auto& W = theta.W;
    ForwardPass fp;
    fp.a.push_back(model.X ? *model.X : Matrix::Identity(W[1].cols(), W[1].cols()));
    for (int l = 1; l <= L; ++l) {
        Matrix z = W[l] * fp.a.back();
        if (model.has_bias()) z.colwise() += theta.b[static_cast<std::size_t>(l - 1)];
        if (l < L) fp.a.push_back(activate(z, model.activation));
        fp.z.push_back(std::move(z));
    }
    return fp;
}

bool plain_linear(const ModelSpec& model) { return model.kind == ModelKind::Linear && !model.X; }

} // namespace

Matrix model_forward(const ModelSpec& model, const Params& theta) { return forward_pass(model, theta).z.back(); }

ModelLossGrad model_loss_grad(const ModelSpec& model, const Params& theta, const Matrix& Y, const RegParams& reg) {
    if (plain_linear(model)) {
        auto lg = loss_grad_F(theta.W, Y, reg);
        return {lg.value, Params{std::move(lg.grad), {}}};
    }
    const int L = theta.W.L();
    const auto fp = forward_pass(model, theta);
    const Matrix R = fp.z.back() - Y;
    ModelLossGrad out;
    out.value = R.squaredNorm();
    out.grad.W.layers.resize(static_cast<std::size_t>(L));
    if (model.has_bias()) out.grad.b.resize(static_cast<std::size_t>(L));

    Matrix delta = 2.0 * R;
    for (int l = L; l >= 1; --l) {
        const double lam = reg.lambda(l);
        const auto i = static_cast<std::size_t>(l - 1);
        out.value += lam * theta.W[l].squaredNorm();
        out.grad.W[l] = delta * fp.a[i].transpose() + 2.0 * lam * theta.W[l];
        if (model.has_bias()) {
            out.value += lam * theta.b[i].squaredNorm();
            out.grad.b[i] = delta.rowwise().sum() + 2.0 * lam * theta.b[i];
        }
        if (l > 1) delta = (theta.W[l].transpose() * delta).cwiseProduct(activate_prime(fp.z[i - 1], model.activation));
    }
    return out;
}

double model_loss(const ModelSpec& model, const Params& theta, const Matrix& Y, const RegParams& reg) {
    if (plain_linear(model)) return loss_F(theta.W, Y, reg);
    const auto fp = forward_pass(model, theta);
    double v = (fp.z.back() - Y).squaredNorm();
    for (int l = 1; l <= theta.W.L(); ++l) {
        v += reg.lambda(l) * theta.W[l].squaredNorm();
        if (model.has_bias()) v += reg.lambda(l) * theta.b[static_cast<std::size_t>(l - 1)].squaredNorm();
    }
    return v;
}

void TrainConfig::validate() const {
    if (!(lr > 0.0)) throw DomainError("lr must be positive");
    if (!(grad_sq_tol > 0.0) || !(fval_change_tol > 0.0)) throw DomainError("tolerances must be positive");
    if (max_iters < 0) throw DomainError("max_iters must be nonnegative");
    if (log_stride < 0) throw DomainError("log_stride must be nonnegative");
    if (!(init_scale >= 0.0)) throw DomainError("init_scale must be nonnegative");
}

Params initialize(const ModelSpec& model, const DimChain& dims, const TrainConfig& cfg, const WeightStack* center) {
    cfg.validate();
    std::mt19937_64 gen(cfg.seed);
    const int L = dims.L();
    Params p;
    p.W = WeightStack::zeros(dims);
    if (model.has_bias())
        for (int l = 1; l <= L; ++l) p.b.push_back(Vector::Zero(dims.d(l)));

    switch (cfg.init) {
    case InitScheme::NearCritical:
        if (!center) throw DomainError("near-critical init needs a center");
        if (center->dims().dims != dims.dims) throw ShapeError("center does not match the dimension chain");
        for (int l = 1; l <= L; ++l) p.W[l] = (*center)[l] + gaussian_matrix(dims.d(l), dims.d(l - 1), gen, cfg.init_scale);
        for (auto& v : p.b) v = gaussian_matrix(static_cast<int>(v.size()), 1, gen, cfg.init_scale);
        break;
    case InitScheme::UniformFan:
        for (int l = 1; l <= L; ++l) {
            const double fan_in = dims.d(l - 1), fan_out = dims.d(l);
            p.W[l] = uniform_matrix(dims.d(l), dims.d(l - 1), std::sqrt(6.0 / (fan_in + fan_out)), gen);
            if (model.has_bias())
                p.b[static_cast<std::size_t>(l - 1)] = uniform_matrix(dims.d(l), 1, 1.0 / std::sqrt(fan_in), gen);
        }
        break;
    case InitScheme::Gaussian:
        for (int l = 1; l <= L; ++l) p.W[l] = gaussian_matrix(dims.d(l), dims.d(l - 1), gen, cfg.init_scale);
        for (auto& v : p.b) v = gaussian_matrix(static_cast<int>(v.size()), 1, gen, cfg.init_scale);
        break;
    }
    return p;
}

namespace {

std::vector<Matrix> flatten(const Params& p) {
    std::vector<Matrix> out = p.W.layers;
    for (const auto& v : p.b) out.emplace_back(v);
    return out;
}

bool finite(const ModelLossGrad& lg) {
    return std::isfinite(lg.value) && std::isfinite(lg.grad.norm_sq());
}

} // namespace

Trajectory train(const ModelSpec& model, const Matrix& Y, const RegParams& reg, const TrainConfig& cfg, Params theta) {
    cfg.validate();
    check_chain(theta.W);
    model.validate(theta.W.dims(), Y);
    if (reg.L() != theta.W.L()) throw ShapeError("one lambda per layer");
    if (model.has_bias() != !theta.b.empty()) throw ShapeError("bias vectors do not match the model kind");
    for (std::size_t l = 0; l < theta.b.size(); ++l)
        if (theta.b[l].size() != theta.W.layers[l].rows()) throw ShapeError("bias " + std::to_string(l + 1) + " has the wrong length");

    const auto t0 = std::chrono::steady_clock::now();
    Trajectory tr;
    tr.lr = cfg.lr;
    Params prev = theta;
    Params step = theta;
    for (long k = 0;; ++k) {
        auto lg = model_loss_grad(model, theta, Y, reg);
        if (!finite(lg)) throw DivergenceError("non-finite loss at iteration " + std::to_string(k), flatten(prev), k - 1);
        const double gsq = lg.grad.norm_sq();
        if (!tr.F.empty() && lg.value > tr.F.back() + 1e-12 * std::max(1.0, std::abs(tr.F.back()))) tr.monotone = false;
        const bool small_change = !tr.F.empty() && std::abs(lg.value - tr.F.back()) <= cfg.fval_change_tol;
        tr.F.push_back(lg.value);
        tr.grad_sq.push_back(gsq);
        if (cfg.log_stride > 0 && k % cfg.log_stride == 0) {
            tr.iterate_index.push_back(k);
            tr.iterates.push_back(theta);
        }
        if (gsq <= cfg.grad_sq_tol && small_change) {
            tr.reason = Termination::Converged;
            break;
        }
        if (k >= cfg.max_iters) break;

        // the increment is formed once so that the recorded step is exactly what is added
        step = lg.grad;
        for (auto& m : step.W.layers) m *= -cfg.lr;
        for (auto& v : step.b) v *= -cfg.lr;
        tr.step_sq.push_back(step.norm_sq());
        prev = theta;
        theta.axpy(1.0, step);
    }
    if (cfg.log_stride > 0 && (tr.iterate_index.empty() || tr.iterate_index.back() != tr.steps())) {
        tr.iterate_index.push_back(tr.steps());
        tr.iterates.push_back(theta);
    }
    tr.final = std::move(theta);
    tr.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return tr;
}

namespace {

RateFit ols_log_gap(const std::vector<double>& F, double f_end, std::size_t start, std::size_t stop) {
    std::vector<double> xs, ys;
    for (std::size_t k = start; k < stop; ++k) {
        const double gap = F[k] - f_end;
        if (gap > 1e-14) {
            xs.push_back(static_cast<double>(k));
            ys.push_back(std::log(gap));
        }
    }
    RateFit fit;
    fit.points = static_cast<int>(xs.size());
    if (xs.size() < 20) return fit;
    const double m = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
    mx /= m;
    my /= m;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    fit.slope = sxy / sxx;
    fit.rate = std::exp(fit.slope);
    fit.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    return fit;
}

} // namespace

RateFit estimate_linear_rate(const std::vector<double>& F, double tail_fraction, std::optional<double> f_ref) {
    if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) throw DomainError("tail_fraction must be in (0, 1]");
    if (F.size() < 2) throw DomainError("insufficient points for a rate fit");
    const double f_end = f_ref.value_or(F.back());
    const auto n = f_ref ? F.size() : F.size() - 1; // the last value has zero gap to itself
    const auto start = n - static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(n)));
    RateFit fit = ols_log_gap(F, f_end, start, n);
    if (fit.points < 20) throw DomainError("insufficient points for a rate fit (need 20 with gap > 1e-14)");
    if (f_ref) return fit;

    // Against F_end the gap at step k is the true gap times (1 - rate^(n-k)).
    // Drop the final steps where that factor is below 0.95, re-estimating the
    // rate until the trimmed window settles.
    std::size_t trim = 0;
    for (int pass = 0; pass < 8 && fit.rate > 0.0 && fit.rate < 1.0; ++pass) {
        const auto want = static_cast<std::size_t>(std::ceil(std::log(0.05) / std::log(fit.rate)));
        if (want == trim || want >= n - start) break;
        const RateFit next = ols_log_gap(F, f_end, start, n - want);
        if (next.points < 20) break;
        fit = next;
        trim = want;
    }
    fit.trimmed = static_cast<int>(trim);
    return fit;
}

std::vector<Section4Row> reproduce_section4(const Section4Config& cfg) {
    const Matrix Y = gaussian_matrix(cfg.dL, cfg.d0, cfg.y_seed);
    std::vector<Section4Row> rows;
    for (int L : cfg.depths) {
        if (L < 2) throw DomainError("depth must be at least 2");
        std::vector<int> dims(static_cast<std::size_t>(L + 1), cfg.hidden);
        dims.front() = cfg.d0;
        dims.back() = cfg.dL;
        const auto inst = Instance::make(dims, std::vector<double>(static_cast<std::size_t>(L), cfg.lambda_l), Y);
        const auto params = sample_random_params(inst.dims, inst.spec, substream(cfg.init_seed, "params"));
        const auto opt = optimal_profile(inst.spec, inst.reg, L);
        const double f_global = critical_value_F(opt, inst.spec, inst.reg, L);
        for (const char* which : {"optimal", "suboptimal"}) {
            const bool is_opt = std::string(which) == "optimal";
            const auto prof = is_opt ? opt : suboptimal_profile(inst.spec, inst.reg, L);
            const auto center = construct_critical_point(prof, params, inst, Target::F);

            TrainConfig tc;
            tc.lr = cfg.lr;
            tc.max_iters = cfg.max_iters;
            tc.init_scale = cfg.init_scale;
            tc.seed = substream(cfg.init_seed, "init/L" + std::to_string(L) + "/" + which);
            const ModelSpec model;
            const auto traj = train(model, Y, inst.reg, tc, initialize(model, inst.dims, tc, &center));

            Section4Row row;
            row.L = L;
            row.center = which;
            row.F_center = critical_value_F(prof, inst.spec, inst.reg, L);
            row.F_global = f_global;
            row.F_end = traj.F.back();
            row.iterations = traj.steps();
            row.reason = traj.reason;
            try {
                const auto fit = estimate_linear_rate(traj, cfg.tail_fraction);
                row.rate = fit.rate;
                row.r_squared = fit.r_squared;
            } catch (const DomainError&) {
                row.rate = row.r_squared = std::numeric_limits<double>::quiet_NaN();
            }
            rows.push_back(row);
        }
    }
    return rows;
}

} // namespace dlneb
