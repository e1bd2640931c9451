#include "dlneb/verification.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace dlneb;

namespace {

Instance random_instance(std::vector<int> dims, double lam_l, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    const int L = static_cast<int>(dims.size()) - 1;
    const Matrix Y = oracle::gaussian(dims.back(), dims.front(), gen);
    return Instance::make(std::move(dims), std::vector<double>(static_cast<std::size_t>(L), lam_l), Y);
}

RadiusSweepConfig small_sweep(PerturbationMode mode, std::uint64_t seed = 3) {
    RadiusSweepConfig cfg;
    cfg.radii = geometric_radii(1e-5, 1e-2, 4);
    cfg.samples_per_radius = 6;
    cfg.seed = seed;
    cfg.mode = mode;
    return cfg;
}

CriticalCenter global_center(const Instance& inst, std::uint64_t seed = 11) {
    return make_center(inst, optimal_profile(inst.spec, inst.reg, inst.L()),
                       sample_random_params(inst.dims, inst.spec, seed));
}

double balance_residual(const WeightStack& G, int l) {
    const Matrix& A = G[l + 1];
    const Matrix& B = G[l];
    double s = 0.0;
    const Matrix D = A.transpose() * A - B * B.transpose();
    for (Eigen::Index j = 0; j < D.cols(); ++j)
        for (Eigen::Index i = 0; i < D.rows(); ++i) s += D(i, j) * D(i, j);
    return std::sqrt(s);
}

} // namespace

TEST(Radii, GeometricSpacing) {
    const auto r = geometric_radii(1e-4, 1e-1, 4);
    ASSERT_EQ(r.size(), 4u);
    EXPECT_DOUBLE_EQ(r[0], 1e-4);
    EXPECT_NEAR(r[1], 1e-3, 1e-15);
    EXPECT_NEAR(r[2], 1e-2, 1e-15);
    EXPECT_DOUBLE_EQ(r[3], 1e-1);
    EXPECT_THROW(geometric_radii(0.0, 1.0, 3), DomainError);
    EXPECT_THROW(geometric_radii(1.0, 0.5, 3), DomainError);

    RadiusSweepConfig cfg;
    cfg.radii = {1e-3, 1e-3};
    EXPECT_THROW(cfg.validate(), DomainError);
    cfg.radii = {1e-3};
    cfg.samples_per_radius = 0;
    EXPECT_THROW(cfg.validate(), DomainError);
}

TEST(ErrorBound, GlobalMinimizerPasses) {
    const auto inst = random_instance({3, 4, 2}, 0.1, 5);
    const auto c = global_center(inst);
    const auto rep = verify_error_bound(inst, c, small_sweep(PerturbationMode::GaussianAllLayers));
    ASSERT_TRUE(rep.ledger_available);
    EXPECT_TRUE(rep.pass);
    EXPECT_TRUE(rep.kappa1_respected);
    EXPECT_EQ(rep.samples_within_eps1, 0);
    EXPECT_EQ(rep.samples.size(), 24u);
    EXPECT_LT(rep.center_grad_norm, 1e-8);
    EXPECT_NEAR(rep.slope, 1.0, 0.1);
    for (const auto& s : rep.samples) {
        EXPECT_LE(s.dist_lower, s.dist_upper * (1 + 1e-9) + 1e-15);
        EXPECT_LE(s.dist_upper, s.radius * (1 + 1e-9)); // W* itself is in the set
        EXPECT_TRUE(s.in_regime == (s.radius <= rep.cutoff * (1 + 1e-12)));
    }
}

TEST(ErrorBound, ZeroCenterAndDeepChain) {
    const auto inst = random_instance({2, 3, 3, 2}, 0.5, 8);
    const auto zero = make_center(inst, SigmaProfile::zero(inst.dims.d_min()), identity_params(inst.dims, inst.spec));
    const auto rep = verify_error_bound(inst, zero, small_sweep(PerturbationMode::GaussianAllLayers));
    EXPECT_TRUE(rep.pass);
    EXPECT_DOUBLE_EQ(rep.F_center, inst.Y.squaredNorm());
}

TEST(ErrorBound, DeterministicUnderSeed) {
    const auto inst = random_instance({2, 3, 2}, 0.2, 9);
    const auto c = global_center(inst);
    const auto a = verify_error_bound(inst, c, small_sweep(PerturbationMode::GaussianAllLayers, 4));
    const auto b = verify_error_bound(inst, c, small_sweep(PerturbationMode::GaussianAllLayers, 4));
    ASSERT_EQ(a.samples.size(), b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        EXPECT_EQ(a.samples[i].grad_norm, b.samples[i].grad_norm);
        EXPECT_EQ(a.samples[i].dist_upper, b.samples[i].dist_upper);
    }
}

TEST(ErrorBound, TangentRemovedMovesAwayAtFullSpeed) {
    const auto inst = random_instance({3, 3, 3}, 0.1, 12);
    const auto c = global_center(inst);
    auto cfg = small_sweep(PerturbationMode::TangentRemoved);
    cfg.radii = {1e-6, 1e-5};
    const auto rep = verify_error_bound(inst, c, cfg);
    EXPECT_TRUE(rep.pass);
    // A normal direction leaves the component at unit rate.
    for (const auto& s : rep.samples) EXPECT_NEAR(s.dist_upper / s.radius, 1.0, 1e-3);

    // A pure rotation of the hidden layer stays on the component.
    const double th = 1e-3;
    const Matrix R = (Matrix(3, 3) << std::cos(th), std::sin(th), 0, -std::sin(th), std::cos(th), 0, 0, 0, 1).finished();
    WeightStack Wr = c.W;
    Wr[1] = R * Wr[1];
    Wr[2] = Wr[2] * R.transpose();
    const auto profiles = enumerate_sigma_profiles(inst.spec, inst.reg, inst.L());
    EXPECT_LT(distance_to_critical_set(Wr, profiles, inst, Target::F).upper, 1e-9);
}

TEST(ErrorBound, RefusesDegenerateUnlessExpected) {
    const auto inst = counterexample_instance(CounterexampleKind::L2LambdaEqY2);
    const auto zero = make_center(inst, SigmaProfile::zero(1), identity_params(inst.dims, inst.spec));
    auto cfg = small_sweep(PerturbationMode::SingularDirection);
    cfg.radii = geometric_radii(1e-3, 1e-1, 5);
    EXPECT_THROW(verify_error_bound(inst, zero, cfg), AssumptionError);

    cfg.expect_degenerate = true;
    const auto rep = verify_error_bound(inst, zero, cfg);
    EXPECT_FALSE(rep.pass);
    EXPECT_FALSE(rep.assumptions_hold);
    EXPECT_TRUE(rep.has_tag("assumption-violated"));
    EXPECT_TRUE(rep.has_tag("cubic-degeneracy"));
    EXPECT_NEAR(rep.slope, 3.0, 0.05);
}

TEST(ErrorBound, RejectsNonCriticalCenter) {
    const auto inst = random_instance({2, 2, 2}, 0.3, 2);
    auto c = global_center(inst);
    c.W[1](0, 0) += 0.1;
    EXPECT_THROW(verify_error_bound(inst, c, small_sweep(PerturbationMode::GaussianAllLayers)), DomainError);
}

TEST(PlQg, GlobalMinimizerHasRegularConstants) {
    const auto inst = random_instance({3, 4, 2}, 0.1, 5);
    const auto rep = verify_pl_qg(inst, global_center(inst), small_sweep(PerturbationMode::GaussianAllLayers));
    EXPECT_TRUE(rep.pass);
    EXPECT_TRUE(rep.is_minimizer);
    EXPECT_GT(rep.mu1, 0.0);
    EXPECT_TRUE(std::isfinite(rep.mu2));
    for (const auto& s : rep.samples)
        if (s.in_regime) EXPECT_GT(s.F_gap, -1e-10);
}

TEST(PlQg, SaddleIsNotAMinimizer) {
    // L = 2, y well above sqrt(lambda): the origin is a strict saddle.
    const auto inst = Instance::make({2, 2, 2}, {0.1, 0.1}, (Matrix(2, 2) << 3, 0, 0, 2).finished());
    const auto zero = make_center(inst, SigmaProfile::zero(2), identity_params(inst.dims, inst.spec));
    const auto rep = verify_pl_qg(inst, zero, small_sweep(PerturbationMode::GaussianAllLayers));
    EXPECT_FALSE(rep.is_minimizer);
    EXPECT_TRUE(rep.has_tag("not-a-minimizer"));
    EXPECT_TRUE(std::isnan(rep.mu2));
}

TEST(PlQg, DegenerateInstanceLosesPl) {
    // Along the singular direction F - F* = t^4 while ||grad||^2 = 8 t^6, so mu1 shrinks like r^2.
    const auto inst = counterexample_instance(CounterexampleKind::L2LambdaEqY2);
    const auto zero = make_center(inst, SigmaProfile::zero(1), identity_params(inst.dims, inst.spec));
    auto cfg = small_sweep(PerturbationMode::SingularDirection);
    cfg.radii = geometric_radii(1e-3, 1e-1, 5);
    cfg.expect_degenerate = true;
    const auto rep = verify_pl_qg(inst, zero, cfg);
    EXPECT_FALSE(rep.pass);
    EXPECT_TRUE(rep.has_tag("pl-degenerate"));
    const double r = rep.radii.front().radius;
    EXPECT_NEAR(rep.radii.front().min_mu1, 8.0 * (r * r / 2.0), 1e-6 * r * r);
}

TEST(Balance, ExactAndPerturbedPoints) {
    const auto inst = random_instance({3, 4, 4, 2}, 0.2, 21);
    const auto c = global_center(inst);
    const auto exact = check_balance_inequalities(c.W, c.profile, inst);
    EXPECT_TRUE(exact.precondition);
    EXPECT_TRUE(exact.pass);
    for (double r : exact.residuals) EXPECT_LE(r, 1e-10);

    std::mt19937_64 gen(4);
    for (double r : {1e-6, 1e-4, 1e-3}) {
        const WeightStack W = c.W + oracle::unit_direction(inst.dims.dims, gen) * r;
        const auto rep = check_balance_inequalities(W, c.profile, inst);
        EXPECT_TRUE(rep.precondition) << r;
        EXPECT_TRUE(rep.pass) << r;
        EXPECT_GE(rep.min_slack, 0.0);
        const WeightStack G = rescale_F_to_G(W, inst.reg);
        for (int l = 1; l < inst.L(); ++l)
            EXPECT_NEAR(rep.residuals[static_cast<std::size_t>(l - 1)], balance_residual(G, l), 1e-13);
    }

    const auto zero = check_balance_inequalities(WeightStack::zeros(inst.dims), SigmaProfile::zero(2), inst);
    EXPECT_FALSE(zero.precondition);
    EXPECT_FALSE(zero.precondition_note.empty());
    EXPECT_TRUE(zero.pass);
}

TEST(Balance, FarPointFailsPrecondition) {
    const auto inst = random_instance({2, 3, 2}, 0.2, 22);
    const auto c = global_center(inst);
    WeightStack W = c.W;
    W[1] *= 0.0;
    const auto rep = check_balance_inequalities(W, c.profile, inst);
    EXPECT_FALSE(rep.precondition);
    EXPECT_FALSE(rep.precondition_note.empty());
}

TEST(Counterexample, ScalarDepthTwoClosedForm) {
    const auto inst = counterexample_instance(CounterexampleKind::L2LambdaEqY2);
    EXPECT_DOUBLE_EQ(inst.lambda(), 4.0);
    for (double t : {1e-2, 3e-2, 0.1}) {
        const auto W = build_counterexample(CounterexampleKind::L2LambdaEqY2, inst, t);
        EXPECT_NEAR(W[1](0, 0), t, 1e-15);
        EXPECT_NEAR(W[2](0, 0), t, 1e-15);
        const double g = grad_G(W, inst.Y, inst.reg).norm();
        EXPECT_NEAR(g, 2.0 * std::sqrt(2.0) * t * t * t, 1e-10 * g);
    }
    const auto fit = fit_counterexample(CounterexampleKind::L2LambdaEqY2, inst, geometric_radii(1e-3, 1e-1, 7));
    EXPECT_TRUE(fit.law_holds);
    EXPECT_NEAR(fit.slope, 3.0, 0.05);
    for (std::size_t i = 0; i < fit.t.size(); ++i) EXPECT_NEAR(fit.dist_upper[i], std::sqrt(2.0) * fit.t[i], 1e-12);
}

TEST(Counterexample, DoubleRootFamily) {
    const auto inst = counterexample_instance(CounterexampleKind::Lge3PhiPrimeZero);
    EXPECT_NEAR(inst.lambda(), 27.0 / 16.0, 1e-14);
    const auto prof = counterexample_profile(CounterexampleKind::Lge3PhiPrimeZero, inst);
    EXPECT_NEAR(prof.choice[0], std::pow(27.0 / 48.0, 0.25), 1e-14);
    const auto fit = fit_counterexample(CounterexampleKind::Lge3PhiPrimeZero, inst, geometric_radii(1e-4, 1e-2, 7));
    EXPECT_NEAR(fit.slope, 2.0, 0.05);
    EXPECT_TRUE(fit.law_holds);
}

TEST(Counterexample, Mismatches) {
    const auto inst2 = counterexample_instance(CounterexampleKind::L2LambdaEqY2);
    EXPECT_THROW(counterexample_profile(CounterexampleKind::Lge3PhiPrimeZero, inst2), DomainError);
    EXPECT_THROW(counterexample_instance(CounterexampleKind::L2LambdaEqY2, 2.0, 3), DomainError);
    EXPECT_THROW(build_counterexample(CounterexampleKind::L2LambdaEqY2, inst2, -1e-3), DomainError);
    const auto ok = random_instance({2, 2, 2}, 0.3, 1);
    EXPECT_THROW(build_counterexample(CounterexampleKind::L2LambdaEqY2, ok, 1e-2), DomainError);
}

TEST(FirstOrder, ConditionsOnGdTrajectory) {
    const auto inst = random_instance({2, 3, 2}, 0.1, 30);
    const auto c = global_center(inst);
    TrainConfig cfg;
    cfg.lr = 1e-2;
    cfg.max_iters = 400;
    cfg.log_stride = 20;
    cfg.seed = 2;
    cfg.init_scale = 0.05;
    ModelSpec model;
    const auto traj = train(model, inst.Y, inst.reg, cfg, initialize(model, inst.dims, cfg, &c.W));
    const auto profiles = enumerate_sigma_profiles(inst.spec, inst.reg, inst.L());
    const auto rep = check_first_order_conditions(traj, 0.5, &inst, &profiles);
    EXPECT_TRUE(rep.decrease_held);
    EXPECT_GT(rep.kappa1c, 0.0);
    EXPECT_TRUE(rep.safeguard_held);
    EXPECT_NEAR(rep.kappa3c * cfg.lr, 1.0, 1e-12);
    EXPECT_NEAR(rep.kappa3c_min * cfg.lr, 1.0, 1e-12);
    EXPECT_TRUE(rep.cost_to_go_checked);
    EXPECT_GT(rep.cost_to_go_points, 0);
    EXPECT_TRUE(std::isfinite(rep.kappa2c));
    EXPECT_NEAR(rep.F_star, critical_value_F(c.profile, inst.spec, inst.reg, inst.L()), 1e-12);
}

TEST(FirstOrder, OversizedStepBreaksDecrease) {
    const auto inst = random_instance({2, 3, 2}, 0.1, 31);
    TrainConfig cfg;
    cfg.lr = 0.6;
    cfg.max_iters = 3;
    cfg.init = InitScheme::Gaussian;
    cfg.init_scale = 1.0;
    ModelSpec model;
    const auto traj = train(model, inst.Y, inst.reg, cfg, initialize(model, inst.dims, cfg));
    const auto rep = check_first_order_conditions(traj, 1.0);
    EXPECT_FALSE(rep.decrease_held);
    EXPECT_FALSE(rep.cost_to_go_checked);

    Trajectory tiny;
    tiny.F = {1.0, 0.5};
    tiny.step_sq = {0.1};
    tiny.grad_sq = {1.0, 0.5};
    EXPECT_THROW(check_first_order_conditions(tiny), DomainError);
}
