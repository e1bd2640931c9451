#include "dlneb/critical_set.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace dlneb;

namespace {

Instance diag_instance(std::vector<int> dims, std::vector<double> lambdas, std::vector<double> y) {
    Matrix Y = Matrix::Zero(dims.back(), dims.front());
    for (std::size_t i = 0; i < y.size(); ++i) Y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = y[i];
    return Instance::make(std::move(dims), std::move(lambdas), Y);
}

Instance random_instance(int L, std::mt19937_64& gen) {
    const auto dims = oracle::random_dims(L, gen);
    return Instance::make(dims, oracle::random_lambdas(L, gen), oracle::gaussian(dims.back(), dims.front(), gen));
}

double grad_tol(const Instance& inst) { return 1e-9 * (1.0 + inst.Y.norm()); }

} // namespace

TEST(Profiles, SingleValue) {
    const auto inst = diag_instance({1, 1, 1}, {1.0, 1.0}, {2.0});
    const auto e = enumerate_sigma_profiles(inst.spec, inst.reg, 2);
    ASSERT_EQ(e.profiles.size(), 2u);
    EXPECT_EQ(e.total, 2u);
    EXPECT_TRUE(e.profiles[0].is_zero());
    EXPECT_NEAR(e.profiles[1].sigma[0], 1.0, 1e-14);
}

TEST(Profiles, ZeroTarget) {
    const auto inst = Instance::make({3, 4, 2}, {0.5, 0.5}, Matrix::Zero(2, 3));
    const auto e = enumerate_sigma_profiles(inst.spec, inst.reg, 2);
    ASSERT_EQ(e.profiles.size(), 1u);
    EXPECT_TRUE(e.profiles[0].is_zero());
}

TEST(Profiles, RepeatedValueDedup) {
    const auto inst = diag_instance({2, 2, 2}, {1.0, 1.0}, {2.0, 2.0});
    const auto e = enumerate_sigma_profiles(inst.spec, inst.reg, 2);
    ASSERT_EQ(e.profiles.size(), 3u);
    EXPECT_EQ(e.total, 3u);
    EXPECT_EQ(e.profiles[0].sigma, (std::vector<double>{0.0, 0.0}));
    EXPECT_NEAR(e.profiles[1].sigma[0], 1.0, 1e-14);
    EXPECT_EQ(e.profiles[1].sigma[1], 0.0);
    EXPECT_NEAR(e.profiles[2].sigma[1], 1.0, 1e-14);
    EXPECT_EQ(e.profiles[2].g, (std::vector<int>{2}));
}

TEST(Profiles, CountMatchesProductOfChoices) {
    // three distinct values, each with roots {0, r1, r2} for L = 3 -> 27 profiles
    const auto inst = diag_instance({3, 3, 3, 3}, {1.0, 1.0, 1.0}, {2.0, 2.5, 3.0});
    const auto e = enumerate_sigma_profiles(inst.spec, inst.reg, 3);
    EXPECT_EQ(e.total, 27u);
    EXPECT_EQ(e.profiles.size(), 27u);
    EXPECT_FALSE(e.truncated);
    const auto cut = enumerate_sigma_profiles(inst.spec, inst.reg, 3, 5);
    EXPECT_TRUE(cut.truncated);
    EXPECT_EQ(cut.profiles.size(), 5u);
    EXPECT_TRUE(cut.profiles[0].is_zero());
}

TEST(Construct, ZeroProfileIsZeroStack) {
    std::mt19937_64 gen(41);
    const auto inst = random_instance(3, gen);
    const auto W = construct_critical_point(SigmaProfile::zero(inst.spec.d_min()),
                                            sample_random_params(inst.dims, inst.spec, 1), inst, Target::F);
    EXPECT_EQ(W.norm(), 0.0);
    EXPECT_LE(grad_F(W, inst.Y, inst.reg).norm(), 1e-12);
}

TEST(Construct, ScalarExample) {
    const auto inst = diag_instance({1, 1, 1}, {1.0, 1.0}, {2.0});
    const auto e = enumerate_sigma_profiles(inst.spec, inst.reg, 2);
    const auto W = construct_critical_point(e.profiles[1], sample_random_params(inst.dims, inst.spec, 7), inst, Target::F);
    EXPECT_LE(grad_F(W, inst.Y, inst.reg).norm(), 1e-10);
}

TEST(Construct, EveryProfileIsCritical) {
    std::mt19937_64 gen(42);
    for (int k = 0; k < 9; ++k) {
        const int L = 2 + k % 3;
        const auto inst = random_instance(L, gen);
        const auto e = enumerate_sigma_profiles(inst.spec, inst.reg, L);
        for (const auto& prof : e.profiles) {
            for (int draw = 0; draw < 3; ++draw) {
                const auto P = sample_random_params(inst.dims, inst.spec, 100 * k + draw);
                const auto WF = construct_critical_point(prof, P, inst, Target::F);
                EXPECT_LE(grad_F(WF, inst.Y, inst.reg).norm(), grad_tol(inst));
                const auto WG = construct_critical_point(prof, P, inst, Target::G);
                EXPECT_LE(grad_G(WG, inst.Y, inst.reg).norm(), grad_tol(inst));
                // the two constructions are the rescaling of each other
                EXPECT_LE((rescale_F_to_G(WF, inst.reg) - WG).norm(), 1e-12 * (1.0 + WG.norm()));
                // closed-form critical value
                EXPECT_NEAR(loss_F(WF, inst.Y, inst.reg), critical_value_F(prof, inst.spec, inst.reg, L),
                            1e-10 * (1.0 + loss_F(WF, inst.Y, inst.reg)));
            }
        }
    }
}

TEST(Construct, RepeatedSpectrumWithMixedChoiceInBlock) {
    // y = (2, 2, 1): block of size 2 with choices {1, 0} mixed inside it.
    const auto inst = diag_instance({3, 4, 5, 3}, {0.5, 1.0, 2.0}, {2.0, 2.0, 1.0});
    const auto e = enumerate_sigma_profiles(inst.spec, inst.reg, 3);
    for (const auto& prof : e.profiles) {
        const auto W = construct_critical_point(prof, sample_random_params(inst.dims, inst.spec, 5), inst, Target::F);
        EXPECT_LE(grad_F(W, inst.Y, inst.reg).norm(), grad_tol(inst));
    }
}

TEST(Construct, IdentityParamsGiveDiagonalProduct) {
    const auto inst = diag_instance({2, 3, 2}, {0.5, 2.0}, {3.0, 2.0});
    const auto prof = optimal_profile(inst.spec, inst.reg, 2);
    const auto W = construct_critical_point(prof, identity_params(inst.dims, inst.spec), inst, Target::F);
    for (int l = 1; l <= 2; ++l)
        for (int i = 0; i < 2; ++i) EXPECT_NEAR(W[l](i, i), prof.choice[i] / std::sqrt(inst.reg.lambda(l)), 1e-14);
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Matrix>(W[2] * W[1]).singularValues();
    for (int i = 0; i < 2; ++i)
        EXPECT_NEAR(sv(i), std::pow(prof.sigma[i], 2) / std::sqrt(inst.reg.lambda_prod), 1e-12);
}

TEST(Construct, RejectsNonRootsAndAssumption1) {
    const auto inst = diag_instance({1, 1, 1}, {1.0, 1.0}, {2.0});
    EXPECT_THROW(construct_critical_point(SigmaProfile::from_choice({0.7}), identity_params(inst.dims, inst.spec), inst,
                                          Target::F),
                 DomainError);
    const auto bad = diag_instance({3, 2, 3}, {1.0, 1.0}, {2.0, 1.0, 0.5});
    EXPECT_THROW(construct_critical_point(SigmaProfile::zero(3), identity_params(bad.dims, bad.spec), bad, Target::F),
                 AssumptionError);
}

TEST(Params, DeterministicAndOrthogonal) {
    std::mt19937_64 gen(43);
    const auto inst = random_instance(4, gen);
    const auto a = sample_random_params(inst.dims, inst.spec, 99);
    const auto b = sample_random_params(inst.dims, inst.spec, 99);
    const auto c = sample_random_params(inst.dims, inst.spec, 100);
    EXPECT_LE(a.max_orthogonality_error(), 1e-12);
    for (std::size_t i = 0; i < a.Q.size(); ++i) {
        EXPECT_EQ(a.Q[i], b.Q[i]);
        if (a.Q[i].rows() > 1) {
            EXPECT_GT((a.Q[i] - c.Q[i]).norm(), 1e-3);
        }
    }
}

TEST(Distance, OnComponentIsZero) {
    std::mt19937_64 gen(44);
    for (int k = 0; k < 6; ++k) {
        const int L = 2 + k % 3;
        const auto inst = random_instance(L, gen);
        const auto prof = optimal_profile(inst.spec, inst.reg, L);
        for (Target t : {Target::F, Target::G}) {
            const auto W = construct_critical_point(prof, sample_random_params(inst.dims, inst.spec, k), inst, t);
            const auto d = distance_to_component(W, prof, inst, t);
            EXPECT_LE(d.upper, 1e-8);
            EXPECT_LE(d.lower, d.upper + 1e-12);
        }
    }
}

TEST(Distance, BracketsPerturbation) {
    std::mt19937_64 gen(45);
    for (int k = 0; k < 12; ++k) {
        const int L = 2 + k % 3;
        const auto inst = random_instance(L, gen);
        const auto e = enumerate_sigma_profiles(inst.spec, inst.reg, L);
        const auto& prof = e.profiles[static_cast<std::size_t>(k) % e.profiles.size()];
        const auto W0 = construct_critical_point(prof, sample_random_params(inst.dims, inst.spec, k), inst, Target::F);
        const double r = std::pow(10.0, -1.0 - (k % 4));
        const auto E = oracle::unit_direction(inst.dims.dims, gen) * r;
        const auto d = distance_to_component(W0 + E, prof, inst, Target::F);
        EXPECT_LE(d.lower, d.upper * (1 + 1e-12) + 1e-15);
        EXPECT_LE(d.upper, r * (1 + 1e-9));
        EXPECT_LE(grad_F(d.nearest, inst.Y, inst.reg).norm(), grad_tol(inst));
        EXPECT_NEAR((W0 + E - d.nearest).norm(), d.upper, 1e-12);
    }
}

TEST(Distance, ZeroStackAndZeroProfile) {
    std::mt19937_64 gen(46);
    const auto inst = random_instance(3, gen);
    const auto e = enumerate_sigma_profiles(inst.spec, inst.reg, 3);
    const auto d = distance_to_critical_set(WeightStack::zeros(inst.dims), e, inst, Target::F);
    EXPECT_EQ(d.upper, 0.0);
    EXPECT_TRUE(e.profiles[static_cast<std::size_t>(d.profile_id)].is_zero());
    const auto W = oracle::random_stack(inst.dims.dims, gen);
    const auto z = distance_to_component(W, e.profiles[0], inst, Target::F);
    EXPECT_DOUBLE_EQ(z.upper, W.norm());
}

TEST(Distance, PicksOwnProfileForSmallPerturbation) {
    std::mt19937_64 gen(47);
    for (int k = 0; k < 6; ++k) {
        const int L = 2 + k % 3;
        const auto inst = random_instance(L, gen);
        const auto e = enumerate_sigma_profiles(inst.spec, inst.reg, L);
        const auto rv = build_root_value_set(inst.spec, inst.reg, L);
        const int id = static_cast<int>(e.profiles.size()) - 1;
        const auto W0 = construct_critical_point(e.profiles[static_cast<std::size_t>(id)],
                                                 sample_random_params(inst.dims, inst.spec, k), inst, Target::G);
        const auto E = oracle::unit_direction(inst.dims.dims, gen) * (0.2 * rv.delta_sigma);
        const auto d = distance_to_critical_set(W0 + E, e, inst, Target::G);
        EXPECT_EQ(d.profile_id, id);
    }
}

TEST(Distance, ComponentsSeparatedByDeltaSigma) {
    std::mt19937_64 gen(48);
    const auto inst = random_instance(3, gen);
    const auto e = enumerate_sigma_profiles(inst.spec, inst.reg, 3);
    const auto rv = build_root_value_set(inst.spec, inst.reg, 3);
    ASSERT_GE(e.profiles.size(), 2u);
    for (std::size_t a = 0; a < std::min<std::size_t>(e.profiles.size(), 4); ++a) {
        for (std::size_t b = 0; b < std::min<std::size_t>(e.profiles.size(), 4); ++b) {
            if (a == b) continue;
            const auto W = construct_critical_point(e.profiles[a], sample_random_params(inst.dims, inst.spec, a + 9), inst,
                                                    Target::G);
            const auto d = distance_to_component(W, e.profiles[b], inst, Target::G);
            EXPECT_GE(d.lower, rv.delta_sigma - 1e-6);
            EXPECT_GE(d.upper, rv.delta_sigma - 1e-6);
        }
    }
}

TEST(Distance, EqualSortedSigmaGivesSameComponent) {
    // choices (1, 0) and (0, 1) for y = (2, 2) sort to the same profile
    const auto inst = diag_instance({2, 3, 2}, {1.0, 1.0}, {2.0, 2.0});
    const auto P = sample_random_params(inst.dims, inst.spec, 3);
    const auto W = assemble_stack({0.0, 1.0}, P, inst, Target::F);
    EXPECT_LE(grad_F(W, inst.Y, inst.reg).norm(), 1e-12);
    const auto d = distance_to_component(W, SigmaProfile::from_choice({1.0, 0.0}), inst, Target::F);
    EXPECT_LE(d.upper, 1e-6);
}

TEST(Distance, OptimalAndSaddleValues) {
    const auto inst = diag_instance({2, 2, 2}, {0.1, 0.1}, {3.0, 1.0});
    const auto opt = optimal_profile(inst.spec, inst.reg, 2);
    const auto sub = suboptimal_profile(inst.spec, inst.reg, 2);
    EXPECT_LT(critical_value_F(opt, inst.spec, inst.reg, 2), critical_value_F(sub, inst.spec, inst.reg, 2));
    const auto e = enumerate_sigma_profiles(inst.spec, inst.reg, 2);
    for (const auto& p : e.profiles)
        EXPECT_GE(critical_value_F(p, inst.spec, inst.reg, 2), critical_value_F(opt, inst.spec, inst.reg, 2) - 1e-14);
}
