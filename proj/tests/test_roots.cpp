#include "dlneb/roots.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace dlneb;

namespace {

std::vector<double> values(const std::vector<ScalarRoot>& r) {
    std::vector<double> v;
    for (const auto& x : r) v.push_back(x.value);
    return v;
}

} // namespace

TEST(Roots, ClosedFormQuadratic) {
    const auto r = values(solve_scalar_equation(2.0, 1.0, 2));
    ASSERT_EQ(r.size(), 2u);
    EXPECT_EQ(r[0], 0.0);
    EXPECT_NEAR(r[1], 1.0, 1e-14);
}

TEST(Roots, NoPositiveRoot) {
    const auto r = values(solve_scalar_equation(1.0, 4.0, 2));
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0], 0.0);
}

TEST(Roots, CubicFactorCase) {
    // s^5 - 2 s^2 + s = s (s - 1)(s^3 + s^2 + s - 1); the cubic's real root is
    // the reciprocal of the tribonacci constant.
    const double cubic = 1.0 / 1.8392867552141612;
    const auto r = values(solve_scalar_equation(2.0, 1.0, 3));
    ASSERT_EQ(r.size(), 3u);
    EXPECT_NEAR(r[1], cubic, 1e-13);
    EXPECT_NEAR(r[1], 0.543689, 1e-6);
    EXPECT_NEAR(r[2], 1.0, 1e-14);
}

TEST(Roots, ZeroTargetOnlyZero) {
    EXPECT_EQ(solve_scalar_equation(0.0, 0.3, 4).size(), 1u);
}

TEST(Roots, AgreeWithDenseScan) {
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> uy(0.0, 4.0), ul(std::log(1e-3), std::log(4.0));
    std::uniform_int_distribution<int> uL(2, 6);
    for (int k = 0; k < 30; ++k) {
        const double y = uy(gen), lam = std::exp(ul(gen));
        const int L = uL(gen);
        const auto got = values(solve_scalar_equation(y, lam, L));
        const auto want = oracle::brute_force_roots(y, lam, L, 200000);
        ASSERT_EQ(got.size(), want.size()) << "y=" << y << " lam=" << lam << " L=" << L;
        for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-10);
    }
}

TEST(Roots, BracketAndResidual) {
    std::mt19937_64 gen(22);
    std::uniform_real_distribution<double> uy(0.1, 5.0), ul(std::log(1e-4), std::log(2.0));
    for (int k = 0; k < 200; ++k) {
        const double y = uy(gen), lam = std::exp(ul(gen));
        const int L = 2 + k % 6;
        const double B = root_bracket(y, lam, L);
        for (const auto& r : solve_scalar_equation(y, lam, L)) {
            EXPECT_LE(r.value, B);
            if (r.value > 0) {
                EXPECT_LE(std::abs(root_poly(r.value, y, lam, L)), 1e-12 * (lam + std::sqrt(lam) * y));
                // s^L < sqrt(lam) y holds strictly for any positive root
                EXPECT_LT(std::pow(r.value, L), std::sqrt(lam) * y);
            }
        }
    }
}

TEST(Roots, DoubleRootFlaggedForExcludedLambdaL3) {
    // L = 3, y = 2: tangency at lam = 16 / (3^{-3/4} + 3^{1/4})^4.
    const double lam = 16.0 / std::pow(std::pow(3.0, -0.75) + std::pow(3.0, 0.25), 4);
    const auto r = solve_scalar_equation(2.0, lam, 3);
    ASSERT_EQ(r.size(), 2u);
    EXPECT_TRUE(r[1].degenerate);
    EXPECT_NEAR(r[1].value, std::pow(lam / 3.0, 0.25), 1e-10);
    EXPECT_FALSE(r[0].degenerate);
}

TEST(Roots, ZeroRootFlaggedWhenLambdaEqualsYSquaredL2) {
    const auto r = solve_scalar_equation(2.0, 4.0, 2);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_TRUE(r[0].degenerate);
    EXPECT_FALSE(solve_scalar_equation(2.0, 1.0, 2)[0].degenerate);
}

TEST(Roots, NearTangencyGivesTwoCloseRoots) {
    const double lam = 16.0 / std::pow(std::pow(3.0, -0.75) + std::pow(3.0, 0.25), 4) * (1.0 - 1e-6);
    const auto r = solve_scalar_equation(2.0, lam, 3);
    ASSERT_EQ(r.size(), 3u);
    EXPECT_LT(r[2].value - r[1].value, 1e-2);
    EXPECT_GT(r[2].value - r[1].value, 0.0);
}

TEST(Roots, InvalidArguments) {
    EXPECT_THROW(solve_scalar_equation(-1.0, 1.0, 2), DomainError);
    EXPECT_THROW(solve_scalar_equation(1.0, 0.0, 2), DomainError);
    EXPECT_THROW(solve_scalar_equation(1.0, 1.0, 1), DomainError);
}
