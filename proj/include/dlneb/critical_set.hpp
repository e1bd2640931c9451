#pragma once

#include "dlneb/instance.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace dlneb {

// A point of A (choice, aligned with y) together with its sorted image in A_sort.
struct SigmaProfile {
    std::vector<double> sigma;  // nonincreasing, length d_min
    std::vector<double> choice; // a_i for y-index i, length d_min
    int r_sigma = 0;
    std::vector<int> t;         // 0 = t_0 < ... < t_p = r_sigma
    std::vector<int> g;         // g_i = t_i - t_{i-1}
    double sigma_min_pos = 0.0;
    double sigma_max = 0.0;
    bool degenerate = false;    // some chosen positive root is a double root

    // Builds sorted sigma and the multiplicity partition from a choice vector.
    static SigmaProfile from_choice(std::vector<double> choice, bool degenerate = false);
    static SigmaProfile zero(int d_min);

    bool is_zero() const { return r_sigma == 0; }
    int p() const { return static_cast<int>(g.size()); }
    int g_max() const;
};

struct ProfileEnumeration {
    std::vector<SigmaProfile> profiles; // lexicographically ascending in sigma; profiles[0] is zero
    std::uint64_t total = 0;            // number of distinct profiles (saturating)
    bool truncated = false;
};

ProfileEnumeration enumerate_sigma_profiles(const TargetSpectrum& spec, const RegParams& reg, int L, int cap = 1024);

// Per-block root lists (ascending, zero first) computed at each block's value.
std::vector<std::vector<ScalarRoot>> block_roots(const TargetSpectrum& spec, const RegParams& reg, int L);

// G at any critical point with this choice: sum_i (a_i^L - sqrt(lam) y_i)^2 + lam L a_i^2.
double critical_value_G(const SigmaProfile& profile, const TargetSpectrum& spec, const RegParams& reg, int L);
double critical_value_F(const SigmaProfile& profile, const TargetSpectrum& spec, const RegParams& reg, int L);

// Global minimizer profile: the value is separable, so each index takes its best root.
SigmaProfile optimal_profile(const TargetSpectrum& spec, const RegParams& reg, int L);
// The optimal profile with its smallest positive entry set to zero (a saddle for L = 2).
SigmaProfile suboptimal_profile(const TargetSpectrum& spec, const RegParams& reg, int L);

struct CriticalParams {
    std::vector<Matrix> Q; // Q_l for l = 2..L, stored at Q[l-2], size d_{l-1}
    std::vector<Matrix> O; // O_i, i = 1..p_Y, size h_i
    Matrix O_tail;         // O_{p_Y+1}, size d_0 - r_Y
    Matrix Ohat_tail;      // \hat O_{p_Y+1}, size d_L - r_Y

    const Matrix& Ql(int l) const { return Q.at(static_cast<std::size_t>(l - 2)); }
    Matrix& Ql(int l) { return Q.at(static_cast<std::size_t>(l - 2)); }
    double max_orthogonality_error() const;
};

CriticalParams identity_params(const DimChain& dims, const TargetSpectrum& spec);
CriticalParams sample_random_params(const DimChain& dims, const TargetSpectrum& spec, std::uint64_t seed);
Matrix haar_orthogonal(int n, std::uint64_t seed);

// BlkD(O_1, ..., O_{p_Y}, O_tail) and BlkD(O_1, ..., O_{p_Y}, Ohat_tail).
Matrix right_block(const CriticalParams& P, const TargetSpectrum& spec);
Matrix left_block(const CriticalParams& P, const TargetSpectrum& spec);

// Assembles W_1 = Q_2 S_1 M V^T, W_l = Q_{l+1} S_l Q_l^T, W_L = U N^T S_L Q_L^T
// with S_l = s_l BlkD(diag(a), 0). No root check: used for counterexample
// families and by the distance refinement.
WeightStack assemble_stack(const std::vector<double>& a, const CriticalParams& P, const Instance& inst, Target t);

// Same, after checking the width assumption, shapes, and that the choice solves the
// scalar equations.
WeightStack construct_critical_point(const SigmaProfile& profile, const CriticalParams& P, const Instance& inst,
                                     Target t);

struct DistanceOptions {
    int iters = 200;
    double tol = 1e-12;
    bool verify_nearest = true;
};

struct ComponentDistance {
    double upper = 0.0;  // realized distance to a point of the component
    double lower = 0.0;  // Mirsky bound
    WeightStack nearest;
    CriticalParams params;
    int iterations = 0;
};

// Mirsky lower bound sqrt(sum_l ||sv(W_l) - s_l sigma||^2) from precomputed
// singular values (nonincreasing).
double mirsky_lower_bound(const std::vector<Vector>& sv, const SigmaProfile& profile, const Instance& inst, Target t);
std::vector<Vector> layer_singular_values(const WeightStack& W);

ComponentDistance distance_to_component(const WeightStack& W, const SigmaProfile& profile, const Instance& inst,
                                        Target t, const DistanceOptions& opt = {});

struct SetDistance {
    double upper = 0.0;
    double lower = 0.0; // min over profiles of the Mirsky bound
    int profile_id = 0;
    WeightStack nearest;
    bool truncated = false;
    int evaluated = 0;  // profiles refined (not pruned)
};

SetDistance distance_to_critical_set(const WeightStack& W, const ProfileEnumeration& profiles, const Instance& inst,
                                     Target t, const DistanceOptions& opt = {});

} // namespace dlneb
