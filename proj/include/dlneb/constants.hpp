#pragma once

#include "dlneb/critical_set.hpp"

#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace dlneb {

struct AssumptionReport {
    bool assumption1 = false;
    bool assumption2 = false;
    std::vector<int> violated_indices; // 1-based y-indices where lambda hits the excluded value
    std::vector<double> excluded;      // per index i in [r_Y]
    std::vector<double> margins;       // |lambda - excluded_i| / excluded_i
    bool ok() const { return assumption1 && assumption2; }
};

// The lambda excluded by the degeneracy assumption for singular value y at depth L.
double excluded_lambda(double y, int L);

AssumptionReport check_assumptions(const DimChain& dims, const TargetSpectrum& spec, const RegParams& reg, int L,
                                   double rel_tol = 1e-9);
inline AssumptionReport check_assumptions(const Instance& inst) {
    return check_assumptions(inst.dims, inst.spec, inst.reg, inst.L());
}

double phi(double x, double lambda, int L);
double phi_prime(double x, double lambda, int L);

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

struct EbLedger {
    int L = 0;
    double lambda = kUnset, lambda_min = kUnset, lambda_max = kUnset;
    double y1 = kUnset, y_sp = kUnset; // y_1 and y_{s_{p_Y}}
    int p_Y = 0;
    double delta_y = kUnset, delta_sigma = kUnset;
    int d_max = 0;
    bool zero_profile = true;
    // sigma* summaries
    double sigma_min = kUnset, sigma_max = kUnset;
    int r_sigma = 0, g_max = 0, p = 0;
    double min_phi_prime = kUnset;
    // proof constants
    double c1 = kUnset, c2 = kUnset, c3 = kUnset, c4 = kUnset, c5 = kUnset;
    double eta1 = kUnset, eta2 = kUnset, eta3 = kUnset, eta4 = kUnset, eta5 = kUnset;
    double delta1 = kUnset, delta2 = kUnset, L_G = kUnset;
    double eps_0 = kUnset, kappa_0 = kUnset;
    double eps_sigma = kUnset, kappa_sigma = kUnset;
    // global over the enumerated profiles (zero profile included), and for F
    double kappa = kUnset, eps = kUnset, kappa1 = kUnset, eps1 = kUnset;
    bool global_truncated = false;

    // Flat record in fixed column order.
    std::vector<std::pair<std::string, double>> entries() const;
    static const std::vector<std::string>& columns();
};

// (eps_0, kappa_0) for the zero critical point.
std::pair<double, double> zero_constants(const TargetSpectrum& spec, const RegParams& reg, int L);

// Per-profile constants. Refuses (AssumptionError naming the degenerate
// quantity) when the width or excluded-lambda assumption fails.
EbLedger compute_profile_ledger(const Instance& inst, const SigmaProfile& profile);

struct GlobalConstants {
    double kappa = kUnset, eps = kUnset, kappa1 = kUnset, eps1 = kUnset;
    bool truncated = false;
};
GlobalConstants compute_global_constants(const Instance& inst, const ProfileEnumeration& profiles);

// Per-profile ledger plus global (kappa, eps, kappa1, eps1) over `profiles`.
EbLedger compute_ledger(const Instance& inst, const SigmaProfile& profile, const ProfileEnumeration& profiles);
EbLedger compute_ledger(const Instance& inst, const SigmaProfile& profile, const GlobalConstants& global);

} // namespace dlneb
