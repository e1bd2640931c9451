#pragma once

#include "dlneb/constants.hpp"
#include "dlneb/trainer.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dlneb {

enum class PerturbationMode { GaussianAllLayers, SingularDirection, TangentRemoved };
const char* to_string(PerturbationMode m);

// n log-spaced values from lo to hi inclusive.
std::vector<double> geometric_radii(double lo, double hi, int n);

struct RadiusSweepConfig {
    std::vector<double> radii = geometric_radii(1e-5, 1e-1, 9);
    int samples_per_radius = 64;
    std::uint64_t seed = 0;
    PerturbationMode mode = PerturbationMode::GaussianAllLayers;
    int singular_index = -1;        // singular-direction: 0-based sigma index, -1 cycles over [d_min]
    bool expect_degenerate = false; // sweep an instance at an excluded lambda instead of refusing
    DistanceOptions distance{};

    void validate() const;
};

// A critical point of F with the parameters that built it.
struct CriticalCenter {
    SigmaProfile profile;
    CriticalParams params;
    WeightStack W;
};
CriticalCenter make_center(const Instance& inst, const SigmaProfile& profile, const CriticalParams& params);

struct SampleRecord {
    double radius = 0.0;
    double dist_lower = 0.0;
    double dist_upper = 0.0;
    double grad_norm = 0.0;
    double F = 0.0;
    double F_gap = 0.0; // F - F(center), from the stable increment
    double ratio = 0.0; // dist_upper / grad_norm
    int profile_id = 0;
    bool in_regime = false;
};

struct RadiusSummary {
    double radius = 0.0;
    bool in_regime = false;
    int samples = 0;
    double max_ratio = 0.0;
    double min_mu1 = kUnset; // min ||grad||^2 / (F - F*) over samples with F > F*
    double max_mu2 = kUnset; // max dist^2 / (F - F*) over samples with F > F*
    int below_center = 0;    // samples with F < F* - 1e-10
};

struct VerificationReport {
    std::string kind; // "error-bound" or "pl-qg"
    PerturbationMode mode = PerturbationMode::GaussianAllLayers;
    std::vector<SampleRecord> samples;
    std::vector<RadiusSummary> radii;
    double center_grad_norm = 0.0;
    double F_center = 0.0;
    double cutoff = 0.0; // in-regime radius bound (F coordinates)
    bool assumptions_hold = true;
    bool ledger_available = false;
    double kappa1 = kUnset, eps1 = kUnset;
    int samples_within_eps1 = 0;
    bool kappa1_respected = true; // every in-regime ratio <= kappa1
    double slope = kUnset, slope_r2 = kUnset; // log ||grad F|| against log dist_upper, in regime
    double mu1 = kUnset, mu2 = kUnset;
    bool is_minimizer = true;
    bool pass = false;
    std::vector<std::string> tags;

    bool has_tag(const std::string& t) const;
};

// Radius sweep around `center`: W = W* + r E / ||E||. Refuses (AssumptionError)
// when the instance violates an assumption unless cfg.expect_degenerate is
// set; a center whose gradient exceeds 1e-8 (1 + ||Y||) is a DomainError.
// Missing `profiles` / `ledger` are computed.
VerificationReport verify_error_bound(const Instance& inst, const CriticalCenter& center, const RadiusSweepConfig& cfg,
                                      const ProfileEnumeration* profiles = nullptr,
                                      const GlobalConstants* ledger = nullptr);

VerificationReport verify_pl_qg(const Instance& inst, const CriticalCenter& center, const RadiusSweepConfig& cfg,
                                const ProfileEnumeration* profiles = nullptr, const GlobalConstants* ledger = nullptr);

struct BalanceReport {
    bool precondition = false; // certified: dist_upper < sigma_min / 2
    std::string precondition_note;
    double dist_upper = 0.0, dist_lower = 0.0, threshold = 0.0;
    double grad_G_norm = 0.0;
    std::vector<double> residuals; // ||W_{l+1}^T W_{l+1} - W_l W_l^T||_F, l = 1..L-1
    double bound = 0.0;            // (3 sqrt2 sigma_max / (4 lambda)) ||grad G||
    std::vector<double> drifts;    // max_{i <= r_sigma} |sigma_i(W_l) - sigma_i(W_{l+1})|
    double drift_bound = 0.0;      // bound / sigma_min
    double min_slack = 0.0;        // min over both families of (bound - value) / bound
    bool pass = false;
};

// Balance and singular-value drift inequalities, evaluated in G coordinates
// (W is converted when t = F). Precondition failures are reported, not thrown.
BalanceReport check_balance_inequalities(const WeightStack& W, const SigmaProfile& profile, const Instance& inst,
                                         Target t = Target::F, const DistanceOptions& opt = {});

enum class CounterexampleKind { L2LambdaEqY2, Lge3PhiPrimeZero };
const char* to_string(CounterexampleKind k);

// Scalar (all widths d) instance with target y I on which the kind applies:
// L = 2 with lambda_l = y, or L >= 3 with lambda at the excluded value.
Instance counterexample_instance(CounterexampleKind kind, double y = 2.0, int L = 0, int d = 1);

// The degenerate profile (index set to 0 or to the double root) used by the family.
SigmaProfile counterexample_profile(CounterexampleKind kind, const Instance& inst, int index = -1);

// W(t): the degenerate profile with sigma_index raised by t in every layer, in G
// coordinates. index = -1 takes the first violating index.
WeightStack build_counterexample(CounterexampleKind kind, const Instance& inst, double t,
                                 const std::optional<CriticalParams>& params = std::nullopt, int index = -1);

struct CounterexampleFit {
    CounterexampleKind kind{};
    std::vector<double> t, grad_norm, dist_upper, dist_lower;
    double slope = kUnset, r_squared = kUnset;
    double predicted = 0.0; // 3 for kind 1, 2 for kind 2
    bool law_holds = false; // |slope - predicted| <= 0.05
};

CounterexampleFit fit_counterexample(CounterexampleKind kind, const Instance& inst, const std::vector<double>& ts,
                                     int index = -1);

struct FirstOrderReport {
    int tail_steps = 0;
    double kappa1c = kUnset;      // min (F_k - F_{k+1}) / ||W^{k+1} - W^k||^2 over the tail
    bool decrease_held = false;
    double kappa3c = kUnset;      // max ||grad F(W^k)|| / ||W^{k+1} - W^k|| over the tail
    double kappa3c_min = kUnset;
    bool safeguard_held = false;
    double kappa2c = kUnset;      // max (F_{k+1} - F*) / (dist^2(W^k) + step^2) at stored tail iterates
    int cost_to_go_points = 0;
    double F_star = kUnset;
    bool cost_to_go_checked = false;
};

// Linear-convergence diagnostics on a GD trajectory. Cost-to-go needs stored iterates of
// a plain linear model plus the instance and its profiles.
FirstOrderReport check_first_order_conditions(const Trajectory& traj, double tail_fraction = 0.5,
                                              const Instance* inst = nullptr,
                                              const ProfileEnumeration* profiles = nullptr);

} // namespace dlneb
