#include "dlneb/verification.hpp"

#include "dlneb/rng.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace dlneb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector flatten(const WeightStack& W) {
    Eigen::Index n = 0;
    for (const auto& m : W.layers) n += m.size();
    Vector v(n);
    Eigen::Index off = 0;
    for (const auto& m : W.layers) {
        v.segment(off, m.size()) = Eigen::Map<const Vector>(m.data(), m.size());
        off += m.size();
    }
    return v;
}

WeightStack unflatten(const Vector& v, const WeightStack& shape) {
    WeightStack W = shape;
    Eigen::Index off = 0;
    for (auto& m : W.layers) {
        m = Eigen::Map<const Matrix>(v.data() + off, m.rows(), m.cols());
        off += m.size();
    }
    return W;
}

Matrix skew(Eigen::Index n, Eigen::Index a, Eigen::Index b) {
    Matrix A = Matrix::Zero(n, n);
    A(a, b) = 1.0;
    A(b, a) = -1.0;
    return A;
}

// Orthonormal basis of the tangent space of the component through W: the
// infinitesimal actions of the hidden rotations Q_l and of the shared block
// rotations O_i.
Matrix tangent_basis(const WeightStack& W, const Instance& inst) {
    const int L = W.L();
    std::vector<Vector> gens;
    auto push = [&](const WeightStack& d) { gens.push_back(flatten(d)); };
    const WeightStack zero = WeightStack::zeros(inst.dims);
    for (int l = 2; l <= L; ++l) {
        const Eigen::Index n = inst.dims.d(l - 1);
        for (Eigen::Index a = 0; a < n; ++a)
            for (Eigen::Index b = a + 1; b < n; ++b) {
                const Matrix A = skew(n, a, b);
                WeightStack d = zero;
                d[l - 1] = A * W[l - 1];
                d[l] = -W[l] * A;
                push(d);
            }
    }
    const auto& sp = inst.spec;
    const Matrix W1V = W[1] * sp.V;
    const Matrix UtWL = sp.U.transpose() * W[L];
    for (int b = 0; b < sp.p_Y; ++b) {
        for (int i = sp.s[static_cast<std::size_t>(b)]; i < sp.s[static_cast<std::size_t>(b + 1)]; ++i)
            for (int j = i + 1; j < sp.s[static_cast<std::size_t>(b + 1)]; ++j) {
                WeightStack d = zero;
                d[1] = W1V * skew(sp.d0(), i, j) * sp.V.transpose();
                d[L] = -sp.U * skew(sp.dL(), i, j) * UtWL;
                push(d);
            }
    }
    const Eigen::Index n = flatten(W).size();
    if (gens.empty()) return Matrix(n, 0);
    Matrix T(n, static_cast<Eigen::Index>(gens.size()));
    for (std::size_t k = 0; k < gens.size(); ++k) T.col(static_cast<Eigen::Index>(k)) = gens[k];
    Eigen::ColPivHouseholderQR<Matrix> qr(T);
    qr.setThreshold(1e-10);
    const Eigen::Index r = qr.rank();
    return Matrix(qr.householderQ()).leftCols(r);
}

bool within(double r, double cutoff) { return r <= cutoff * (1.0 + 1e-12); }

struct SweepSetup {
    ProfileEnumeration profiles;
    GlobalConstants ledger;
    bool ledger_available = false;
    AssumptionReport assumptions;
    double cutoff = kInf;
    Matrix tangent;
    int singular_index = 0;
};

SweepSetup prepare(const Instance& inst, const CriticalCenter& center, const RadiusSweepConfig& cfg,
                   const ProfileEnumeration* profiles, const GlobalConstants* ledger, VerificationReport& rep) {
    cfg.validate();
    SweepSetup s;
    s.assumptions = check_assumptions(inst);
    rep.assumptions_hold = s.assumptions.ok();
    if (!rep.assumptions_hold) {
        if (!cfg.expect_degenerate) {
            std::ostringstream os;
            os << "instance violates Assumption " << (s.assumptions.assumption1 ? "2" : "1");
            for (int i : s.assumptions.violated_indices) os << " (index " << i << ")";
            throw AssumptionError(os.str());
        }
        rep.tags.push_back("assumption-violated");
    }
    const auto lg = loss_grad_F(center.W, inst.Y, inst.reg);
    rep.center_grad_norm = lg.grad.norm();
    rep.F_center = lg.value;
    if (rep.center_grad_norm > 1e-8 * (1.0 + inst.Y.norm()))
        throw DomainError("center is not critical: gradient norm " + std::to_string(rep.center_grad_norm));

    s.profiles = profiles ? *profiles : enumerate_sigma_profiles(inst.spec, inst.reg, inst.L());
    if (s.profiles.truncated) rep.tags.push_back("profiles-truncated");
    if (rep.assumptions_hold) {
        s.ledger = ledger ? *ledger : compute_global_constants(inst, s.profiles);
        s.ledger_available = true;
        rep.ledger_available = true;
        rep.kappa1 = s.ledger.kappa1;
        rep.eps1 = s.ledger.eps1;
    }
    const double ds = build_root_value_set(inst.spec, inst.reg, inst.L()).delta_sigma;
    s.cutoff = std::isfinite(ds) ? ds / (3.0 * std::sqrt(inst.reg.lambda_max)) : kInf;
    rep.cutoff = s.cutoff;

    if (cfg.mode == PerturbationMode::TangentRemoved) s.tangent = tangent_basis(center.W, inst);
    if (cfg.singular_index >= 0) {
        if (cfg.singular_index >= inst.dims.d_min()) throw DomainError("singular_index out of range");
        s.singular_index = cfg.singular_index;
    } else if (!rep.assumptions_hold && !s.assumptions.violated_indices.empty()) {
        s.singular_index = s.assumptions.violated_indices.front() - 1;
    } else {
        s.singular_index = -1;
    }
    return s;
}

WeightStack direction(const Instance& inst, const CriticalCenter& c, const RadiusSweepConfig& cfg,
                      const SweepSetup& s, std::uint64_t seed, int sample) {
    std::mt19937_64 gen(seed);
    WeightStack E;
    switch (cfg.mode) {
    case PerturbationMode::GaussianAllLayers:
    case PerturbationMode::TangentRemoved: {
        E = WeightStack::zeros(inst.dims);
        for (auto& m : E.layers) m = gaussian_matrix(static_cast<int>(m.rows()), static_cast<int>(m.cols()), gen);
        if (cfg.mode == PerturbationMode::TangentRemoved && s.tangent.cols() > 0) {
            Vector v = flatten(E);
            v -= s.tangent * (s.tangent.transpose() * v);
            E = unflatten(v, E);
        }
        break;
    }
    case PerturbationMode::SingularDirection: {
        const int dmin = inst.dims.d_min();
        const int idx = s.singular_index >= 0 ? s.singular_index : sample % dmin;
        std::vector<double> e(static_cast<std::size_t>(dmin), 0.0);
        e[static_cast<std::size_t>(idx)] = 1.0;
        E = assemble_stack(e, c.params, inst, Target::F);
        if (std::bernoulli_distribution(0.5)(gen)) E = E * -1.0;
        break;
    }
    }
    const double n = E.norm();
    if (!(n > 1e-300)) throw ConsistencyError("perturbation direction vanished");
    return E * (1.0 / n);
}

void sweep(const Instance& inst, const CriticalCenter& c, const RadiusSweepConfig& cfg, const SweepSetup& s,
           VerificationReport& rep) {
    const std::size_t R = cfg.radii.size(), S = static_cast<std::size_t>(cfg.samples_per_radius);
    rep.samples.assign(R * S, SampleRecord{});
    const std::uint64_t base = substream(cfg.seed, "sweep");
    detail::parallel_for(R * S, [&](std::size_t idx) {
        const std::size_t ri = idx / S, si = idx % S;
        const double r = cfg.radii[ri];
        const auto E = direction(inst, c, cfg, s, splitmix64(base + (static_cast<std::uint64_t>(ri) << 32) + si),
                                 static_cast<int>(si)) *
                       r;
        const WeightStack W = c.W + E;
        const auto d = distance_to_critical_set(W, s.profiles, inst, Target::F, cfg.distance);
        const auto lg = loss_grad_F(W, inst.Y, inst.reg);
        SampleRecord& rec = rep.samples[idx];
        rec.radius = r;
        rec.dist_lower = std::min(d.lower, d.upper);
        rec.dist_upper = d.upper;
        rec.grad_norm = lg.grad.norm();
        rec.F = lg.value;
        rec.F_gap = loss_increment_F(c.W, E, inst.Y, inst.reg);
        rec.ratio = rec.grad_norm > 0.0 ? rec.dist_upper / rec.grad_norm : kInf;
        rec.profile_id = d.profile_id;
        rec.in_regime = within(r, s.cutoff);
        if (d.lower > d.upper * (1.0 + 1e-9) + 1e-15)
            throw ConsistencyError("distance bracket inverted: lower " + std::to_string(d.lower) + " > upper " +
                                   std::to_string(d.upper));
    });

    for (std::size_t ri = 0; ri < R; ++ri) {
        RadiusSummary sum;
        sum.radius = cfg.radii[ri];
        sum.in_regime = within(sum.radius, s.cutoff);
        sum.samples = static_cast<int>(S);
        for (std::size_t si = 0; si < S; ++si) {
            const auto& rec = rep.samples[ri * S + si];
            sum.max_ratio = std::max(sum.max_ratio, rec.ratio);
            if (rec.F_gap > 0.0) {
                const double mu1 = rec.grad_norm * rec.grad_norm / rec.F_gap;
                const double mu2 = rec.dist_upper * rec.dist_upper / rec.F_gap;
                sum.min_mu1 = std::isnan(sum.min_mu1) ? mu1 : std::min(sum.min_mu1, mu1);
                sum.max_mu2 = std::isnan(sum.max_mu2) ? mu2 : std::max(sum.max_mu2, mu2);
            }
            if (rec.F_gap < -1e-10) ++sum.below_center;
        }
        rep.radii.push_back(sum);
    }

    // slope of log ||grad|| against log dist over in-regime samples
    std::vector<double> xs, ys;
    for (const auto& rec : rep.samples)
        if (rec.in_regime && rec.dist_upper > 0.0 && rec.grad_norm > 0.0) {
            xs.push_back(std::log(rec.dist_upper));
            ys.push_back(std::log(rec.grad_norm));
        }
    if (xs.size() >= 2) {
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
        if (sxx > 0.0) {
            rep.slope = sxy / sxx;
            rep.slope_r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
        }
    }
    if (rep.ledger_available) {
        for (const auto& rec : rep.samples) {
            if (rec.radius <= rep.eps1) ++rep.samples_within_eps1;
            if (rec.in_regime && !(rec.ratio <= rep.kappa1)) rep.kappa1_respected = false;
        }
    }
}

// First and last in-regime radius summaries.
std::pair<const RadiusSummary*, const RadiusSummary*> regime_ends(const VerificationReport& rep) {
    const RadiusSummary *lo = nullptr, *hi = nullptr;
    for (const auto& s : rep.radii)
        if (s.in_regime) {
            if (!lo) lo = &s;
            hi = &s;
        }
    return {lo, hi};
}

void tag_degeneracy(VerificationReport& rep) {
    if (rep.assumptions_hold || std::isnan(rep.slope)) return;
    if (std::abs(rep.slope - 3.0) <= 0.25) rep.tags.push_back("cubic-degeneracy");
    else if (std::abs(rep.slope - 2.0) <= 0.25) rep.tags.push_back("quadratic-degeneracy");
}

} // namespace

const char* to_string(PerturbationMode m) {
    switch (m) {
    case PerturbationMode::GaussianAllLayers: return "gaussian-all-layers";
    case PerturbationMode::SingularDirection: return "singular-direction";
    case PerturbationMode::TangentRemoved: return "tangent-removed";
    }
    return "?";
}

const char* to_string(CounterexampleKind k) {
    return k == CounterexampleKind::L2LambdaEqY2 ? "L2-lambda-eq-y2" : "Lge3-phi-prime-zero";
}

std::vector<double> geometric_radii(double lo, double hi, int n) {
    if (!(lo > 0.0) || !(hi >= lo) || n < 1) throw DomainError("geometric_radii needs 0 < lo <= hi and n >= 1");
    std::vector<double> r;
    for (int k = 0; k < n; ++k) r.push_back(n == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1)));
    r.back() = n == 1 ? lo : hi;
    return r;
}

void RadiusSweepConfig::validate() const {
    if (radii.empty()) throw DomainError("radius list is empty");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0.0) || !std::isfinite(radii[i])) throw DomainError("radii must be positive and finite");
        if (i > 0 && !(radii[i] > radii[i - 1])) throw DomainError("radii must be strictly increasing");
    }
    if (samples_per_radius < 1) throw DomainError("samples_per_radius must be at least 1");
    if (singular_index < -1) throw DomainError("singular_index must be -1 or a valid index");
}

bool VerificationReport::has_tag(const std::string& t) const {
    return std::find(tags.begin(), tags.end(), t) != tags.end();
}

CriticalCenter make_center(const Instance& inst, const SigmaProfile& profile, const CriticalParams& params) {
    return {profile, params, construct_critical_point(profile, params, inst, Target::F)};
}

VerificationReport verify_error_bound(const Instance& inst, const CriticalCenter& center, const RadiusSweepConfig& cfg,
                                      const ProfileEnumeration* profiles, const GlobalConstants* ledger) {
    VerificationReport rep;
    rep.kind = "error-bound";
    rep.mode = cfg.mode;
    const auto setup = prepare(inst, center, cfg, profiles, ledger, rep);
    sweep(inst, center, cfg, setup, rep);

    const auto [lo, hi] = regime_ends(rep);
    if (!lo) {
        rep.tags.push_back("no-in-regime-radius");
        rep.pass = false;
    } else {
        const bool stable = lo->max_ratio <= 10.0 * hi->max_ratio;
        if (!stable) rep.tags.push_back("ratio-blow-up");
        if (!rep.kappa1_respected) rep.tags.push_back("kappa1-exceeded");
        rep.pass = stable && rep.kappa1_respected;
    }
    tag_degeneracy(rep);
    return rep;
}

VerificationReport verify_pl_qg(const Instance& inst, const CriticalCenter& center, const RadiusSweepConfig& cfg,
                                const ProfileEnumeration* profiles, const GlobalConstants* ledger) {
    VerificationReport rep;
    rep.kind = "pl-qg";
    rep.mode = cfg.mode;
    const auto setup = prepare(inst, center, cfg, profiles, ledger, rep);
    sweep(inst, center, cfg, setup, rep);

    for (const auto& s : rep.radii) {
        if (!s.in_regime) continue;
        if (s.below_center > 0) rep.is_minimizer = false;
        if (!std::isnan(s.min_mu1)) rep.mu1 = std::isnan(rep.mu1) ? s.min_mu1 : std::min(rep.mu1, s.min_mu1);
        if (!std::isnan(s.max_mu2)) rep.mu2 = std::isnan(rep.mu2) ? s.max_mu2 : std::max(rep.mu2, s.max_mu2);
    }
    if (!rep.is_minimizer) {
        rep.tags.push_back("not-a-minimizer");
        rep.mu2 = kUnset;
    }
    const auto [lo, hi] = regime_ends(rep);
    if (!lo) {
        rep.tags.push_back("no-in-regime-radius");
        rep.pass = false;
        tag_degeneracy(rep);
        return rep;
    }
    const bool pl_ok = rep.mu1 > 0.0 && !std::isnan(lo->min_mu1) && !std::isnan(hi->min_mu1) &&
                       lo->min_mu1 >= hi->min_mu1 / 10.0;
    if (!pl_ok) rep.tags.push_back("pl-degenerate");
    bool qg_ok = true;
    if (rep.is_minimizer) {
        qg_ok = std::isfinite(rep.mu2) && !std::isnan(lo->max_mu2) && !std::isnan(hi->max_mu2) &&
                lo->max_mu2 <= 10.0 * hi->max_mu2;
        if (!qg_ok) rep.tags.push_back("qg-unstable");
    }
    rep.pass = pl_ok && qg_ok;
    tag_degeneracy(rep);
    return rep;
}

BalanceReport check_balance_inequalities(const WeightStack& W, const SigmaProfile& profile, const Instance& inst,
                                         Target t, const DistanceOptions& opt) {
    const WeightStack G = t == Target::F ? rescale_F_to_G(W, inst.reg) : W;
    const int L = G.L();
    BalanceReport rep;
    rep.grad_G_norm = grad_G(G, inst.Y, inst.reg).norm();
    rep.bound = 3.0 * std::sqrt(2.0) * profile.sigma_max / (4.0 * inst.lambda()) * rep.grad_G_norm;
    for (int l = 1; l < L; ++l)
        rep.residuals.push_back((G[l + 1].transpose() * G[l + 1] - G[l] * G[l].transpose()).norm());

    auto slack = [](double bound, double v) {
        if (bound > 0.0) return (bound - v) / bound;
        return v == 0.0 ? 0.0 : -kInf;
    };
    rep.min_slack = kInf;
    bool ok = true;
    for (double r : rep.residuals) {
        ok = ok && r <= rep.bound * (1.0 + 1e-9);
        rep.min_slack = std::min(rep.min_slack, slack(rep.bound, r));
    }

    if (profile.is_zero()) {
        rep.precondition_note = "zero profile: the bound needs a nonzero sigma*";
        rep.drift_bound = kUnset;
        rep.pass = ok;
        return rep;
    }
    rep.threshold = profile.sigma_min_pos / 2.0;
    const auto comp = distance_to_component(G, profile, inst, Target::G, opt);
    rep.dist_upper = comp.upper;
    rep.dist_lower = comp.lower;
    rep.precondition = comp.upper < rep.threshold;
    if (!rep.precondition)
        rep.precondition_note = comp.lower >= rep.threshold ? "violated: Mirsky bound already exceeds sigma_min/2"
                                                            : "not certified: upper bound exceeds sigma_min/2";

    rep.drift_bound = rep.bound / profile.sigma_min_pos;
    const auto sv = layer_singular_values(G);
    for (int l = 1; l < L; ++l) {
        double worst = 0.0;
        for (int i = 0; i < profile.r_sigma; ++i)
            worst = std::max(worst, std::abs(sv[static_cast<std::size_t>(l - 1)](i) - sv[static_cast<std::size_t>(l)](i)));
        rep.drifts.push_back(worst);
        ok = ok && worst <= rep.drift_bound * (1.0 + 1e-9);
        rep.min_slack = std::min(rep.min_slack, slack(rep.drift_bound, worst));
    }
    rep.pass = ok;
    return rep;
}

Instance counterexample_instance(CounterexampleKind kind, double y, int L, int d) {
    if (!(y > 0.0) || d < 1) throw DomainError("counterexample needs y > 0 and d >= 1");
    if (L == 0) L = kind == CounterexampleKind::L2LambdaEqY2 ? 2 : 3;
    if (kind == CounterexampleKind::L2LambdaEqY2 && L != 2) throw DomainError("kind L2-lambda-eq-y2 needs L = 2");
    if (kind == CounterexampleKind::Lge3PhiPrimeZero && L < 3) throw DomainError("kind Lge3-phi-prime-zero needs L >= 3");
    const double lam = kind == CounterexampleKind::L2LambdaEqY2 ? y * y : excluded_lambda(y, L);
    const double lam_l = std::pow(lam, 1.0 / L);
    return Instance::make(std::vector<int>(static_cast<std::size_t>(L + 1), d),
                          std::vector<double>(static_cast<std::size_t>(L), lam_l), Matrix::Identity(d, d) * y);
}

SigmaProfile counterexample_profile(CounterexampleKind kind, const Instance& inst, int index) {
    const int L = inst.L();
    const bool kind1 = kind == CounterexampleKind::L2LambdaEqY2;
    if (kind1 ? L != 2 : L < 3) throw DomainError(std::string("counterexample kind ") + to_string(kind) + " does not match depth " + std::to_string(L));
    const auto rep = check_assumptions(inst);
    if (rep.violated_indices.empty()) throw DomainError("instance does not sit at an excluded lambda");
    if (index < 0) index = rep.violated_indices.front() - 1;
    if (std::find(rep.violated_indices.begin(), rep.violated_indices.end(), index + 1) == rep.violated_indices.end())
        throw DomainError("index " + std::to_string(index) + " is not at an excluded lambda");
    auto choice = optimal_profile(inst.spec, inst.reg, L).choice;
    choice[static_cast<std::size_t>(index)] =
        kind1 ? 0.0 : std::pow(inst.lambda() * (L - 2) / L, 1.0 / (2.0 * (L - 1)));
    return SigmaProfile::from_choice(std::move(choice), true);
}

WeightStack build_counterexample(CounterexampleKind kind, const Instance& inst, double t,
                                 const std::optional<CriticalParams>& params, int index) {
    const auto prof = counterexample_profile(kind, inst, index);
    if (index < 0) index = check_assumptions(inst).violated_indices.front() - 1;
    const double ds = build_root_value_set(inst.spec, inst.reg, inst.L()).delta_sigma;
    if (!(t > 0.0) || !(t < ds / 3.0)) throw DomainError("t must lie in (0, delta_sigma / 3)");
    auto a = prof.choice;
    a[static_cast<std::size_t>(index)] += t;
    return assemble_stack(a, params ? *params : identity_params(inst.dims, inst.spec), inst, Target::G);
}

CounterexampleFit fit_counterexample(CounterexampleKind kind, const Instance& inst, const std::vector<double>& ts,
                                     int index) {
    CounterexampleFit fit;
    fit.kind = kind;
    fit.predicted = kind == CounterexampleKind::L2LambdaEqY2 ? 3.0 : 2.0;
    const auto profiles = enumerate_sigma_profiles(inst.spec, inst.reg, inst.L());
    std::vector<double> xs, ys;
    for (double t : ts) {
        const auto W = build_counterexample(kind, inst, t, std::nullopt, index);
        const auto d = distance_to_critical_set(W, profiles, inst, Target::G);
        fit.t.push_back(t);
        fit.grad_norm.push_back(grad_G(W, inst.Y, inst.reg).norm());
        fit.dist_upper.push_back(d.upper);
        fit.dist_lower.push_back(d.lower);
        xs.push_back(std::log(d.upper));
        ys.push_back(std::log(fit.grad_norm.back()));
    }
    if (xs.size() >= 2) {
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
        fit.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
        fit.law_holds = std::abs(fit.slope - fit.predicted) <= 0.05;
    }
    return fit;
}

FirstOrderReport check_first_order_conditions(const Trajectory& traj, double tail_fraction, const Instance* inst,
                                              const ProfileEnumeration* profiles) {
    if (traj.F.size() < 3) throw DomainError("trajectory shorter than 3 iterates");
    if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) throw DomainError("tail_fraction must be in (0, 1]");
    const auto n = static_cast<std::size_t>(traj.steps());
    const auto start = n - static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(n)));
    FirstOrderReport rep;
    for (std::size_t k = start; k < n; ++k) {
        const double st = traj.step_sq[k];
        if (!(st > 0.0)) continue;
        ++rep.tail_steps;
        const double dec = (traj.F[k] - traj.F[k + 1]) / st;
        const double k3 = std::sqrt(traj.grad_sq[k] / st);
        rep.kappa1c = std::isnan(rep.kappa1c) ? dec : std::min(rep.kappa1c, dec);
        rep.kappa3c = std::isnan(rep.kappa3c) ? k3 : std::max(rep.kappa3c, k3);
        rep.kappa3c_min = std::isnan(rep.kappa3c_min) ? k3 : std::min(rep.kappa3c_min, k3);
    }
    rep.decrease_held = rep.tail_steps > 0 && rep.kappa1c > 0.0;
    rep.safeguard_held = rep.tail_steps > 0 && std::isfinite(rep.kappa3c);

    if (inst && profiles && !traj.iterates.empty() && traj.final.b.empty()) {
        const auto end = distance_to_critical_set(traj.final.W, *profiles, *inst, Target::F);
        rep.F_star = critical_value_F(profiles->profiles[static_cast<std::size_t>(end.profile_id)], inst->spec,
                                      inst->reg, inst->L());
        for (std::size_t i = 0; i < traj.iterates.size(); ++i) {
            const auto k = static_cast<std::size_t>(traj.iterate_index[i]);
            if (k < start || k >= n) continue;
            const auto d = distance_to_critical_set(traj.iterates[i].W, *profiles, *inst, Target::F);
            const double den = d.upper * d.upper + traj.step_sq[k];
            if (!(den > 0.0)) continue;
            const double v = std::max(0.0, traj.F[k + 1] - rep.F_star) / den;
            rep.kappa2c = std::isnan(rep.kappa2c) ? v : std::max(rep.kappa2c, v);
            ++rep.cost_to_go_points;
        }
        rep.cost_to_go_checked = rep.cost_to_go_points > 0;
    }
    return rep;
}

} // namespace dlneb
