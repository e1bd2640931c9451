#include "dlneb/constants.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dlneb {

double excluded_lambda(double y, int L) {
    if (L == 2) return y * y;
    const double a = std::pow((L - 2.0) / L, L / (2.0 * (L - 1)));
    const double b = std::pow(L / (L - 2.0), (L - 2.0) / (2.0 * (L - 1)));
    return std::pow(y / (a + b), 2.0 * (L - 1));
}

AssumptionReport check_assumptions(const DimChain& dims, const TargetSpectrum& spec, const RegParams& reg, int L,
                                   double rel_tol) {
    AssumptionReport r;
    r.assumption1 = dims.assumption1();
    const double lam = reg.lambda_prod;
    for (int i = 0; i < spec.r_Y; ++i) {
        const double ex = excluded_lambda(spec.y(i), L);
        const double margin = std::abs(lam - ex) / ex;
        r.excluded.push_back(ex);
        r.margins.push_back(margin);
        if (margin <= rel_tol) r.violated_indices.push_back(i + 1);
    }
    r.assumption2 = r.violated_indices.empty();
    return r;
}

double phi(double x, double lambda, int L) {
    if (!(x > 0.0)) throw DomainError("phi: x must be positive");
    if (!(lambda > 0.0)) throw DomainError("phi: lambda must be positive");
    return (std::pow(x, 2 * L - 1) + lambda * x) / (std::sqrt(lambda) * std::pow(x, L - 1));
}

double phi_prime(double x, double lambda, int L) {
    if (!(x > 0.0)) throw DomainError("phi_prime: x must be positive");
    if (!(lambda > 0.0)) throw DomainError("phi_prime: lambda must be positive");
    const double sl = std::sqrt(lambda);
    return (L / sl) * std::pow(x, L - 1) + sl * (2.0 - L) * std::pow(x, 1 - L);
}

const std::vector<std::string>& EbLedger::columns() {
    static const std::vector<std::string> cols{
        "L",       "lambda",  "lambda_min", "lambda_max", "y_1",        "y_sp",        "p_Y",   "delta_y",
        "delta_sigma", "d_max", "sigma_min", "sigma_max", "r_sigma",   "g_max",       "p",     "min_phi_prime",
        "c1",      "c2",      "c3",         "c4",         "c5",         "eta1",        "eta2",  "eta3",
        "eta4",    "eta5",    "delta1",     "delta2",     "L_G",        "eps_0",       "kappa_0", "eps_sigma",
        "kappa_sigma", "kappa", "eps",      "kappa1",     "eps1"};
    return cols;
}

std::vector<std::pair<std::string, double>> EbLedger::entries() const {
    const std::vector<double> v{static_cast<double>(L), lambda, lambda_min, lambda_max, y1, y_sp,
                                static_cast<double>(p_Y), delta_y, delta_sigma, static_cast<double>(d_max),
                                sigma_min, sigma_max, static_cast<double>(r_sigma), static_cast<double>(g_max),
                                static_cast<double>(p), min_phi_prime, c1, c2, c3, c4, c5, eta1, eta2, eta3, eta4,
                                eta5, delta1, delta2, L_G, eps_0, kappa_0, eps_sigma, kappa_sigma, kappa, eps, kappa1,
                                eps1};
    std::vector<std::pair<std::string, double>> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.emplace_back(columns()[i], v[i]);
    return out;
}

namespace {

void require_assumptions(const Instance& inst) {
    const auto rep = check_assumptions(inst);
    if (!rep.assumption1)
        throw AssumptionError("width assumption fails: a hidden width is below min(d_0, d_L); the critical set "
                              "characterization and every constant are undefined");
    if (!rep.assumption2) {
        std::ostringstream os;
        os << "excluded-lambda assumption fails at y-index";
        for (int i : rep.violated_indices) os << ' ' << i;
        if (inst.L() == 2)
            os << ": min_i |lambda - y_i^2| = 0 makes eps_0 vanish and kappa_0, c3 infinite";
        else
            os << ": min |phi'(sigma_i)| = 0 makes c5 infinite and delta2 vanish";
        throw AssumptionError(os.str());
    }
}

double m_lambda_y2(const TargetSpectrum& spec, double lam) {
    double m = lam;
    for (int i = 0; i < spec.r_Y; ++i) m = std::min(m, std::abs(lam - spec.y(i) * spec.y(i)));
    return m;
}

double m_sqrt_lambda_y(const TargetSpectrum& spec, double lam) {
    const double sl = std::sqrt(lam);
    double m = sl;
    for (int i = 0; i < spec.r_Y; ++i) m = std::min(m, std::abs(sl - spec.y(i)));
    return m;
}

} // namespace

std::pair<double, double> zero_constants(const TargetSpectrum& spec, const RegParams& reg, int L) {
    const double lam = reg.lambda_prod, sl = std::sqrt(lam), y1 = spec.y1();
    if (L == 2) {
        const double m = m_lambda_y2(spec, lam);
        const double eps0 = std::sqrt(sl * m / (2.0 * (sl + y1)));
        const double kappa0 = 2.0 * (sl + y1) / (sl * m);
        return {eps0, kappa0};
    }
    double eps0 = std::pow(lam / 3.0, 1.0 / (2.0 * L - 2.0));
    if (y1 > 0.0) eps0 = std::min(eps0, std::pow(sl / (3.0 * y1), 1.0 / (L - 2.0)));
    const double kappa0 = 3.0 * std::sqrt(static_cast<double>(L)) / (2.0 * lam);
    return {eps0, kappa0};
}

EbLedger compute_profile_ledger(const Instance& inst, const SigmaProfile& prof) {
    require_assumptions(inst);
    const auto& spec = inst.spec;
    const int L = inst.L();
    const double Ld = L;
    EbLedger r;
    r.L = L;
    r.lambda = inst.reg.lambda_prod;
    r.lambda_min = inst.reg.lambda_min;
    r.lambda_max = inst.reg.lambda_max;
    r.y1 = spec.y1();
    r.y_sp = spec.smallest_positive();
    r.p_Y = spec.p_Y;
    r.delta_y = spec.delta_y;
    r.delta_sigma = build_root_value_set(spec, inst.reg, L).delta_sigma;
    r.d_max = inst.dims.d_max();
    std::tie(r.eps_0, r.kappa_0) = zero_constants(spec, inst.reg, L);
    r.zero_profile = prof.is_zero();
    r.r_sigma = prof.r_sigma;
    if (prof.is_zero()) return r;

    const double lam = r.lambda, sl = std::sqrt(lam), y1 = r.y1;
    const double smin = prof.sigma_min_pos, smax = prof.sigma_max;
    const double ds = r.delta_sigma, dy = r.delta_y;
    const double dmax = r.d_max;
    const int p = prof.p(), gmax = prof.g_max(), rs = prof.r_sigma;
    r.sigma_min = smin;
    r.sigma_max = smax;
    r.g_max = gmax;
    r.p = p;
    const double s15 = 1.5 * smax;

    double mpp = std::numeric_limits<double>::infinity();
    for (int i = 0; i < rs; ++i) mpp = std::min(mpp, std::abs(phi_prime(prof.sigma[static_cast<std::size_t>(i)], lam, L)));
    r.min_phi_prime = mpp;

    double c1 = 0.0;
    for (int l = 1; l <= L; ++l) {
        const double num = (L - l) * (L - l + 1.0) + (l - 1.0) * l;
        c1 = std::max(c1, std::pow(s15, 2 * L - 2) * num / (2.0 * std::sqrt(2.0) * lam) + 0.5);
    }
    r.c1 = c1;

    r.eta1 = (smax / smin) * (3.0 * std::sqrt(2.0) * smin / (4.0 * lam) + 81.0 * smax * smax / (8.0 * ds * lam) +
                              9.0 * std::sqrt(2.0 * gmax) * Ld * smax / (4.0 * lam));

    r.c2 = std::pow(s15, L) * 3.0 * y1 * Ld / (2.0 * sl * ds * smin) + c1 +
           y1 * p * sl * std::pow(s15, L - 2) *
               (Ld * Ld * r.eta1 / (2.0 * smin) + 3.0 * std::sqrt(2.0 * gmax) * Ld * Ld * smax / (2.0 * lam * smin));

    r.eta2 = c1 + std::pow(s15, L) * 3.0 * (Ld - 1.0) * y1 / (2.0 * ds * sl * smin);
    const double m2 = m_sqrt_lambda_y(spec, lam);
    if (L == 2)
        r.c3 = 6.0 * r.c2 * (y1 + sl) / (lam * m2);
    else
        r.c3 = (2.0 / lam) * r.eta2;

    r.eta3 = r.c2 + r.c3 * std::sqrt(dmax) * (std::pow(s15, 2 * (L - 1)) + sl * y1 * std::pow(s15, L - 2) + lam);
    r.eta4 = r.eta3 + p * r.eta1 * (2.0 * Ld - 1.0) * Ld / smin * std::pow(s15, 2 * L - 2) + lam * p * r.eta1 * Ld / smin;
    const double e34 = std::sqrt(r.eta3 * r.eta3 + r.eta4 * r.eta4);
    const double two_L = std::pow(2.0, L);
    const double sminL1 = std::pow(smin, L - 1);
    r.eta5 = 2.0 * two_L * (6.0 * y1 + dy) * (spec.p_Y + 1.0) * e34 / (3.0 * sl * r.y_sp * dy * sminL1);
    r.c4 = r.eta5 + (1.0 / r.y_sp) * (two_L * e34 / (sl * sminL1) + 2.0 * y1 * r.eta5);
    r.c5 = two_L * e34 / (sl * sminL1 * mpp) + 3.0 * std::sqrt(2.0) * (Ld - 1.0) * smax / (4.0 * lam * smin);

    r.delta1 = dy / (3.0 * Ld * std::pow(4.0 * smax / 3.0, L - 1) / sl +
                     3.0 * (Ld - 2.0) * sl * std::pow(2.0 * smin / 3.0, 1 - L));
    r.delta2 = mpp / (2.0 * Ld * (Ld - 1.0) * std::pow(4.0 * smax / 3.0, L - 1) / sl +
                      2.0 * sl * (2.0 - Ld) * (1.0 - Ld) * std::pow(2.0 * smin / 3.0, -L));
    r.L_G = lam * Ld + std::pow(2.0, 2 * L - 1) * Ld * Ld * std::pow(smax, 2 * L - 2) +
            sl * y1 * std::pow(2.0, L - 2) * Ld * Ld * std::pow(smax, L - 2);

    double eps = std::min({ds / 3.0, r.delta1, r.delta2,
                           dy * sl * sminL1 / (3.0 * std::pow(2.0, L - 1) * r.L_G * e34)});
    if (L == 2) {
        eps = std::min(eps, sl / std::sqrt(3.0 * (sl + y1)) * std::sqrt(m2));
        eps = std::min(eps, std::sqrt(2.0 * lam) * m2 * smin / (12.0 * r.c2 * r.L_G));
    } else {
        eps = std::min(eps, std::pow(sl / (2.0 * y1), 1.0 / (L - 2.0)));
    }
    r.eps_sigma = eps;
    r.kappa_sigma = std::sqrt(Ld) * (9.0 * smax * smax / (4.0 * ds * lam * smin) + r.c3 * std::sqrt(dmax - rs) +
                                     r.c4 * smax + r.c5 * std::sqrt(static_cast<double>(rs)));
    return r;
}

GlobalConstants compute_global_constants(const Instance& inst, const ProfileEnumeration& profiles) {
    GlobalConstants g;
    g.truncated = profiles.truncated;
    const auto [eps0, kappa0] = zero_constants(inst.spec, inst.reg, inst.L());
    g.kappa = kappa0;
    g.eps = eps0;
    for (const auto& prof : profiles.profiles) {
        if (prof.is_zero()) continue;
        const auto r = compute_profile_ledger(inst, prof);
        g.kappa = std::max(g.kappa, r.kappa_sigma);
        g.eps = std::min(g.eps, r.eps_sigma);
    }
    g.kappa1 = g.kappa * inst.reg.lambda_prod / inst.reg.lambda_min;
    g.eps1 = g.eps / std::sqrt(inst.reg.lambda_max);
    return g;
}

EbLedger compute_ledger(const Instance& inst, const SigmaProfile& profile, const ProfileEnumeration& profiles) {
    return compute_ledger(inst, profile, compute_global_constants(inst, profiles));
}

EbLedger compute_ledger(const Instance& inst, const SigmaProfile& profile, const GlobalConstants& g) {
    EbLedger r = compute_profile_ledger(inst, profile);
    r.kappa = g.kappa;
    r.eps = g.eps;
    r.kappa1 = g.kappa1;
    r.eps1 = g.eps1;
    r.global_truncated = g.truncated;
    return r;
}

} // namespace dlneb
