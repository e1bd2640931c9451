#include "dlneb/critical_set.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <sstream>

namespace dlneb {

namespace {

double ipow(double x, int n) {
    double r = 1.0;
    for (int k = 0; k < n; ++k) r *= x;
    return r;
}

Matrix polar(const Matrix& C) {
    Eigen::JacobiSVD<Matrix> svd(C, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().transpose();
}

Matrix haar(int n, std::mt19937_64& gen) {
    if (n == 0) return Matrix(0, 0);
    std::normal_distribution<double> nd(0.0, 1.0);
    Matrix G(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) G(i, j) = nd(gen);
    Eigen::HouseholderQR<Matrix> qr(G);
    Matrix Q = qr.householderQ();
    const Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j)
        if (R(j, j) < 0.0) Q.col(j) *= -1.0;
    return Q;
}

// Permutation P with P diag(a) P^T = diag(sort_desc(a)), identity past d_min.
Matrix sort_permutation(const std::vector<double>& a, int d) {
    const int m = static_cast<int>(a.size());
    std::vector<int> order(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return a[static_cast<std::size_t>(x)] > a[static_cast<std::size_t>(y)]; });
    Matrix P = Matrix::Zero(d, d);
    for (int r = 0; r < m; ++r) P(r, order[static_cast<std::size_t>(r)]) = 1.0;
    for (int j = m; j < d; ++j) P(j, j) = 1.0;
    return P;
}

Matrix block_diag(const std::vector<Matrix>& blocks, const Matrix& tail) {
    Eigen::Index n = tail.rows();
    for (const auto& b : blocks) n += b.rows();
    Matrix M = Matrix::Zero(n, n);
    Eigen::Index off = 0;
    for (const auto& b : blocks) {
        M.block(off, off, b.rows(), b.cols()) = b;
        off += b.rows();
    }
    if (tail.rows() > 0) M.block(off, off, tail.rows(), tail.cols()) = tail;
    return M;
}

// rows x cols matrix BlkD(diag(v), 0).
Matrix padded_diag(const std::vector<double>& v, double s, Eigen::Index rows, Eigen::Index cols) {
    Matrix S = Matrix::Zero(rows, cols);
    for (std::size_t i = 0; i < v.size(); ++i) S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = s * v[i];
    return S;
}

std::vector<std::vector<int>> compositions(int h, int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(static_cast<std::size_t>(k), 0);
    std::function<void(int, int)> rec = [&](int pos, int left) {
        if (pos == k - 1) {
            cur[static_cast<std::size_t>(pos)] = left;
            out.push_back(cur);
            return;
        }
        for (int c = left; c >= 0; --c) {
            cur[static_cast<std::size_t>(pos)] = c;
            rec(pos + 1, left - c);
        }
    };
    rec(0, h);
    return out;
}

std::uint64_t binom_saturating(int n, int k) {
    long double r = 1.0L;
    for (int i = 1; i <= k; ++i) r = r * static_cast<long double>(n - k + i) / static_cast<long double>(i);
    const long double cap = static_cast<long double>(std::numeric_limits<std::uint64_t>::max());
    return r >= cap ? std::numeric_limits<std::uint64_t>::max() : static_cast<std::uint64_t>(std::llround(r));
}

std::uint64_t mul_saturating(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) return std::numeric_limits<std::uint64_t>::max();
    return a * b;
}

void check_params(const CriticalParams& P, const Instance& inst) {
    const int L = inst.L();
    const auto& spec = inst.spec;
    if (static_cast<int>(P.Q.size()) != L - 1) throw ShapeError("critical params: need Q_2..Q_L");
    for (int l = 2; l <= L; ++l)
        if (P.Ql(l).rows() != inst.dims.d(l - 1) || P.Ql(l).cols() != inst.dims.d(l - 1))
            throw ShapeError("critical params: Q_" + std::to_string(l) + " must be d_{l-1} square");
    if (static_cast<int>(P.O.size()) != spec.p_Y) throw ShapeError("critical params: need one O_i per distinct value");
    for (int b = 0; b < spec.p_Y; ++b)
        if (P.O[static_cast<std::size_t>(b)].rows() != spec.h[static_cast<std::size_t>(b)])
            throw ShapeError("critical params: O_i must be h_i square");
    if (P.O_tail.rows() != spec.d0() - spec.r_Y || P.Ohat_tail.rows() != spec.dL() - spec.r_Y)
        throw ShapeError("critical params: tail blocks have wrong size");
}

} // namespace

// ---------------------------------------------------------------- profiles

SigmaProfile SigmaProfile::from_choice(std::vector<double> choice, bool degenerate) {
    SigmaProfile p;
    p.choice = std::move(choice);
    p.sigma = p.choice;
    std::sort(p.sigma.begin(), p.sigma.end(), std::greater<>());
    p.degenerate = degenerate;
    p.r_sigma = static_cast<int>(std::count_if(p.sigma.begin(), p.sigma.end(), [](double v) { return v > 0.0; }));
    p.sigma_max = p.sigma.empty() ? 0.0 : p.sigma.front();
    p.sigma_min_pos = p.r_sigma > 0 ? p.sigma[static_cast<std::size_t>(p.r_sigma - 1)] : 0.0;
    const double tol = 1e-9 * std::max(1.0, p.sigma_max);
    p.t.push_back(0);
    for (int j = 1; j < p.r_sigma; ++j)
        if (p.sigma[static_cast<std::size_t>(j - 1)] - p.sigma[static_cast<std::size_t>(j)] > tol) p.t.push_back(j);
    if (p.r_sigma > 0) p.t.push_back(p.r_sigma);
    for (std::size_t i = 1; i < p.t.size(); ++i) p.g.push_back(p.t[i] - p.t[i - 1]);
    return p;
}

SigmaProfile SigmaProfile::zero(int d_min) {
    return from_choice(std::vector<double>(static_cast<std::size_t>(d_min), 0.0));
}

int SigmaProfile::g_max() const { return g.empty() ? 0 : *std::max_element(g.begin(), g.end()); }

std::vector<std::vector<ScalarRoot>> block_roots(const TargetSpectrum& spec, const RegParams& reg, int L) {
    std::vector<std::vector<ScalarRoot>> out;
    for (int b = 0; b < spec.p_Y; ++b) out.push_back(solve_scalar_equation(spec.block_value(b), reg.lambda_prod, L));
    return out;
}

ProfileEnumeration enumerate_sigma_profiles(const TargetSpectrum& spec, const RegParams& reg, int L, int cap) {
    if (cap < 1) throw DomainError("enumerate_sigma_profiles: cap must be >= 1");
    const auto roots = block_roots(spec, reg, L);
    const int p = spec.p_Y;
    std::vector<std::vector<std::vector<int>>> comps;
    ProfileEnumeration out;
    out.total = 1;
    for (int b = 0; b < p; ++b) {
        const int h = spec.h[static_cast<std::size_t>(b)];
        const int k = static_cast<int>(roots[static_cast<std::size_t>(b)].size());
        comps.push_back(compositions(h, k));
        out.total = mul_saturating(out.total, binom_saturating(h + k - 1, k - 1));
    }

    std::set<std::vector<double>> seen;
    std::vector<std::size_t> odo(static_cast<std::size_t>(p), 0);
    bool done = false;
    while (!done) {
        if (static_cast<int>(out.profiles.size()) >= cap) {
            out.truncated = true;
            break;
        }
        std::vector<double> a(static_cast<std::size_t>(spec.d_min()), 0.0);
        bool degenerate = false;
        for (int b = 0; b < p; ++b) {
            const auto& rb = roots[static_cast<std::size_t>(b)];
            const auto& cnt = comps[static_cast<std::size_t>(b)][odo[static_cast<std::size_t>(b)]];
            int j = spec.s[static_cast<std::size_t>(b)];
            for (int opt = static_cast<int>(rb.size()) - 1; opt >= 0; --opt) {
                for (int c = 0; c < cnt[static_cast<std::size_t>(opt)]; ++c)
                    a[static_cast<std::size_t>(j++)] = rb[static_cast<std::size_t>(opt)].value;
                if (cnt[static_cast<std::size_t>(opt)] > 0 && rb[static_cast<std::size_t>(opt)].value > 0.0 &&
                    rb[static_cast<std::size_t>(opt)].degenerate)
                    degenerate = true;
            }
        }
        SigmaProfile prof = SigmaProfile::from_choice(std::move(a), degenerate);
        if (seen.insert(prof.sigma).second) out.profiles.push_back(std::move(prof));

        int b = 0;
        for (; b < p; ++b) {
            if (++odo[static_cast<std::size_t>(b)] < comps[static_cast<std::size_t>(b)].size()) break;
            odo[static_cast<std::size_t>(b)] = 0;
        }
        done = b == p;
    }
    std::sort(out.profiles.begin(), out.profiles.end(),
              [](const SigmaProfile& x, const SigmaProfile& y) { return x.sigma < y.sigma; });
    return out;
}

double critical_value_G(const SigmaProfile& profile, const TargetSpectrum& spec, const RegParams& reg, int L) {
    const double lam = reg.lambda_prod, sl = std::sqrt(lam);
    double v = 0.0;
    for (int i = 0; i < spec.d_min(); ++i) {
        const double a = profile.choice[static_cast<std::size_t>(i)];
        const double r = ipow(a, L) - sl * spec.y(i);
        v += r * r + lam * L * a * a;
    }
    return v;
}

double critical_value_F(const SigmaProfile& profile, const TargetSpectrum& spec, const RegParams& reg, int L) {
    return critical_value_G(profile, spec, reg, L) / reg.lambda_prod;
}

SigmaProfile optimal_profile(const TargetSpectrum& spec, const RegParams& reg, int L) {
    const auto roots = block_roots(spec, reg, L);
    const double lam = reg.lambda_prod, sl = std::sqrt(lam);
    std::vector<double> a(static_cast<std::size_t>(spec.d_min()), 0.0);
    bool degenerate = false;
    for (int b = 0; b < spec.p_Y; ++b) {
        const double y = spec.block_value(b);
        const ScalarRoot* best = nullptr;
        double best_v = std::numeric_limits<double>::infinity();
        for (const auto& r : roots[static_cast<std::size_t>(b)]) {
            const double res = ipow(r.value, L) - sl * y;
            const double v = res * res + lam * L * r.value * r.value;
            if (v < best_v) {
                best_v = v;
                best = &r;
            }
        }
        for (int j = spec.s[static_cast<std::size_t>(b)]; j < spec.s[static_cast<std::size_t>(b + 1)]; ++j)
            a[static_cast<std::size_t>(j)] = best->value;
        degenerate = degenerate || (best->value > 0.0 && best->degenerate);
    }
    return SigmaProfile::from_choice(std::move(a), degenerate);
}

SigmaProfile suboptimal_profile(const TargetSpectrum& spec, const RegParams& reg, int L) {
    SigmaProfile opt = optimal_profile(spec, reg, L);
    std::vector<double> a = opt.choice;
    int idx = -1;
    for (int i = 0; i < static_cast<int>(a.size()); ++i)
        if (a[static_cast<std::size_t>(i)] > 0.0 &&
            (idx < 0 || a[static_cast<std::size_t>(i)] <= a[static_cast<std::size_t>(idx)]))
            idx = i;
    if (idx < 0) throw DomainError("suboptimal_profile: optimal profile is zero");
    a[static_cast<std::size_t>(idx)] = 0.0;
    return SigmaProfile::from_choice(std::move(a), opt.degenerate);
}

// ---------------------------------------------------------------- params

double CriticalParams::max_orthogonality_error() const {
    double e = 0.0;
    auto chk = [&](const Matrix& M) {
        if (M.rows() > 0) e = std::max(e, (M.transpose() * M - Matrix::Identity(M.rows(), M.rows())).norm());
    };
    for (const auto& m : Q) chk(m);
    for (const auto& m : O) chk(m);
    chk(O_tail);
    chk(Ohat_tail);
    return e;
}

CriticalParams identity_params(const DimChain& dims, const TargetSpectrum& spec) {
    CriticalParams P;
    for (int l = 2; l <= dims.L(); ++l) P.Q.push_back(Matrix::Identity(dims.d(l - 1), dims.d(l - 1)));
    for (int b = 0; b < spec.p_Y; ++b) P.O.push_back(Matrix::Identity(spec.h[static_cast<std::size_t>(b)], spec.h[static_cast<std::size_t>(b)]));
    P.O_tail = Matrix::Identity(spec.d0() - spec.r_Y, spec.d0() - spec.r_Y);
    P.Ohat_tail = Matrix::Identity(spec.dL() - spec.r_Y, spec.dL() - spec.r_Y);
    return P;
}

CriticalParams sample_random_params(const DimChain& dims, const TargetSpectrum& spec, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    CriticalParams P;
    for (int l = 2; l <= dims.L(); ++l) P.Q.push_back(haar(dims.d(l - 1), gen));
    for (int b = 0; b < spec.p_Y; ++b) P.O.push_back(haar(spec.h[static_cast<std::size_t>(b)], gen));
    P.O_tail = haar(spec.d0() - spec.r_Y, gen);
    P.Ohat_tail = haar(spec.dL() - spec.r_Y, gen);
    return P;
}

Matrix haar_orthogonal(int n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    return haar(n, gen);
}

Matrix right_block(const CriticalParams& P, const TargetSpectrum&) { return block_diag(P.O, P.O_tail); }

Matrix left_block(const CriticalParams& P, const TargetSpectrum&) { return block_diag(P.O, P.Ohat_tail); }

// ---------------------------------------------------------------- construction

WeightStack assemble_stack(const std::vector<double>& a, const CriticalParams& P, const Instance& inst, Target t) {
    check_params(P, inst);
    const int L = inst.L();
    const auto& dims = inst.dims;
    const auto& spec = inst.spec;
    if (static_cast<int>(a.size()) != spec.d_min()) throw ShapeError("assemble_stack: choice length must be d_min");
    const Matrix M = right_block(P, spec);
    const Matrix N = left_block(P, spec);
    WeightStack W;
    W.layers.resize(static_cast<std::size_t>(L));
    auto S = [&](int l) { return padded_diag(a, layer_scale(inst.reg, l, t), dims.d(l), dims.d(l - 1)); };
    W[1] = P.Ql(2) * S(1) * M * spec.V.transpose();
    for (int l = 2; l < L; ++l) W[l] = P.Ql(l + 1) * S(l) * P.Ql(l).transpose();
    W[L] = spec.U * N.transpose() * S(L) * P.Ql(L).transpose();
    return W;
}

WeightStack construct_critical_point(const SigmaProfile& profile, const CriticalParams& P, const Instance& inst,
                                     Target t) {
    if (!inst.dims.assumption1())
        throw AssumptionError("construct_critical_point: width assumption fails (a hidden width is below min(d_0, d_L))");
    const auto& spec = inst.spec;
    const double lam = inst.reg.lambda_prod;
    if (static_cast<int>(profile.choice.size()) != spec.d_min())
        throw ShapeError("construct_critical_point: profile length must be d_min");
    for (int i = 0; i < spec.d_min(); ++i) {
        const double a = profile.choice[static_cast<std::size_t>(i)];
        if (a == 0.0) continue;
        const double y = spec.y(i);
        const double res = std::abs(root_poly(a, y, lam, inst.L()));
        if (a < 0.0 || res > 1e-10 * (1.0 + lam + std::sqrt(lam) * y)) {
            std::ostringstream os;
            os << "construct_critical_point: entry " << i << " (" << a << ") does not solve the scalar equation for y="
               << y;
            throw DomainError(os.str());
        }
    }
    return assemble_stack(profile.choice, P, inst, t);
}

// ---------------------------------------------------------------- distance

std::vector<Vector> layer_singular_values(const WeightStack& W) {
    std::vector<Vector> sv;
    for (const auto& m : W.layers) sv.push_back(Eigen::JacobiSVD<Matrix>(m).singularValues());
    return sv;
}

double mirsky_lower_bound(const std::vector<Vector>& sv, const SigmaProfile& profile, const Instance& inst, Target t) {
    double s2 = 0.0;
    for (int l = 1; l <= inst.L(); ++l) {
        const Vector& v = sv[static_cast<std::size_t>(l - 1)];
        const double sc = layer_scale(inst.reg, l, t);
        for (int j = 0; j < v.size(); ++j) {
            const double target = j < static_cast<int>(profile.sigma.size()) ? sc * profile.sigma[static_cast<std::size_t>(j)] : 0.0;
            const double d = v(j) - target;
            s2 += d * d;
        }
    }
    return std::sqrt(s2);
}

namespace {

struct Refiner {
    const WeightStack& W;
    const SigmaProfile& prof;
    const Instance& inst;
    Target t;
    int L;

    Matrix S(int l) const {
        return padded_diag(prof.choice, layer_scale(inst.reg, l, t), inst.dims.d(l), inst.dims.d(l - 1));
    }

    double objective(const CriticalParams& P) const { return W.dist_sq(assemble_stack(prof.choice, P, inst, t)); }

    void update_blocks(CriticalParams& P) const {
        const auto& spec = inst.spec;
        const Matrix CM = S(1).transpose() * P.Ql(2).transpose() * W[1] * spec.V;
        const Matrix CN = S(L) * P.Ql(L).transpose() * W[L].transpose() * spec.U;
        for (int b = 0; b < spec.p_Y; ++b) {
            const int o = spec.s[static_cast<std::size_t>(b)], h = spec.h[static_cast<std::size_t>(b)];
            P.O[static_cast<std::size_t>(b)] = polar(CM.block(o, o, h, h) + CN.block(o, o, h, h));
        }
        // Tail blocks only multiply zero singular values; they never move W.
    }

    void update_Q(CriticalParams& P, int l) const {
        const auto& spec = inst.spec;
        const Matrix X = l - 1 == 1 ? Matrix(S(1) * right_block(P, spec) * spec.V.transpose())
                                    : Matrix(S(l - 1) * P.Ql(l - 1).transpose());
        const Matrix Z = l == L ? Matrix(spec.U * left_block(P, spec).transpose() * S(L)) : Matrix(P.Ql(l + 1) * S(l));
        P.Ql(l) = polar(W[l - 1] * X.transpose() + W[l].transpose() * Z);
    }

    std::pair<double, int> run(CriticalParams& P, const DistanceOptions& opt) const {
        update_blocks(P);
        double J = objective(P);
        int it = 0;
        for (; it < opt.iters; ++it) {
            for (int l = 2; l <= L; ++l) update_Q(P, l);
            update_blocks(P);
            const double Jn = objective(P);
            if (Jn > J + 1e-12 * (1.0 + J)) {
                std::ostringstream os;
                os << "distance refinement increased the objective from " << J << " to " << Jn;
                throw ConsistencyError(os.str());
            }
            const double improvement = J - Jn;
            J = std::min(J, Jn);
            if (improvement <= opt.tol * J) {
                ++it;
                break;
            }
        }
        return {J, it};
    }
};

} // namespace

ComponentDistance distance_to_component(const WeightStack& W, const SigmaProfile& profile, const Instance& inst,
                                        Target t, const DistanceOptions& opt) {
    check_shapes(W, inst.Y);
    if (!inst.dims.assumption1()) throw AssumptionError("distance_to_component: width assumption fails");
    const int L = inst.L();
    ComponentDistance out;
    const auto sv = layer_singular_values(W);
    out.lower = mirsky_lower_bound(sv, profile, inst, t);
    out.params = identity_params(inst.dims, inst.spec);
    if (profile.is_zero()) {
        out.upper = W.norm();
        out.lower = out.upper; // exact: the component is the single point 0
        out.nearest = WeightStack::zeros(inst.dims);
        return out;
    }

    std::vector<Eigen::JacobiSVD<Matrix>> svds;
    for (int l = 1; l <= L; ++l) svds.emplace_back(W[l], Eigen::ComputeFullU | Eigen::ComputeFullV);

    Refiner ref{W, profile, inst, t, L};
    double best = std::numeric_limits<double>::infinity();
    for (int seed = 0; seed < 2; ++seed) {
        // Constructive seed: take Q_2 from the singular frames (right of W_2 or
        // left of W_1) reordered to the choice, then carry it up the chain so
        // the column signs of consecutive frames agree.
        CriticalParams P = identity_params(inst.dims, inst.spec);
        const Matrix frame = seed == 0 ? Matrix(svds[1].matrixV()) : Matrix(svds[0].matrixU());
        P.Ql(2) = frame * sort_permutation(profile.choice, inst.dims.d(1));
        for (int l = 2; l < L; ++l) P.Ql(l + 1) = polar(W[l] * P.Ql(l) * ref.S(l).transpose());
        const auto [J, iters] = ref.run(P, opt);
        out.iterations += iters;
        if (J < best) {
            best = J;
            out.params = P;
        }
    }
    out.upper = std::sqrt(best);
    out.nearest = assemble_stack(profile.choice, out.params, inst, t);

    if (opt.verify_nearest) {
        const double gn = loss_grad_target(out.nearest, inst.Y, inst.reg, t).grad.norm();
        const double tol = 1e-9 * (1.0 + (t == Target::F ? 1.0 : inst.reg.sqrt_prod()) * inst.Y.norm());
        if (gn > tol) {
            std::ostringstream os;
            os << "distance_to_component: nearest point has gradient norm " << gn;
            throw ConsistencyError(os.str());
        }
    }
    return out;
}

SetDistance distance_to_critical_set(const WeightStack& W, const ProfileEnumeration& profiles, const Instance& inst,
                                     Target t, const DistanceOptions& opt) {
    if (profiles.profiles.empty()) throw DomainError("distance_to_critical_set: no profiles");
    const auto sv = layer_singular_values(W);
    const int n = static_cast<int>(profiles.profiles.size());
    std::vector<double> lb(static_cast<std::size_t>(n));
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        lb[static_cast<std::size_t>(k)] = mirsky_lower_bound(sv, profiles.profiles[static_cast<std::size_t>(k)], inst, t);
        order[static_cast<std::size_t>(k)] = k;
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return lb[static_cast<std::size_t>(a)] < lb[static_cast<std::size_t>(b)]; });

    SetDistance out;
    out.truncated = profiles.truncated;
    out.lower = lb[static_cast<std::size_t>(order.front())];
    out.upper = std::numeric_limits<double>::infinity();
    out.profile_id = -1;
    for (int k : order) {
        if (lb[static_cast<std::size_t>(k)] > out.upper) break;
        auto cd = distance_to_component(W, profiles.profiles[static_cast<std::size_t>(k)], inst, t, opt);
        ++out.evaluated;
        if (cd.upper < out.upper || (cd.upper == out.upper && k < out.profile_id)) {
            out.upper = cd.upper;
            out.profile_id = k;
            out.nearest = std::move(cd.nearest);
        }
    }
    return out;
}

} // namespace dlneb
