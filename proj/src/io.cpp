#include "dlneb/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace dlneb::io {

namespace {

template <class E, std::size_t N>
E parse_enum(const std::string& s, const E (&all)[N], const char* what) {
    for (E e : all)
        if (s == to_string(e)) return e;
    std::string names;
    for (E e : all) names += std::string(names.empty() ? "" : ", ") + to_string(e);
    throw ParseError(std::string("unknown ") + what + " '" + s + "' (expected one of: " + names + ")");
}

const Json& field(const Json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(std::string("missing field '") + key + "'");
    return *it;
}

double numf(const Json& j, const char* key) { return as_num(field(j, key)); }

template <class T>
T getf(const Json& j, const char* key) {
    try {
        return field(j, key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("field '") + key + "': " + e.what());
    }
}

Json nums(const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(num(x));
    return a;
}

std::vector<double> numsf(const Json& j, const char* key) {
    std::vector<double> v;
    for (const auto& x : field(j, key)) v.push_back(as_num(x));
    return v;
}

template <class Row>
void csv_row(std::ostream& os, const Row& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
}

} // namespace

Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double as_num(const Json& j) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    if (!j.is_number()) throw ParseError("expected a number, got " + j.dump());
    return j.get<double>();
}

PerturbationMode parse_mode(const std::string& s) {
    static const PerturbationMode all[] = {PerturbationMode::GaussianAllLayers, PerturbationMode::SingularDirection,
                                           PerturbationMode::TangentRemoved};
    return parse_enum(s, all, "perturbation mode");
}

CounterexampleKind parse_counterexample_kind(const std::string& s) {
    if (s == "l2") return CounterexampleKind::L2LambdaEqY2;
    if (s == "l3") return CounterexampleKind::Lge3PhiPrimeZero;
    static const CounterexampleKind all[] = {CounterexampleKind::L2LambdaEqY2, CounterexampleKind::Lge3PhiPrimeZero};
    return parse_enum(s, all, "counterexample kind");
}

ModelKind parse_model_kind(const std::string& s) {
    static const ModelKind all[] = {ModelKind::Linear, ModelKind::LinearBias, ModelKind::Nonlinear};
    return parse_enum(s, all, "model kind");
}

Activation parse_activation(const std::string& s) {
    static const Activation all[] = {Activation::Identity, Activation::Relu, Activation::LeakyRelu, Activation::Tanh};
    return parse_enum(s, all, "activation");
}

InitScheme parse_init(const std::string& s) {
    static const InitScheme all[] = {InitScheme::NearCritical, InitScheme::UniformFan, InitScheme::Gaussian};
    return parse_enum(s, all, "init scheme");
}

Termination parse_termination(const std::string& s) {
    static const Termination all[] = {Termination::Converged, Termination::MaxIterations};
    return parse_enum(s, all, "termination reason");
}

Json to_json(const std::vector<ScalarRoot>& roots) {
    Json a = Json::array();
    for (const auto& r : roots)
        a.push_back(Json{{"value", num(r.value)}, {"residual", num(r.residual)}, {"degenerate", r.degenerate}});
    return a;
}

Json to_json(const AssumptionReport& r) {
    Json idx = Json::array();
    for (int i : r.violated_indices) idx.push_back(i);
    return Json{{"ok", r.ok()},
                {"assumption1", r.assumption1},
                {"assumption2", r.assumption2},
                {"violated_indices", idx},
                {"excluded_lambda", nums(r.excluded)},
                {"margins", nums(r.margins)}};
}

Json ledger_json(const LedgerEntries& e, bool global_truncated) {
    Json cols = Json::object();
    for (const auto& [k, v] : e) cols[k] = num(v);
    return Json{{"columns", cols}, {"global_truncated", global_truncated}};
}

Json to_json(const EbLedger& l) { return ledger_json(l.entries(), l.global_truncated); }

LedgerEntries ledger_entries_from_json(const Json& j) {
    LedgerEntries e;
    for (const auto& [k, v] : field(j, "columns").items()) e.emplace_back(k, as_num(v));
    return e;
}

Json to_json(const VerificationReport& r) {
    Json radii = Json::array();
    for (const auto& s : r.radii)
        radii.push_back(Json{{"radius", num(s.radius)},
                             {"in_regime", s.in_regime},
                             {"samples", s.samples},
                             {"max_ratio", num(s.max_ratio)},
                             {"min_mu1", num(s.min_mu1)},
                             {"max_mu2", num(s.max_mu2)},
                             {"below_center", s.below_center}});
    Json samples = Json::array();
    for (const auto& s : r.samples)
        samples.push_back(Json{{"radius", num(s.radius)},
                               {"dist_lower", num(s.dist_lower)},
                               {"dist_upper", num(s.dist_upper)},
                               {"grad_norm", num(s.grad_norm)},
                               {"F", num(s.F)},
                               {"F_gap", num(s.F_gap)},
                               {"ratio", num(s.ratio)},
                               {"profile_id", s.profile_id},
                               {"in_regime", s.in_regime}});
    return Json{{"kind", r.kind},
                {"mode", to_string(r.mode)},
                {"pass", r.pass},
                {"tags", r.tags},
                {"assumptions_hold", r.assumptions_hold},
                {"center_grad_norm", num(r.center_grad_norm)},
                {"F_center", num(r.F_center)},
                {"cutoff", num(r.cutoff)},
                {"ledger_available", r.ledger_available},
                {"kappa1", num(r.kappa1)},
                {"eps1", num(r.eps1)},
                {"samples_within_eps1", r.samples_within_eps1},
                {"kappa1_respected", r.kappa1_respected},
                {"slope", num(r.slope)},
                {"slope_r2", num(r.slope_r2)},
                {"mu1", num(r.mu1)},
                {"mu2", num(r.mu2)},
                {"is_minimizer", r.is_minimizer},
                {"radii", radii},
                {"samples", samples}};
}

VerificationReport verification_from_json(const Json& j) {
    VerificationReport r;
    r.kind = getf<std::string>(j, "kind");
    r.mode = parse_mode(getf<std::string>(j, "mode"));
    r.pass = getf<bool>(j, "pass");
    r.tags = getf<std::vector<std::string>>(j, "tags");
    r.assumptions_hold = getf<bool>(j, "assumptions_hold");
    r.center_grad_norm = numf(j, "center_grad_norm");
    r.F_center = numf(j, "F_center");
    r.cutoff = numf(j, "cutoff");
    r.ledger_available = getf<bool>(j, "ledger_available");
    r.kappa1 = numf(j, "kappa1");
    r.eps1 = numf(j, "eps1");
    r.samples_within_eps1 = getf<int>(j, "samples_within_eps1");
    r.kappa1_respected = getf<bool>(j, "kappa1_respected");
    r.slope = numf(j, "slope");
    r.slope_r2 = numf(j, "slope_r2");
    r.mu1 = numf(j, "mu1");
    r.mu2 = numf(j, "mu2");
    r.is_minimizer = getf<bool>(j, "is_minimizer");
    for (const auto& s : field(j, "radii")) {
        RadiusSummary x;
        x.radius = numf(s, "radius");
        x.in_regime = getf<bool>(s, "in_regime");
        x.samples = getf<int>(s, "samples");
        x.max_ratio = numf(s, "max_ratio");
        x.min_mu1 = numf(s, "min_mu1");
        x.max_mu2 = numf(s, "max_mu2");
        x.below_center = getf<int>(s, "below_center");
        r.radii.push_back(x);
    }
    for (const auto& s : field(j, "samples")) {
        SampleRecord x;
        x.radius = numf(s, "radius");
        x.dist_lower = numf(s, "dist_lower");
        x.dist_upper = numf(s, "dist_upper");
        x.grad_norm = numf(s, "grad_norm");
        x.F = numf(s, "F");
        x.F_gap = numf(s, "F_gap");
        x.ratio = numf(s, "ratio");
        x.profile_id = getf<int>(s, "profile_id");
        x.in_regime = getf<bool>(s, "in_regime");
        r.samples.push_back(x);
    }
    return r;
}

Json to_json(const BalanceReport& r) {
    return Json{{"pass", r.pass},
                {"precondition", r.precondition},
                {"precondition_note", r.precondition_note},
                {"dist_upper", num(r.dist_upper)},
                {"dist_lower", num(r.dist_lower)},
                {"threshold", num(r.threshold)},
                {"grad_G_norm", num(r.grad_G_norm)},
                {"residuals", nums(r.residuals)},
                {"bound", num(r.bound)},
                {"drifts", nums(r.drifts)},
                {"drift_bound", num(r.drift_bound)},
                {"min_slack", num(r.min_slack)}};
}

BalanceReport balance_from_json(const Json& j) {
    BalanceReport r;
    r.pass = getf<bool>(j, "pass");
    r.precondition = getf<bool>(j, "precondition");
    r.precondition_note = getf<std::string>(j, "precondition_note");
    r.dist_upper = numf(j, "dist_upper");
    r.dist_lower = numf(j, "dist_lower");
    r.threshold = numf(j, "threshold");
    r.grad_G_norm = numf(j, "grad_G_norm");
    r.residuals = numsf(j, "residuals");
    r.bound = numf(j, "bound");
    r.drifts = numsf(j, "drifts");
    r.drift_bound = numf(j, "drift_bound");
    r.min_slack = numf(j, "min_slack");
    return r;
}

Json to_json(const CounterexampleFit& f) {
    return Json{{"kind", to_string(f.kind)},
                {"predicted_slope", num(f.predicted)},
                {"slope", num(f.slope)},
                {"r_squared", num(f.r_squared)},
                {"law_holds", f.law_holds},
                {"t", nums(f.t)},
                {"grad_norm", nums(f.grad_norm)},
                {"dist_upper", nums(f.dist_upper)},
                {"dist_lower", nums(f.dist_lower)}};
}

CounterexampleFit counterexample_from_json(const Json& j) {
    CounterexampleFit f;
    f.kind = parse_counterexample_kind(getf<std::string>(j, "kind"));
    f.predicted = numf(j, "predicted_slope");
    f.slope = numf(j, "slope");
    f.r_squared = numf(j, "r_squared");
    f.law_holds = getf<bool>(j, "law_holds");
    f.t = numsf(j, "t");
    f.grad_norm = numsf(j, "grad_norm");
    f.dist_upper = numsf(j, "dist_upper");
    f.dist_lower = numsf(j, "dist_lower");
    return f;
}

Json to_json(const FirstOrderReport& r) {
    return Json{{"tail_steps", r.tail_steps},
                {"kappa1c", num(r.kappa1c)},
                {"decrease_held", r.decrease_held},
                {"kappa3c", num(r.kappa3c)},
                {"kappa3c_min", num(r.kappa3c_min)},
                {"safeguard_held", r.safeguard_held},
                {"kappa2c", num(r.kappa2c)},
                {"cost_to_go_points", r.cost_to_go_points},
                {"F_star", num(r.F_star)},
                {"cost_to_go_checked", r.cost_to_go_checked}};
}

FirstOrderReport first_order_from_json(const Json& j) {
    FirstOrderReport r;
    r.tail_steps = getf<int>(j, "tail_steps");
    r.kappa1c = numf(j, "kappa1c");
    r.decrease_held = getf<bool>(j, "decrease_held");
    r.kappa3c = numf(j, "kappa3c");
    r.kappa3c_min = numf(j, "kappa3c_min");
    r.safeguard_held = getf<bool>(j, "safeguard_held");
    r.kappa2c = numf(j, "kappa2c");
    r.cost_to_go_points = getf<int>(j, "cost_to_go_points");
    r.F_star = numf(j, "F_star");
    r.cost_to_go_checked = getf<bool>(j, "cost_to_go_checked");
    return r;
}

Json to_json(const RateFit& f) {
    return Json{{"rate", num(f.rate)},
                {"slope", num(f.slope)},
                {"r_squared", num(f.r_squared)},
                {"points", f.points},
                {"trimmed", f.trimmed}};
}

RateFit rate_fit_from_json(const Json& j) {
    RateFit f;
    f.rate = numf(j, "rate");
    f.slope = numf(j, "slope");
    f.r_squared = numf(j, "r_squared");
    f.points = getf<int>(j, "points");
    f.trimmed = getf<int>(j, "trimmed");
    return f;
}

Json to_json(const std::vector<Section4Row>& rows) {
    Json a = Json::array();
    for (const auto& r : rows)
        a.push_back(Json{{"L", r.L},
                         {"center", r.center},
                         {"F_center", num(r.F_center)},
                         {"F_global", num(r.F_global)},
                         {"F_end", num(r.F_end)},
                         {"rate", num(r.rate)},
                         {"r_squared", num(r.r_squared)},
                         {"iterations", r.iterations},
                         {"reason", to_string(r.reason)}});
    return a;
}

std::vector<Section4Row> section4_from_json(const Json& j) {
    std::vector<Section4Row> rows;
    for (const auto& x : j) {
        Section4Row r;
        r.L = getf<int>(x, "L");
        r.center = getf<std::string>(x, "center");
        r.F_center = numf(x, "F_center");
        r.F_global = numf(x, "F_global");
        r.F_end = numf(x, "F_end");
        r.rate = numf(x, "rate");
        r.r_squared = numf(x, "r_squared");
        r.iterations = getf<long>(x, "iterations");
        r.reason = parse_termination(getf<std::string>(x, "reason"));
        rows.push_back(r);
    }
    return rows;
}

Json trajectory_summary(const Trajectory& t) {
    return Json{{"iterations", t.steps()},
                {"reason", to_string(t.reason)},
                {"lr", num(t.lr)},
                {"F_initial", num(t.F.empty() ? kUnset : t.F.front())},
                {"F_final", num(t.F.empty() ? kUnset : t.F.back())},
                {"grad_sq_final", num(t.grad_sq.empty() ? kUnset : t.grad_sq.back())},
                {"monotone", t.monotone},
                {"stored_iterates", t.iterates.size()},
                {"wall_seconds", num(t.wall_seconds)}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json parse(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what());
    }
}

Json read_json_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw ParseError("cannot open " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return Json::parse(ss.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(p.string() + ": " + e.what());
    }
}

void write_text_file(const std::filesystem::path& p, const std::string& text) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

const std::vector<std::string>& sample_columns() {
    static const std::vector<std::string> c{"radius", "dist_lower", "dist_upper", "grad_norm", "F",
                                            "ratio",  "F_gap",      "in_regime",  "profile_id"};
    return c;
}

const std::vector<std::string>& trajectory_columns() {
    static const std::vector<std::string> c{"iter", "F", "grad_sq"};
    return c;
}

const std::vector<std::string>& section4_columns() {
    static const std::vector<std::string> c{"L",    "center",    "F_center",   "F_global", "F_end",
                                            "rate", "r_squared", "iterations", "reason"};
    return c;
}

const std::vector<std::string>& counterexample_columns() {
    static const std::vector<std::string> c{"t", "dist_lower", "dist_upper", "grad_norm"};
    return c;
}

void write_samples_csv(std::ostream& os, const VerificationReport& r) {
    csv_row(os, sample_columns());
    for (const auto& s : r.samples)
        csv_row(os, std::vector<std::string>{format_double(s.radius), format_double(s.dist_lower),
                                             format_double(s.dist_upper), format_double(s.grad_norm),
                                             format_double(s.F), format_double(s.ratio), format_double(s.F_gap),
                                             s.in_regime ? "1" : "0", std::to_string(s.profile_id)});
}

void write_trajectory_csv(std::ostream& os, const Trajectory& t) {
    csv_row(os, trajectory_columns());
    for (std::size_t k = 0; k < t.F.size(); ++k)
        csv_row(os, std::vector<std::string>{std::to_string(k), format_double(t.F[k]), format_double(t.grad_sq[k])});
}

void write_section4_csv(std::ostream& os, const std::vector<Section4Row>& rows) {
    csv_row(os, section4_columns());
    for (const auto& r : rows)
        csv_row(os, std::vector<std::string>{std::to_string(r.L), r.center, format_double(r.F_center),
                                             format_double(r.F_global), format_double(r.F_end),
                                             format_double(r.rate), format_double(r.r_squared),
                                             std::to_string(r.iterations), to_string(r.reason)});
}

void write_counterexample_csv(std::ostream& os, const CounterexampleFit& f) {
    csv_row(os, counterexample_columns());
    for (std::size_t i = 0; i < f.t.size(); ++i)
        csv_row(os, std::vector<std::string>{format_double(f.t[i]), format_double(f.dist_lower[i]),
                                             format_double(f.dist_upper[i]), format_double(f.grad_norm[i])});
}

void write_ledger_csv(std::ostream& os, const EbLedger& l) {
    std::vector<std::string> names, values;
    for (const auto& [k, v] : l.entries()) {
        names.push_back(k);
        values.push_back(format_double(v));
    }
    csv_row(os, names);
    csv_row(os, values);
}

} // namespace dlneb::io
