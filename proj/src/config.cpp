#include "dlneb/config.hpp"

#include "dlneb/rng.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace dlneb {

using io::Json;
using io::ParseError;

namespace {

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ParseError(where + ": expected an object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw ParseError(where + ": unknown key '" + k + "'");
}

template <class T>
T get(const Json& j, const std::string& key, const std::string& where) {
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(where + "." + key + ": " + e.what());
    }
}

template <class T>
void maybe(const Json& j, const std::string& key, T& out, const std::string& where) {
    if (j.contains(key)) out = get<T>(j, key, where);
}

// Either an explicit list or {"lo", "hi", "n"} for a geometric grid.
std::vector<double> grid(const Json& j, const std::string& where) {
    if (j.is_array()) {
        try {
            return j.get<std::vector<double>>();
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(where + ": " + e.what());
        }
    }
    check_keys(j, {"lo", "hi", "n"}, where);
    try {
        return geometric_radii(get<double>(j, "lo", where), get<double>(j, "hi", where), get<int>(j, "n", where));
    } catch (const DomainError& e) {
        throw ParseError(where + ": " + e.what());
    }
}

CenterChoice parse_center(const Json& j, const std::string& where) {
    CenterChoice c;
    if (j.is_number_integer()) {
        c.kind = "profile";
        c.profile = j.get<int>();
        if (c.profile < 0) throw ParseError(where + ": profile index must be nonnegative");
        return c;
    }
    if (!j.is_string()) throw ParseError(where + ": expected \"optimal\", \"suboptimal\", \"zero\" or a profile index");
    c.kind = j.get<std::string>();
    if (c.kind != "optimal" && c.kind != "suboptimal" && c.kind != "zero")
        throw ParseError(where + ": unknown center '" + c.kind + "'");
    return c;
}

YSource y_source(const Json& j) {
    const std::string w = "instance.Y";
    YSource y;
    const auto src = get<std::string>(j, "source", w);
    if (src == "gaussian") {
        check_keys(j, {"source", "seed", "sd"}, w);
        if (j.contains("seed")) y.seed = get<std::uint64_t>(j, "seed", w);
        maybe(j, "sd", y.sd, w);
    } else if (src == "diagonal") {
        check_keys(j, {"source", "values"}, w);
        y.kind = YSource::Kind::Diagonal;
        y.values = get<std::vector<double>>(j, "values", w);
    } else if (src == "file") {
        check_keys(j, {"source", "path"}, w);
        y.kind = YSource::Kind::File;
        y.path = get<std::string>(j, "path", w);
    } else {
        throw ParseError(w + ": unknown source '" + src + "' (gaussian, diagonal, file)");
    }
    return y;
}

InstanceConfig parse_instance(const Json& j) {
    const std::string w = "instance";
    check_keys(j, {"dims", "lambda", "lambdas", "Y", "grouping_tol"}, w);
    InstanceConfig c;
    c.dims = get<std::vector<int>>(j, "dims", w);
    if (c.dims.size() < 3) throw ParseError("instance.dims: need at least three widths (L >= 2)");
    const std::size_t L = c.dims.size() - 1;
    if (j.contains("lambda") == j.contains("lambdas")) throw ParseError("instance: give exactly one of lambda, lambdas");
    if (j.contains("lambda")) c.lambdas.assign(L, get<double>(j, "lambda", w));
    else c.lambdas = get<std::vector<double>>(j, "lambdas", w);
    if (c.lambdas.size() != L) throw ParseError("instance.lambdas: need one value per layer");
    if (j.contains("Y")) c.y = y_source(j.at("Y"));
    maybe(j, "grouping_tol", c.grouping_tol, w);
    return c;
}

void parse_sweep(const Json& j, SweepBlock& b) {
    const std::string w = "sweep";
    check_keys(j, {"radii", "samples_per_radius", "seed", "mode", "singular_index", "expect_degenerate", "center",
                   "distance"},
               w);
    auto& s = b.sweep;
    if (j.contains("radii")) s.radii = grid(j.at("radii"), "sweep.radii");
    maybe(j, "samples_per_radius", s.samples_per_radius, w);
    if (j.contains("seed")) {
        s.seed = get<std::uint64_t>(j, "seed", w);
        b.seed_set = true;
    }
    if (j.contains("mode")) s.mode = io::parse_mode(get<std::string>(j, "mode", w));
    maybe(j, "singular_index", s.singular_index, w);
    maybe(j, "expect_degenerate", s.expect_degenerate, w);
    if (j.contains("center")) b.center = parse_center(j.at("center"), "sweep.center");
    if (j.contains("distance")) {
        const auto& d = j.at("distance");
        check_keys(d, {"iters", "tol"}, "sweep.distance");
        maybe(d, "iters", s.distance.iters, "sweep.distance");
        maybe(d, "tol", s.distance.tol, "sweep.distance");
    }
    try {
        s.validate();
    } catch (const DomainError& e) {
        throw ParseError(std::string("sweep: ") + e.what());
    }
}

void parse_train(const Json& j, TrainBlock& b) {
    const std::string w = "train";
    check_keys(j, {"lr", "max_iters", "grad_sq_tol", "fval_change_tol", "seed", "init", "init_scale", "log_stride",
                   "model", "activation", "inputs", "center", "tail_fraction"},
               w);
    auto& t = b.train;
    maybe(j, "lr", t.lr, w);
    maybe(j, "max_iters", t.max_iters, w);
    maybe(j, "grad_sq_tol", t.grad_sq_tol, w);
    maybe(j, "fval_change_tol", t.fval_change_tol, w);
    if (j.contains("seed")) {
        t.seed = get<std::uint64_t>(j, "seed", w);
        b.seed_set = true;
    }
    if (j.contains("init")) t.init = io::parse_init(get<std::string>(j, "init", w));
    maybe(j, "init_scale", t.init_scale, w);
    maybe(j, "log_stride", t.log_stride, w);
    if (j.contains("model")) b.kind = io::parse_model_kind(get<std::string>(j, "model", w));
    if (j.contains("activation")) b.activation = io::parse_activation(get<std::string>(j, "activation", w));
    maybe(j, "inputs", b.inputs, w);
    if (b.inputs < 0) throw ParseError("train.inputs must be nonnegative");
    if (j.contains("center")) b.center = parse_center(j.at("center"), "train.center");
    maybe(j, "tail_fraction", b.tail_fraction, w);
    try {
        t.validate();
    } catch (const DomainError& e) {
        throw ParseError(std::string("train: ") + e.what());
    }
}

void parse_counterexample(const Json& j, CounterexampleBlock& b) {
    const std::string w = "counterexample";
    check_keys(j, {"kind", "y", "L", "d", "t"}, w);
    if (j.contains("kind")) b.kind = io::parse_counterexample_kind(get<std::string>(j, "kind", w));
    maybe(j, "y", b.y, w);
    maybe(j, "L", b.L, w);
    maybe(j, "d", b.d, w);
    if (j.contains("t")) b.ts = grid(j.at("t"), "counterexample.t");
}

void parse_section4(const Json& j, Section4Config& c) {
    const std::string w = "section4";
    check_keys(j, {"d0", "dL", "hidden", "lambda_l", "lr", "max_iters", "init_scale", "tail_fraction", "y_seed",
                   "init_seed", "depths"},
               w);
    maybe(j, "d0", c.d0, w);
    maybe(j, "dL", c.dL, w);
    maybe(j, "hidden", c.hidden, w);
    maybe(j, "lambda_l", c.lambda_l, w);
    maybe(j, "lr", c.lr, w);
    maybe(j, "max_iters", c.max_iters, w);
    maybe(j, "init_scale", c.init_scale, w);
    maybe(j, "tail_fraction", c.tail_fraction, w);
    maybe(j, "y_seed", c.y_seed, w);
    maybe(j, "init_seed", c.init_seed, w);
    maybe(j, "depths", c.depths, w);
}

} // namespace

ExperimentConfig ExperimentConfig::from_json(const Json& j, const std::filesystem::path& base_dir) {
    check_keys(j, {"seed", "output_dir", "instance", "sweep", "train", "counterexample", "section4"}, "config");
    ExperimentConfig c;
    c.base_dir = base_dir;
    maybe(j, "seed", c.seed, "config");
    if (j.contains("output_dir")) c.output_dir = get<std::string>(j, "output_dir", "config");
    if (j.contains("instance")) c.instance = parse_instance(j.at("instance"));
    if (j.contains("sweep")) parse_sweep(j.at("sweep"), c.sweep);
    if (j.contains("train")) parse_train(j.at("train"), c.train);
    if (j.contains("counterexample")) parse_counterexample(j.at("counterexample"), c.counterexample);
    if (j.contains("section4")) parse_section4(j.at("section4"), c.section4);
    if (!c.sweep.seed_set) c.sweep.sweep.seed = c.stream("sweep");
    if (!c.train.seed_set) c.train.train.seed = c.stream("init");
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& file) {
    return from_json(io::read_json_file(file), file.has_parent_path() ? file.parent_path() : ".");
}

std::uint64_t ExperimentConfig::stream(const std::string& name) const { return substream(seed, name); }

Matrix read_matrix_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw ParseError("cannot open matrix file " + p.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        for (char& ch : line)
            if (ch == ',') ch = ' ';
        std::istringstream ls(line);
        std::vector<double> row;
        std::string tok;
        while (ls >> tok) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(tok, &used));
                if (used != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw ParseError(p.string() + ": bad number '" + tok + "'");
            }
        }
        if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(p.string() + ": empty matrix");
    Matrix M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size()) throw ParseError(p.string() + ": ragged rows");
        for (std::size_t k = 0; k < rows[i].size(); ++k)
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
    return M;
}

Instance ExperimentConfig::build_instance() const {
    if (!instance) throw ParseError("config has no instance block");
    const auto& ic = *instance;
    const int d0 = ic.dims.front(), dL = ic.dims.back();
    Matrix Y;
    switch (ic.y.kind) {
    case YSource::Kind::Gaussian:
        Y = gaussian_matrix(dL, d0, ic.y.seed ? *ic.y.seed : stream("instance"), ic.y.sd);
        break;
    case YSource::Kind::Diagonal:
        if (static_cast<int>(ic.y.values.size()) > std::min(d0, dL))
            throw ParseError("instance.Y: more diagonal values than min(d_0, d_L)");
        Y = Matrix::Zero(dL, d0);
        for (std::size_t i = 0; i < ic.y.values.size(); ++i)
            Y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = ic.y.values[i];
        break;
    case YSource::Kind::File:
        Y = read_matrix_file(ic.y.path.is_absolute() ? ic.y.path : base_dir / ic.y.path);
        if (Y.rows() != dL || Y.cols() != d0) throw ParseError("instance.Y: file matrix must be d_L x d_0");
        break;
    }
    return Instance::make(ic.dims, ic.lambdas, Y, ic.grouping_tol);
}

std::filesystem::path ExperimentConfig::output_path() const {
    if (const char* env = std::getenv("DLNEB_OUTPUT_DIR"); env && *env) return env;
    return output_dir;
}

CriticalCenter resolve_center(const Instance& inst, const ProfileEnumeration& profiles, const CenterChoice& c,
                              std::uint64_t params_seed) {
    const int L = inst.L();
    SigmaProfile p;
    if (c.kind == "optimal") p = optimal_profile(inst.spec, inst.reg, L);
    else if (c.kind == "suboptimal") p = suboptimal_profile(inst.spec, inst.reg, L);
    else if (c.kind == "zero") p = SigmaProfile::zero(inst.dims.d_min());
    else {
        if (c.profile < 0 || c.profile >= static_cast<int>(profiles.profiles.size()))
            throw DomainError("profile index " + std::to_string(c.profile) + " is outside the enumeration (" +
                              std::to_string(profiles.profiles.size()) + " profiles)");
        p = profiles.profiles[static_cast<std::size_t>(c.profile)];
    }
    return make_center(inst, p, sample_random_params(inst.dims, inst.spec, params_seed));
}

} // namespace dlneb
