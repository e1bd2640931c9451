#pragma once

#include "dlneb/io.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dlneb {

// Y = sd * gaussian (seed defaults to the "instance" substream), diag(values), or a
// whitespace/comma separated text matrix with d_L rows and d_0 columns.
struct YSource {
    enum class Kind { Gaussian, Diagonal, File };
    Kind kind = Kind::Gaussian;
    std::optional<std::uint64_t> seed;
    double sd = 1.0;
    std::vector<double> values;
    std::filesystem::path path;
};

struct InstanceConfig {
    std::vector<int> dims;
    std::vector<double> lambdas; // one per layer; a scalar "lambda" is broadcast
    YSource y;
    double grouping_tol = 1e-8;
};

// Which critical point a sweep or a near-critical init is centred on.
struct CenterChoice {
    std::string kind = "optimal"; // optimal | suboptimal | zero | profile
    int profile = -1;             // index into the enumeration when kind = profile
};

struct SweepBlock {
    RadiusSweepConfig sweep;
    CenterChoice center;
    bool seed_set = false;
};

struct TrainBlock {
    TrainConfig train;
    ModelKind kind = ModelKind::Linear;
    Activation activation = Activation::Identity;
    int inputs = 0; // N > 0 draws X (d_0 x N) and a matching Y instead of the instance target
    CenterChoice center;
    double tail_fraction = 0.5;
    bool seed_set = false;
};

struct CounterexampleBlock {
    CounterexampleKind kind = CounterexampleKind::L2LambdaEqY2;
    double y = 2.0;
    int L = 0;
    int d = 1;
    std::vector<double> ts = geometric_radii(1e-3, 1e-1, 9);
};

struct ExperimentConfig {
    std::uint64_t seed = 0;
    std::optional<InstanceConfig> instance;
    SweepBlock sweep;
    TrainBlock train;
    CounterexampleBlock counterexample;
    Section4Config section4;
    std::filesystem::path output_dir = "dlneb-out";
    std::filesystem::path base_dir = "."; // relative file paths resolve against this

    // Unknown keys at any level raise io::ParseError.
    static ExperimentConfig from_json(const io::Json& j, const std::filesystem::path& base_dir = ".");
    static ExperimentConfig load(const std::filesystem::path& file);

    // Named substream of the config seed ("instance", "params", "sweep", "init", ...).
    std::uint64_t stream(const std::string& name) const;

    Instance build_instance() const;
    // DLNEB_OUTPUT_DIR, when set and non-empty, replaces output_dir.
    std::filesystem::path output_path() const;
};

Matrix read_matrix_file(const std::filesystem::path& p);

// Resolves a CenterChoice. Random orthogonal parameters come from `params_seed`.
CriticalCenter resolve_center(const Instance& inst, const ProfileEnumeration& profiles, const CenterChoice& c,
                              std::uint64_t params_seed);

} // namespace dlneb
