#include "dlneb/config.hpp"

#include "dlneb/rng.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>

using namespace dlneb;
using io::Json;

namespace {

Json minimal() { return io::parse(R"({"instance": {"dims": [2, 3, 2], "lambda": 0.1}})"); }

} // namespace

TEST(Config, FullDocument) {
    const auto j = io::parse(R"({
      "seed": 9,
      "output_dir": "runs/a",
      "instance": {"dims": [3, 4, 2], "lambdas": [0.1, 0.2], "Y": {"source": "gaussian", "sd": 2.0}},
      "sweep": {"radii": {"lo": 1e-4, "hi": 1e-2, "n": 3}, "samples_per_radius": 5, "mode": "tangent-removed",
                "center": 2, "distance": {"iters": 50}},
      "train": {"lr": 0.01, "max_iters": 10, "model": "nonlinear", "activation": "relu", "inputs": 7,
                "init": "gaussian", "log_stride": 2},
      "counterexample": {"kind": "l3", "y": 1.5, "L": 4, "t": [0.01, 0.02]},
      "section4": {"depths": [2], "max_iters": 100}
    })");
    const auto c = ExperimentConfig::from_json(j);
    EXPECT_EQ(c.seed, 9u);
    EXPECT_EQ(c.output_dir, "runs/a");
    ASSERT_TRUE(c.instance);
    EXPECT_EQ(c.instance->lambdas, (std::vector<double>{0.1, 0.2}));
    EXPECT_EQ(c.instance->y.sd, 2.0);
    ASSERT_EQ(c.sweep.sweep.radii.size(), 3u);
    EXPECT_NEAR(c.sweep.sweep.radii[1], 1e-3, 1e-18);
    EXPECT_EQ(c.sweep.sweep.samples_per_radius, 5);
    EXPECT_EQ(c.sweep.sweep.mode, PerturbationMode::TangentRemoved);
    EXPECT_EQ(c.sweep.center.kind, "profile");
    EXPECT_EQ(c.sweep.center.profile, 2);
    EXPECT_EQ(c.sweep.sweep.distance.iters, 50);
    EXPECT_EQ(c.sweep.sweep.seed, substream(9, "sweep"));
    EXPECT_EQ(c.train.train.seed, substream(9, "init"));
    EXPECT_EQ(c.train.kind, ModelKind::Nonlinear);
    EXPECT_EQ(c.train.activation, Activation::Relu);
    EXPECT_EQ(c.train.inputs, 7);
    EXPECT_EQ(c.counterexample.kind, CounterexampleKind::Lge3PhiPrimeZero);
    EXPECT_EQ(c.counterexample.L, 4);
    EXPECT_EQ(c.counterexample.ts.size(), 2u);
    EXPECT_EQ(c.section4.depths, std::vector<int>{2});
    EXPECT_EQ(c.section4.max_iters, 100);

    const auto inst = c.build_instance();
    EXPECT_EQ(inst.Y.rows(), 2);
    EXPECT_EQ(inst.Y.cols(), 3);
    EXPECT_EQ(inst.Y, gaussian_matrix(2, 3, substream(9, "instance"), 2.0));
}

TEST(Config, DefaultsFromSpecBlocks) {
    const auto c = ExperimentConfig::from_json(io::parse("{}"));
    EXPECT_FALSE(c.instance);
    EXPECT_EQ(c.sweep.sweep.radii.size(), 9u);
    EXPECT_EQ(c.sweep.sweep.samples_per_radius, 64);
    EXPECT_EQ(c.section4.depths, (std::vector<int>{2, 4, 6}));
    EXPECT_THROW(c.build_instance(), io::ParseError);
}

TEST(Config, UnknownKeysRejectedAtEveryLevel) {
    for (const char* doc : {R"({"seeed": 1})", R"({"instance": {"dims": [1,1,1], "lambda": 1, "width": 3}})",
                            R"({"instance": {"dims": [1,1,1], "lambda": 1, "Y": {"source": "diagonal", "vals": [1]}}})",
                            R"({"sweep": {"radius": [0.1]}})", R"({"sweep": {"distance": {"iter": 3}}})",
                            R"({"sweep": {"radii": {"lo": 1e-3, "hi": 1e-1, "count": 3}}})",
                            R"({"train": {"learning_rate": 0.1}})", R"({"counterexample": {"k": "l2"}})",
                            R"({"section4": {"depth": [2]}})"})
        EXPECT_THROW(ExperimentConfig::from_json(io::parse(doc)), io::ParseError) << doc;
}

TEST(Config, ValueErrors) {
    for (const char* doc : {R"({"instance": {"dims": [1,1,1]}})",
                            R"({"instance": {"dims": [1,1,1], "lambda": 1, "lambdas": [1, 1]}})",
                            R"({"instance": {"dims": [1,1,1], "lambdas": [1]}})", R"({"instance": {"dims": [1,1], "lambda": 1}})",
                            R"({"instance": {"dims": [1,1,1], "lambda": 1, "Y": {"source": "uniform"}}})",
                            R"({"sweep": {"radii": [0.1, 0.01]}})", R"({"sweep": {"mode": "random"}})",
                            R"({"sweep": {"center": "best"}})", R"({"sweep": {"center": -1}})",
                            R"({"train": {"lr": -1}})", R"({"seed": "seven"})"})
        EXPECT_THROW(ExperimentConfig::from_json(io::parse(doc)), io::ParseError) << doc;
    EXPECT_THROW(io::parse("{\"seed\": "), io::ParseError);
}

TEST(Config, TargetSources) {
    auto j = minimal();
    j["instance"]["Y"] = io::parse(R"({"source": "diagonal", "values": [3, 1]})");
    auto inst = ExperimentConfig::from_json(j).build_instance();
    EXPECT_EQ(inst.Y, (Matrix(2, 2) << 3, 0, 0, 1).finished());

    j["instance"]["Y"]["values"] = {1, 2, 3};
    EXPECT_THROW(ExperimentConfig::from_json(j).build_instance(), io::ParseError);

    const auto dir = std::filesystem::temp_directory_path() / "dlneb_config_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream f(dir / "y.txt");
        f << "# target\n1.5, -2\n0.25 4e-1\n";
    }
    j["instance"]["Y"] = io::parse(R"({"source": "file", "path": "y.txt"})");
    inst = ExperimentConfig::from_json(j, dir).build_instance();
    EXPECT_EQ(inst.Y, (Matrix(2, 2) << 1.5, -2, 0.25, 0.4).finished());
    {
        std::ofstream f(dir / "y.txt");
        f << "1 2\n3\n";
    }
    EXPECT_THROW(ExperimentConfig::from_json(j, dir).build_instance(), io::ParseError);
    j["instance"]["Y"]["path"] = "missing.txt";
    EXPECT_THROW(ExperimentConfig::from_json(j, dir).build_instance(), io::ParseError);
}

TEST(Config, SeedsFlowThroughNamedSubstreams) {
    auto j = minimal();
    j["seed"] = 1;
    const auto a = ExperimentConfig::from_json(j);
    j["seed"] = 2;
    const auto b = ExperimentConfig::from_json(j);
    EXPECT_NE(a.build_instance().Y, b.build_instance().Y);
    auto again = minimal();
    again["seed"] = 1;
    EXPECT_EQ(a.build_instance().Y, ExperimentConfig::from_json(again).build_instance().Y);
    EXPECT_NE(a.stream("sweep"), a.stream("init"));
    // An explicit Y seed decouples the target from the config seed.
    j["instance"]["Y"] = io::parse(R"({"source": "gaussian", "seed": 5})");
    const auto c = ExperimentConfig::from_json(j);
    j["seed"] = 3;
    EXPECT_EQ(c.build_instance().Y, ExperimentConfig::from_json(j).build_instance().Y);
}

TEST(Config, OutputDirectoryOverride) {
    const auto c = ExperimentConfig::from_json(io::parse(R"({"output_dir": "cfg-dir"})"));
    ::unsetenv("DLNEB_OUTPUT_DIR");
    EXPECT_EQ(c.output_path(), "cfg-dir");
    ::setenv("DLNEB_OUTPUT_DIR", "/tmp/env-dir", 1);
    EXPECT_EQ(c.output_path(), "/tmp/env-dir");
    ::setenv("DLNEB_OUTPUT_DIR", "", 1);
    EXPECT_EQ(c.output_path(), "cfg-dir");
    ::unsetenv("DLNEB_OUTPUT_DIR");
}

TEST(Config, CenterResolution) {
    const auto inst = ExperimentConfig::from_json(minimal()).build_instance();
    const auto profiles = enumerate_sigma_profiles(inst.spec, inst.reg, inst.L());
    const auto opt = resolve_center(inst, profiles, {"optimal", -1}, 4);
    const auto best = optimal_profile(inst.spec, inst.reg, 2);
    EXPECT_EQ(opt.profile.sigma, best.sigma);
    EXPECT_LT(grad_F(opt.W, inst.Y, inst.reg).norm(), 1e-10);
    EXPECT_EQ(resolve_center(inst, profiles, {"zero", -1}, 4).W.norm(), 0.0);
    EXPECT_EQ(resolve_center(inst, profiles, {"profile", 1}, 4).profile.sigma, profiles.profiles[1].sigma);
    EXPECT_THROW(resolve_center(inst, profiles, {"profile", 1000}, 4), DomainError);
}
