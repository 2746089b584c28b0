#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "degenlab/app.hpp"
#include "degenlab/error.hpp"

using namespace degenlab;
using app::Json;
namespace fs = std::filesystem;

namespace {

const Json kMesh = Json::parse(R"({"lengths": [1, 1], "cells": [8, 8]})");
const Json kWeight = Json::parse(R"({"s": 0.75})");
const Json kPots = Json::parse(R"({"V": {"family": "gaussian-bump", "center": [0.5, 0.5], "width": 0.2}, "q": 0.5})");

std::string config_path(const std::string& name) { return std::string(DEGENLAB_EXAMPLES_DIR) + "/" + name; }

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("degenlab-test-app-" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string invalid_message(const Json& j) {
    try {
        app::parse_config(j);
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ConfigInvalid);
        return e.what();
    }
    return "";
}

}  // namespace

TEST(App, CacheKeyIgnoresKeyOrderAndDefaults) {
    const Json reordered = Json::parse(R"({"q": 0.5, "V": {"width": 0.2, "center": [0.5, 0.5], "family": "gaussian-bump", "amplitude": 1}})");
    const Json meshWithDefaults = Json::parse(R"({"cells": [8, 8], "lengths": [1.0, 1.0], "grading": 0.7, "tags": "default"})");
    const std::string k = app::cache_key(kMesh, kWeight, kPots);
    EXPECT_EQ(k, app::cache_key(meshWithDefaults, kWeight, reordered));
    EXPECT_EQ(k.size(), 64u);
    EXPECT_NE(k, app::cache_key(kMesh, Json::parse(R"({"s": 0.7})"), kPots));
    Json p2 = kPots;
    p2["q"] = 0.51;
    EXPECT_NE(k, app::cache_key(kMesh, kWeight, p2));
    // frozen: a change here invalidates every existing cache
    EXPECT_EQ(k, "90cc41c3bb55ddcb72228b7042edc89d962c539fc54f57e3f4c5f58094901c80");
}

TEST(App, InvalidConfigsNameTheField) {
    Json base = Json::parse(R"({"command": "forward", "mesh": {"lengths": [1, 1], "cells": [4, 4]}})");
    EXPECT_NO_THROW(app::parse_config(base));
    Json j = base;
    j["command"] = "nope";
    EXPECT_NE(invalid_message(j).find("command"), std::string::npos);
    j = base;
    j["mesh"]["cells"] = Json::array({4});
    EXPECT_NE(invalid_message(j).find("mesh.cells"), std::string::npos);
    j = base;
    j["weight"] = {{"s", 0.75}, {"colour", 1}};
    EXPECT_NE(invalid_message(j).find("weight.colour"), std::string::npos);
    j = base;
    j["potentials"] = {{"V", {{"family", "gaussian-bump"}, {"width", -1.0}, {"center", {0.5, 0.5}}}}};
    EXPECT_NE(invalid_message(j).find("potentials.V"), std::string::npos);
    j = base;
    j["checks"] = {{"residual", "small"}};
    EXPECT_NE(invalid_message(j).find("checks.residual"), std::string::npos);
    j = base;
    j["extra"] = 1;
    EXPECT_NE(invalid_message(j).find("extra"), std::string::npos);
}

TEST(App, ConfigRoundTrip) {
    const app::ExperimentConfig c = app::load_config(config_path("alessandrini-identical.json"));
    const app::ExperimentConfig d = app::parse_config(app::to_json(c));
    EXPECT_EQ(app::to_json(c), app::to_json(d));
    EXPECT_EQ(c.command, "alessandrini");
    EXPECT_EQ(app::num_cases(c), 1);
}

TEST(App, CasesReplaceSectionsAndMergeChecks) {
    const Json j = Json::parse(R"({"command": "forward", "mesh": {"lengths": [1, 1], "cells": [4, 4], "grading": 0.5},
        "params": {"f2": 1, "reference": 1}, "checks": {"residual": 1e-8},
        "cases": [{"name": "a"}, {"name": "b", "mesh": {"lengths": [1, 1], "cells": [6, 6]}, "checks": {"maxDeviation": 1e-9}}]})");
    const app::ExperimentConfig c = app::parse_config(j);
    ASSERT_EQ(app::num_cases(c), 2);
    const Json b = app::resolve_case(c, 1);
    EXPECT_FALSE(b["mesh"].contains("grading"));
    EXPECT_EQ(b["checks"]["residual"], 1e-8);
    EXPECT_EQ(b["checks"]["maxDeviation"], 1e-9);
    EXPECT_EQ(b["params"]["f2"], 1);
}

TEST(App, ForwardConstantExampleRuns) {
    const fs::path out = scratch("forward");
    app::RunOptions o;
    o.outDir = out.string();
    o.noCache = true;
    const app::RunManifest m = app::run_file(config_path("forward-constant.json"), o);
    EXPECT_TRUE(m.passed());
    EXPECT_TRUE(fs::exists(out / "manifest.json"));
    EXPECT_TRUE(fs::exists(out / "u.csv"));
    // manifest digests describe the files on disk
    const Json mj = Json::parse(slurp(out / "manifest.json"));
    EXPECT_EQ(mj["configDigest"], m.configDigest);
    for (const app::Artifact& a : m.artifacts) EXPECT_EQ(fs::file_size(out / a.path), a.bytes);
    // deterministic reports
    const std::string first = slurp(out / "u.csv");
    const app::RunManifest again = app::run_file(config_path("forward-constant.json"), o);
    EXPECT_EQ(first, slurp(out / "u.csv"));
    EXPECT_EQ(m.configDigest, again.configDigest);
    ASSERT_EQ(m.artifacts.size(), again.artifacts.size());
    for (std::size_t i = 0; i < m.artifacts.size(); ++i) EXPECT_EQ(m.artifacts[i].sha256, again.artifacts[i].sha256);
    fs::remove_all(out);
}

TEST(App, IdenticalPotentialsGiveZeroAlessandriniResidual) {
    const fs::path out = scratch("alessandrini");
    app::RunOptions o;
    o.outDir = out.string();
    const app::RunManifest m = app::run_file(config_path("alessandrini-identical.json"), o);
    ASSERT_FALSE(m.checks.empty());
    EXPECT_LT(m.checks[0].value, 1e-12);
    EXPECT_TRUE(m.passed());
    fs::remove_all(out);
}

TEST(App, UnresolvedCGOFrequencyIsAnError) {
    const fs::path out = scratch("cgo");
    app::RunOptions o;
    o.outDir = out.string();
    try {
        app::run_file(config_path("cgo-decay-unresolved.json"), o);
        FAIL() << "no error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::UnresolvedOscillation);
    }
    fs::remove_all(out);
}

TEST(App, SeedOverrideChangesDigest) {
    const app::ExperimentConfig c = app::load_config(config_path("forward-constant.json"));
    const fs::path out = scratch("seed");
    app::RunOptions o;
    o.outDir = out.string();
    o.noCache = true;
    const std::string d1 = app::run(c, o).configDigest;
    o.seed = 99;
    const std::string d2 = app::run(c, o).configDigest;
    EXPECT_NE(d1, d2);
    fs::remove_all(out);
}

TEST(App, UnknownCheckIsRejected) {
    Json j = app::to_json(app::load_config(config_path("forward-constant.json")));
    j["checks"]["slopeL2"] = 0.0;
    const fs::path out = scratch("unknown-check");
    app::RunOptions o;
    o.outDir = out.string();
    try {
        app::run(app::parse_config(j), o);
        FAIL() << "no error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ConfigInvalid);
        EXPECT_NE(std::string(e.what()).find("slopeL2"), std::string::npos);
    }
    fs::remove_all(out);
}
