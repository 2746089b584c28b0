#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "degenlab/mesh.hpp"
#include "degenlab/potentials.hpp"
#include "degenlab/weight.hpp"

namespace degenlab::app {

using Json = nlohmann::json;

inline constexpr const char* kToolVersion = "degenlab 0.3.0";

// Validated experiment description.  `raw` is the config object itself; the
// scalar members mirror its top-level keys.
struct ExperimentConfig {
    Json raw;
    std::string command;
    std::string name;
    std::uint64_t seed = 1;
    int threads = 1;
    bool cache = true;
};

const std::vector<std::string>& commands();

// Throws ConfigInvalid naming the offending field.
ExperimentConfig parse_config(const Json& j);
ExperimentConfig load_config(const std::string& path);
Json to_json(const ExperimentConfig& c);

// Case i of the config: the top-level object with the keys of cases[i]
// replacing its own, except "params" and "checks", which are merged key by key.  A config without cases has one.
int num_cases(const ExperimentConfig& c);
Json resolve_case(const ExperimentConfig& c, int i);

// Section parsers.  Mesh: {"lengths": [...], "cells": [...], "grading": 0.7,
// "tags": "default"}.  Weight: {"s": 0.5, "mode": "Vertical", "clamp": 0}.
// Fields: {"family": "constant" | "gaussian-bump" | "cosine-mode" |
// "random-smooth" | "sum", ...}; vector fields: {"family": "curl-bump", ...}.
Mesh build_mesh(const Json& spec);
WeightSpec parse_weight(const Json& spec);
RealField parse_field(const Json& spec, const Point& extents, int dim, std::uint64_t seed);
VectorField parse_vector_field(const Json& spec);
Potentials parse_potentials(const Json& spec, const Point& extents, int dim, std::uint64_t seed);

// Mesh, weight and potential specs with defaults filled in, keys sorted and
// numbers stored as doubles.  Unseeded random-smooth fields take `seed`.
Json canonical_inputs(const Json& mesh, const Json& weight, const Json& potentials, std::uint64_t seed = 1);
std::string cache_key(const Json& mesh, const Json& weight, const Json& potentials, std::uint64_t seed = 1);

struct Check {
    std::string name;
    std::string relation;  // "<=", "<", ">="
    double value = 0.0;
    double threshold = 0.0;
    bool passed = false;
};

struct Artifact {
    std::string path;  // relative to the output directory
    std::string sha256;
    std::uintmax_t bytes = 0;
};

struct RunManifest {
    std::string name;
    std::string command;
    std::string configDigest;
    std::string toolVersion = kToolVersion;
    std::vector<std::string> cacheKeys;
    double seconds = 0.0;
    std::vector<Artifact> artifacts;
    std::vector<Check> checks;
    Json summary;

    bool passed() const;
    Json to_json() const;
};

struct RunOptions {
    std::string outDir = "out";
    std::optional<int> threads;
    bool noCache = false;
    std::optional<std::uint64_t> seed;
    std::string cacheDir;  // empty: default_cache_dir()
};

// Runs the experiment, writes reports and manifest.json into outDir.
RunManifest run(const ExperimentConfig& config, const RunOptions& opts);
RunManifest run_file(const std::string& configPath, const RunOptions& opts);

}  // namespace degenlab::app
