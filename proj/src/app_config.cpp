#include <algorithm>
#include <fstream>
#include <set>

#include "degenlab/app.hpp"
#include "degenlab/error.hpp"
#include "degenlab/io.hpp"

namespace degenlab::app {

namespace {

[[noreturn]] void invalid(const std::string& where, const std::string& why) {
    throw Error(ErrorKind::ConfigInvalid, "field '" + where + "': " + why);
}

void only_keys(const Json& o, const std::string& where, std::initializer_list<const char*> keys) {
    if (!o.is_object()) invalid(where, "expected an object");
    for (auto it = o.begin(); it != o.end(); ++it) {
        bool known = false;
        for (const char* k : keys) known = known || it.key() == k;
        if (!known) invalid(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
    }
}

std::string join(const std::string& where, const char* key) { return where.empty() ? key : where + "." + key; }

double number(const Json& o, const std::string& where, const char* key, std::optional<double> def = {}) {
    if (!o.contains(key)) {
        if (def) return *def;
        invalid(join(where, key), "missing");
    }
    const Json& v = o.at(key);
    if (!v.is_number()) invalid(join(where, key), "expected a number");
    return v.get<double>();
}

std::vector<double> numbers(const Json& o, const std::string& where, const char* key, std::size_t lo,
                            std::size_t hi) {
    if (!o.contains(key)) invalid(join(where, key), "missing");
    const Json& v = o.at(key);
    if (!v.is_array() || v.size() < lo || v.size() > hi)
        invalid(join(where, key), "expected an array of " + std::to_string(lo) + " to " + std::to_string(hi) +
                                      " numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) invalid(join(where, key), "expected numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

Json point_json(const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(x);
    return a;
}

Point to_point(const Json& a) {
    Point p{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < a.size() && i < 3; ++i) p[i] = a[i].get<double>();
    return p;
}

Json normalize_mesh(const Json& m) {
    const std::string w = "mesh";
    only_keys(m, w, {"lengths", "cells", "grading", "tags"});
    Json out;
    out["lengths"] = point_json(numbers(m, w, "lengths", 2, 3));
    if (!m.contains("cells") || !m["cells"].is_array()) invalid("mesh.cells", "expected an array of integers");
    Json cells = Json::array();
    for (const auto& c : m["cells"]) {
        if (!c.is_number_integer()) invalid("mesh.cells", "expected integers");
        cells.push_back(c.get<long long>());
    }
    if (cells.size() != out["lengths"].size()) invalid("mesh.cells", "length differs from mesh.lengths");
    out["cells"] = cells;
    out["grading"] = number(m, w, "grading", 0.7);
    if (m.contains("tags") && !m["tags"].is_string()) invalid("mesh.tags", "expected a string");
    out["tags"] = m.value("tags", std::string("default"));
    return out;
}

Json normalize_weight(const Json& m) {
    only_keys(m, "weight", {"s", "mode", "clamp"});
    Json out;
    out["s"] = number(m, "weight", "s", 0.5);
    if (m.contains("mode") && !m["mode"].is_string()) invalid("weight.mode", "expected a string");
    out["mode"] = m.value("mode", std::string("Vertical"));
    out["clamp"] = number(m, "weight", "clamp", 0.0);
    return out;
}

Json normalize_field(const Json& f, const std::string& w, std::uint64_t seed) {
    if (f.is_null()) return nullptr;
    if (f.is_number()) {
        Json out;
        out["family"] = "constant";
        out["value"] = f.get<double>();
        return out;
    }
    if (!f.is_object() || !f.contains("family") || !f["family"].is_string())
        invalid(w, "expected a number or an object with a family");
    const std::string fam = f["family"];
    Json out;
    out["family"] = fam;
    if (fam == "constant") {
        only_keys(f, w, {"family", "value"});
        out["value"] = number(f, w, "value");
    } else if (fam == "gaussian-bump") {
        only_keys(f, w, {"family", "amplitude", "center", "width"});
        out["amplitude"] = number(f, w, "amplitude", 1.0);
        out["center"] = point_json(numbers(f, w, "center", 1, 3));
        out["width"] = number(f, w, "width");
        if (!(out["width"].get<double>() > 0.0)) invalid(w + ".width", "must be positive");
    } else if (fam == "cosine-mode") {
        only_keys(f, w, {"family", "amplitude", "wavevector", "phase"});
        out["amplitude"] = number(f, w, "amplitude", 1.0);
        out["wavevector"] = point_json(numbers(f, w, "wavevector", 1, 3));
        out["phase"] = number(f, w, "phase", 0.0);
    } else if (fam == "random-smooth") {
        only_keys(f, w, {"family", "seed", "amplitude", "modes"});
        if (f.contains("seed") && !f["seed"].is_number_unsigned()) invalid(w + ".seed", "expected a non-negative integer");
        out["seed"] = f.value("seed", seed);
        out["amplitude"] = number(f, w, "amplitude", 1.0);
        if (f.contains("modes") && !f["modes"].is_number_integer()) invalid(w + ".modes", "expected an integer");
        out["modes"] = f.value("modes", 4);
    } else if (fam == "sum") {
        only_keys(f, w, {"family", "terms"});
        if (!f.contains("terms") || !f["terms"].is_array()) invalid(w + ".terms", "expected an array of fields");
        Json terms = Json::array();
        for (std::size_t i = 0; i < f["terms"].size(); ++i)
            terms.push_back(normalize_field(f["terms"][i], w + ".terms[" + std::to_string(i) + "]", seed));
        out["terms"] = terms;
    } else {
        invalid(w + ".family", "unknown field family '" + fam + "'");
    }
    return out;
}

Json normalize_vector_field(const Json& f, const std::string& w) {
    if (f.is_null()) return nullptr;
    if (!f.is_object() || f.value("family", std::string()) != "curl-bump")
        invalid(w, "expected {\"family\": \"curl-bump\", ...}");
    only_keys(f, w, {"family", "amplitude", "center", "width"});
    Json out;
    out["family"] = "curl-bump";
    out["amplitude"] = number(f, w, "amplitude", 1.0);
    out["center"] = point_json(numbers(f, w, "center", 1, 3));
    out["width"] = number(f, w, "width");
    return out;
}

Json normalize_potentials(const Json& p, const std::string& w, std::uint64_t seed) {
    if (p.is_null()) return Json::object();
    only_keys(p, w, {"V", "q", "A"});
    Json out = Json::object();
    if (p.contains("V") && !p["V"].is_null()) out["V"] = normalize_field(p["V"], w + ".V", seed);
    if (p.contains("q") && !p["q"].is_null()) out["q"] = normalize_field(p["q"], w + ".q", seed);
    if (p.contains("A") && !p["A"].is_null()) out["A"] = normalize_vector_field(p["A"], w + ".A");
    return out;
}

RealField build_field(const Json& f, const Point& ext, int dim) {
    if (f.is_null()) return {};
    const std::string fam = f["family"];
    if (fam == "constant") return constant_field(f["value"]);
    if (fam == "gaussian-bump") return gaussian_bump(f["amplitude"], to_point(f["center"]), f["width"]);
    if (fam == "cosine-mode") return cosine_mode(f["amplitude"], to_point(f["wavevector"]), f["phase"]);
    if (fam == "random-smooth")
        return random_smooth(f["seed"].get<std::uint64_t>(), f["amplitude"], f["modes"].get<int>(), ext, dim);
    RealField acc;
    for (const auto& t : f["terms"]) {
        RealField g = build_field(t, ext, dim);
        acc = acc ? sum_fields(acc, g) : g;
    }
    return acc ? acc : constant_field(0.0);
}

const std::set<std::string> kTopKeys = {"command", "name",   "description", "seed",   "threads", "cache", "mesh",
                                        "weight",  "potentials", "potentials2", "study", "params",  "checks", "cases"};

}  // namespace

const std::vector<std::string>& commands() {
    static const std::vector<std::string> c = {"forward", "dtn",    "alessandrini", "runge",
                                               "cgo-decay", "carleman", "traces",  "reconstruct"};
    return c;
}

Mesh build_mesh(const Json& spec) {
    const Json m = normalize_mesh(spec);
    std::vector<double> lengths = m["lengths"].get<std::vector<double>>();
    std::vector<int> cells = m["cells"].get<std::vector<int>>();
    Mesh mesh = build_graded_box(lengths, cells, m["grading"]);
    const std::string tags = m["tags"];
    if (tags != "default") apply_named_tags(mesh, tags);
    return mesh;
}

WeightSpec parse_weight(const Json& spec) {
    const Json m = normalize_weight(spec.is_null() ? Json::object() : spec);
    WeightSpec ws;
    ws.s = m["s"];
    ws.mode = weight_mode_from_string(m["mode"]);
    ws.clamp = m["clamp"];
    ws.validate();
    return ws;
}

RealField parse_field(const Json& spec, const Point& extents, int dim, std::uint64_t seed) {
    return build_field(normalize_field(spec, "field", seed), extents, dim);
}

VectorField parse_vector_field(const Json& spec) {
    const Json f = normalize_vector_field(spec, "field");
    if (f.is_null()) return {};
    return curl_bump(f["amplitude"], to_point(f["center"]), f["width"]);
}

Potentials parse_potentials(const Json& spec, const Point& extents, int dim, std::uint64_t seed) {
    const Json p = normalize_potentials(spec, "potentials", seed);
    Potentials out;
    if (p.contains("V")) out.V = build_field(p["V"], extents, dim);
    if (p.contains("q")) out.q = build_field(p["q"], extents, dim);
    if (p.contains("A")) out.A = parse_vector_field(p["A"]);
    return out;
}

Json canonical_inputs(const Json& mesh, const Json& weight, const Json& potentials, std::uint64_t seed) {
    Json out;
    out["mesh"] = normalize_mesh(mesh);
    out["weight"] = normalize_weight(weight.is_null() ? Json::object() : weight);
    out["potentials"] = normalize_potentials(potentials, "potentials", seed);
    return out;
}

std::string cache_key(const Json& mesh, const Json& weight, const Json& potentials, std::uint64_t seed) {
    Sha256 h;
    h.update(std::string("degenlab-inputs-v1\n"));
    h.update(canonical_inputs(mesh, weight, potentials, seed).dump());
    return h.hex();
}

ExperimentConfig parse_config(const Json& j) {
    if (!j.is_object()) invalid("", "config must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!kTopKeys.count(it.key())) invalid(it.key(), "unknown key");
    ExperimentConfig c;
    c.raw = j;
    if (!j.contains("command") || !j["command"].is_string()) invalid("command", "missing or not a string");
    c.command = j["command"];
    if (std::find(commands().begin(), commands().end(), c.command) == commands().end())
        invalid("command", "unknown command '" + c.command + "'");
    if (j.contains("name") && !j["name"].is_string()) invalid("name", "expected a string");
    c.name = j.value("name", c.command);
    if (j.contains("seed") && !j["seed"].is_number_unsigned()) invalid("seed", "expected a non-negative integer");
    c.seed = j.value("seed", std::uint64_t{1});
    if (j.contains("threads") && !(j["threads"].is_number_integer() && j["threads"].get<int>() >= 1))
        invalid("threads", "expected a positive integer");
    c.threads = j.value("threads", 1);
    if (j.contains("cache") && !j["cache"].is_boolean()) invalid("cache", "expected a boolean");
    c.cache = j.value("cache", true);
    if (j.contains("cases") && (!j["cases"].is_array() || j["cases"].empty()))
        invalid("cases", "expected a non-empty array of objects");
    // every case must carry parseable inputs
    for (int i = 0; i < num_cases(c); ++i) {
        const Json cs = resolve_case(c, i);
        const std::string where = j.contains("cases") ? "cases[" + std::to_string(i) + "]." : "";
        if (!cs.contains("mesh")) invalid(where + "mesh", "missing");
        try {
            normalize_mesh(cs["mesh"]);
            parse_weight(cs.value("weight", Json::object()));
            normalize_potentials(cs.value("potentials", Json::object()), "potentials", c.seed);
            normalize_potentials(cs.value("potentials2", Json::object()), "potentials2", c.seed);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::ConfigInvalid || where.empty()) throw;
            throw Error(ErrorKind::ConfigInvalid, where + ": " + e.what());
        }
        if (cs.contains("params") && !cs["params"].is_object()) invalid(where + "params", "expected an object");
        if (cs.contains("checks")) {
            if (!cs["checks"].is_object()) invalid(where + "checks", "expected an object");
            for (auto it = cs["checks"].begin(); it != cs["checks"].end(); ++it)
                if (!it.value().is_number()) invalid(where + "checks." + it.key(), "expected a number");
        }
    }
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open config '" + path + "'");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorKind::ConfigInvalid, "'" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

Json to_json(const ExperimentConfig& c) {
    Json j = c.raw;
    j["command"] = c.command;
    j["name"] = c.name;
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    j["cache"] = c.cache;
    return j;
}

int num_cases(const ExperimentConfig& c) {
    return c.raw.contains("cases") ? static_cast<int>(c.raw["cases"].size()) : 1;
}

Json resolve_case(const ExperimentConfig& c, int i) {
    Json base = c.raw;
    base.erase("cases");
    if (!c.raw.contains("cases")) return base;
    const Json& patch = c.raw["cases"].at(static_cast<std::size_t>(i));
    if (!patch.is_object()) invalid("cases[" + std::to_string(i) + "]", "expected an object");
    for (auto it = patch.begin(); it != patch.end(); ++it) {
        if ((it.key() == "params" || it.key() == "checks") && base.contains(it.key()))
            base[it.key()].merge_patch(it.value());
        else
            base[it.key()] = it.value();
    }
    return base;
}

}  // namespace degenlab::app
