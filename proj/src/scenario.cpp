#include "hillscope/scenario.hpp"

#include <fstream>
#include <map>
#include <set>

namespace hillscope {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError("scenario error at '" + path + "': " + what);
}

void require_keys(const json& obj, const std::string& path, const std::set<std::string>& required,
                  const std::set<std::string>& optional = {}) {
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& item : obj.items()) {
        if (!required.count(item.key()) && !optional.count(item.key()))
            fail(path + "." + item.key(), "unknown key");
    }
    for (const auto& key : required)
        if (!obj.contains(key)) fail(path + "." + key, "missing required key");
}

double get_number(const json& obj, const std::string& path, const std::string& key) {
    const json& v = obj.at(key);
    if (!v.is_number()) fail(path + "." + key, "expected a number");
    return v.get<double>();
}

Vec get_vector(const json& obj, const std::string& path, const std::string& key) {
    const json& v = obj.at(key);
    if (!v.is_array()) fail(path + "." + key, "expected an array of numbers");
    Vec out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number())
            fail(path + "." + key + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back(v[i].get<double>());
    }
    return out;
}

MechanicalSystem parse_system(const json& j) {
    require_keys(j, "system", {"dimension", "energy", "potential"});
    const json& jd = j.at("dimension");
    if (!jd.is_number_integer() || jd.get<long long>() < 1)
        fail("system.dimension", "expected a positive integer");
    auto dim = jd.get<std::size_t>();
    double energy = get_number(j, "system", "energy");
    const json& pot = j.at("potential");
    if (!pot.is_array()) fail("system.potential", "expected an array of terms");
    std::vector<MonomialTerm> terms;
    for (std::size_t i = 0; i < pot.size(); ++i) {
        std::string path = "system.potential[" + std::to_string(i) + "]";
        require_keys(pot[i], path, {"coeff", "exponents"});
        MonomialTerm term;
        term.coeff = get_number(pot[i], path, "coeff");
        const json& ex = pot[i].at("exponents");
        if (!ex.is_array() || ex.size() != dim)
            fail(path + ".exponents", "expected an integer array of length dimension");
        for (std::size_t k = 0; k < ex.size(); ++k) {
            if (!ex[k].is_number_integer() || ex[k].get<long long>() < 0)
                fail(path + ".exponents[" + std::to_string(k) + "]",
                     "expected a non-negative integer");
            term.exponents.push_back(ex[k].get<int>());
        }
        terms.push_back(term);
    }
    return MechanicalSystem{PolynomialPotential(dim, std::move(terms)), energy};
}

struct KindSchema {
    std::set<std::string> required;
    std::set<std::string> optional;
};

const std::map<std::string, KindSchema>& kind_schemas() {
    static const std::map<std::string, KindSchema> schemas = {
        {"simulate", {{"q0", "v0", "t0", "t1"}, {"step", "energy_tol"}}},
        {"model-envelope",
         {{"base"}, {"gravity", "theta_max_deg", "theta_count", "flip", "throw_count"}}},
        {"conjugate-locus",
         {{"base", "theta_min_deg", "theta_max_deg", "theta_count", "t_max"}, {"step"}}},
        {"fold-report",
         {{"base", "theta_min_deg", "theta_max_deg", "theta_count", "t_max"}, {"step"}}},
        {"downward-cone", {{"base", "t_max"}, {"sweep_deg", "coarse", "max_base_f", "step"}}},
        {"seifert-build", {{"center", "extent", "height"}, {"nx", "step"}}},
        {"seifert-properties",
         {{"center", "extent", "height", "heights", "h_values"},
          {"nx", "step", "lambda", "delta_deg", "eps_A", "cross_tol"}}},
        {"rescale-compare",
         {{"center", "extent", "height", "eps_list"},
          {"nx", "step", "entry_angle_deg", "expected_f1_a", "cross_tol"}}},
        {"theorem1-scan",
         {{"center", "extent", "height", "approach_dist"},
          {"nx", "step", "roof_factor", "samples"}}},
        {"verify-all", {{"preset"}, {}}},
    };
    return schemas;
}

void validate_experiment(const json& j, const std::string& kind, std::size_t dim) {
    const auto& schemas = kind_schemas();
    auto it = schemas.find(kind);
    if (it == schemas.end()) fail("experiment.kind", "unknown experiment kind '" + kind + "'");
    std::set<std::string> required = it->second.required;
    std::set<std::string> optional = it->second.optional;
    required.insert("kind");
    require_keys(j, "experiment", required, optional);

    auto positive = [&](const std::string& key, double v) {
        if (v <= 0) fail("experiment." + key, "must be strictly positive");
    };
    if (j.contains("step")) positive("step", get_number(j, "experiment", "step"));
    if (j.contains("energy_tol")) positive("energy_tol", get_number(j, "experiment", "energy_tol"));
    if (j.contains("t_max")) positive("t_max", get_number(j, "experiment", "t_max"));
    if (j.contains("extent")) positive("extent", get_number(j, "experiment", "extent"));
    if (j.contains("height")) positive("height", get_number(j, "experiment", "height"));
    if (j.contains("approach_dist"))
        positive("approach_dist", get_number(j, "experiment", "approach_dist"));
    if (j.contains("theta_count")) {
        double c = get_number(j, "experiment", "theta_count");
        if (c < 8) fail("experiment.theta_count", "direction-grid resolution must be >= 8");
    }
    for (const char* vk : {"base", "center", "q0", "v0"}) {
        if (!j.contains(vk)) continue;
        Vec v = get_vector(j, "experiment", vk);
        if (v.size() != dim) fail(std::string("experiment.") + vk, "length must equal dimension");
    }
    if (kind == "verify-all") {
        std::string preset = j.at("preset").get<std::string>();
        if (preset != "model" && preset != "oscillator" && preset != "perturbed-model")
            fail("experiment.preset", "expected model | oscillator | perturbed-model");
    }
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> kinds = [] {
        std::vector<std::string> v;
        for (const auto& kv : kind_schemas()) v.push_back(kv.first);
        return v;
    }();
    return kinds;
}

ScenarioConfig parse_scenario(const nlohmann::json& j, const std::string& source) {
    require_keys(j, "$", {"system", "experiment"});
    ScenarioConfig cfg;
    cfg.system = parse_system(j.at("system"));
    const json& exp = j.at("experiment");
    if (!exp.is_object() || !exp.contains("kind") || !exp.at("kind").is_string())
        fail("experiment.kind", "missing or not a string");
    cfg.kind = exp.at("kind").get<std::string>();
    validate_experiment(exp, cfg.kind, cfg.system.dimension());
    cfg.experiment = exp;
    cfg.source_path = source;
    return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("invalid JSON in " + path + ": " + e.what());
    }
    return parse_scenario(j, path);
}

}  // namespace hillscope
