#include "softmc/profile.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace softmc {

void validate_profile(const ModuleProfile& p) {
    auto fail = [](const std::string& what) { throw ConfigError(what); };
    if (p.name.empty()) fail("profile name must not be empty");
    if (p.min_safe_trcd == 0) fail("min_safe_trcd must be at least 1");
    if (p.min_safe_tras == 0) fail("min_safe_tras must be at least 1");
    if (!(p.marginal_charge_threshold >= 0.0 &&
          p.marginal_charge_threshold <= 1.0)) {
        fail("marginal_charge_threshold must be in [0,1]");
    }
    if (!(p.weak_cell_fraction >= 0.0 && p.weak_cell_fraction <= 1.0)) {
        fail("weak_cell_fraction must be in [0,1]");
    }
    if (!(p.retention_log_sd > 0.0)) fail("retention_log_sd must be > 0");
    if (!(p.weak_retention_log_sd > 0.0)) {
        fail("weak_retention_log_sd must be > 0");
    }
    if (!(p.retention_halving_per > 0.0)) {
        fail("retention_halving_per must be > 0");
    }
}

namespace {

const char* kStringKeys[] = {"name"};
const char* kUintKeys[] = {"min_safe_trcd", "min_safe_tras",
                           "true_cell_layout_seed"};
const char* kNumberKeys[] = {"marginal_charge_threshold",
                             "retention_log_mean",
                             "retention_log_sd",
                             "weak_cell_fraction",
                             "weak_retention_log_mean",
                             "weak_retention_log_sd",
                             "temperature_ref",
                             "retention_halving_per"};

bool known_key(const std::string& key) {
    for (const char* k : kStringKeys)
        if (key == k) return true;
    for (const char* k : kUintKeys)
        if (key == k) return true;
    for (const char* k : kNumberKeys)
        if (key == k) return true;
    return false;
}

} // namespace

ModuleProfile profile_from_json_text(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("profile JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ConfigError("profile JSON must be an object");
    }
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (!known_key(key)) {
            throw ConfigError("unknown profile key '" + key + "'");
        }
    }

    ModuleProfile p;
    auto get_number = [&doc](const char* key, double& slot) {
        if (!doc.contains(key)) return;
        const auto& v = doc.at(key);
        if (!v.is_number()) {
            throw ConfigError(std::string(key) + " must be a number");
        }
        slot = v.get<double>();
    };
    auto get_u32 = [&doc](const char* key, std::uint32_t& slot) {
        if (!doc.contains(key)) return;
        const auto& v = doc.at(key);
        if (!v.is_number_unsigned()) {
            throw ConfigError(std::string(key) +
                              " must be a non-negative integer");
        }
        const std::uint64_t raw = v.get<std::uint64_t>();
        if (raw > 0xFFFFFFFFull) {
            throw ConfigError(std::string(key) + " too large");
        }
        slot = std::uint32_t(raw);
    };

    if (doc.contains("name")) {
        if (!doc.at("name").is_string()) {
            throw ConfigError("name must be a string");
        }
        p.name = doc.at("name").get<std::string>();
    }
    get_u32("min_safe_trcd", p.min_safe_trcd);
    get_u32("min_safe_tras", p.min_safe_tras);
    get_number("marginal_charge_threshold", p.marginal_charge_threshold);
    get_number("retention_log_mean", p.retention_log_mean);
    get_number("retention_log_sd", p.retention_log_sd);
    get_number("weak_cell_fraction", p.weak_cell_fraction);
    get_number("weak_retention_log_mean", p.weak_retention_log_mean);
    get_number("weak_retention_log_sd", p.weak_retention_log_sd);
    get_number("temperature_ref", p.temperature_ref);
    get_number("retention_halving_per", p.retention_halving_per);
    if (doc.contains("true_cell_layout_seed")) {
        const auto& v = doc.at("true_cell_layout_seed");
        if (!v.is_number_unsigned()) {
            throw ConfigError(
                "true_cell_layout_seed must be a non-negative integer");
        }
        p.true_cell_layout_seed = v.get<std::uint64_t>();
    }
    validate_profile(p);
    return p;
}

std::string profile_to_json_text(const ModuleProfile& p) {
    nlohmann::json doc;
    doc["name"] = p.name;
    doc["min_safe_trcd"] = p.min_safe_trcd;
    doc["min_safe_tras"] = p.min_safe_tras;
    doc["marginal_charge_threshold"] = p.marginal_charge_threshold;
    doc["retention_log_mean"] = p.retention_log_mean;
    doc["retention_log_sd"] = p.retention_log_sd;
    doc["weak_cell_fraction"] = p.weak_cell_fraction;
    doc["weak_retention_log_mean"] = p.weak_retention_log_mean;
    doc["weak_retention_log_sd"] = p.weak_retention_log_sd;
    doc["temperature_ref"] = p.temperature_ref;
    doc["retention_halving_per"] = p.retention_halving_per;
    doc["true_cell_layout_seed"] = p.true_cell_layout_seed;
    return doc.dump(2) + "\n";
}

ModuleProfile preset_profile(const std::string& name) {
    ModuleProfile p;
    p.name = name;
    p.marginal_charge_threshold = 0.9;
    p.temperature_ref = 40.0;
    p.retention_halving_per = 10.0;
    p.retention_log_mean = 11.6952;
    p.retention_log_sd = 0.45;
    p.weak_retention_log_mean = 9.0655;
    p.weak_retention_log_sd = 0.55;
    p.min_safe_tras = 5;
    if (name == "A") {
        p.min_safe_trcd = 4;
        p.weak_cell_fraction = 0.040;
        p.true_cell_layout_seed = 0xA5A5;
    } else if (name == "B") {
        p.min_safe_trcd = 4;
        p.weak_cell_fraction = 0.034;
        p.true_cell_layout_seed = 0xB5B5;
    } else if (name == "C") {
        p.min_safe_trcd = 5;
        p.weak_cell_fraction = 0.046;
        p.true_cell_layout_seed = 0xC5C5;
    } else {
        throw ConfigError("unknown preset profile '" + name + "'");
    }
    return p;
}

std::vector<std::string> preset_profile_names() { return {"A", "B", "C"}; }

namespace {

bool is_preset_name(const std::string& s) {
    for (const std::string& name : preset_profile_names()) {
        if (s == name) return true;
    }
    return false;
}

ModuleProfile profile_from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open profile file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return profile_from_json_text(buf.str());
}

} // namespace

ModuleProfile load_profile(const std::string& name_or_path,
                           const std::string& profile_dir) {
    if (is_preset_name(name_or_path)) {
        std::string dir = profile_dir;
        if (dir.empty()) {
            if (const char* env = std::getenv("SOFTMC_SIM_PROFILE_DIR")) {
                dir = env;
            }
        }
        if (!dir.empty()) {
            const std::string path =
                dir + "/profile_" + name_or_path + ".json";
            std::ifstream probe(path);
            if (probe) {
                probe.close();
                return profile_from_file(path);
            }
        }
        return preset_profile(name_or_path);
    }
    return profile_from_file(name_or_path);
}

} // namespace softmc
