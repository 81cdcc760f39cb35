#include "softmc/campaign.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace softmc {

ExperimentPlan default_plan(Experiment e, const DeviceGeometry& g,
                            std::uint32_t row_count,
                            std::uint32_t interleave) {
    ExperimentPlan plan;
    plan.interleave_width = interleave;
    switch (e) {
    case Experiment::kRetention:
        plan.intervals_ms = {64, 128, 256, 512, 1024, 2048, 4096, 8192};
        if (row_count == 0) row_count = 512;
        break;
    case Experiment::kTrcd:
        plan.intervals_ms = {1, 8, 64, 512};
        plan.timing_values = {3, 4, 5, 6};
        if (row_count == 0) row_count = 8;
        break;
    case Experiment::kTras:
        plan.intervals_ms = {8, 64, 512};
        plan.timing_values = {2, 3, 4, 5, 6, 10, 14};
        if (row_count == 0) row_count = 64;
        break;
    }
    plan.patterns = {0x00, 0xFF};
    plan.rows = select_rows(g, row_count);
    return plan;
}

double default_temperature(Experiment e, const ModuleProfile& profile) {
    return e == Experiment::kRetention ? profile.temperature_ref : 80.0;
}

ResolvedCampaign resolve_campaign(const CampaignConfig& cfg,
                                  const std::string& profile_dir) {
    validate_geometry(cfg.geometry);
    ResolvedCampaign out;
    out.experiment = cfg.experiment;
    out.setup.geometry = cfg.geometry;
    out.setup.profile = load_profile(cfg.profile, profile_dir);
    out.setup.seed = cfg.seed;
    if (std::isnan(cfg.temperature_c)) {
        out.setup.temperature_c =
            default_temperature(cfg.experiment, out.setup.profile);
    } else {
        if (!std::isfinite(cfg.temperature_c)) {
            throw ConfigError("temperature must be finite");
        }
        out.setup.temperature_c = cfg.temperature_c;
    }

    out.plan = default_plan(cfg.experiment, cfg.geometry, cfg.row_count,
                            cfg.interleave_width);
    if (!cfg.intervals_ms.empty()) {
        out.plan.intervals_ms = cfg.intervals_ms;
    }
    if (!cfg.timing_values.empty()) {
        out.plan.timing_values = cfg.timing_values;
    }
    if (!cfg.patterns.empty()) {
        out.plan.patterns = cfg.patterns;
    }
    out.plan.refresh_mode = cfg.refresh_mode;
    validate_plan(out.plan, out.experiment, cfg.geometry);

    out.out_dir = cfg.out_dir.empty() ? "." : cfg.out_dir;
    out.jobs = cfg.jobs == 0 ? 1 : cfg.jobs;
    return out;
}

namespace {

Experiment experiment_from_name(const std::string& s) {
    if (s == "retention") return Experiment::kRetention;
    if (s == "trcd") return Experiment::kTrcd;
    if (s == "tras") return Experiment::kTras;
    throw ConfigError("unknown experiment '" + s + "'");
}

RefreshMode refresh_mode_from_name(const std::string& s) {
    if (s == "software-clock") return RefreshMode::kSoftwareClock;
    if (s == "auto") return RefreshMode::kAuto;
    if (s == "manual") return RefreshMode::kManual;
    throw ConfigError("unknown refresh mode '" + s + "'");
}

std::uint64_t require_uint(const nlohmann::json& v, const char* key,
                           std::uint64_t max_value) {
    if (!v.is_number_unsigned()) {
        throw ConfigError(std::string(key) +
                          " must be a non-negative integer");
    }
    const std::uint64_t raw = v.get<std::uint64_t>();
    if (raw > max_value) {
        throw ConfigError(std::string(key) + " too large");
    }
    return raw;
}

} // namespace

CampaignConfig campaign_from_json_text(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("campaign JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ConfigError("campaign JSON must be an object");
    }

    static const char* kKnown[] = {
        "experiment",    "geometry",   "profile",          "temperature_c",
        "seed",          "intervals_ms", "timing_values",  "patterns",
        "row_count",     "interleave_width", "refresh_mode", "out_dir",
        "jobs",
    };
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        bool known = false;
        for (const char* k : kKnown) {
            if (key == k) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw ConfigError("unknown campaign key '" + key + "'");
        }
    }

    CampaignConfig cfg;
    if (doc.contains("experiment")) {
        if (!doc.at("experiment").is_string()) {
            throw ConfigError("experiment must be a string");
        }
        cfg.experiment =
            experiment_from_name(doc.at("experiment").get<std::string>());
    }
    if (doc.contains("geometry")) {
        const auto& geo = doc.at("geometry");
        if (!geo.is_object()) {
            throw ConfigError("geometry must be an object");
        }
        for (const auto& [key, value] : geo.items()) {
            if (key == "num_banks") {
                cfg.geometry.num_banks =
                    std::uint32_t(require_uint(value, "num_banks", kMaxBanks));
            } else if (key == "num_rows") {
                cfg.geometry.num_rows =
                    std::uint32_t(require_uint(value, "num_rows", kMaxRows));
            } else if (key == "num_columns") {
                cfg.geometry.num_columns = std::uint32_t(
                    require_uint(value, "num_columns", kMaxColumns));
            } else if (key == "bytes_per_column") {
                cfg.geometry.bytes_per_column = std::uint32_t(
                    require_uint(value, "bytes_per_column", 4096));
            } else {
                throw ConfigError("unknown geometry key '" + key + "'");
            }
        }
    }
    if (doc.contains("profile")) {
        if (!doc.at("profile").is_string()) {
            throw ConfigError("profile must be a string");
        }
        cfg.profile = doc.at("profile").get<std::string>();
    }
    if (doc.contains("temperature_c")) {
        if (!doc.at("temperature_c").is_number()) {
            throw ConfigError("temperature_c must be a number");
        }
        cfg.temperature_c = doc.at("temperature_c").get<double>();
    }
    if (doc.contains("seed")) {
        if (!doc.at("seed").is_number_unsigned()) {
            throw ConfigError("seed must be a non-negative integer");
        }
        cfg.seed = doc.at("seed").get<std::uint64_t>();
    }
    if (doc.contains("intervals_ms")) {
        const auto& arr = doc.at("intervals_ms");
        if (!arr.is_array()) {
            throw ConfigError("intervals_ms must be an array");
        }
        for (const auto& v : arr) {
            if (!v.is_number()) {
                throw ConfigError("intervals_ms entries must be numbers");
            }
            cfg.intervals_ms.push_back(v.get<double>());
        }
    }
    if (doc.contains("timing_values")) {
        const auto& arr = doc.at("timing_values");
        if (!arr.is_array()) {
            throw ConfigError("timing_values must be an array");
        }
        for (const auto& v : arr) {
            cfg.timing_values.push_back(std::uint32_t(
                require_uint(v, "timing_values entry", kMaxWaitCycles)));
        }
    }
    if (doc.contains("patterns")) {
        const auto& arr = doc.at("patterns");
        if (!arr.is_array()) {
            throw ConfigError("patterns must be an array");
        }
        for (const auto& v : arr) {
            cfg.patterns.push_back(
                std::uint8_t(require_uint(v, "patterns entry", 255)));
        }
    }
    if (doc.contains("row_count")) {
        cfg.row_count = std::uint32_t(
            require_uint(doc.at("row_count"), "row_count", 0xFFFFFFFFull));
    }
    if (doc.contains("interleave_width")) {
        cfg.interleave_width = std::uint32_t(require_uint(
            doc.at("interleave_width"), "interleave_width", 0xFFFFFFFFull));
    }
    if (doc.contains("refresh_mode")) {
        if (!doc.at("refresh_mode").is_string()) {
            throw ConfigError("refresh_mode must be a string");
        }
        cfg.refresh_mode =
            refresh_mode_from_name(doc.at("refresh_mode").get<std::string>());
    }
    if (doc.contains("out_dir")) {
        if (!doc.at("out_dir").is_string()) {
            throw ConfigError("out_dir must be a string");
        }
        cfg.out_dir = doc.at("out_dir").get<std::string>();
    }
    if (doc.contains("jobs")) {
        cfg.jobs =
            unsigned(require_uint(doc.at("jobs"), "jobs", 1024));
    }
    return cfg;
}

std::string summarize_result(const TestResult& r) {
    std::ostringstream out;
    char num[64];
    out << "experiment: " << experiment_name(r.experiment) << '\n';
    out << "profile: " << r.profile_name << '\n';
    std::snprintf(num, sizeof num, "%g", r.temperature_c);
    out << "temperature_c: " << num << '\n';
    out << "rows_tested: " << r.rows_tested << "\n\n";

    const bool latency = r.experiment != Experiment::kRetention;
    // Totals across patterns, keyed by (timing, interval); entries are
    // already sorted that way.
    std::map<std::pair<std::uint32_t, double>, std::uint64_t> totals;
    std::map<double, std::uint64_t> by_interval;
    std::map<std::uint32_t, std::uint64_t> by_timing;
    for (const TestResultEntry& e : r.entries) {
        const std::uint32_t t = e.timing_cycles.value_or(0);
        totals[{t, e.interval_ms}] += e.erroneous_bytes;
        by_interval[e.interval_ms] += e.erroneous_bytes;
        by_timing[t] += e.erroneous_bytes;
    }
    for (const auto& [key, errors] : totals) {
        std::snprintf(num, sizeof num, "%g", key.second);
        if (latency) {
            out << "timing " << key.first << ", interval " << num
                << " ms: " << errors << " erroneous bytes\n";
        } else {
            out << "interval " << num << " ms: " << errors
                << " erroneous bytes\n";
        }
    }
    out << '\n';

    if (!latency) {
        // Longest prefix of the interval sweep that stayed clean.
        double detected = -1.0;
        for (const auto& [interval, errors] : by_interval) {
            if (errors != 0) break;
            detected = interval;
        }
        if (detected < 0) {
            out << "largest zero-error interval: none\n";
        } else {
            std::snprintf(num, sizeof num, "%g", detected);
            out << "largest zero-error interval: " << num << " ms\n";
        }
    } else {
        // Smallest timing value from which the sweep stays clean.
        std::int64_t detected = -1;
        for (auto it = by_timing.rbegin(); it != by_timing.rend(); ++it) {
            if (it->second != 0) break;
            detected = it->first;
        }
        if (detected < 0) {
            out << "smallest error-free timing: none\n";
        } else {
            out << "smallest error-free timing: " << detected << " cycles\n";
        }
    }
    return out.str();
}

TestResult run_campaign(const CampaignConfig& cfg,
                        const std::string& profile_dir) {
    const ResolvedCampaign resolved = resolve_campaign(cfg, profile_dir);
    const TestResult result = run_experiment(resolved.experiment,
                                             resolved.setup, resolved.plan,
                                             resolved.jobs);

    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(resolved.out_dir, ec);
    if (ec && !fs::is_directory(resolved.out_dir)) {
        throw IoError("cannot create output directory '" + resolved.out_dir +
                      "': " + ec.message());
    }

    const std::string csv_path = resolved.out_dir + "/" +
                                 experiment_name(resolved.experiment) +
                                 ".csv";
    {
        std::ofstream csv(csv_path, std::ios::binary | std::ios::trunc);
        if (!csv) {
            throw IoError("cannot write '" + csv_path + "'");
        }
        csv << result_to_csv(result);
        if (!csv) {
            throw IoError("write failed for '" + csv_path + "'");
        }
    }
    const std::string summary_path = resolved.out_dir + "/summary.txt";
    {
        std::ofstream summary(summary_path,
                              std::ios::binary | std::ios::trunc);
        if (!summary) {
            throw IoError("cannot write '" + summary_path + "'");
        }
        summary << summarize_result(result);
        if (!summary) {
            throw IoError("write failed for '" + summary_path + "'");
        }
    }
    return result;
}

} // namespace softmc
