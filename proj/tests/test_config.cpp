#include <cstdlib>
#include <fstream>
#include <string>

#include <doctest.h>

#include "softmc/campaign.hpp"
#include "softmc/profile.hpp"

using namespace softmc;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), {});
}

void spill(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.good());
    out << text;
}

int shell(const std::string& cmd) { return std::system(cmd.c_str()); }

} // namespace

TEST_CASE("presets cover three module characters") {
    CHECK(preset_profile_names() ==
          std::vector<std::string>{"A", "B", "C"});

    const ModuleProfile a = preset_profile("A");
    CHECK(a.name == "A");
    CHECK(a.min_safe_trcd == 4);
    CHECK(a.min_safe_tras == 5);
    CHECK(a.weak_cell_fraction == doctest::Approx(0.040));
    CHECK(a.marginal_charge_threshold == doctest::Approx(0.9));
    CHECK(a.temperature_ref == doctest::Approx(40.0));
    CHECK(a.retention_halving_per == doctest::Approx(10.0));

    const ModuleProfile b = preset_profile("B");
    CHECK(b.min_safe_trcd == 4);
    CHECK(b.weak_cell_fraction == doctest::Approx(0.034));

    const ModuleProfile c = preset_profile("C");
    CHECK(c.min_safe_trcd == 5);
    CHECK(c.weak_cell_fraction == doctest::Approx(0.046));

    // distinct layouts: the three modules disagree on cell orientation
    CHECK(a.true_cell_layout_seed != b.true_cell_layout_seed);
    CHECK(b.true_cell_layout_seed != c.true_cell_layout_seed);

    CHECK_THROWS_AS(preset_profile("D"), ConfigError);
}

TEST_CASE("profile JSON round trips") {
    ModuleProfile p = preset_profile("B");
    p.name = "bench";
    p.weak_cell_fraction = 0.1;
    p.retention_log_mean = 10.5;
    p.true_cell_layout_seed = 0x1234567890ABCDEFull;
    const ModuleProfile back = profile_from_json_text(profile_to_json_text(p));
    CHECK(back == p);

    // a subset document keeps defaults for the rest
    const ModuleProfile sub =
        profile_from_json_text("{\"name\":\"x\",\"min_safe_trcd\":7}");
    CHECK(sub.name == "x");
    CHECK(sub.min_safe_trcd == 7);
    CHECK(sub.min_safe_tras == 5);
    CHECK(sub.retention_log_mean == doctest::Approx(11.6952));
}

TEST_CASE("profile JSON rejects junk") {
    CHECK_THROWS_AS(profile_from_json_text("not json"), ConfigError);
    CHECK_THROWS_AS(profile_from_json_text("[1,2]"), ConfigError);
    CHECK_THROWS_AS(profile_from_json_text("{\"surprise\":1}"), ConfigError);
    CHECK_THROWS_AS(profile_from_json_text("{\"min_safe_trcd\":-2}"),
                    ConfigError);
    CHECK_THROWS_AS(profile_from_json_text("{\"min_safe_trcd\":1.5}"),
                    ConfigError);
    CHECK_THROWS_AS(profile_from_json_text("{\"name\":7}"), ConfigError);
    CHECK_THROWS_AS(
        profile_from_json_text("{\"weak_cell_fraction\":1.5}"), ConfigError);
    CHECK_THROWS_AS(
        profile_from_json_text("{\"marginal_charge_threshold\":-0.1}"),
        ConfigError);
    CHECK_THROWS_AS(profile_from_json_text("{\"retention_log_sd\":0}"),
                    ConfigError);
    CHECK_THROWS_AS(
        profile_from_json_text("{\"retention_halving_per\":0}"), ConfigError);
    CHECK_THROWS_AS(profile_from_json_text("{\"min_safe_tras\":0}"),
                    ConfigError);
}

TEST_CASE("shipped profile files equal the built-in presets") {
    for (const std::string& name : preset_profile_names()) {
        const std::string path =
            std::string(SOFTMC_PROFILE_SRC_DIR) + "/profile_" + name +
            ".json";
        CHECK(profile_from_json_text(slurp(path)) == preset_profile(name));
    }
}

TEST_CASE("profile lookup order: explicit dir, environment, preset") {
    const std::string dir = "profile_lookup_tmp";
    shell("rm -rf " + dir);
    REQUIRE(shell("mkdir -p " + dir) == 0);
    ModuleProfile custom = preset_profile("A");
    custom.weak_cell_fraction = 0.25;
    spill(dir + "/profile_A.json", profile_to_json_text(custom));

    unsetenv("SOFTMC_SIM_PROFILE_DIR");
    CHECK(load_profile("A") == preset_profile("A"));
    CHECK(load_profile("A", dir) == custom);

    setenv("SOFTMC_SIM_PROFILE_DIR", dir.c_str(), 1);
    CHECK(load_profile("A") == custom);
    // the environment only supplies a default; an explicit dir wins
    CHECK(load_profile("A", "nonexistent_dir") == preset_profile("A"));
    // names without a file in the dir fall back to the preset
    CHECK(load_profile("B") == preset_profile("B"));
    unsetenv("SOFTMC_SIM_PROFILE_DIR");

    // non-preset names are file paths
    CHECK(load_profile(dir + "/profile_A.json") == custom);
    CHECK_THROWS_AS(load_profile("no_such_profile.json"), IoError);

    shell("rm -rf " + dir);
}

TEST_CASE("stock plans follow the published sweeps") {
    const DeviceGeometry g = default_geometry();

    const ExperimentPlan ret =
        default_plan(Experiment::kRetention, g, 0, 4);
    CHECK(ret.intervals_ms ==
          std::vector<double>{64, 128, 256, 512, 1024, 2048, 4096, 8192});
    CHECK(ret.timing_values.empty());
    CHECK(ret.rows.size() == 512);
    CHECK(ret.patterns == std::vector<std::uint8_t>{0x00, 0xFF});
    CHECK(ret.interleave_width == 4);

    const ExperimentPlan trcd = default_plan(Experiment::kTrcd, g, 0, 4);
    CHECK(trcd.intervals_ms == std::vector<double>{1, 8, 64, 512});
    CHECK(trcd.timing_values == std::vector<std::uint32_t>{3, 4, 5, 6});
    CHECK(trcd.rows.size() == 8);

    const ExperimentPlan tras = default_plan(Experiment::kTras, g, 0, 4);
    CHECK(tras.intervals_ms == std::vector<double>{8, 64, 512});
    CHECK(tras.timing_values ==
          std::vector<std::uint32_t>{2, 3, 4, 5, 6, 10, 14});
    CHECK(tras.rows.size() == 64);

    // an explicit row count overrides the stock sample size
    CHECK(default_plan(Experiment::kRetention, g, 3, 1).rows.size() == 3);
}

TEST_CASE("campaign resolution fills in the blanks") {
    CampaignConfig cfg;
    cfg.experiment = Experiment::kRetention;

    const ResolvedCampaign r = resolve_campaign(cfg);
    CHECK(r.setup.profile.name == "A");
    CHECK(r.setup.temperature_c ==
          doctest::Approx(preset_profile("A").temperature_ref));
    CHECK(r.plan.intervals_ms.size() == 8);
    CHECK(r.jobs == 1);
    CHECK(r.out_dir == ".");

    cfg.experiment = Experiment::kTrcd;
    cfg.profile = "C";
    const ResolvedCampaign t = resolve_campaign(cfg);
    CHECK(t.setup.temperature_c == doctest::Approx(80.0));
    CHECK(t.plan.timing_values.size() == 4);

    cfg.temperature_c = 55.0;
    cfg.intervals_ms = {64.0};
    cfg.timing_values = {4};
    cfg.patterns = {0xAA};
    cfg.row_count = 2;
    const ResolvedCampaign o = resolve_campaign(cfg);
    CHECK(o.setup.temperature_c == doctest::Approx(55.0));
    CHECK(o.plan.intervals_ms == std::vector<double>{64.0});
    CHECK(o.plan.timing_values == std::vector<std::uint32_t>{4});
    CHECK(o.plan.patterns == std::vector<std::uint8_t>{0xAA});
    CHECK(o.plan.rows.size() == 2);

    // resolution still runs the plan checks
    cfg.experiment = Experiment::kRetention;
    CHECK_THROWS_AS(resolve_campaign(cfg), ConfigError);  // timing values set

    CampaignConfig bad;
    bad.temperature_c = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(resolve_campaign(bad), ConfigError);
}

TEST_CASE("campaign JSON covers every knob and rejects the rest") {
    const char* text = R"({
        "experiment": "tras",
        "geometry": {"num_banks": 2, "num_rows": 256, "num_columns": 16,
                     "bytes_per_column": 8},
        "profile": "B",
        "temperature_c": 62.5,
        "seed": 99,
        "intervals_ms": [8, 64],
        "timing_values": [2, 5],
        "patterns": [0, 170],
        "row_count": 6,
        "interleave_width": 2,
        "refresh_mode": "software-clock",
        "out_dir": "out",
        "jobs": 3
    })";
    const CampaignConfig cfg = campaign_from_json_text(text);
    CHECK(cfg.experiment == Experiment::kTras);
    CHECK(cfg.geometry.num_banks == 2);
    CHECK(cfg.geometry.num_rows == 256);
    CHECK(cfg.geometry.num_columns == 16);
    CHECK(cfg.geometry.bytes_per_column == 8);
    CHECK(cfg.profile == "B");
    CHECK(cfg.temperature_c == doctest::Approx(62.5));
    CHECK(cfg.seed == 99);
    CHECK(cfg.intervals_ms == std::vector<double>{8, 64});
    CHECK(cfg.timing_values == std::vector<std::uint32_t>{2, 5});
    CHECK(cfg.patterns == std::vector<std::uint8_t>{0x00, 0xAA});
    CHECK(cfg.row_count == 6);
    CHECK(cfg.interleave_width == 2);
    CHECK(cfg.refresh_mode == RefreshMode::kSoftwareClock);
    CHECK(cfg.out_dir == "out");
    CHECK(cfg.jobs == 3);

    CHECK(campaign_from_json_text("{}").profile == "A");
    CHECK(campaign_from_json_text("{\"refresh_mode\":\"auto\"}")
              .refresh_mode == RefreshMode::kAuto);
    CHECK(campaign_from_json_text("{\"refresh_mode\":\"manual\"}")
              .refresh_mode == RefreshMode::kManual);

    CHECK_THROWS_AS(campaign_from_json_text("nope"), ConfigError);
    CHECK_THROWS_AS(campaign_from_json_text("[]"), ConfigError);
    CHECK_THROWS_AS(campaign_from_json_text("{\"surprise\":1}"),
                    ConfigError);
    CHECK_THROWS_AS(
        campaign_from_json_text("{\"geometry\":{\"rows\":4}}"), ConfigError);
    CHECK_THROWS_AS(
        campaign_from_json_text("{\"experiment\":\"latency\"}"), ConfigError);
    CHECK_THROWS_AS(
        campaign_from_json_text("{\"refresh_mode\":\"hardware\"}"),
        ConfigError);
    CHECK_THROWS_AS(campaign_from_json_text("{\"patterns\":[256]}"),
                    ConfigError);
    CHECK_THROWS_AS(campaign_from_json_text("{\"patterns\":[\"0xFF\"]}"),
                    ConfigError);
    CHECK_THROWS_AS(campaign_from_json_text("{\"seed\":-1}"), ConfigError);
    CHECK_THROWS_AS(campaign_from_json_text("{\"jobs\":2000}"), ConfigError);
    CHECK_THROWS_AS(
        campaign_from_json_text("{\"geometry\":{\"bytes_per_column\":8192}}"),
        ConfigError);
    CHECK_THROWS_AS(campaign_from_json_text("{\"intervals_ms\":[\"8\"]}"),
                    ConfigError);
}

TEST_CASE("summaries report totals and detected thresholds") {
    TestResult r;
    r.experiment = Experiment::kRetention;
    r.profile_name = "A";
    r.temperature_c = 40.0;
    r.rows_tested = 4;
    auto entry = [](double interval, std::uint8_t pattern,
                    std::uint64_t errors) {
        TestResultEntry e;
        e.interval_ms = interval;
        e.pattern = pattern;
        e.erroneous_bytes = errors;
        return e;
    };
    r.entries = {entry(64, 0x00, 0), entry(64, 0xFF, 0),
                 entry(128, 0x00, 0), entry(128, 0xFF, 3),
                 entry(256, 0x00, 5), entry(256, 0xFF, 9)};

    const std::string s = summarize_result(r);
    CHECK(s.find("experiment: retention\n") != std::string::npos);
    CHECK(s.find("profile: A\n") != std::string::npos);
    CHECK(s.find("rows_tested: 4\n") != std::string::npos);
    CHECK(s.find("interval 64 ms: 0 erroneous bytes\n") != std::string::npos);
    CHECK(s.find("interval 128 ms: 3 erroneous bytes\n") !=
          std::string::npos);
    CHECK(s.find("interval 256 ms: 14 erroneous bytes\n") !=
          std::string::npos);
    CHECK(s.find("largest zero-error interval: 64 ms\n") !=
          std::string::npos);

    TestResult lat;
    lat.experiment = Experiment::kTrcd;
    lat.profile_name = "C";
    lat.temperature_c = 80.0;
    auto lentry = [](std::uint32_t timing, std::uint64_t errors) {
        TestResultEntry e;
        e.timing_cycles = timing;
        e.interval_ms = 64;
        e.pattern = 0xFF;
        e.erroneous_bytes = errors;
        return e;
    };
    lat.entries = {lentry(3, 100), lentry(4, 7), lentry(5, 0), lentry(6, 0)};
    const std::string t = summarize_result(lat);
    CHECK(t.find("timing 3, interval 64 ms: 100 erroneous bytes\n") !=
          std::string::npos);
    CHECK(t.find("smallest error-free timing: 5 cycles\n") !=
          std::string::npos);

    lat.entries = {lentry(3, 1), lentry(4, 1)};
    CHECK(summarize_result(lat).find("smallest error-free timing: none\n") !=
          std::string::npos);

    r.entries = {entry(64, 0xFF, 2)};
    CHECK(summarize_result(r).find("largest zero-error interval: none\n") !=
          std::string::npos);
}
