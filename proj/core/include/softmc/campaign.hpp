#ifndef SOFTMC_CAMPAIGN_HPP
#define SOFTMC_CAMPAIGN_HPP

#include <limits>
#include <string>

#include "softmc/routines.hpp"

namespace softmc {

/// A complete, file-configurable experiment run.
struct CampaignConfig {
    Experiment experiment = Experiment::kRetention;
    DeviceGeometry geometry;
    /// Preset name or profile file path (resolved via load_profile).
    std::string profile = "A";
    /// NaN selects the per-experiment default: temperature_ref for
    /// retention, 80 C for the latency experiments.
    double temperature_c = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t seed = 1;
    /// Empty axes select the per-experiment defaults.
    std::vector<double> intervals_ms;
    std::vector<std::uint32_t> timing_values;
    std::vector<std::uint8_t> patterns;
    std::uint32_t row_count = 0;  ///< 0 selects the default sample size
    std::uint32_t interleave_width = 4;
    RefreshMode refresh_mode = RefreshMode::kSoftwareClock;
    std::string out_dir = ".";
    unsigned jobs = 1;
};

/// Default plan axes matching the published methodology: retention
/// sweeps 64..8192 ms doubling; tRCD sweeps 3..6 cycles over 1..512 ms;
/// tRAS sweeps 2..14 cycles over 8..512 ms.
ExperimentPlan default_plan(Experiment e, const DeviceGeometry& g,
                            std::uint32_t row_count, std::uint32_t interleave);
double default_temperature(Experiment e, const ModuleProfile& profile);

/// Applies defaults for unset fields and resolves the profile.
/// Throws ConfigError / ParseError on invalid input.
struct ResolvedCampaign {
    Experiment experiment;
    DeviceSetup setup;
    ExperimentPlan plan;
    std::string out_dir;
    unsigned jobs;
};
ResolvedCampaign resolve_campaign(const CampaignConfig& cfg,
                                  const std::string& profile_dir = "");

/// Parses a JSON campaign document; unknown keys are rejected.
CampaignConfig campaign_from_json_text(const std::string& text);

/// Runs the campaign and writes <experiment>.csv and summary.txt into
/// out_dir. Returns the result. Throws IoError when out_dir is not
/// writable.
TestResult run_campaign(const CampaignConfig& cfg,
                        const std::string& profile_dir = "");

/// The summary rendered for a result: per-interval totals plus
/// threshold detections (largest zero-error interval; smallest
/// error-free timing value for the latency experiments).
std::string summarize_result(const TestResult& r);

} // namespace softmc

#endif
