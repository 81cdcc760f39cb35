#ifndef SOFTMC_PROFILE_HPP
#define SOFTMC_PROFILE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "softmc/errors.hpp"

namespace softmc {

/// Per-module behavioral parameters of the cell model.
///
/// Retention times are sampled per cell from a two-population lognormal
/// mixture: with probability weak_cell_fraction the weak population
/// (weak_retention_log_mean/sd), otherwise the strong population
/// (retention_log_mean/sd). The log-parameters are the mean/sd of
/// ln(retention in milliseconds) at temperature_ref.
struct ModuleProfile {
    std::string name = "default";

    /// Smallest ACT->RD spacing (cycles) that senses reliably.
    std::uint32_t min_safe_trcd = 4;
    /// Smallest ACT->PRE spacing (cycles) that restores fully.
    std::uint32_t min_safe_tras = 5;

    /// Charge fraction a read needs when issued one cycle short of
    /// min_safe_trcd (the marginal tier). In [0,1].
    double marginal_charge_threshold = 0.05;

    double retention_log_mean = 11.6952;  ///< strong population, ln(ms)
    double retention_log_sd = 0.45;
    double weak_cell_fraction = 0.0;      ///< in [0,1]
    double weak_retention_log_mean = 9.0655;
    double weak_retention_log_sd = 0.55;

    double temperature_ref = 40.0;        ///< Celsius
    /// Retention halves for every this many degrees above temperature_ref.
    double retention_halving_per = 10.0;

    /// Seed of the fixed true-/anti-cell layout. Orientation is a pure
    /// function of (this seed, cell index), so it is stable across
    /// device rebuilds with different sampling seeds.
    std::uint64_t true_cell_layout_seed = 0xA5A5;

    bool operator==(const ModuleProfile&) const = default;
};

/// Throws ConfigError on out-of-range fields (fractions and the
/// marginal threshold in [0,1], positive sigmas and halving interval,
/// nonzero min-safe values).
void validate_profile(const ModuleProfile& p);

ModuleProfile profile_from_json_text(const std::string& text);
std::string profile_to_json_text(const ModuleProfile& p);

/// Built-in presets "A", "B" and "C" (also shipped as profile_A.json,
/// profile_B.json, profile_C.json). A and B sense reliably down to
/// tRCD=4, C only down to 5; all three restore fully down to tRAS=5.
ModuleProfile preset_profile(const std::string& name);
std::vector<std::string> preset_profile_names();

/// Resolves --profile arguments: a preset name is looked up under
/// profile_dir (or the SOFTMC_SIM_PROFILE_DIR environment variable when
/// profile_dir is empty) as profile_<name>.json, falling back to the
/// built-in preset; anything else is treated as a file path.
ModuleProfile load_profile(const std::string& name_or_path,
                           const std::string& profile_dir = "");

} // namespace softmc

#endif
