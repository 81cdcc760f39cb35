#ifndef SOFTMC_ROUTINES_HPP
#define SOFTMC_ROUTINES_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "softmc/backend.hpp"
#include "softmc/device.hpp"
#include "softmc/timing.hpp"

namespace softmc {

enum class Experiment : std::uint8_t { kRetention, kTrcd, kTras };
const char* experiment_name(Experiment e);

struct RowAddr {
    std::uint32_t bank = 0;
    std::uint32_t row = 0;
    bool operator==(const RowAddr&) const = default;
};

/// How rows are kept alive while an interval elapses.
///   kSoftwareClock  no refresh at all; the routine times the read-back
///                   itself (auto-refresh disabled, the default)
///   kAuto           the backend's engine refreshes every row once per
///                   interval (tREFI = interval / refresh groups)
///   kManual         the routine issues REF programs itself at exactly
///                   the cycles the engine would pick
enum class RefreshMode : std::uint8_t { kSoftwareClock, kAuto, kManual };

struct ExperimentPlan {
    std::vector<double> intervals_ms;
    /// tRCD or tRAS values under test; unused by the retention routine.
    std::vector<std::uint32_t> timing_values;
    std::vector<std::uint8_t> patterns;
    std::vector<RowAddr> rows;
    /// Rows processed together between waits.
    std::uint32_t interleave_width = 1;
    RefreshMode refresh_mode = RefreshMode::kSoftwareClock;
};

/// Throws ConfigError on empty axes, nonpositive intervals, addresses
/// outside the geometry, zero timing values where the experiment needs
/// them, or a refresh mode on a latency experiment.
void validate_plan(const ExperimentPlan& plan, Experiment experiment,
                   const DeviceGeometry& geometry);

/// Evenly spread row sample: rows cycle through banks round-robin and
/// step through the row space.
std::vector<RowAddr> select_rows(const DeviceGeometry& g, std::uint32_t count);

/// Everything needed to build the module under test.
struct DeviceSetup {
    DeviceGeometry geometry;
    ModuleProfile profile;
    double temperature_c = 40.0;
    std::uint64_t seed = 1;
    /// Retention pins (cell index -> reference retention in ms) applied
    /// to every device built from this setup.
    std::vector<std::pair<std::uint64_t, double>> retention_overrides;
};

struct TestResultEntry {
    /// Engaged for the latency experiments only.
    std::optional<std::uint32_t> timing_cycles;
    double interval_ms = 0;
    std::uint8_t pattern = 0;
    std::uint64_t erroneous_bytes = 0;
    /// Order-insensitive digest of every read-back byte, for
    /// bit-identity comparisons. Not part of the CSV schema.
    std::uint64_t payload_digest = 0;
};

struct TestResult {
    Experiment experiment = Experiment::kRetention;
    std::string profile_name;
    double temperature_c = 0;
    std::uint64_t rows_tested = 0;
    std::vector<TestResultEntry> entries;
};

/// CSV rendering, header included:
///   experiment,profile,temperature_c,timing_cycles,interval_ms,pattern,erroneous_bytes
/// Rows are sorted by (timing_cycles, interval_ms, pattern); the
/// timing_cycles field is empty for retention results.
std::string result_to_csv(const TestResult& r);

// -- host programs -------------------------------------------------------
// Builders for the canonical per-row and per-column programs. All waits
// are sized so the lowered trace is exactly tight against the validator
// with the same parameter set.

/// ACT, WAIT(tRCD), {WR, WAIT(tBL)} per column, WAIT(tCL+tWR), PRE,
/// WAIT(tRP), END -- 3 + 2*columns + 4 instructions.
InstructionSequence build_write_row_sequence(const DeviceGeometry& g,
                                             const TimingParams& p,
                                             std::uint32_t bank,
                                             std::uint32_t row,
                                             std::uint8_t pattern);

/// Same shape with RDs, reading under trcd cycles of ACT-to-RD spacing.
InstructionSequence build_read_row_sequence(const DeviceGeometry& g,
                                            const TimingParams& p,
                                            std::uint32_t bank,
                                            std::uint32_t row,
                                            std::uint32_t trcd);

/// ACT, WAIT(tRCD), WR, WAIT(tCL+tWR), PRE, WAIT(tRP), END
InstructionSequence build_write_col_sequence(const DeviceGeometry& g,
                                             const TimingParams& p,
                                             std::uint32_t bank,
                                             std::uint32_t row,
                                             std::uint32_t col,
                                             std::uint8_t pattern);

/// ACT, WAIT(trcd), RD, WAIT(tCL+tWR), PRE, WAIT(tRP), END
InstructionSequence build_read_col_sequence(const DeviceGeometry& g,
                                            const TimingParams& p,
                                            std::uint32_t bank,
                                            std::uint32_t row,
                                            std::uint32_t col,
                                            std::uint32_t trcd);

/// ACT, WAIT(tras), PRE, WAIT(tRP), END -- restores a row with a chosen
/// activate-to-precharge spacing.
InstructionSequence build_restore_sequence(const DeviceGeometry& g,
                                           const TimingParams& p,
                                           std::uint32_t bank,
                                           std::uint32_t row,
                                           std::uint32_t tras);

// -- experiment routines -------------------------------------------------
// Each plan cell (timing value x interval x pattern) runs on a fresh
// device built from the same setup, so cells are order-independent and
// may run on up to jobs worker threads; results are byte-identical for
// any jobs count. Every row trial experiences its interval exactly: the
// routines schedule programs on a fixed cycle pitch and place read-backs
// precisely interval-after-restore, so interleave_width only regroups
// work and cannot change any count.

/// Write pattern, idle for the interval, read back with default timings;
/// one entry per (interval, pattern).
TestResult retention_test(const DeviceSetup& setup,
                          const ExperimentPlan& plan, unsigned jobs = 1);

/// Per (row, column): write with default timings, idle for the
/// interval, read with the ACT-to-RD spacing under test. One entry per
/// (tRCD value, interval, pattern).
TestResult trcd_test(const DeviceSetup& setup, const ExperimentPlan& plan,
                     unsigned jobs = 1);

/// Per row: write with default timings, idle for the interval, restore
/// with the ACT-to-PRE spacing under test, idle for the interval again,
/// read with default timings. One entry per (tRAS value, interval,
/// pattern).
TestResult tras_test(const DeviceSetup& setup, const ExperimentPlan& plan,
                     unsigned jobs = 1);

TestResult run_experiment(Experiment e, const DeviceSetup& setup,
                          const ExperimentPlan& plan, unsigned jobs = 1);

} // namespace softmc

#endif
