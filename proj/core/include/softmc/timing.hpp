#ifndef SOFTMC_TIMING_HPP
#define SOFTMC_TIMING_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "softmc/isa.hpp"

namespace softmc {

/// Controller clock period the default parameter set is derived for
/// (400 MHz DDR3-800 command clock).
inline constexpr double kDefaultClockPeriodNs = 2.5;

/// DDR timing parameters, in controller cycles. All values are >= 1.
struct TimingParams {
    std::uint32_t tRCD = 6;   ///< ACT -> first RD/WR of the open row
    std::uint32_t tRAS = 14;  ///< ACT -> PRE of the same bank
    std::uint32_t tRP = 6;    ///< PRE -> next ACT of the same bank
    std::uint32_t tWR = 6;    ///< write recovery before PRE
    std::uint32_t tCL = 6;    ///< data latency
    std::uint32_t tBL = 4;    ///< burst occupancy between column commands
    std::uint32_t tRFC = 44;  ///< REF -> any following command
    std::uint32_t tREFI = 3120;  ///< nominal REF-to-REF period (7.8 us)

    bool operator==(const TimingParams&) const = default;
};

/// Throws ConfigError if any parameter is zero.
void validate_params(const TimingParams& p);

TimingParams default_ddr3_params();

/// A DRAM command pinned to its issue cycle. Only ACT/PRE/RD/WR/REF
/// appear in traces; WAIT and END are consumed by lowering.
struct TraceEntry {
    std::uint64_t cycle = 0;
    Instruction cmd;
    bool operator==(const TraceEntry&) const = default;
};

using CommandTrace = std::vector<TraceEntry>;

/// Lowers a sealed sequence to a cycle-annotated trace. Each non-WAIT
/// instruction occupies one cycle; WAIT(n) advances the counter by n.
/// Commands are kept in program order (no reordering).
/// Throws Error if the sequence is not sealed.
CommandTrace lower_sequence(const InstructionSequence& seq);

/// One violated spacing rule. For the minimum-spacing rules observed is
/// the number of free cycles between the two commands (later - earlier
/// - 1) and is < required; for "refresh-interval-exceeded" observed is
/// the REF-to-REF period (later - earlier) and exceeds required (tREFI).
struct TimingViolation {
    std::string rule;
    std::uint8_t bank = 0;
    std::uint64_t earlier_cycle = 0;
    std::uint64_t later_cycle = 0;
    std::uint64_t required = 0;
    std::uint64_t observed = 0;

    bool operator==(const TimingViolation&) const = default;
};

/// Checks a trace against the parameter set and returns all violations
/// sorted by later_cycle. Advisory only: nothing blocks execution.
///
/// Per-bank rules (each command is checked against its most recent
/// relevant predecessor on the same bank):
///   "tRCD"     ACT -> RD/WR       >= tRCD
///   "tRAS"     ACT -> PRE         >= tRAS
///   "tRP"      PRE -> ACT         >= tRP
///   "tBL"      RD/WR -> RD/WR     >= tBL
///   "tCL+tWR"  WR -> PRE          >= tBL + tCL + tWR
/// Rank-wide rules:
///   "tRFC"     REF -> any command >= tRFC
///   "refresh-interval-exceeded"  REF-to-REF period > tREFI
std::vector<TimingViolation> validate(const CommandTrace& trace,
                                      const TimingParams& params);

/// Text trace format: one command per line,
///   <cycle> <CMD> [b=<bank>] [r=<row>] [c=<col>]
std::string format_trace(const CommandTrace& trace);

/// Parses the text trace format. Throws ParseError carrying the
/// offending 1-based line number.
CommandTrace parse_trace(std::istream& in);
CommandTrace parse_trace_text(const std::string& text);

/// CSV rendering of violations, header included:
///   rule,bank,earlier_cycle,later_cycle,required,observed
std::string violations_csv(const std::vector<TimingViolation>& violations);

/// JSON (de)serialization for params files: an object keyed by the
/// field names, e.g. {"tRCD":6,...}. Missing keys keep their defaults.
TimingParams params_from_json_text(const std::string& text);
std::string params_to_json_text(const TimingParams& p);

} // namespace softmc

#endif
