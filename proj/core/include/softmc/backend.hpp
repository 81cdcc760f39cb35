#ifndef SOFTMC_BACKEND_HPP
#define SOFTMC_BACKEND_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "softmc/device.hpp"
#include "softmc/timing.hpp"

namespace softmc {

/// Host-side execution settings.
struct ExecutionConfig {
    double clock_period_ns = kDefaultClockPeriodNs;
    bool auto_refresh = false;
    /// REF-to-REF spacing of the auto-refresh engine, in cycles.
    std::uint32_t trefi = 3120;
    /// Reserved for stochastic transports; the simulator is deterministic
    /// and does not consume it.
    std::uint64_t rng_seed = 0;
};

struct ReadPayload {
    std::uint8_t bank = 0;
    std::uint16_t col = 0;
    std::vector<std::uint8_t> bytes;

    bool operator==(const ReadPayload&) const = default;
};

struct ExecutionResult {
    std::vector<ReadPayload> reads;
    /// Cycles consumed by the sequence, auto-refresh pauses included.
    std::uint64_t final_cycle = 0;
    std::vector<std::string> faults;
};

/// JSON rendering of an ExecutionResult (payload bytes hex-encoded).
std::string execution_result_to_json_text(const ExecutionResult& r);

/// Abstract execution interface of the host API. The behavioral
/// simulator below is the only shipped transport.
class ExecutionPort {
public:
    virtual ~ExecutionPort() = default;

    /// Runs a sealed sequence: lowers it and issues the DRAM commands in
    /// order (no reordering), at their lowered cycle offsets.
    virtual ExecutionResult execute(const InstructionSequence& seq) = 0;

    /// Idles the device for the given wall-clock duration.
    virtual void advance_time(double milliseconds) = 0;
};

/// Drives a Device. Owns the controller cycle counter and, when
/// configured, an auto-refresh engine that keeps consecutive REFs
/// exactly trefi cycles apart, pausing user commands that would land
/// inside a refresh's tRFC window (tRFC from default_ddr3_params()).
///
/// The backend derives trcd_used for each RD and tras_used for each PRE
/// as the free-cycle distance from the most recent ACT on that bank
/// (cycle difference minus one, i.e. the WAIT the program placed after
/// the ACT).
class SimBackend : public ExecutionPort {
public:
    SimBackend(Device& device, ExecutionConfig config = {});

    ExecutionResult execute(const InstructionSequence& seq) override;
    void advance_time(double milliseconds) override;

    /// Advances exactly n controller cycles.
    void advance_cycles(std::uint64_t n);
    /// Advances so the next user command issues at the given cycle.
    /// Throws Error when the target lies in the past.
    void advance_to_cycle(std::uint64_t cycle);

    std::uint64_t now_cycle() const { return now_cycle_; }
    const ExecutionConfig& config() const { return config_; }
    /// Cycle the next auto-refresh is due at (meaningful only with
    /// auto_refresh enabled).
    std::uint64_t next_refresh_due() const { return next_ref_cycle_; }
    Device& device() { return device_; }

private:
    std::uint64_t ps_per_cycle() const;
    /// Issues due REFs and returns the earliest cycle >= target at which
    /// a user command may issue.
    std::uint64_t run_refresh_until(std::uint64_t target,
                                    std::vector<std::string>* faults);
    /// Issues every REF due at or before limit without pushing anything.
    void drain_refresh(std::uint64_t limit, std::vector<std::string>* faults);
    void issue_ref(std::uint64_t cycle, std::vector<std::string>* faults);
    void move_clock_to(std::uint64_t cycle);

    Device& device_;
    ExecutionConfig config_;
    std::uint64_t now_cycle_ = 0;
    std::uint64_t next_ref_cycle_ = 0;
    /// Earliest cycle a user command may occupy (tRFC floor after REF).
    std::uint64_t min_user_cycle_ = 0;
    std::uint32_t trfc_;
    std::vector<std::uint64_t> last_act_cycle_;
    std::vector<bool> act_seen_;
};

} // namespace softmc

#endif
