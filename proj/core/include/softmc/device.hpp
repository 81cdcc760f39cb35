#ifndef SOFTMC_DEVICE_HPP
#define SOFTMC_DEVICE_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "softmc/geometry.hpp"
#include "softmc/isa.hpp"
#include "softmc/profile.hpp"

namespace softmc {

/// Timing actually used by the program around a command, derived by the
/// backend from inter-command cycle distances: trcd_used is the free
/// cycles between a bank's ACT and a RD, tras_used between ACT and PRE.
struct IssueContext {
    std::uint32_t trcd_used = 0xFFFFFFFFu;
    std::uint32_t tras_used = 0xFFFFFFFFu;
};

enum class StepStatus : std::uint8_t {
    kOk = 0,    ///< command applied, no payload
    kData = 1,  ///< RD payload in data
    kFault = 2, ///< protocol fault recorded; execution continues
};

struct StepResult {
    StepStatus status = StepStatus::kOk;
    std::vector<std::uint8_t> data;  ///< bytes_per_column bytes for RD
    std::string fault;               ///< description when status == kFault
};

/// Retention of a cell at the given temperature and restore level:
///   T_ret * 2^((temperature_ref - temperature) / retention_halving_per)
///         * restore_level
double effective_retention_ms(double t_ret_ms, const ModuleProfile& p,
                              double temperature_c, double restore_level);

/// Behavioral DRAM module with a per-cell charge/retention fault model.
///
/// Cells are lazily derived: retention times and true-/anti-cell
/// orientation are pure functions of (seed, cell index) and
/// (true_cell_layout_seed, cell index), so a device built twice from the
/// same inputs is identical and no per-cell tables are stored.
///
/// Charge loss is tracked per row as a monotone "demand" history: a
/// closed-row interval of length g at restore level L and temperature
/// scale s kills every cell whose reference retention is below
/// g / (s * L). Demands are recorded when an interval closes (at ACT and
/// at REF), and a cell compares its retention against the largest demand
/// recorded since the cell was last written. A lost cell reads (and is
/// destructively rewritten to) its discharged value: 0 for a true cell,
/// 1 for an anti cell. Cells already storing their discharged value hold
/// no charge and cannot decay.
///
/// Reads additionally model the sense stage. A cell that still holds
/// charge carries the margin q = 1 - demand/retention, with demand the
/// largest discharge window it survived since it was last written
/// (freshly written cells have q = 1); discharged cells sit at the far
/// rail and always sense with full margin. A read senses correctly when
///   trcd_used >= min_safe_trcd                           (any q)
/// senses marginally when
///   trcd_used == min_safe_trcd - 1 and trcd_used > 3     (q < q0 fails)
/// and always returns corrupted data otherwise: below min_safe_trcd - 1,
/// and at or below the fixed internal sense latency of 3 cycles that the
/// device enforces regardless of the profile. Sense failures flip the
/// returned bits only (non-destructive).
///
/// PRE restores the open row to restore_level = min(1, tras_used /
/// min_safe_tras); tras_used below 2 cycles corrupts the whole row (an
/// infinite demand) instead. REF fully restores the next refresh group
/// (ceil(num_rows / 8192) row indices, all banks) round-robin.
///
/// Commands on banks in the wrong state (RD/WR/ACT on an already
/// active/idle bank, REF over an open bank) are recorded as protocol
/// faults and never abort the simulation; a faulted RD returns all-zero
/// bytes since no row is open to sense.
class Device {
public:
    Device(DeviceGeometry geometry, ModuleProfile profile,
           double temperature_c, std::uint64_t seed);

    /// Forgets all data and bank/restore state, as freshly built.
    /// Sampling inputs (and hence the cell population) are unchanged.
    void reset();

    // -- simulated clock --------------------------------------------------
    void advance_ps(std::uint64_t ps);
    std::uint64_t now_ps() const { return now_ps_; }
    double now_ms() const { return double(now_ps_) * 1e-9; }

    /// Applies one DRAM command (ACT/PRE/RD/WR/REF) at the current
    /// simulated time. WAIT/END are not commands and are rejected.
    StepResult step(const Instruction& cmd, const IssueContext& ctx);

    // -- cell population --------------------------------------------------
    std::uint64_t cell_index(std::uint32_t bank, std::uint32_t row,
                             std::uint32_t col, std::uint32_t bit) const;
    /// Reference-temperature retention in ms.
    double cell_retention_ms(std::uint64_t cell) const;
    /// True cells store charge for logical 1, anti cells for logical 0.
    bool cell_is_true(std::uint64_t cell) const;

    /// Pins one cell's reference retention, for experiments and tests.
    void override_cell_retention(std::uint64_t cell, double t_ret_ms);

    // -- introspection ----------------------------------------------------
    const DeviceGeometry& geometry() const { return geometry_; }
    const ModuleProfile& profile() const { return profile_; }
    double temperature_c() const { return temperature_c_; }
    std::uint64_t seed() const { return seed_; }
    /// 2^((temperature_ref - temperature) / retention_halving_per)
    double temperature_scale() const { return temp_scale_; }
    bool bank_active(std::uint32_t bank) const;
    std::uint32_t open_row(std::uint32_t bank) const;
    std::uint32_t refresh_group_size() const { return refresh_group_size_; }
    std::uint32_t num_refresh_groups() const { return num_refresh_groups_; }
    double row_restore_level(std::uint32_t bank, std::uint32_t row) const;

private:
    struct RowState {
        std::uint64_t last_restore_ps = 0;
        double restore_level = 1.0;
        /// Number of demand records so far.
        std::uint32_t seq = 0;
        /// Suffix-max stack over the demand history: (seq, demand) with
        /// seq increasing and demand strictly decreasing, so the first
        /// entry after a write's seq holds the max demand since it.
        std::vector<std::pair<std::uint32_t, double>> demand_stack;
    };

    struct BankState {
        bool active = false;
        std::uint32_t row = 0;
    };

    std::uint64_t row_index(std::uint32_t bank, std::uint32_t row) const;
    std::uint64_t col_index(std::uint32_t bank, std::uint32_t row,
                            std::uint32_t col) const;
    double window_demand(const RowState& rs) const;
    void record_demand(RowState& rs, double demand);
    double max_demand_since(const RowState& rs, std::uint32_t written_seq) const;
    void refresh_row(std::uint32_t bank, std::uint32_t row);

    StepResult do_act(const Instruction& cmd);
    StepResult do_pre(const Instruction& cmd, const IssueContext& ctx);
    StepResult do_rd(const Instruction& cmd, const IssueContext& ctx);
    StepResult do_wr(const Instruction& cmd);
    StepResult do_ref();

    DeviceGeometry geometry_;
    ModuleProfile profile_;
    double temperature_c_;
    std::uint64_t seed_;
    double temp_scale_;

    std::uint64_t now_ps_ = 0;
    std::vector<BankState> banks_;
    std::vector<RowState> rows_;
    /// Stored bytes; meaningful only where written_seq_ > 0.
    std::vector<std::uint8_t> data_;
    /// Per column: row demand count at the time of the last WR
    /// (0 = never written).
    std::vector<std::uint32_t> written_seq_;

    std::uint32_t refresh_group_size_;
    std::uint32_t num_refresh_groups_;
    std::uint32_t next_refresh_group_ = 0;

    std::unordered_map<std::uint64_t, double> retention_overrides_;
};

/// Number of positions where observed differs from expected.
/// Throws Error when the spans have different lengths.
std::uint64_t count_erroneous_bytes(const std::vector<std::uint8_t>& expected,
                                    const std::vector<std::uint8_t>& observed);
/// Same, against a repeated single-byte pattern.
std::uint64_t count_erroneous_bytes(std::uint8_t pattern,
                                    const std::vector<std::uint8_t>& observed);

} // namespace softmc

#endif
