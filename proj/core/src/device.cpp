#include "softmc/device.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "rng_util.hpp"

namespace softmc {

namespace {

// Domain tags keeping the per-cell draws independent of each other.
constexpr std::uint64_t kSaltWeakSelect = 0x77656B73656C6563ull;
constexpr std::uint64_t kSaltRetention = 0x726574656E74696Full;
constexpr std::uint64_t kSaltLayout = 0x6C61796F75746269ull;

// Sensing needs at least this many free cycles after ACT no matter what
// the profile promises; below it reads are unconditionally garbage.
constexpr std::uint32_t kSenseFloorCycles = 3;

} // namespace

double effective_retention_ms(double t_ret_ms, const ModuleProfile& p,
                              double temperature_c, double restore_level) {
    return t_ret_ms *
           std::pow(2.0, (p.temperature_ref - temperature_c) /
                             p.retention_halving_per) *
           restore_level;
}

Device::Device(DeviceGeometry geometry, ModuleProfile profile,
               double temperature_c, std::uint64_t seed)
    : geometry_(geometry), profile_(std::move(profile)),
      temperature_c_(temperature_c), seed_(seed) {
    validate_geometry(geometry_);
    validate_profile(profile_);
    if (!std::isfinite(temperature_c_)) {
        throw ConfigError("temperature must be finite");
    }
    temp_scale_ = std::pow(2.0, (profile_.temperature_ref - temperature_c_) /
                                    profile_.retention_halving_per);
    refresh_group_size_ = (geometry_.num_rows + 8191) / 8192;
    num_refresh_groups_ =
        (geometry_.num_rows + refresh_group_size_ - 1) / refresh_group_size_;
    banks_.resize(geometry_.num_banks);
    rows_.resize(geometry_.rows_total());
    data_.resize(geometry_.bytes_total(), 0);
    written_seq_.resize(geometry_.columns_total(), 0);
}

void Device::reset() {
    now_ps_ = 0;
    std::fill(banks_.begin(), banks_.end(), BankState{});
    std::fill(rows_.begin(), rows_.end(), RowState{});
    std::fill(data_.begin(), data_.end(), std::uint8_t(0));
    std::fill(written_seq_.begin(), written_seq_.end(), std::uint32_t(0));
    next_refresh_group_ = 0;
}

void Device::advance_ps(std::uint64_t ps) { now_ps_ += ps; }

std::uint64_t Device::row_index(std::uint32_t bank, std::uint32_t row) const {
    return std::uint64_t(bank) * geometry_.num_rows + row;
}

std::uint64_t Device::col_index(std::uint32_t bank, std::uint32_t row,
                                std::uint32_t col) const {
    return row_index(bank, row) * geometry_.num_columns + col;
}

std::uint64_t Device::cell_index(std::uint32_t bank, std::uint32_t row,
                                 std::uint32_t col, std::uint32_t bit) const {
    return col_index(bank, row, col) * geometry_.cells_per_column() + bit;
}

double Device::cell_retention_ms(std::uint64_t cell) const {
    if (!retention_overrides_.empty()) {
        auto it = retention_overrides_.find(cell);
        if (it != retention_overrides_.end()) {
            return it->second;
        }
    }
    const double u_sel =
        detail::unit_open(detail::mix3(seed_, cell, kSaltWeakSelect));
    const bool weak = u_sel < profile_.weak_cell_fraction;
    const double mu =
        weak ? profile_.weak_retention_log_mean : profile_.retention_log_mean;
    const double sd =
        weak ? profile_.weak_retention_log_sd : profile_.retention_log_sd;
    const double u_ret =
        detail::unit_open(detail::mix3(seed_, cell, kSaltRetention));
    return std::exp(mu + sd * detail::inverse_normal_cdf(u_ret));
}

bool Device::cell_is_true(std::uint64_t cell) const {
    return detail::mix3(profile_.true_cell_layout_seed, cell, kSaltLayout) & 1;
}

void Device::override_cell_retention(std::uint64_t cell, double t_ret_ms) {
    if (!(t_ret_ms > 0.0)) {
        throw ConfigError("overridden retention must be positive");
    }
    retention_overrides_[cell] = t_ret_ms;
}

bool Device::bank_active(std::uint32_t bank) const {
    return banks_.at(bank).active;
}

std::uint32_t Device::open_row(std::uint32_t bank) const {
    return banks_.at(bank).row;
}

double Device::row_restore_level(std::uint32_t bank, std::uint32_t row) const {
    return rows_.at(row_index(bank, row)).restore_level;
}

double Device::window_demand(const RowState& rs) const {
    const double gap_ms = double(now_ps_ - rs.last_restore_ps) * 1e-9;
    return gap_ms / (temp_scale_ * rs.restore_level);
}

void Device::record_demand(RowState& rs, double demand) {
    rs.seq += 1;
    while (!rs.demand_stack.empty() &&
           rs.demand_stack.back().second <= demand) {
        rs.demand_stack.pop_back();
    }
    rs.demand_stack.emplace_back(rs.seq, demand);
}

double Device::max_demand_since(const RowState& rs,
                                std::uint32_t written_seq) const {
    // First record after the write dominates the whole suffix.
    auto it = std::upper_bound(
        rs.demand_stack.begin(), rs.demand_stack.end(), written_seq,
        [](std::uint32_t s, const std::pair<std::uint32_t, double>& e) {
            return s < e.first;
        });
    return it == rs.demand_stack.end() ? 0.0 : it->second;
}

StepResult Device::step(const Instruction& cmd, const IssueContext& ctx) {
    switch (cmd.op) {
    case Opcode::kAct:
        return do_act(cmd);
    case Opcode::kPre:
        return do_pre(cmd, ctx);
    case Opcode::kRd:
        return do_rd(cmd, ctx);
    case Opcode::kWr:
        return do_wr(cmd);
    case Opcode::kRef:
        return do_ref();
    case Opcode::kWait:
    case Opcode::kEnd:
        throw Error("WAIT/END are not device commands");
    }
    throw Error("unreachable opcode");
}

StepResult Device::do_act(const Instruction& cmd) {
    BankState& bank = banks_[cmd.bank];
    if (bank.active) {
        StepResult r;
        r.status = StepStatus::kFault;
        r.fault = "ACT on bank " + std::to_string(cmd.bank) +
                  " with row " + std::to_string(bank.row) + " already open";
        return r;
    }
    RowState& rs = rows_[row_index(cmd.bank, cmd.row)];
    record_demand(rs, window_demand(rs));
    bank.active = true;
    bank.row = cmd.row;
    return StepResult{};
}

StepResult Device::do_pre(const Instruction& cmd, const IssueContext& ctx) {
    BankState& bank = banks_[cmd.bank];
    if (!bank.active) {
        // Precharging an idle bank is a harmless no-op.
        return StepResult{};
    }
    RowState& rs = rows_[row_index(cmd.bank, bank.row)];
    if (ctx.tras_used < 2) {
        // The restore was cut off before the amps could drive anything
        // back: every charged cell of the row is lost.
        record_demand(rs, std::numeric_limits<double>::infinity());
        rs.restore_level = 1.0;
    } else {
        rs.restore_level = std::min(
            1.0, double(ctx.tras_used) / double(profile_.min_safe_tras));
    }
    rs.last_restore_ps = now_ps_;
    bank.active = false;
    return StepResult{};
}

StepResult Device::do_rd(const Instruction& cmd, const IssueContext& ctx) {
    StepResult r;
    BankState& bank = banks_[cmd.bank];
    if (!bank.active) {
        r.status = StepStatus::kFault;
        r.fault = "RD on idle bank " + std::to_string(cmd.bank);
        r.data.assign(geometry_.bytes_per_column, 0);
        return r;
    }
    const std::uint32_t row = bank.row;
    const RowState& rs = rows_[row_index(cmd.bank, row)];

    enum class Tier { kSafe, kMarginal, kCorrupt };
    Tier tier;
    if (ctx.trcd_used >= profile_.min_safe_trcd) {
        tier = Tier::kSafe;
    } else if (ctx.trcd_used + 1 == profile_.min_safe_trcd &&
               ctx.trcd_used > kSenseFloorCycles) {
        tier = Tier::kMarginal;
    } else {
        tier = Tier::kCorrupt;
    }

    const std::uint64_t ci = col_index(cmd.bank, row, cmd.col);
    const std::uint32_t wseq = written_seq_[ci];
    const double max_demand = wseq > 0 ? max_demand_since(rs, wseq) : 0.0;

    r.status = StepStatus::kData;
    r.data.reserve(geometry_.bytes_per_column);
    for (std::uint32_t byte = 0; byte < geometry_.bytes_per_column; ++byte) {
        const std::uint8_t stored =
            data_[ci * geometry_.bytes_per_column + byte];
        std::uint8_t out = 0;
        for (std::uint32_t bit = 0; bit < 8; ++bit) {
            const std::uint64_t cell =
                cell_index(cmd.bank, row, cmd.col, byte * 8 + bit);
            const std::uint8_t discharged = cell_is_true(cell) ? 0 : 1;
            bool have_ret = false;
            double ret = 0.0;
            auto retention = [&] {
                if (!have_ret) {
                    ret = cell_retention_ms(cell);
                    have_ret = true;
                }
                return ret;
            };

            std::uint8_t value;
            if (wseq == 0) {
                value = discharged;
            } else {
                const std::uint8_t sbit = (stored >> bit) & 1;
                if (sbit == discharged || max_demand <= 0.0) {
                    value = sbit;
                } else {
                    value = max_demand > retention() ? discharged : sbit;
                }
            }

            bool flip = false;
            if (tier == Tier::kCorrupt) {
                flip = true;
            } else if (tier == Tier::kMarginal && value != discharged) {
                // Margin is set by the worst discharge window the cell
                // survived since its write; discharged cells sit at the
                // far rail and cannot mis-sense.
                double q = 1.0;
                if (max_demand > 0.0) {
                    q = max_demand >= retention()
                            ? 0.0
                            : 1.0 - max_demand / retention();
                }
                flip = q < profile_.marginal_charge_threshold;
            }
            if (flip) {
                value ^= 1;
            }
            out = std::uint8_t(out | (value << bit));
        }
        r.data.push_back(out);
    }
    return r;
}

StepResult Device::do_wr(const Instruction& cmd) {
    BankState& bank = banks_[cmd.bank];
    if (!bank.active) {
        StepResult r;
        r.status = StepStatus::kFault;
        r.fault = "WR on idle bank " + std::to_string(cmd.bank);
        return r;
    }
    const std::uint64_t ci = col_index(cmd.bank, bank.row, cmd.col);
    std::memset(data_.data() + ci * geometry_.bytes_per_column, cmd.pattern,
                geometry_.bytes_per_column);
    written_seq_[ci] = rows_[row_index(cmd.bank, bank.row)].seq;
    return StepResult{};
}

StepResult Device::do_ref() {
    for (std::uint32_t b = 0; b < geometry_.num_banks; ++b) {
        if (banks_[b].active) {
            StepResult r;
            r.status = StepStatus::kFault;
            r.fault = "REF with bank " + std::to_string(b) + " open";
            return r;
        }
    }
    const std::uint32_t first = next_refresh_group_ * refresh_group_size_;
    const std::uint32_t last =
        std::min(first + refresh_group_size_, geometry_.num_rows);
    for (std::uint32_t b = 0; b < geometry_.num_banks; ++b) {
        for (std::uint32_t row = first; row < last; ++row) {
            refresh_row(b, row);
        }
    }
    next_refresh_group_ = (next_refresh_group_ + 1) % num_refresh_groups_;
    return StepResult{};
}

void Device::refresh_row(std::uint32_t bank, std::uint32_t row) {
    RowState& rs = rows_[row_index(bank, row)];
    record_demand(rs, window_demand(rs));
    rs.restore_level = 1.0;
    rs.last_restore_ps = now_ps_;
}

std::uint64_t count_erroneous_bytes(const std::vector<std::uint8_t>& expected,
                                    const std::vector<std::uint8_t>& observed) {
    if (expected.size() != observed.size()) {
        throw Error("expected/observed byte spans differ in length");
    }
    std::uint64_t n = 0;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        n += expected[i] != observed[i];
    }
    return n;
}

std::uint64_t count_erroneous_bytes(std::uint8_t pattern,
                                    const std::vector<std::uint8_t>& observed) {
    std::uint64_t n = 0;
    for (std::uint8_t b : observed) {
        n += b != pattern;
    }
    return n;
}

} // namespace softmc
