#include "softmc/routines.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "rng_util.hpp"

namespace softmc {

const char* experiment_name(Experiment e) {
    switch (e) {
    case Experiment::kRetention: return "retention";
    case Experiment::kTrcd: return "trcd";
    case Experiment::kTras: return "tras";
    }
    return "?";
}

void validate_plan(const ExperimentPlan& plan, Experiment experiment,
                   const DeviceGeometry& geometry) {
    if (plan.intervals_ms.empty()) {
        throw ConfigError("plan needs at least one interval");
    }
    for (double i : plan.intervals_ms) {
        if (!(i > 0.0) || !std::isfinite(i) || i > 1e9) {
            throw ConfigError(
                "intervals must be positive and at most 1e9 ms");
        }
    }
    if (plan.patterns.empty()) {
        throw ConfigError("plan needs at least one pattern");
    }
    if (plan.rows.empty()) {
        throw ConfigError("plan needs at least one row");
    }
    for (const RowAddr& r : plan.rows) {
        if (r.bank >= geometry.num_banks || r.row >= geometry.num_rows) {
            throw ConfigError("row address (" + std::to_string(r.bank) + "," +
                              std::to_string(r.row) +
                              ") outside the device geometry");
        }
    }
    if (plan.interleave_width == 0) {
        throw ConfigError("interleave width must be at least 1");
    }
    if (experiment == Experiment::kRetention) {
        if (!plan.timing_values.empty()) {
            throw ConfigError("retention runs take no timing values");
        }
    } else {
        if (plan.timing_values.empty()) {
            throw ConfigError("latency experiments need timing values");
        }
        for (std::uint32_t t : plan.timing_values) {
            if (t == 0 || t > kMaxWaitCycles) {
                throw ConfigError("timing values must be in 1..=" +
                                  std::to_string(kMaxWaitCycles));
            }
        }
        if (plan.refresh_mode != RefreshMode::kSoftwareClock) {
            throw ConfigError("refresh modes apply to retention runs only");
        }
    }
}

std::vector<RowAddr> select_rows(const DeviceGeometry& g,
                                 std::uint32_t count) {
    if (count == 0) {
        throw ConfigError("row count must be at least 1");
    }
    if (count > g.rows_total()) {
        throw ConfigError("row count exceeds the device row space");
    }
    std::vector<RowAddr> rows;
    rows.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        rows.push_back(RowAddr{
            i % g.num_banks,
            std::uint32_t(std::uint64_t(i) * g.num_rows / count)});
    }
    return rows;
}

InstructionSequence build_write_row_sequence(const DeviceGeometry& g,
                                             const TimingParams& p,
                                             std::uint32_t bank,
                                             std::uint32_t row,
                                             std::uint8_t pattern) {
    validate_params(p);
    InstructionSequence s(g);
    s.insert(gen_act(bank, row));
    s.insert(gen_wait(p.tRCD));
    for (std::uint32_t c = 0; c < g.num_columns; ++c) {
        s.insert(gen_wr(bank, c, pattern));
        s.insert(gen_wait(p.tBL));
    }
    s.insert(gen_wait(p.tCL + p.tWR));
    s.insert(gen_pre(bank));
    s.insert(gen_wait(p.tRP));
    s.insert(gen_end());
    return s;
}

InstructionSequence build_read_row_sequence(const DeviceGeometry& g,
                                            const TimingParams& p,
                                            std::uint32_t bank,
                                            std::uint32_t row,
                                            std::uint32_t trcd) {
    validate_params(p);
    InstructionSequence s(g);
    s.insert(gen_act(bank, row));
    s.insert(gen_wait(trcd));
    for (std::uint32_t c = 0; c < g.num_columns; ++c) {
        s.insert(gen_rd(bank, c));
        s.insert(gen_wait(p.tBL));
    }
    s.insert(gen_wait(p.tCL + p.tWR));
    s.insert(gen_pre(bank));
    s.insert(gen_wait(p.tRP));
    s.insert(gen_end());
    return s;
}

InstructionSequence build_write_col_sequence(const DeviceGeometry& g,
                                             const TimingParams& p,
                                             std::uint32_t bank,
                                             std::uint32_t row,
                                             std::uint32_t col,
                                             std::uint8_t pattern) {
    validate_params(p);
    InstructionSequence s(g);
    s.insert(gen_act(bank, row));
    s.insert(gen_wait(p.tRCD));
    s.insert(gen_wr(bank, col, pattern));
    s.insert(gen_wait(p.tBL));
    s.insert(gen_wait(p.tCL + p.tWR));
    s.insert(gen_pre(bank));
    s.insert(gen_wait(p.tRP));
    s.insert(gen_end());
    return s;
}

InstructionSequence build_read_col_sequence(const DeviceGeometry& g,
                                            const TimingParams& p,
                                            std::uint32_t bank,
                                            std::uint32_t row,
                                            std::uint32_t col,
                                            std::uint32_t trcd) {
    validate_params(p);
    InstructionSequence s(g);
    s.insert(gen_act(bank, row));
    s.insert(gen_wait(trcd));
    s.insert(gen_rd(bank, col));
    s.insert(gen_wait(p.tCL + p.tWR));
    s.insert(gen_pre(bank));
    s.insert(gen_wait(p.tRP));
    s.insert(gen_end());
    return s;
}

InstructionSequence build_restore_sequence(const DeviceGeometry& g,
                                           const TimingParams& p,
                                           std::uint32_t bank,
                                           std::uint32_t row,
                                           std::uint32_t tras) {
    validate_params(p);
    InstructionSequence s(g);
    s.insert(gen_act(bank, row));
    s.insert(gen_wait(tras));
    s.insert(gen_pre(bank));
    s.insert(gen_wait(p.tRP));
    s.insert(gen_end());
    return s;
}

namespace {

constexpr std::uint64_t kDigestSalt = 0x7061796C64696765ull;

std::uint64_t payload_hash(std::uint32_t bank, std::uint32_t row,
                           std::uint32_t col,
                           const std::vector<std::uint8_t>& bytes) {
    std::uint64_t h = detail::mix3(
        kDigestSalt, (std::uint64_t(bank) << 32) | row, col);
    for (std::uint8_t b : bytes) {
        h = detail::splitmix64(h ^ b);
    }
    return h;
}

std::uint64_t interval_cycles(double interval_ms) {
    return std::uint64_t(
        std::llround(interval_ms * 1e6 / kDefaultClockPeriodNs));
}

struct ProgramShape {
    std::uint64_t length = 0;
    std::uint64_t pre_cycle = 0;
};

ProgramShape shape_of(const InstructionSequence& seq) {
    ProgramShape s;
    std::uint64_t cycle = 0;
    for (const Instruction& inst : seq.instructions()) {
        if (inst.op == Opcode::kWait) {
            cycle += inst.wait_cycles;
            continue;
        }
        if (inst.op == Opcode::kEnd) {
            break;
        }
        if (inst.op == Opcode::kPre) {
            s.pre_cycle = cycle;
        }
        cycle += 1;
    }
    s.length = cycle;
    return s;
}

/// Places programs on the shared timeline while keeping the refresh
/// cadence exact. Programs are aligned so no refresh falls due inside
/// them; in kAuto the backend engine fires the due REF during the
/// advance, in kManual an explicit one-REF program runs at the same
/// cycle, giving bit-identical command timelines.
class RefreshDriver {
public:
    RefreshDriver(SimBackend& backend, RefreshMode mode, std::uint64_t trefi,
                  std::uint32_t trfc, const DeviceGeometry& geometry)
        : backend_(backend), mode_(mode), trefi_(trefi), trfc_(trfc),
          next_due_(trefi), ref_program_(geometry) {
        if (mode_ == RefreshMode::kManual) {
            ref_program_.insert(gen_ref());
            ref_program_.insert(gen_end());
        }
    }

    /// Lands the clock on the start cycle (pushed past any refresh that
    /// would fall inside a program of the given length) and returns it.
    std::uint64_t align(std::uint64_t start, std::uint64_t length) {
        if (mode_ != RefreshMode::kSoftwareClock) {
            while (next_due_ <= start + length) {
                const std::uint64_t due = next_due_;
                if (mode_ == RefreshMode::kManual) {
                    backend_.advance_to_cycle(due);
                    backend_.execute(ref_program_);
                }
                const std::uint64_t resume = due + trfc_ + 1;
                backend_.advance_to_cycle(resume);
                next_due_ += trefi_;
                if (start < resume) {
                    start = resume;
                }
            }
        }
        if (start < backend_.now_cycle()) {
            start = backend_.now_cycle();
        }
        backend_.advance_to_cycle(start);
        return start;
    }

private:
    SimBackend& backend_;
    RefreshMode mode_;
    std::uint64_t trefi_;
    std::uint32_t trfc_;
    std::uint64_t next_due_;
    InstructionSequence ref_program_;
};

void accumulate_reads(const ExecutionResult& res, std::uint32_t row,
                      std::uint8_t pattern, TestResultEntry& entry) {
    for (const ReadPayload& p : res.reads) {
        entry.erroneous_bytes += count_erroneous_bytes(pattern, p.bytes);
        entry.payload_digest ^= payload_hash(p.bank, row, p.col, p.bytes);
    }
}

Device make_device(const DeviceSetup& setup) {
    Device device(setup.geometry, setup.profile, setup.temperature_c,
                  setup.seed);
    for (const auto& [cell, t_ret] : setup.retention_overrides) {
        device.override_cell_retention(cell, t_ret);
    }
    return device;
}

TestResultEntry run_retention_cell(const DeviceSetup& setup,
                                   const ExperimentPlan& plan,
                                   double interval, std::uint8_t pattern) {
    Device device = make_device(setup);
    const TimingParams params = default_ddr3_params();
    const std::uint64_t ic = interval_cycles(interval);

    ExecutionConfig cfg;
    std::uint64_t trefi = 0;
    if (plan.refresh_mode != RefreshMode::kSoftwareClock) {
        trefi = std::uint64_t(
            std::llround(double(ic) / device.num_refresh_groups()));
        if (trefi <= params.tRFC) {
            throw ConfigError("interval too short for the refresh cadence");
        }
        if (trefi > 0xFFFFFFFFull) {
            throw ConfigError("refresh cadence exceeds the engine range");
        }
        if (plan.refresh_mode == RefreshMode::kAuto) {
            cfg.auto_refresh = true;
            cfg.trefi = std::uint32_t(trefi);
        }
    }
    SimBackend backend(device, cfg);
    RefreshDriver driver(backend, plan.refresh_mode, trefi, params.tRFC,
                         setup.geometry);

    const ProgramShape shape = shape_of(build_write_row_sequence(
        setup.geometry, params, plan.rows[0].bank, plan.rows[0].row,
        pattern));

    TestResultEntry entry;
    entry.interval_ms = interval;
    entry.pattern = pattern;

    const std::size_t width = plan.interleave_width;
    std::vector<std::uint64_t> pre_cycles;
    for (std::size_t base = 0; base < plan.rows.size(); base += width) {
        const std::size_t n = std::min(width, plan.rows.size() - base);
        pre_cycles.assign(n, 0);
        for (std::size_t k = 0; k < n; ++k) {
            const RowAddr r = plan.rows[base + k];
            const std::uint64_t start =
                driver.align(backend.now_cycle(), shape.length);
            backend.execute(build_write_row_sequence(setup.geometry, params,
                                                     r.bank, r.row, pattern));
            pre_cycles[k] = start + shape.pre_cycle;
        }
        for (std::size_t k = 0; k < n; ++k) {
            const RowAddr r = plan.rows[base + k];
            driver.align(pre_cycles[k] + ic, shape.length);
            const ExecutionResult res = backend.execute(
                build_read_row_sequence(setup.geometry, params, r.bank, r.row,
                                        params.tRCD));
            accumulate_reads(res, r.row, pattern, entry);
        }
    }
    return entry;
}

TestResultEntry run_trcd_cell(const DeviceSetup& setup,
                              const ExperimentPlan& plan, std::uint32_t trcd,
                              double interval, std::uint8_t pattern) {
    Device device = make_device(setup);
    const TimingParams params = default_ddr3_params();
    const std::uint64_t ic = interval_cycles(interval);
    SimBackend backend(device, ExecutionConfig{});

    const ProgramShape wshape = shape_of(build_write_col_sequence(
        setup.geometry, params, plan.rows[0].bank, plan.rows[0].row, 0,
        pattern));
    const ProgramShape rshape = shape_of(build_read_col_sequence(
        setup.geometry, params, plan.rows[0].bank, plan.rows[0].row, 0,
        trcd));

    TestResultEntry entry;
    entry.timing_cycles = trcd;
    entry.interval_ms = interval;
    entry.pattern = pattern;

    // Writes go out on a pitch wide enough for the read program too, so
    // read-backs can sit exactly interval-after-restore without ever
    // colliding with a neighbour, whatever trcd is.
    const std::uint64_t pitch = std::max(wshape.length, rshape.length);
    const std::uint64_t columns = setup.geometry.num_columns;
    const std::uint64_t pairs = plan.rows.size() * columns;
    const std::uint64_t width = plan.interleave_width;
    std::vector<std::uint64_t> pre_cycles;
    for (std::uint64_t base = 0; base < pairs; base += width) {
        const std::uint64_t n = std::min<std::uint64_t>(width, pairs - base);
        const std::uint64_t group_start = backend.now_cycle();
        pre_cycles.assign(n, 0);
        for (std::uint64_t k = 0; k < n; ++k) {
            const RowAddr r = plan.rows[(base + k) / columns];
            const std::uint32_t col = std::uint32_t((base + k) % columns);
            const std::uint64_t start = group_start + k * pitch;
            backend.advance_to_cycle(start);
            backend.execute(build_write_col_sequence(
                setup.geometry, params, r.bank, r.row, col, pattern));
            pre_cycles[k] = start + wshape.pre_cycle;
        }
        for (std::uint64_t k = 0; k < n; ++k) {
            const RowAddr r = plan.rows[(base + k) / columns];
            const std::uint32_t col = std::uint32_t((base + k) % columns);
            const std::uint64_t start =
                std::max(pre_cycles[k] + ic, backend.now_cycle());
            backend.advance_to_cycle(start);
            const ExecutionResult res = backend.execute(build_read_col_sequence(
                setup.geometry, params, r.bank, r.row, col, trcd));
            accumulate_reads(res, r.row, pattern, entry);
        }
    }
    return entry;
}

TestResultEntry run_tras_cell(const DeviceSetup& setup,
                              const ExperimentPlan& plan, std::uint32_t tras,
                              double interval, std::uint8_t pattern) {
    Device device = make_device(setup);
    const TimingParams params = default_ddr3_params();
    const std::uint64_t ic = interval_cycles(interval);
    SimBackend backend(device, ExecutionConfig{});

    const ProgramShape wshape = shape_of(build_write_row_sequence(
        setup.geometry, params, plan.rows[0].bank, plan.rows[0].row,
        pattern));
    const ProgramShape restore_shape = shape_of(build_restore_sequence(
        setup.geometry, params, plan.rows[0].bank, plan.rows[0].row, tras));

    TestResultEntry entry;
    entry.timing_cycles = tras;
    entry.interval_ms = interval;
    entry.pattern = pattern;

    const std::size_t width = plan.interleave_width;
    std::vector<std::uint64_t> write_pre, restore_pre;
    for (std::size_t base = 0; base < plan.rows.size(); base += width) {
        const std::size_t n = std::min(width, plan.rows.size() - base);
        write_pre.assign(n, 0);
        restore_pre.assign(n, 0);
        for (std::size_t k = 0; k < n; ++k) {
            const RowAddr r = plan.rows[base + k];
            const std::uint64_t start = backend.now_cycle();
            backend.execute(build_write_row_sequence(setup.geometry, params,
                                                     r.bank, r.row, pattern));
            write_pre[k] = start + wshape.pre_cycle;
        }
        for (std::size_t k = 0; k < n; ++k) {
            const RowAddr r = plan.rows[base + k];
            const std::uint64_t start =
                std::max(write_pre[k] + ic, backend.now_cycle());
            backend.advance_to_cycle(start);
            backend.execute(build_restore_sequence(setup.geometry, params,
                                                   r.bank, r.row, tras));
            restore_pre[k] = start + restore_shape.pre_cycle;
        }
        for (std::size_t k = 0; k < n; ++k) {
            const RowAddr r = plan.rows[base + k];
            const std::uint64_t start =
                std::max(restore_pre[k] + ic, backend.now_cycle());
            backend.advance_to_cycle(start);
            const ExecutionResult res = backend.execute(
                build_read_row_sequence(setup.geometry, params, r.bank, r.row,
                                        params.tRCD));
            accumulate_reads(res, r.row, pattern, entry);
        }
    }
    return entry;
}

struct PlanCell {
    std::optional<std::uint32_t> timing;
    double interval = 0;
    std::uint8_t pattern = 0;
};

std::vector<PlanCell> sorted_cells(Experiment e, const ExperimentPlan& plan) {
    std::vector<double> intervals = plan.intervals_ms;
    std::sort(intervals.begin(), intervals.end());
    intervals.erase(std::unique(intervals.begin(), intervals.end()),
                    intervals.end());
    std::vector<std::uint8_t> patterns = plan.patterns;
    std::sort(patterns.begin(), patterns.end());
    patterns.erase(std::unique(patterns.begin(), patterns.end()),
                   patterns.end());
    std::vector<std::uint32_t> timings = plan.timing_values;
    std::sort(timings.begin(), timings.end());
    timings.erase(std::unique(timings.begin(), timings.end()), timings.end());

    std::vector<PlanCell> cells;
    if (e == Experiment::kRetention) {
        for (double i : intervals) {
            for (std::uint8_t p : patterns) {
                cells.push_back(PlanCell{std::nullopt, i, p});
            }
        }
    } else {
        for (std::uint32_t t : timings) {
            for (double i : intervals) {
                for (std::uint8_t p : patterns) {
                    cells.push_back(PlanCell{t, i, p});
                }
            }
        }
    }
    return cells;
}

TestResult run_cells(Experiment e, const DeviceSetup& setup,
                     const ExperimentPlan& plan, unsigned jobs) {
    validate_plan(plan, e, setup.geometry);
    const std::vector<PlanCell> cells = sorted_cells(e, plan);

    TestResult result;
    result.experiment = e;
    result.profile_name = setup.profile.name;
    result.temperature_c = setup.temperature_c;
    result.rows_tested = plan.rows.size();
    result.entries.resize(cells.size());

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) {
                return;
            }
            try {
                const PlanCell& cell = cells[i];
                switch (e) {
                case Experiment::kRetention:
                    result.entries[i] = run_retention_cell(
                        setup, plan, cell.interval, cell.pattern);
                    break;
                case Experiment::kTrcd:
                    result.entries[i] =
                        run_trcd_cell(setup, plan, *cell.timing,
                                      cell.interval, cell.pattern);
                    break;
                case Experiment::kTras:
                    result.entries[i] =
                        run_tras_cell(setup, plan, *cell.timing,
                                      cell.interval, cell.pattern);
                    break;
                }
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) {
                    first_error = std::current_exception();
                }
                return;
            }
        }
    };

    const unsigned n = std::max(1u, std::min<unsigned>(jobs, cells.size()));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(n);
        for (unsigned t = 0; t < n; ++t) {
            threads.emplace_back(worker);
        }
        for (std::thread& t : threads) {
            t.join();
        }
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
    return result;
}

} // namespace

TestResult retention_test(const DeviceSetup& setup, const ExperimentPlan& plan,
                          unsigned jobs) {
    return run_cells(Experiment::kRetention, setup, plan, jobs);
}

TestResult trcd_test(const DeviceSetup& setup, const ExperimentPlan& plan,
                     unsigned jobs) {
    return run_cells(Experiment::kTrcd, setup, plan, jobs);
}

TestResult tras_test(const DeviceSetup& setup, const ExperimentPlan& plan,
                     unsigned jobs) {
    return run_cells(Experiment::kTras, setup, plan, jobs);
}

TestResult run_experiment(Experiment e, const DeviceSetup& setup,
                          const ExperimentPlan& plan, unsigned jobs) {
    return run_cells(e, setup, plan, jobs);
}

std::string result_to_csv(const TestResult& r) {
    std::ostringstream out;
    out << "experiment,profile,temperature_c,timing_cycles,interval_ms,"
           "pattern,erroneous_bytes\n";
    char num[64];
    for (const TestResultEntry& e : r.entries) {
        out << experiment_name(r.experiment) << ',' << r.profile_name << ',';
        std::snprintf(num, sizeof num, "%g", r.temperature_c);
        out << num << ',';
        if (e.timing_cycles) {
            out << *e.timing_cycles;
        }
        out << ',';
        std::snprintf(num, sizeof num, "%g", e.interval_ms);
        out << num << ',';
        std::snprintf(num, sizeof num, "0x%02X", unsigned(e.pattern));
        out << num << ',' << e.erroneous_bytes << '\n';
    }
    return out.str();
}

} // namespace softmc
