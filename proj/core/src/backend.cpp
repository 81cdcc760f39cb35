#include "softmc/backend.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

namespace softmc {

SimBackend::SimBackend(Device& device, ExecutionConfig config)
    : device_(device), config_(config) {
    if (!(config_.clock_period_ns > 0.0) ||
        !std::isfinite(config_.clock_period_ns)) {
        throw ConfigError("clock period must be positive");
    }
    if (std::llround(config_.clock_period_ns * 1000.0) < 1) {
        throw ConfigError("clock period must be at least 1 ps");
    }
    trfc_ = default_ddr3_params().tRFC;
    if (config_.auto_refresh) {
        if (config_.trefi == 0) {
            throw ConfigError("trefi must be at least 1");
        }
        if (config_.trefi <= trfc_) {
            throw ConfigError("trefi must exceed tRFC");
        }
    }
    next_ref_cycle_ = config_.trefi;
    last_act_cycle_.resize(device_.geometry().num_banks, 0);
    act_seen_.resize(device_.geometry().num_banks, false);
}

std::uint64_t SimBackend::ps_per_cycle() const {
    return std::uint64_t(std::llround(config_.clock_period_ns * 1000.0));
}

void SimBackend::move_clock_to(std::uint64_t cycle) {
    if (cycle < now_cycle_) {
        throw Error("controller clock cannot move backwards");
    }
    device_.advance_ps((cycle - now_cycle_) * ps_per_cycle());
    now_cycle_ = cycle;
}

void SimBackend::issue_ref(std::uint64_t cycle,
                           std::vector<std::string>* faults) {
    move_clock_to(cycle);
    StepResult r = device_.step(gen_ref(), IssueContext{});
    if (r.status == StepStatus::kFault && faults) {
        faults->push_back(r.fault);
    }
}

std::uint64_t SimBackend::run_refresh_until(std::uint64_t target,
                                            std::vector<std::string>* faults) {
    std::uint64_t allowed = std::max(target, min_user_cycle_);
    if (!config_.auto_refresh) {
        return allowed;
    }
    while (next_ref_cycle_ <= allowed) {
        issue_ref(next_ref_cycle_, faults);
        min_user_cycle_ = next_ref_cycle_ + trfc_ + 1;
        next_ref_cycle_ += config_.trefi;
        allowed = std::max(allowed, min_user_cycle_);
    }
    return allowed;
}

void SimBackend::drain_refresh(std::uint64_t limit,
                               std::vector<std::string>* faults) {
    while (config_.auto_refresh && next_ref_cycle_ <= limit) {
        issue_ref(next_ref_cycle_, faults);
        min_user_cycle_ = next_ref_cycle_ + trfc_ + 1;
        next_ref_cycle_ += config_.trefi;
    }
}

ExecutionResult SimBackend::execute(const InstructionSequence& seq) {
    if (!seq.sealed()) {
        throw Error("cannot execute an unsealed sequence (missing END)");
    }
    ExecutionResult result;
    const std::uint64_t start = now_cycle_;
    std::uint64_t offset = 0;
    std::uint64_t delay = 0;

    for (const Instruction& inst : seq.instructions()) {
        if (inst.op == Opcode::kWait) {
            offset += inst.wait_cycles;
            continue;
        }
        if (inst.op == Opcode::kEnd) {
            break;
        }
        const std::uint64_t nominal = start + offset + delay;
        const std::uint64_t cycle = run_refresh_until(nominal, &result.faults);
        delay += cycle - nominal;
        move_clock_to(cycle);

        IssueContext ctx;
        if (act_seen_[inst.bank]) {
            const std::uint64_t since_act =
                cycle - last_act_cycle_[inst.bank] - 1;
            if (inst.op == Opcode::kRd) {
                ctx.trcd_used = std::uint32_t(
                    std::min<std::uint64_t>(since_act, 0xFFFFFFFFull));
            } else if (inst.op == Opcode::kPre) {
                ctx.tras_used = std::uint32_t(
                    std::min<std::uint64_t>(since_act, 0xFFFFFFFFull));
            }
        }
        StepResult sr = device_.step(inst, ctx);
        if (inst.op == Opcode::kAct) {
            last_act_cycle_[inst.bank] = cycle;
            act_seen_[inst.bank] = true;
        }
        if (sr.status == StepStatus::kFault) {
            result.faults.push_back(sr.fault);
        }
        if (inst.op == Opcode::kRd) {
            result.reads.push_back(
                ReadPayload{inst.bank, inst.col, std::move(sr.data)});
        }
        offset += 1;
    }

    const std::uint64_t end_cycle = start + offset + delay;
    drain_refresh(end_cycle, &result.faults);
    move_clock_to(end_cycle);
    result.final_cycle = end_cycle - start;
    return result;
}

void SimBackend::advance_cycles(std::uint64_t n) {
    const std::uint64_t target = now_cycle_ + n;
    drain_refresh(target, nullptr);
    move_clock_to(target);
}

void SimBackend::advance_to_cycle(std::uint64_t cycle) {
    if (cycle < now_cycle_) {
        throw Error("target cycle " + std::to_string(cycle) +
                    " is in the past (now " + std::to_string(now_cycle_) +
                    ")");
    }
    advance_cycles(cycle - now_cycle_);
}

void SimBackend::advance_time(double milliseconds) {
    if (!(milliseconds >= 0.0) || !std::isfinite(milliseconds)) {
        throw ConfigError("idle duration must be non-negative");
    }
    const double cycles = milliseconds * 1e6 / config_.clock_period_ns;
    advance_cycles(std::uint64_t(std::llround(cycles)));
}

std::string execution_result_to_json_text(const ExecutionResult& r) {
    nlohmann::json doc;
    doc["final_cycle"] = r.final_cycle;
    doc["faults"] = r.faults;
    nlohmann::json reads = nlohmann::json::array();
    for (const ReadPayload& p : r.reads) {
        nlohmann::json entry;
        entry["bank"] = p.bank;
        entry["col"] = p.col;
        std::string hex;
        hex.reserve(p.bytes.size() * 2);
        char buf[3];
        for (std::uint8_t b : p.bytes) {
            std::snprintf(buf, sizeof buf, "%02x", unsigned(b));
            hex += buf;
        }
        entry["bytes"] = hex;
        reads.push_back(entry);
    }
    doc["reads"] = reads;
    return doc.dump(2) + "\n";
}

} // namespace softmc
