#include "softmc/timing.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <istream>
#include <sstream>

#include <json.hpp>

#include "softmc/errors.hpp"

namespace softmc {

void validate_params(const TimingParams& p) {
    const std::array<std::pair<const char*, std::uint32_t>, 8> fields{{
        {"tRCD", p.tRCD},
        {"tRAS", p.tRAS},
        {"tRP", p.tRP},
        {"tWR", p.tWR},
        {"tCL", p.tCL},
        {"tBL", p.tBL},
        {"tRFC", p.tRFC},
        {"tREFI", p.tREFI},
    }};
    for (const auto& [name, value] : fields) {
        if (value == 0) {
            throw ConfigError(std::string(name) + " must be at least 1");
        }
    }
}

TimingParams default_ddr3_params() { return TimingParams{}; }

CommandTrace lower_sequence(const InstructionSequence& seq) {
    if (!seq.sealed()) {
        throw Error("cannot lower an unsealed sequence (missing END)");
    }
    CommandTrace trace;
    std::uint64_t cycle = 0;
    for (const Instruction& inst : seq.instructions()) {
        switch (inst.op) {
        case Opcode::kWait:
            cycle += inst.wait_cycles;
            break;
        case Opcode::kEnd:
            return trace;
        default:
            trace.push_back(TraceEntry{cycle, inst});
            cycle += 1;
            break;
        }
    }
    return trace;
}

std::vector<TimingViolation> validate(const CommandTrace& trace,
                                      const TimingParams& params) {
    validate_params(params);

    constexpr std::uint64_t kNone = ~0ull;
    struct BankHistory {
        std::uint64_t last_act = kNone;
        std::uint64_t last_pre = kNone;
        std::uint64_t last_col = kNone;  // last RD or WR
        std::uint64_t last_wr = kNone;
    };
    std::array<BankHistory, kMaxBanks> banks;
    std::uint64_t last_ref = kNone;

    std::vector<TimingViolation> out;
    auto flag = [&out](const char* rule, std::uint8_t bank,
                       std::uint64_t earlier, std::uint64_t later,
                       std::uint64_t required, std::uint64_t observed) {
        out.push_back(TimingViolation{rule, bank, earlier, later, required,
                                      observed});
    };
    // Free cycles strictly between the two commands.
    auto gap = [](std::uint64_t earlier, std::uint64_t later) {
        return later - earlier - 1;
    };

    for (const TraceEntry& e : trace) {
        const Instruction& cmd = e.cmd;
        const std::uint64_t c = e.cycle;

        if (last_ref != kNone && gap(last_ref, c) < params.tRFC) {
            flag("tRFC", cmd.bank, last_ref, c, params.tRFC, gap(last_ref, c));
        }

        switch (cmd.op) {
        case Opcode::kAct: {
            BankHistory& h = banks[cmd.bank];
            if (h.last_pre != kNone && gap(h.last_pre, c) < params.tRP) {
                flag("tRP", cmd.bank, h.last_pre, c, params.tRP,
                     gap(h.last_pre, c));
            }
            h.last_act = c;
            break;
        }
        case Opcode::kPre: {
            BankHistory& h = banks[cmd.bank];
            if (h.last_act != kNone && gap(h.last_act, c) < params.tRAS) {
                flag("tRAS", cmd.bank, h.last_act, c, params.tRAS,
                     gap(h.last_act, c));
            }
            const std::uint64_t write_to_pre =
                std::uint64_t(params.tBL) + params.tCL + params.tWR;
            if (h.last_wr != kNone && gap(h.last_wr, c) < write_to_pre) {
                flag("tCL+tWR", cmd.bank, h.last_wr, c, write_to_pre,
                     gap(h.last_wr, c));
            }
            h.last_pre = c;
            break;
        }
        case Opcode::kRd:
        case Opcode::kWr: {
            BankHistory& h = banks[cmd.bank];
            if (h.last_act != kNone && gap(h.last_act, c) < params.tRCD) {
                flag("tRCD", cmd.bank, h.last_act, c, params.tRCD,
                     gap(h.last_act, c));
            }
            if (h.last_col != kNone && gap(h.last_col, c) < params.tBL) {
                flag("tBL", cmd.bank, h.last_col, c, params.tBL,
                     gap(h.last_col, c));
            }
            h.last_col = c;
            if (cmd.op == Opcode::kWr) {
                h.last_wr = c;
            }
            break;
        }
        case Opcode::kRef: {
            if (last_ref != kNone && c - last_ref > params.tREFI) {
                flag("refresh-interval-exceeded", 0, last_ref, c, params.tREFI,
                     c - last_ref);
            }
            last_ref = c;
            break;
        }
        case Opcode::kWait:
        case Opcode::kEnd:
            throw Error("trace entries must be DRAM commands");
        }
    }

    std::stable_sort(out.begin(), out.end(),
                     [](const TimingViolation& a, const TimingViolation& b) {
                         return a.later_cycle < b.later_cycle;
                     });
    return out;
}

std::string format_trace(const CommandTrace& trace) {
    std::ostringstream out;
    for (const TraceEntry& e : trace) {
        out << e.cycle << ' ' << opcode_name(e.cmd.op);
        switch (e.cmd.op) {
        case Opcode::kAct:
            out << " b=" << unsigned(e.cmd.bank) << " r=" << e.cmd.row;
            break;
        case Opcode::kPre:
            out << " b=" << unsigned(e.cmd.bank);
            break;
        case Opcode::kRd:
        case Opcode::kWr:
            out << " b=" << unsigned(e.cmd.bank) << " c=" << e.cmd.col;
            break;
        default:
            break;
        }
        out << '\n';
    }
    return out.str();
}

namespace {

std::uint64_t parse_number(const std::string& token, std::uint64_t line,
                           const char* what) {
    if (token.empty()) {
        throw ParseError(std::string("missing ") + what, line);
    }
    std::uint64_t value = 0;
    for (char ch : token) {
        if (ch < '0' || ch > '9') {
            throw ParseError(std::string("bad ") + what + " '" + token + "'",
                             line);
        }
        value = value * 10 + std::uint64_t(ch - '0');
    }
    return value;
}

} // namespace

CommandTrace parse_trace(std::istream& in) {
    CommandTrace trace;
    std::string line;
    std::uint64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream tokens(line);
        std::string cycle_tok;
        if (!(tokens >> cycle_tok) || cycle_tok[0] == '#') {
            continue;
        }
        TraceEntry entry;
        entry.cycle = parse_number(cycle_tok, lineno, "cycle");

        std::string name;
        if (!(tokens >> name)) {
            throw ParseError("missing command name", lineno);
        }
        bool need_bank = false, need_row = false, need_col = false;
        if (name == "ACT") {
            entry.cmd.op = Opcode::kAct;
            need_bank = need_row = true;
        } else if (name == "PRE") {
            entry.cmd.op = Opcode::kPre;
            need_bank = true;
        } else if (name == "RD") {
            entry.cmd.op = Opcode::kRd;
            need_bank = need_col = true;
        } else if (name == "WR") {
            entry.cmd.op = Opcode::kWr;
            need_bank = need_col = true;
        } else if (name == "REF") {
            entry.cmd.op = Opcode::kRef;
        } else {
            throw ParseError("unknown command '" + name + "'", lineno);
        }

        bool have_bank = false, have_row = false, have_col = false;
        std::string field;
        while (tokens >> field) {
            const auto eq = field.find('=');
            if (eq == std::string::npos || eq == 0) {
                throw ParseError("bad field '" + field + "'", lineno);
            }
            const std::string key = field.substr(0, eq);
            const std::uint64_t value =
                parse_number(field.substr(eq + 1), lineno, key.c_str());
            if (key == "b" && need_bank && !have_bank) {
                if (value >= kMaxBanks) {
                    throw ParseError("bank " + std::to_string(value) +
                                         " out of range",
                                     lineno);
                }
                entry.cmd.bank = std::uint8_t(value);
                have_bank = true;
            } else if (key == "r" && need_row && !have_row) {
                if (value >= kMaxRows) {
                    throw ParseError("row " + std::to_string(value) +
                                         " out of range",
                                     lineno);
                }
                entry.cmd.row = std::uint32_t(value);
                have_row = true;
            } else if (key == "c" && need_col && !have_col) {
                if (value >= kMaxColumns) {
                    throw ParseError("column " + std::to_string(value) +
                                         " out of range",
                                     lineno);
                }
                entry.cmd.col = std::uint16_t(value);
                have_col = true;
            } else {
                throw ParseError("unexpected field '" + field + "' for " +
                                     name,
                                 lineno);
            }
        }
        if (need_bank && !have_bank) {
            throw ParseError(name + " requires b=<bank>", lineno);
        }
        if (need_row && !have_row) {
            throw ParseError(name + " requires r=<row>", lineno);
        }
        if (need_col && !have_col) {
            throw ParseError(name + " requires c=<col>", lineno);
        }
        trace.push_back(entry);
    }
    return trace;
}

CommandTrace parse_trace_text(const std::string& text) {
    std::istringstream in(text);
    return parse_trace(in);
}

std::string violations_csv(const std::vector<TimingViolation>& violations) {
    std::ostringstream out;
    out << "rule,bank,earlier_cycle,later_cycle,required,observed\n";
    for (const TimingViolation& v : violations) {
        out << v.rule << ',' << unsigned(v.bank) << ',' << v.earlier_cycle
            << ',' << v.later_cycle << ',' << v.required << ',' << v.observed
            << '\n';
    }
    return out.str();
}

TimingParams params_from_json_text(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("timing JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ConfigError("timing JSON must be an object");
    }
    TimingParams p;
    const std::array<std::pair<const char*, std::uint32_t*>, 8> fields{{
        {"tRCD", &p.tRCD},
        {"tRAS", &p.tRAS},
        {"tRP", &p.tRP},
        {"tWR", &p.tWR},
        {"tCL", &p.tCL},
        {"tBL", &p.tBL},
        {"tRFC", &p.tRFC},
        {"tREFI", &p.tREFI},
    }};
    for (const auto& [key, value] : doc.items()) {
        bool known = false;
        for (const auto& [name, slot] : fields) {
            if (key == name) {
                if (!value.is_number_unsigned()) {
                    throw ConfigError(key +
                                      " must be a non-negative integer");
                }
                const std::uint64_t v = value.get<std::uint64_t>();
                if (v > 0xFFFFFFFFull) {
                    throw ConfigError(key + " too large");
                }
                *slot = std::uint32_t(v);
                known = true;
                break;
            }
        }
        if (!known) {
            throw ConfigError("unknown timing key '" + key + "'");
        }
    }
    validate_params(p);
    return p;
}

std::string params_to_json_text(const TimingParams& p) {
    nlohmann::json doc;
    doc["tRCD"] = p.tRCD;
    doc["tRAS"] = p.tRAS;
    doc["tRP"] = p.tRP;
    doc["tWR"] = p.tWR;
    doc["tCL"] = p.tCL;
    doc["tBL"] = p.tBL;
    doc["tRFC"] = p.tRFC;
    doc["tREFI"] = p.tREFI;
    return doc.dump(2) + "\n";
}

} // namespace softmc
