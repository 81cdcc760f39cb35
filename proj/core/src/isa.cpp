#include "softmc/isa.hpp"

#include <string>

namespace softmc {

namespace {

void check_range(const char* what, std::uint64_t value, std::uint64_t limit) {
    if (value >= limit) {
        throw GeometryError(std::string(what) + " " + std::to_string(value) +
                            " out of range (max " + std::to_string(limit - 1) +
                            ")");
    }
}

} // namespace

const char* opcode_name(Opcode op) {
    switch (op) {
    case Opcode::kAct: return "ACT";
    case Opcode::kPre: return "PRE";
    case Opcode::kRd: return "RD";
    case Opcode::kWr: return "WR";
    case Opcode::kRef: return "REF";
    case Opcode::kWait: return "WAIT";
    case Opcode::kEnd: return "END";
    }
    return "?";
}

void validate_geometry(const DeviceGeometry& g) {
    if (g.num_banks == 0 || g.num_rows == 0 || g.num_columns == 0 ||
        g.bytes_per_column == 0) {
        throw GeometryError("geometry dimensions must all be at least 1");
    }
    if (g.num_banks > kMaxBanks) {
        throw GeometryError("num_banks " + std::to_string(g.num_banks) +
                            " exceeds the 4-bit bank field (max 16)");
    }
    if (g.num_rows > kMaxRows) {
        throw GeometryError("num_rows " + std::to_string(g.num_rows) +
                            " exceeds the 24-bit row field");
    }
    if (g.num_columns > kMaxColumns) {
        throw GeometryError("num_columns " + std::to_string(g.num_columns) +
                            " exceeds the 16-bit column field");
    }
}

Instruction gen_act(std::uint32_t bank, std::uint32_t row) {
    check_range("bank", bank, kMaxBanks);
    check_range("row", row, kMaxRows);
    Instruction i;
    i.op = Opcode::kAct;
    i.bank = std::uint8_t(bank);
    i.row = row;
    return i;
}

Instruction gen_pre(std::uint32_t bank) {
    check_range("bank", bank, kMaxBanks);
    Instruction i;
    i.op = Opcode::kPre;
    i.bank = std::uint8_t(bank);
    return i;
}

Instruction gen_rd(std::uint32_t bank, std::uint32_t col) {
    check_range("bank", bank, kMaxBanks);
    check_range("column", col, kMaxColumns);
    Instruction i;
    i.op = Opcode::kRd;
    i.bank = std::uint8_t(bank);
    i.col = std::uint16_t(col);
    return i;
}

Instruction gen_wr(std::uint32_t bank, std::uint32_t col, std::uint8_t pattern) {
    check_range("bank", bank, kMaxBanks);
    check_range("column", col, kMaxColumns);
    Instruction i;
    i.op = Opcode::kWr;
    i.bank = std::uint8_t(bank);
    i.col = std::uint16_t(col);
    i.pattern = pattern;
    return i;
}

Instruction gen_ref() {
    Instruction i;
    i.op = Opcode::kRef;
    return i;
}

Instruction gen_wait(std::uint32_t cycles) {
    if (cycles == 0 || cycles > kMaxWaitCycles) {
        throw GeometryError("wait cycles " + std::to_string(cycles) +
                            " outside 1..=" + std::to_string(kMaxWaitCycles));
    }
    Instruction i;
    i.op = Opcode::kWait;
    i.wait_cycles = cycles;
    return i;
}

Instruction gen_end() { return Instruction{}; }

InstructionSequence::InstructionSequence(DeviceGeometry geometry)
    : geometry_(geometry) {
    validate_geometry(geometry_);
}

bool InstructionSequence::sealed() const {
    return !insts_.empty() && insts_.back().op == Opcode::kEnd;
}

void InstructionSequence::insert(const Instruction& inst) {
    if (sealed()) {
        throw SealedSequenceError(
            "sequence is sealed by END; no further instructions accepted");
    }
    switch (inst.op) {
    case Opcode::kAct:
        check_range("bank", inst.bank, geometry_.num_banks);
        check_range("row", inst.row, geometry_.num_rows);
        break;
    case Opcode::kPre:
        check_range("bank", inst.bank, geometry_.num_banks);
        break;
    case Opcode::kRd:
    case Opcode::kWr:
        check_range("bank", inst.bank, geometry_.num_banks);
        check_range("column", inst.col, geometry_.num_columns);
        break;
    case Opcode::kWait:
        if (inst.wait_cycles == 0 || inst.wait_cycles > kMaxWaitCycles) {
            throw GeometryError("wait cycles outside 1..=" +
                                std::to_string(kMaxWaitCycles));
        }
        break;
    case Opcode::kRef:
    case Opcode::kEnd:
        break;
    }
    insts_.push_back(inst);
}

} // namespace softmc
