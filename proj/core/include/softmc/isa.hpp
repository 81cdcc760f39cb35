#ifndef SOFTMC_ISA_HPP
#define SOFTMC_ISA_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "softmc/geometry.hpp"

namespace softmc {

/// DDR command / control opcodes, in wire-encoding order.
enum class Opcode : std::uint8_t {
    kAct = 0,
    kPre = 1,
    kRd = 2,
    kWr = 3,
    kRef = 4,
    kWait = 5,
    kEnd = 6,
};

const char* opcode_name(Opcode op);

/// WAIT instructions advance the controller clock by 1..=2^20 cycles.
inline constexpr std::uint32_t kMaxWaitCycles = 1u << 20;

/// One controller instruction. Fields an opcode does not use are zero;
/// equality is field-wise and the codec rejects words that violate this.
struct Instruction {
    Opcode op = Opcode::kEnd;
    std::uint8_t bank = 0;
    std::uint32_t row = 0;
    std::uint16_t col = 0;
    std::uint8_t pattern = 0;
    std::uint32_t wait_cycles = 0;

    bool operator==(const Instruction&) const = default;

    bool is_dram_command() const {
        return op != Opcode::kWait && op != Opcode::kEnd;
    }
};

// Instruction factories. They reject arguments that cannot be expressed
// in the wire encoding; checks against a concrete module shape happen at
// InstructionSequence::insert time.
Instruction gen_act(std::uint32_t bank, std::uint32_t row);
Instruction gen_pre(std::uint32_t bank);
Instruction gen_rd(std::uint32_t bank, std::uint32_t col);
Instruction gen_wr(std::uint32_t bank, std::uint32_t col, std::uint8_t pattern);
Instruction gen_ref();
Instruction gen_wait(std::uint32_t cycles);
Instruction gen_end();

/// Ordered instruction list bound to a device geometry.
///
/// insert() validates each instruction's addresses against the bound
/// geometry and refuses to grow a sequence whose last instruction is END
/// (the sequence is then "sealed" and ready for lowering or execution).
class InstructionSequence {
public:
    explicit InstructionSequence(DeviceGeometry geometry = default_geometry());

    /// Appends one instruction.
    /// Throws SealedSequenceError if the sequence already ends in END,
    /// GeometryError if an address is outside the bound geometry.
    void insert(const Instruction& inst);

    bool sealed() const;
    std::size_t size() const { return insts_.size(); }
    bool empty() const { return insts_.empty(); }
    const std::vector<Instruction>& instructions() const { return insts_; }
    const DeviceGeometry& geometry() const { return geometry_; }

private:
    DeviceGeometry geometry_;
    std::vector<Instruction> insts_;
};

} // namespace softmc

#endif
