#ifndef SOFTMC_CODEC_HPP
#define SOFTMC_CODEC_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "softmc/isa.hpp"

namespace softmc {

/// Fixed 64-bit instruction word.
///
/// Layout:
///   63..60  opcode (0=ACT 1=PRE 2=RD 3=WR 4=REF 5=WAIT 6=END)
///   59..56  bank
///   55..32  row
///   31..16  column
///   15..8   pattern byte
///   19..0   wait cycles (WAIT uses only the opcode plus this field;
///           the field value 0 encodes the cap of 2^20 cycles)
///
/// Bits outside the fields an opcode uses must be zero; decode rejects
/// words that violate this, as well as opcodes above END.
struct EncodedInstruction {
    std::uint64_t word = 0;
    bool operator==(const EncodedInstruction&) const = default;
};

EncodedInstruction encode(const Instruction& inst);

/// Throws CodecError on malformed words.
Instruction decode(EncodedInstruction enc);

/// Binary instruction-stream format: consecutive 64-bit big-endian
/// words, terminated by (and including) the END word.
std::vector<std::uint8_t> encode_stream(const std::vector<Instruction>& insts);
std::vector<std::uint8_t> encode_stream(const InstructionSequence& seq);

/// Decodes a complete stream. The result includes the terminating END.
/// Throws CodecError (with the byte offset of the offending word) on a
/// malformed word, a truncated word, a missing END terminator, or
/// trailing bytes after END.
std::vector<Instruction> decode_stream(const std::vector<std::uint8_t>& bytes);

/// One-line text form, e.g. "ACT b=0 r=5", "WR b=1 c=3 p=0xAA",
/// "WAIT n=12", "REF", "END".
std::string format_instruction(const Instruction& inst);

/// Text disassembly of a decoded stream, one instruction per line.
std::string disassemble(const std::vector<Instruction>& insts);

} // namespace softmc

#endif
