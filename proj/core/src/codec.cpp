#include "softmc/codec.hpp"

#include <cstdio>
#include <sstream>

#include "softmc/errors.hpp"

namespace softmc {

namespace {

constexpr std::uint64_t kOpMask = 0xFull << 60;
constexpr std::uint64_t kBankMask = 0xFull << 56;
constexpr std::uint64_t kRowMask = 0xFFFFFFull << 32;
constexpr std::uint64_t kColMask = 0xFFFFull << 16;
constexpr std::uint64_t kPatternMask = 0xFFull << 8;
constexpr std::uint64_t kWaitMask = 0xFFFFFull;

// Bits each opcode may populate besides the opcode field itself.
constexpr std::uint64_t kAllowed[7] = {
    kBankMask | kRowMask,               // ACT
    kBankMask,                          // PRE
    kBankMask | kColMask,               // RD
    kBankMask | kColMask | kPatternMask, // WR
    0,                                  // REF
    kWaitMask,                          // WAIT
    0,                                  // END
};

} // namespace

EncodedInstruction encode(const Instruction& inst) {
    std::uint64_t w = std::uint64_t(inst.op) << 60;
    switch (inst.op) {
    case Opcode::kAct:
        w |= std::uint64_t(inst.bank) << 56;
        w |= std::uint64_t(inst.row) << 32;
        break;
    case Opcode::kPre:
        w |= std::uint64_t(inst.bank) << 56;
        break;
    case Opcode::kRd:
        w |= std::uint64_t(inst.bank) << 56;
        w |= std::uint64_t(inst.col) << 16;
        break;
    case Opcode::kWr:
        w |= std::uint64_t(inst.bank) << 56;
        w |= std::uint64_t(inst.col) << 16;
        w |= std::uint64_t(inst.pattern) << 8;
        break;
    case Opcode::kRef:
        break;
    case Opcode::kWait:
        if (inst.wait_cycles == 0 || inst.wait_cycles > kMaxWaitCycles) {
            throw CodecError("wait cycles outside 1..=" +
                             std::to_string(kMaxWaitCycles));
        }
        // 2^20 wraps to field value 0.
        w |= std::uint64_t(inst.wait_cycles) & kWaitMask;
        break;
    case Opcode::kEnd:
        break;
    }
    return EncodedInstruction{w};
}

Instruction decode(EncodedInstruction enc) {
    const std::uint64_t w = enc.word;
    const std::uint64_t opbits = w >> 60;
    if (opbits > std::uint64_t(Opcode::kEnd)) {
        throw CodecError("invalid opcode " + std::to_string(opbits));
    }
    const Opcode op = Opcode(opbits);
    if (w & ~(kOpMask | kAllowed[opbits])) {
        throw CodecError(std::string("nonzero bits outside the fields of ") +
                         opcode_name(op));
    }
    Instruction inst;
    inst.op = op;
    switch (op) {
    case Opcode::kAct:
        inst.bank = std::uint8_t((w & kBankMask) >> 56);
        inst.row = std::uint32_t((w & kRowMask) >> 32);
        break;
    case Opcode::kPre:
        inst.bank = std::uint8_t((w & kBankMask) >> 56);
        break;
    case Opcode::kRd:
        inst.bank = std::uint8_t((w & kBankMask) >> 56);
        inst.col = std::uint16_t((w & kColMask) >> 16);
        break;
    case Opcode::kWr:
        inst.bank = std::uint8_t((w & kBankMask) >> 56);
        inst.col = std::uint16_t((w & kColMask) >> 16);
        inst.pattern = std::uint8_t((w & kPatternMask) >> 8);
        break;
    case Opcode::kRef:
        break;
    case Opcode::kWait: {
        const std::uint32_t field = std::uint32_t(w & kWaitMask);
        inst.wait_cycles = field == 0 ? kMaxWaitCycles : field;
        break;
    }
    case Opcode::kEnd:
        break;
    }
    return inst;
}

namespace {

void append_word(std::vector<std::uint8_t>& out, std::uint64_t w) {
    for (int shift = 56; shift >= 0; shift -= 8) {
        out.push_back(std::uint8_t(w >> shift));
    }
}

} // namespace

std::vector<std::uint8_t> encode_stream(const std::vector<Instruction>& insts) {
    std::vector<std::uint8_t> out;
    out.reserve(insts.size() * 8);
    bool terminated = false;
    for (const Instruction& inst : insts) {
        if (terminated) {
            throw CodecError("instructions after END");
        }
        append_word(out, encode(inst).word);
        if (inst.op == Opcode::kEnd) {
            terminated = true;
        }
    }
    if (!terminated) {
        throw CodecError("stream does not end with END");
    }
    return out;
}

std::vector<std::uint8_t> encode_stream(const InstructionSequence& seq) {
    if (!seq.sealed()) {
        throw CodecError("stream does not end with END");
    }
    return encode_stream(seq.instructions());
}

std::vector<Instruction> decode_stream(const std::vector<std::uint8_t>& bytes) {
    std::vector<Instruction> out;
    std::size_t offset = 0;
    while (offset < bytes.size()) {
        if (bytes.size() - offset < 8) {
            throw CodecError("truncated instruction word", offset);
        }
        std::uint64_t w = 0;
        for (int i = 0; i < 8; ++i) {
            w = (w << 8) | bytes[offset + std::size_t(i)];
        }
        Instruction inst;
        try {
            inst = decode(EncodedInstruction{w});
        } catch (const CodecError& e) {
            throw CodecError(e.what(), offset);
        }
        out.push_back(inst);
        offset += 8;
        if (inst.op == Opcode::kEnd) {
            if (offset != bytes.size()) {
                throw CodecError("trailing bytes after END", offset);
            }
            return out;
        }
    }
    throw CodecError("stream does not end with END", offset);
}

std::string format_instruction(const Instruction& inst) {
    char buf[64];
    switch (inst.op) {
    case Opcode::kAct:
        std::snprintf(buf, sizeof buf, "ACT b=%u r=%u", unsigned(inst.bank),
                      unsigned(inst.row));
        break;
    case Opcode::kPre:
        std::snprintf(buf, sizeof buf, "PRE b=%u", unsigned(inst.bank));
        break;
    case Opcode::kRd:
        std::snprintf(buf, sizeof buf, "RD b=%u c=%u", unsigned(inst.bank),
                      unsigned(inst.col));
        break;
    case Opcode::kWr:
        std::snprintf(buf, sizeof buf, "WR b=%u c=%u p=0x%02X",
                      unsigned(inst.bank), unsigned(inst.col),
                      unsigned(inst.pattern));
        break;
    case Opcode::kRef:
        return "REF";
    case Opcode::kWait:
        std::snprintf(buf, sizeof buf, "WAIT n=%u", unsigned(inst.wait_cycles));
        break;
    case Opcode::kEnd:
        return "END";
    }
    return buf;
}

std::string disassemble(const std::vector<Instruction>& insts) {
    std::ostringstream out;
    for (const Instruction& inst : insts) {
        out << format_instruction(inst) << '\n';
    }
    return out.str();
}

} // namespace softmc
