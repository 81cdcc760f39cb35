#include <cstdint>
#include <random>
#include <vector>

#include <doctest.h>

#include "softmc/codec.hpp"
#include "softmc/isa.hpp"

using namespace softmc;

TEST_CASE("instruction factories fill only the fields their opcode uses") {
    const Instruction act = gen_act(2, 77);
    CHECK(act.op == Opcode::kAct);
    CHECK(act.bank == 2);
    CHECK(act.row == 77);
    CHECK(act.col == 0);
    CHECK(act.pattern == 0);
    CHECK(act.wait_cycles == 0);

    const Instruction wr = gen_wr(1, 3, 0xAA);
    CHECK(wr.op == Opcode::kWr);
    CHECK(wr.bank == 1);
    CHECK(wr.col == 3);
    CHECK(wr.pattern == 0xAA);
    CHECK(wr.row == 0);

    CHECK(gen_pre(5).op == Opcode::kPre);
    CHECK(gen_rd(0, 9).col == 9);
    CHECK(gen_ref() == Instruction{Opcode::kRef, 0, 0, 0, 0, 0});
    CHECK(gen_wait(12).wait_cycles == 12);
    CHECK(gen_end() == Instruction{});
}

TEST_CASE("factories reject addresses that do not fit the wire fields") {
    CHECK_THROWS_AS(gen_act(16, 0), GeometryError);
    CHECK_THROWS_AS(gen_act(0, 1u << 24), GeometryError);
    CHECK_THROWS_AS(gen_pre(16), GeometryError);
    CHECK_THROWS_AS(gen_rd(0, 1u << 16), GeometryError);
    CHECK_THROWS_AS(gen_wr(0, 1u << 16, 0), GeometryError);
    CHECK_THROWS_AS(gen_wait(0), GeometryError);
    CHECK_THROWS_AS(gen_wait(kMaxWaitCycles + 1), GeometryError);
    CHECK_NOTHROW(gen_wait(kMaxWaitCycles));
    CHECK_NOTHROW(gen_act(15, (1u << 24) - 1));
}

TEST_CASE("sequences validate against their bound geometry and seal on END") {
    DeviceGeometry g;
    g.num_banks = 2;
    g.num_rows = 16;
    g.num_columns = 4;
    InstructionSequence seq(g);
    CHECK(seq.empty());
    CHECK_FALSE(seq.sealed());

    seq.insert(gen_act(1, 15));
    CHECK_THROWS_AS(seq.insert(gen_act(2, 0)), GeometryError);
    CHECK_THROWS_AS(seq.insert(gen_act(0, 16)), GeometryError);
    CHECK_THROWS_AS(seq.insert(gen_rd(0, 4)), GeometryError);
    seq.insert(gen_wr(1, 3, 0xFF));
    seq.insert(gen_end());
    CHECK(seq.sealed());
    CHECK(seq.size() == 3);
    CHECK_THROWS_AS(seq.insert(gen_pre(0)), SealedSequenceError);
}

TEST_CASE("fixed word encodings") {
    CHECK(encode(gen_end()).word == 0x6000000000000000ull);
    CHECK(encode(gen_wr(1, 3, 0xAA)).word == 0x310000000003AA00ull);
    CHECK(encode(gen_act(0, 5)).word == 0x0000000500000000ull);
    CHECK(encode(gen_wait(4)).word == 0x5000000000000004ull);
    // the wait field holds 20 bits; the cap value wraps to zero on the wire
    CHECK(encode(gen_wait(kMaxWaitCycles)).word == 0x5000000000000000ull);
    CHECK(encode(gen_pre(15)).word == 0x1F00000000000000ull);
    CHECK(encode(gen_rd(2, 0xBEEF)).word == 0x22000000BEEF0000ull);
    CHECK(encode(gen_ref()).word == 0x4000000000000000ull);
}

TEST_CASE("wait cap decodes back from the zero wire field") {
    const Instruction w = decode(EncodedInstruction{0x5000000000000000ull});
    CHECK(w.op == Opcode::kWait);
    CHECK(w.wait_cycles == kMaxWaitCycles);
}

TEST_CASE("random instructions survive an encode/decode round trip") {
    std::mt19937_64 rng(0xC0DEC);
    for (int i = 0; i < 10000; ++i) {
        Instruction inst;
        switch (rng() % 7) {
        case 0: inst = gen_act(rng() % 16, rng() % (1u << 24)); break;
        case 1: inst = gen_pre(rng() % 16); break;
        case 2: inst = gen_rd(rng() % 16, rng() % (1u << 16)); break;
        case 3:
            inst = gen_wr(rng() % 16, rng() % (1u << 16), rng() % 256);
            break;
        case 4: inst = gen_ref(); break;
        case 5: inst = gen_wait(1 + rng() % kMaxWaitCycles); break;
        default: inst = gen_end(); break;
        }
        CHECK(decode(encode(inst)) == inst);
    }
}

TEST_CASE("decode rejects unknown opcodes") {
    for (std::uint64_t op = 7; op < 16; ++op) {
        CHECK_THROWS_AS(decode(EncodedInstruction{op << 60}), CodecError);
    }
}

TEST_CASE("decode rejects nonzero bits outside an opcode's fields") {
    // PRE with row bits
    CHECK_THROWS_AS(decode(EncodedInstruction{0x1000000100000000ull}),
                    CodecError);
    // ACT with pattern bits
    CHECK_THROWS_AS(decode(EncodedInstruction{0x0000000000000100ull}),
                    CodecError);
    // RD with pattern bits
    CHECK_THROWS_AS(decode(EncodedInstruction{0x2000000000000100ull}),
                    CodecError);
    // WR with wait bits
    CHECK_THROWS_AS(decode(EncodedInstruction{0x3000000000000001ull}),
                    CodecError);
    // REF with bank bits
    CHECK_THROWS_AS(decode(EncodedInstruction{0x4100000000000000ull}),
                    CodecError);
    // WAIT with bank bits
    CHECK_THROWS_AS(decode(EncodedInstruction{0x5100000000000001ull}),
                    CodecError);
    // END with col bits
    CHECK_THROWS_AS(decode(EncodedInstruction{0x6000000000010000ull}),
                    CodecError);
}

TEST_CASE("streams are big-endian words terminated by END") {
    std::vector<Instruction> prog{gen_act(0, 5), gen_wait(6), gen_rd(0, 1),
                                  gen_end()};
    const std::vector<std::uint8_t> bytes = encode_stream(prog);
    REQUIRE(bytes.size() == 32);
    // ACT(0,5): 0x0000000500000000 -> most significant byte first
    const std::uint8_t head[8] = {0, 0, 0, 5, 0, 0, 0, 0};
    for (int i = 0; i < 8; ++i) CHECK(bytes[i] == head[i]);
    CHECK(bytes[24] == 0x60);
    CHECK(decode_stream(bytes) == prog);
}

TEST_CASE("stream encoding demands exactly one trailing END") {
    CHECK_THROWS_AS(encode_stream(std::vector<Instruction>{gen_act(0, 0)}),
                    CodecError);
    CHECK_THROWS_AS(encode_stream(std::vector<Instruction>{}), CodecError);
    CHECK_THROWS_AS(
        encode_stream(std::vector<Instruction>{gen_end(), gen_act(0, 0)}),
        CodecError);
    InstructionSequence unsealed;
    unsealed.insert(gen_ref());
    CHECK_THROWS_AS(encode_stream(unsealed), CodecError);
}

TEST_CASE("stream decoding reports the byte offset of the fault") {
    const std::vector<std::uint8_t> end_word = encode_stream(
        std::vector<Instruction>{gen_end()});

    SUBCASE("truncated word") {
        std::vector<std::uint8_t> bytes(end_word.begin(),
                                        end_word.begin() + 5);
        try {
            decode_stream(bytes);
            FAIL("expected CodecError");
        } catch (const CodecError& e) {
            CHECK(e.byte_offset == 0);
        }
    }
    SUBCASE("malformed second word") {
        std::vector<std::uint8_t> bytes = encode_stream(
            std::vector<Instruction>{gen_act(0, 1), gen_end()});
        bytes[8] = 0xF0;  // invalid opcode in word 1
        try {
            decode_stream(bytes);
            FAIL("expected CodecError");
        } catch (const CodecError& e) {
            CHECK(e.byte_offset == 8);
        }
    }
    SUBCASE("trailing bytes after END") {
        std::vector<std::uint8_t> bytes = end_word;
        bytes.insert(bytes.end(), end_word.begin(), end_word.end());
        try {
            decode_stream(bytes);
            FAIL("expected CodecError");
        } catch (const CodecError& e) {
            CHECK(e.byte_offset == 8);
        }
    }
    SUBCASE("missing terminator") {
        const std::vector<std::uint8_t> bytes = encode_stream(
            std::vector<Instruction>{gen_ref(), gen_end()});
        std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + 8);
        try {
            decode_stream(cut);
            FAIL("expected CodecError");
        } catch (const CodecError& e) {
            CHECK(e.byte_offset == 8);
        }
    }
}

TEST_CASE("instructions format to one-line text") {
    CHECK(format_instruction(gen_act(0, 5)) == "ACT b=0 r=5");
    CHECK(format_instruction(gen_pre(3)) == "PRE b=3");
    CHECK(format_instruction(gen_rd(1, 40)) == "RD b=1 c=40");
    CHECK(format_instruction(gen_wr(1, 3, 0xAA)) == "WR b=1 c=3 p=0xAA");
    CHECK(format_instruction(gen_ref()) == "REF");
    CHECK(format_instruction(gen_wait(12)) == "WAIT n=12");
    CHECK(format_instruction(gen_end()) == "END");

    const std::string text = disassemble({gen_ref(), gen_end()});
    CHECK(text == "REF\nEND\n");
}
