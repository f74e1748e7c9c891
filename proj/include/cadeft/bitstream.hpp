#pragma once

#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "cadeft/bits.hpp"
#include "cadeft/errors.hpp"
#include "cadeft/rng.hpp"

namespace cadeft {

// Synthetic configuration bitstream format, version 1.
//
// A stream is a sequence of big-endian 32-bit words: dummy words (all ones),
// one sync word, then configuration packets back to back. A packet is a
// header word (opcode in bits [31:28], register address in [27:16], word
// count in [15:0]) followed by word-count payload words. An all-ones word in
// header position terminates the packet list; it and everything after it is
// kept as an opaque trailer and never scanned. Nothing before the sync word
// is configuration data.
//
// The full layout is documented in docs/bitstream-format.md.

inline constexpr std::uint32_t kDummyWord = 0xFFFFFFFFu;
inline constexpr std::uint32_t kDefaultSyncWord = 0xAA995566u;
inline constexpr std::size_t kMaxPacketWords = 0xFFFF;

struct ConfigPacket {
    std::uint8_t opcode = 0;              // 4 bits
    std::uint16_t register_address = 0;   // 12 bits
    std::vector<std::uint32_t> payload;   // word_count entries, 16-bit count

    std::uint32_t header_word() const {
        return (static_cast<std::uint32_t>(opcode & 0xF) << 28) |
               (static_cast<std::uint32_t>(register_address & 0xFFF) << 16) |
               static_cast<std::uint32_t>(payload.size() & 0xFFFF);
    }

    friend bool operator==(const ConfigPacket&, const ConfigPacket&) = default;
};

struct Bitstream {
    std::size_t header_word_count = 0;  // dummy words before the sync word
    std::uint32_t sync_word = kDefaultSyncWord;
    std::vector<ConfigPacket> packets;
    std::vector<std::uint8_t> trailer;  // raw bytes from the terminator word on

    friend bool operator==(const Bitstream&, const Bitstream&) = default;
};

enum class BitstreamErrorKind { BadLength, NoSync, MalformedHeader, TruncatedPacket };

class BitstreamError : public ParseError {
public:
    BitstreamError(BitstreamErrorKind kind, const std::string& message, long long byte_offset = -1,
                   long long packet_index = -1)
        : ParseError(message, -1, byte_offset), kind_(kind), packet_index_(packet_index) {}

    BitstreamErrorKind kind() const { return kind_; }
    long long packet_index() const { return packet_index_; }

private:
    BitstreamErrorKind kind_;
    long long packet_index_;
};

namespace detail {

inline std::uint32_t read_word_be(std::span<const std::uint8_t> bytes, std::size_t word_index) {
    const std::size_t o = word_index * 4;
    return (std::uint32_t{bytes[o]} << 24) | (std::uint32_t{bytes[o + 1]} << 16) |
           (std::uint32_t{bytes[o + 2]} << 8) | std::uint32_t{bytes[o + 3]};
}

inline void append_word_be(std::vector<std::uint8_t>& out, std::uint32_t w) {
    out.push_back(static_cast<std::uint8_t>(w >> 24));
    out.push_back(static_cast<std::uint8_t>(w >> 16));
    out.push_back(static_cast<std::uint8_t>(w >> 8));
    out.push_back(static_cast<std::uint8_t>(w));
}

}  // namespace detail

// Total byte offset of the first payload word of packet `index` within the
// encoded stream. Derived from the structure, so it is always in sync with
// what generate_bitstream emits.
inline std::size_t payload_byte_offset(const Bitstream& bs, std::size_t index) {
    if (index >= bs.packets.size()) throw std::out_of_range("payload_byte_offset: bad packet index");
    std::size_t words = bs.header_word_count + 1;  // header dummies + sync
    for (std::size_t p = 0; p < index; ++p) words += 1 + bs.packets[p].payload.size();
    return (words + 1) * 4;  // + packet header word
}

inline Bitstream parse_bitstream(std::span<const std::uint8_t> bytes,
                                 std::uint32_t sync_word = kDefaultSyncWord) {
    if (bytes.size() < 4 || bytes.size() % 4 != 0)
        throw BitstreamError(BitstreamErrorKind::BadLength,
                             "stream length must be a positive multiple of 4 bytes, got " +
                                 std::to_string(bytes.size()));
    const std::size_t nwords = bytes.size() / 4;

    // locate the sync word first; pre-sync validation only matters once we
    // know configuration data exists
    std::size_t sync_at = nwords;
    for (std::size_t i = 0; i < nwords; ++i) {
        if (detail::read_word_be(bytes, i) == sync_word) {
            sync_at = i;
            break;
        }
    }
    if (sync_at == nwords)
        throw BitstreamError(BitstreamErrorKind::NoSync, "no sync word in stream");

    Bitstream bs;
    bs.sync_word = sync_word;
    for (std::size_t i = 0; i < sync_at; ++i) {
        if (detail::read_word_be(bytes, i) != kDummyWord)
            throw BitstreamError(BitstreamErrorKind::MalformedHeader,
                                 "non-dummy word before sync", static_cast<long long>(i * 4));
    }
    bs.header_word_count = sync_at;

    std::size_t i = sync_at + 1;
    while (i < nwords) {
        const std::uint32_t header = detail::read_word_be(bytes, i);
        if (header == kDummyWord) {
            bs.trailer.assign(bytes.begin() + static_cast<std::ptrdiff_t>(i * 4), bytes.end());
            return bs;
        }
        ConfigPacket packet;
        packet.opcode = static_cast<std::uint8_t>(header >> 28);
        packet.register_address = static_cast<std::uint16_t>((header >> 16) & 0xFFF);
        const std::size_t word_count = header & 0xFFFF;
        if (i + 1 + word_count > nwords)
            throw BitstreamError(BitstreamErrorKind::TruncatedPacket,
                                 "packet " + std::to_string(bs.packets.size()) + " expects " +
                                     std::to_string(word_count) + " payload words, stream has " +
                                     std::to_string(nwords - i - 1),
                                 static_cast<long long>(i * 4),
                                 static_cast<long long>(bs.packets.size()));
        packet.payload.reserve(word_count);
        for (std::size_t w = 0; w < word_count; ++w)
            packet.payload.push_back(detail::read_word_be(bytes, i + 1 + w));
        bs.packets.push_back(std::move(packet));
        i += 1 + word_count;
    }
    return bs;
}

inline std::vector<std::uint8_t> generate_bitstream(const Bitstream& bs) {
    if (bs.sync_word == kDummyWord)
        throw std::invalid_argument("sync word may not be the dummy word");
    std::vector<std::uint8_t> out;
    std::size_t payload_words = 0;
    for (const auto& p : bs.packets) payload_words += p.payload.size();
    out.reserve((bs.header_word_count + 1 + bs.packets.size() + payload_words) * 4 +
                bs.trailer.size());

    for (std::size_t i = 0; i < bs.header_word_count; ++i) detail::append_word_be(out, kDummyWord);
    detail::append_word_be(out, bs.sync_word);
    for (const auto& p : bs.packets) {
        if (p.payload.size() > kMaxPacketWords)
            throw std::invalid_argument("packet payload exceeds the 16-bit word count");
        if (p.header_word() == kDummyWord)
            throw std::invalid_argument("packet header encodes the terminator word");
        detail::append_word_be(out, p.header_word());
        for (std::uint32_t w : p.payload) detail::append_word_be(out, w);
    }
    out.insert(out.end(), bs.trailer.begin(), bs.trailer.end());
    return out;
}

struct PacketSpec {
    std::uint8_t opcode = 0;
    std::uint16_t register_address = 0;
    std::size_t word_count = 0;
};

// Corpus helper: random payload content under a fixed structure.
inline Bitstream make_random_bitstream(std::size_t header_words, std::span<const PacketSpec> specs,
                                       RandomSource& rng,
                                       std::uint32_t sync_word = kDefaultSyncWord) {
    Bitstream bs;
    bs.header_word_count = header_words;
    bs.sync_word = sync_word;
    for (const auto& spec : specs) {
        if (spec.word_count > kMaxPacketWords)
            throw std::invalid_argument("packet word count exceeds 16 bits");
        ConfigPacket p;
        p.opcode = spec.opcode;
        p.register_address = spec.register_address;
        p.payload.resize(spec.word_count);
        for (auto& w : p.payload) w = static_cast<std::uint32_t>(rng.next_u64() >> 32);
        bs.packets.push_back(std::move(p));
    }
    return bs;
}

// Overwrites payload bits [bit_offset, bit_offset + L) of one packet with the
// signature bits. Packets are the only injectable region; the header and
// trailer are not configuration data.
inline void inject_signature(Bitstream& bs, const BitPattern& signature, std::size_t packet_index,
                             std::size_t bit_offset) {
    if (packet_index >= bs.packets.size())
        throw std::out_of_range("inject_signature: packet index " + std::to_string(packet_index) +
                                " out of range");
    auto& payload = bs.packets[packet_index].payload;
    if (bit_offset + signature.bit_length() > payload.size() * 32)
        throw std::out_of_range("inject_signature: signature does not fit at bit offset " +
                                std::to_string(bit_offset));
    for (std::size_t i = 0; i < signature.bit_length(); ++i)
        payload_bit_set(payload, bit_offset + i, signature.get(i));
}

inline std::vector<std::uint8_t> read_binary_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + path);
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                     std::istreambuf_iterator<char>());
}

inline void write_binary_file(const std::string& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write file: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

}  // namespace cadeft
