#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cadeft {

// Bit strings and bit-window scanning over 32-bit payload words.
//
// Bit numbering is MSB-first throughout: bit 0 of a byte is its most
// significant bit, bit j of a word sequence is bit 31 - (j % 32) of word
// j / 32. This matches the big-endian word encoding of the bitstream format.

// Fixed-length bit string. Stored MSB-first; unused low bits of the final
// byte are zero.
class BitPattern {
public:
    BitPattern() = default;

    explicit BitPattern(std::size_t bit_length)
        : bit_length_(bit_length), bytes_((bit_length + 7) / 8, 0) {}

    static BitPattern from_bytes(std::vector<std::uint8_t> bytes, std::size_t bit_length) {
        if (bytes.size() != (bit_length + 7) / 8)
            throw std::invalid_argument("BitPattern: byte count does not match bit length");
        BitPattern p;
        p.bit_length_ = bit_length;
        p.bytes_ = std::move(bytes);
        p.mask_tail();
        return p;
    }

    // Hex, two digits per byte, MSB-first; bit_length defaults to 4 bits per
    // hex digit.
    static BitPattern from_hex(std::string_view hex, std::size_t bit_length = 0) {
        if (bit_length == 0) bit_length = hex.size() * 4;
        if (hex.size() != (bit_length + 7) / 8 * 2)
            throw std::invalid_argument("BitPattern: hex length does not match bit length");
        BitPattern p(bit_length);
        for (std::size_t i = 0; i < hex.size(); ++i) {
            const int v = hex_digit(hex[i]);
            if (v < 0)
                throw std::invalid_argument(std::string("BitPattern: bad hex digit '") + hex[i] +
                                            "'");
            p.bytes_[i / 2] |= static_cast<std::uint8_t>(v << (i % 2 ? 0 : 4));
        }
        p.mask_tail();
        return p;
    }

    std::string to_hex() const {
        static constexpr char kDigits[] = "0123456789abcdef";
        std::string out;
        out.reserve(bytes_.size() * 2);
        for (std::uint8_t b : bytes_) {
            out.push_back(kDigits[b >> 4]);
            out.push_back(kDigits[b & 0xF]);
        }
        return out;
    }

    std::size_t bit_length() const { return bit_length_; }
    const std::vector<std::uint8_t>& bytes() const { return bytes_; }

    bool get(std::size_t i) const { return (bytes_[i / 8] >> (7 - i % 8)) & 1; }

    void set(std::size_t i, bool v) {
        const std::uint8_t mask = static_cast<std::uint8_t>(1u << (7 - i % 8));
        if (v)
            bytes_[i / 8] |= mask;
        else
            bytes_[i / 8] &= static_cast<std::uint8_t>(~mask);
    }

    void flip(std::size_t i) { set(i, !get(i)); }

    friend bool operator==(const BitPattern&, const BitPattern&) = default;

private:
    static int hex_digit(char c) {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    }

    void mask_tail() {
        const std::size_t extra = bytes_.size() * 8 - bit_length_;
        if (extra > 0 && !bytes_.empty())
            bytes_.back() &= static_cast<std::uint8_t>(0xFFu << extra);
    }

    std::size_t bit_length_ = 0;
    std::vector<std::uint8_t> bytes_;
};

namespace bitscan {

// Payload words folded into 64-bit scan words (big-endian concatenation, one
// zero word of padding), so any 64-bit window can be pulled with two shifts.
struct ScanWords {
    std::vector<std::uint64_t> words;
    std::size_t bit_length = 0;

    static ScanWords from_payload(std::span<const std::uint32_t> payload) {
        ScanWords s;
        s.bit_length = payload.size() * 32;
        s.words.assign(payload.size() / 2 + 2, 0);
        for (std::size_t i = 0; i < payload.size(); ++i) {
            const auto shift = (i % 2 == 0) ? 32 : 0;
            s.words[i / 2] |= static_cast<std::uint64_t>(payload[i]) << shift;
        }
        return s;
    }

    static ScanWords from_pattern(const BitPattern& p) {
        ScanWords s;
        s.bit_length = p.bit_length();
        s.words.assign(p.bytes().size() / 8 + 2, 0);
        for (std::size_t i = 0; i < p.bytes().size(); ++i)
            s.words[i / 8] |= static_cast<std::uint64_t>(p.bytes()[i]) << (56 - 8 * (i % 8));
        return s;
    }

    // 64 bits starting at bit_offset (MSB-aligned).
    std::uint64_t read64(std::size_t bit_offset) const {
        const std::size_t w = bit_offset / 64, s = bit_offset % 64;
        std::uint64_t x = words[w] << s;
        if (s) x |= words[w + 1] >> (64 - s);
        return x;
    }
};

// Mismatched bits between `pattern` (its first `length` bits) and the window
// of the same length starting at scan bit `bit_offset`. Early-exits past
// `limit`.
inline std::size_t window_mismatches(const ScanWords& text, std::size_t bit_offset,
                                     const ScanWords& pattern, std::size_t length,
                                     std::size_t limit) {
    std::size_t mm = 0;
    std::size_t remaining = length;
    for (std::size_t k = 0; remaining > 0; ++k) {
        std::uint64_t diff = text.read64(bit_offset + 64 * k) ^ pattern.words[k];
        if (remaining < 64) diff &= ~std::uint64_t{0} << (64 - remaining);
        mm += static_cast<std::size_t>(std::popcount(diff));
        if (mm > limit) return mm;
        remaining -= remaining < 64 ? remaining : 64;
    }
    return mm;
}

}  // namespace bitscan

// Single payload bit, MSB-first across the 32-bit words.
inline bool payload_bit_get(std::span<const std::uint32_t> payload, std::size_t bit) {
    return (payload[bit / 32] >> (31 - bit % 32)) & 1u;
}

inline void payload_bit_set(std::span<std::uint32_t> payload, std::size_t bit, bool v) {
    const std::uint32_t mask = 1u << (31 - bit % 32);
    if (v)
        payload[bit / 32] |= mask;
    else
        payload[bit / 32] &= ~mask;
}

// L bits of payload starting at bit_offset, as a BitPattern.
inline BitPattern extract_payload_bits(std::span<const std::uint32_t> payload,
                                       std::size_t bit_offset, std::size_t length) {
    if (bit_offset + length > payload.size() * 32)
        throw std::out_of_range("extract_payload_bits: window exceeds payload");
    BitPattern out(length);
    for (std::size_t i = 0; i < length; ++i)
        out.set(i, payload_bit_get(payload, bit_offset + i));
    return out;
}

}  // namespace cadeft
