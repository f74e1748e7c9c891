#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace cadeft {

// k-mismatch search of a short DNA pattern over a DNA text.
//
// Bases are packed 2 bits each, 32 per word. XORing a packed window against
// the packed pattern leaves a nonzero 2-bit group exactly where the bases
// differ, so folding each group with (x | x >> 1) & 0x5555... and popcounting
// yields the Hamming distance in a handful of word operations per window.

namespace bitmatch {

inline constexpr std::uint64_t kOddBits = 0x5555555555555555ull;

inline int dna_code(char c) {
    switch (c) {
        case 'A': return 0;
        case 'C': return 1;
        case 'G': return 2;
        case 'T': return 3;
    }
    return -1;
}

// Base i occupies bits [2*(i%32), 2*(i%32)+2) of word i/32. One zero word of
// padding is kept at the end so unaligned 64-bit reads never leave the array.
struct PackedDna {
    std::vector<std::uint64_t> words;
    std::size_t size = 0;

    static PackedDna pack(std::string_view bases) {
        PackedDna p;
        p.size = bases.size();
        p.words.assign(bases.size() / 32 + 2, 0);
        for (std::size_t i = 0; i < bases.size(); ++i)
            p.words[i / 32] |= static_cast<std::uint64_t>(dna_code(bases[i])) << (2 * (i % 32));
        return p;
    }
};

inline std::uint64_t read_bits(const std::vector<std::uint64_t>& words, std::size_t bit_offset) {
    const std::size_t w = bit_offset / 64, s = bit_offset % 64;
    std::uint64_t x = words[w] >> s;
    if (s) x |= words[w + 1] << (64 - s);
    return x;
}

// Mismatches between `pattern` and the text window starting at base `pos`,
// stopping early once the count exceeds `limit`.
inline std::size_t window_mismatches(const PackedDna& text, std::size_t pos,
                                     const PackedDna& pattern, std::size_t limit) {
    std::size_t mm = 0;
    std::size_t remaining = pattern.size;
    for (std::size_t k = 0; remaining > 0; ++k) {
        const std::size_t take = remaining < 32 ? remaining : 32;
        std::uint64_t diff = read_bits(text.words, 2 * pos + 64 * k) ^ pattern.words[k];
        if (take < 32) diff &= (std::uint64_t{1} << (2 * take)) - 1;
        mm += static_cast<std::size_t>(std::popcount((diff | (diff >> 1)) & kOddBits));
        if (mm > limit) return mm;
        remaining -= take;
    }
    return mm;
}

}  // namespace bitmatch

struct WindowHit {
    std::size_t position = 0;
    std::size_t mismatches = 0;

    friend bool operator==(const WindowHit&, const WindowHit&) = default;
};

// All windows of |pattern| bases whose Hamming distance to pattern is at most
// max_mm, in position order. A text shorter than the pattern yields no hits.
inline std::vector<WindowHit> find_windows(std::string_view text, std::string_view pattern,
                                           std::size_t max_mm) {
    std::vector<WindowHit> hits;
    if (pattern.empty() || text.size() < pattern.size()) return hits;
    const auto ptext = bitmatch::PackedDna::pack(text);
    const auto ppat = bitmatch::PackedDna::pack(pattern);
    const std::size_t last = text.size() - pattern.size();
    for (std::size_t pos = 0; pos <= last; ++pos) {
        const std::size_t mm = bitmatch::window_mismatches(ptext, pos, ppat, max_mm);
        if (mm <= max_mm) hits.push_back({pos, mm});
    }
    return hits;
}

// First qualifying window in position order.
inline std::optional<WindowHit> find_first_window(const bitmatch::PackedDna& text,
                                                  const bitmatch::PackedDna& pattern,
                                                  std::size_t max_mm) {
    if (pattern.size == 0 || text.size < pattern.size) return std::nullopt;
    const std::size_t last = text.size - pattern.size;
    for (std::size_t pos = 0; pos <= last; ++pos) {
        const std::size_t mm = bitmatch::window_mismatches(text, pos, pattern, max_mm);
        if (mm <= max_mm) return WindowHit{pos, mm};
    }
    return std::nullopt;
}

// Fewest mismatches, ties broken by leftmost position.
inline std::optional<WindowHit> find_best_window(const bitmatch::PackedDna& text,
                                                 const bitmatch::PackedDna& pattern,
                                                 std::size_t max_mm) {
    if (pattern.size == 0 || text.size < pattern.size) return std::nullopt;
    std::optional<WindowHit> best;
    std::size_t limit = max_mm;
    const std::size_t last = text.size - pattern.size;
    for (std::size_t pos = 0; pos <= last; ++pos) {
        const std::size_t mm = bitmatch::window_mismatches(text, pos, pattern, limit);
        if (mm <= limit && (!best || mm < best->mismatches)) {
            best = WindowHit{pos, mm};
            if (mm == 0) break;
            limit = mm;  // later windows only count if strictly better
        }
    }
    return best;
}

}  // namespace cadeft
