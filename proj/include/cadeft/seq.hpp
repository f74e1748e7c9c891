#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cadeft/rng.hpp"

namespace cadeft {

enum class Alphabet { Dna, Rna };

inline bool is_dna_base(char c) { return c == 'A' || c == 'C' || c == 'G' || c == 'T'; }
inline bool is_rna_base(char c) { return c == 'A' || c == 'C' || c == 'G' || c == 'U'; }

inline bool is_base(Alphabet a, char c) {
    return a == Alphabet::Dna ? is_dna_base(c) : is_rna_base(c);
}

inline const char* alphabet_name(Alphabet a) { return a == Alphabet::Dna ? "DNA" : "RNA"; }

// A validated DNA or RNA string. Symbols are uppercase ACGT (DNA) or ACGU
// (RNA); the empty sequence is valid.
class NucleotideSequence {
public:
    NucleotideSequence() = default;

    NucleotideSequence(Alphabet alphabet, std::string bases)
        : alphabet_(alphabet), bases_(std::move(bases)) {
        for (char c : bases_) {
            if (!is_base(alphabet_, c))
                throw std::invalid_argument(std::string("invalid ") + alphabet_name(alphabet_) +
                                            " symbol '" + c + "'");
        }
    }

    static NucleotideSequence dna(std::string bases) {
        return NucleotideSequence(Alphabet::Dna, std::move(bases));
    }
    static NucleotideSequence rna(std::string bases) {
        return NucleotideSequence(Alphabet::Rna, std::move(bases));
    }

    Alphabet alphabet() const { return alphabet_; }
    const std::string& bases() const { return bases_; }
    std::string_view view() const { return bases_; }
    std::size_t length() const { return bases_.size(); }
    bool empty() const { return bases_.empty(); }
    char operator[](std::size_t i) const { return bases_[i]; }

    NucleotideSequence substr(std::size_t pos, std::size_t len) const {
        return NucleotideSequence(alphabet_, bases_.substr(pos, len));
    }

    friend bool operator==(const NucleotideSequence& a, const NucleotideSequence& b) = default;

private:
    Alphabet alphabet_ = Alphabet::Dna;
    std::string bases_;
};

// T -> U, everything else unchanged.
inline NucleotideSequence transcribe(const NucleotideSequence& dna) {
    if (dna.alphabet() != Alphabet::Dna)
        throw std::invalid_argument("transcribe: input must be DNA");
    std::string out = dna.bases();
    for (char& c : out)
        if (c == 'T') c = 'U';
    return NucleotideSequence::rna(std::move(out));
}

// U -> T; inverse of transcribe.
inline NucleotideSequence back_transcribe(const NucleotideSequence& rna) {
    if (rna.alphabet() != Alphabet::Rna)
        throw std::invalid_argument("back_transcribe: input must be RNA");
    std::string out = rna.bases();
    for (char& c : out)
        if (c == 'U') c = 'T';
    return NucleotideSequence::dna(std::move(out));
}

inline NucleotideSequence reverse_complement(const NucleotideSequence& dna) {
    if (dna.alphabet() != Alphabet::Dna)
        throw std::invalid_argument("reverse_complement: input must be DNA");
    std::string out(dna.length(), ' ');
    for (std::size_t i = 0; i < dna.length(); ++i) {
        char c = dna[dna.length() - 1 - i];
        switch (c) {
            case 'A': out[i] = 'T'; break;
            case 'T': out[i] = 'A'; break;
            case 'C': out[i] = 'G'; break;
            case 'G': out[i] = 'C'; break;
        }
    }
    return NucleotideSequence::dna(std::move(out));
}

// Replaces exactly round(rate * length) distinct positions, chosen uniformly
// without replacement, each with one of the three other symbols of the
// alphabet. round() is half-up.
inline NucleotideSequence mutate(const NucleotideSequence& seq, double rate, RandomSource& rng) {
    if (!(rate >= 0.0 && rate <= 1.0))
        throw std::invalid_argument("mutate: rate must be in [0, 1]");
    const std::size_t n = seq.length();
    const auto changes =
        static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));

    static constexpr char kDna[4] = {'A', 'C', 'G', 'T'};
    static constexpr char kRna[4] = {'A', 'C', 'G', 'U'};
    const char* letters = seq.alphabet() == Alphabet::Dna ? kDna : kRna;

    std::string out = seq.bases();
    std::vector<std::uint32_t> index(n);
    std::iota(index.begin(), index.end(), 0u);
    for (std::size_t i = 0; i < changes; ++i) {
        const std::size_t j = i + rng.uniform_below(n - i);
        std::swap(index[i], index[j]);
        const std::size_t pos = index[i];
        char others[3];
        int k = 0;
        for (int b = 0; b < 4; ++b)
            if (letters[b] != out[pos]) others[k++] = letters[b];
        out[pos] = others[rng.uniform_below(3)];
    }
    return NucleotideSequence(seq.alphabet(), std::move(out));
}

// `count` substrings of frag_len bases; start positions uniform over
// [0, length - frag_len], drawn with replacement.
inline std::vector<NucleotideSequence> sample_fragments(const NucleotideSequence& seq,
                                                        std::size_t count, std::size_t frag_len,
                                                        RandomSource& rng) {
    if (frag_len == 0) throw std::invalid_argument("sample_fragments: frag_len must be positive");
    if (frag_len > seq.length())
        throw std::invalid_argument("sample_fragments: frag_len exceeds sequence length");
    std::vector<NucleotideSequence> out;
    out.reserve(count);
    const std::uint64_t windows = seq.length() - frag_len + 1;
    for (std::size_t i = 0; i < count; ++i) {
        const auto start = static_cast<std::size_t>(rng.uniform_below(windows));
        out.push_back(seq.substr(start, frag_len));
    }
    return out;
}

inline std::size_t hamming_distance(const NucleotideSequence& a, const NucleotideSequence& b) {
    if (a.length() != b.length())
        throw std::invalid_argument("hamming_distance: length mismatch");
    if (a.alphabet() != b.alphabet())
        throw std::invalid_argument("hamming_distance: alphabet mismatch");
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.length(); ++i)
        if (a[i] != b[i]) ++d;
    return d;
}

// (length - hamming) / length. Two empty sequences are identical, so 1.
inline double similarity(const NucleotideSequence& a, const NucleotideSequence& b) {
    const std::size_t d = hamming_distance(a, b);
    if (a.length() == 0) return 1.0;
    return static_cast<double>(a.length() - d) / static_cast<double>(a.length());
}

}  // namespace cadeft
