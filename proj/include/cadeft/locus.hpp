#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cadeft/errors.hpp"
#include "cadeft/seq.hpp"

namespace cadeft {

// Repeat flanking every spacer, 29 nt.
inline constexpr std::string_view kDefaultRepeat = "GAGTTCCCCGCGCGAGCGGGGATAAACCG";

// Fixed 100-nt placeholder leader. The leader marks the locus start and the
// transcription origin; it is never matched against, so any fixed sequence
// works. Overridable wherever a locus is constructed.
inline constexpr std::string_view kDefaultLeader =
    "GGACATAGTTTATCTTCCAAGCCAAGTTTTTTGAGGAACAAGTCCGTATAACGCGCAAGATAGCGCAATTGGCGGATGAC"
    "AGGATCTATCGGCCACAGAT";

inline constexpr std::size_t kDefaultSpacerLength = 32;

enum class SpacerOrigin { Naive, Primed };

struct SpacerRecord {
    NucleotideSequence sequence;
    SpacerOrigin origin = SpacerOrigin::Naive;
    std::uint64_t acquired_at = 0;  // iteration counter at acquisition time

    friend bool operator==(const SpacerRecord&, const SpacerRecord&) = default;
};

enum class InsertPosition { LeaderProximal, DistalEnd };

// Memory bank of previously encountered sequences: leader, then alternating
// repeat/spacer records. Index 0 is leader-proximal; by default new spacers
// are inserted there, so low indices are the most recently acquired.
class CrisprLocus {
public:
    CrisprLocus(NucleotideSequence leader, NucleotideSequence repeat,
                std::size_t spacer_length = kDefaultSpacerLength)
        : leader_(std::move(leader)), repeat_(std::move(repeat)), spacer_length_(spacer_length) {
        if (repeat_.empty()) throw std::invalid_argument("locus repeat must be non-empty");
        if (spacer_length_ == 0)
            throw std::invalid_argument("locus spacer length must be positive");
    }

    static CrisprLocus with_defaults(std::size_t spacer_length = kDefaultSpacerLength) {
        return CrisprLocus(NucleotideSequence::dna(std::string(kDefaultLeader)),
                           NucleotideSequence::dna(std::string(kDefaultRepeat)), spacer_length);
    }

    const NucleotideSequence& leader() const { return leader_; }
    const NucleotideSequence& repeat() const { return repeat_; }
    std::size_t spacer_length() const { return spacer_length_; }
    const std::vector<SpacerRecord>& spacers() const { return spacers_; }
    std::size_t spacer_count() const { return spacers_.size(); }

    void insert_spacer(NucleotideSequence spacer, SpacerOrigin origin,
                       std::uint64_t acquired_at = 0,
                       InsertPosition position = InsertPosition::LeaderProximal) {
        if (spacer.length() != spacer_length_)
            throw std::invalid_argument("spacer length " + std::to_string(spacer.length()) +
                                        " does not match locus spacer length " +
                                        std::to_string(spacer_length_));
        SpacerRecord rec{std::move(spacer), origin, acquired_at};
        if (position == InsertPosition::LeaderProximal)
            spacers_.insert(spacers_.begin(), std::move(rec));
        else
            spacers_.push_back(std::move(rec));
    }

    // leader . repeat . (spacer . repeat) for each record in index order.
    NucleotideSequence flatten() const {
        std::string out = leader_.bases();
        out += repeat_.bases();
        for (const auto& rec : spacers_) {
            out += rec.sequence.bases();
            out += repeat_.bases();
        }
        return NucleotideSequence::dna(std::move(out));
    }

    friend bool operator==(const CrisprLocus&, const CrisprLocus&) = default;

private:
    NucleotideSequence leader_;
    NucleotideSequence repeat_;
    std::size_t spacer_length_;
    std::vector<SpacerRecord> spacers_;
};

inline constexpr std::string_view kLocusMagic = "CRISPR-LOCUS v1";

// Line-oriented text format:
//
//   CRISPR-LOCUS v1
//   leader <bases>
//   repeat <bases>
//   spacer-length <n>
//   spacer <naive|primed> <acquired_at> <bases>   (one per record, index order)
inline void save_locus(const CrisprLocus& locus, std::ostream& out) {
    out << kLocusMagic << '\n';
    out << "leader " << locus.leader().bases() << '\n';
    out << "repeat " << locus.repeat().bases() << '\n';
    out << "spacer-length " << locus.spacer_length() << '\n';
    for (const auto& rec : locus.spacers()) {
        out << "spacer " << (rec.origin == SpacerOrigin::Naive ? "naive" : "primed") << ' '
            << rec.acquired_at << ' ' << rec.sequence.bases() << '\n';
    }
}

inline CrisprLocus load_locus(std::istream& in) {
    std::string line;
    long long line_no = 0;
    if (!std::getline(in, line)) throw ParseError("empty locus file");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kLocusMagic) throw ParseError("bad magic, expected '" + std::string(kLocusMagic) + "'", line_no);

    std::string leader, repeat;
    std::size_t spacer_length = 0;
    bool saw_leader = false, saw_repeat = false, saw_length = false;
    std::vector<SpacerRecord> spacers;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "leader") {
            if (!(ls >> leader)) leader.clear();
            saw_leader = true;
        } else if (key == "repeat") {
            if (!(ls >> repeat)) throw ParseError("repeat line missing sequence", line_no);
            saw_repeat = true;
        } else if (key == "spacer-length") {
            if (!(ls >> spacer_length)) throw ParseError("bad spacer-length", line_no);
            saw_length = true;
        } else if (key == "spacer") {
            std::string origin_str, bases;
            std::uint64_t acquired_at = 0;
            if (!(ls >> origin_str >> acquired_at >> bases))
                throw ParseError("malformed spacer record", line_no);
            SpacerOrigin origin;
            if (origin_str == "naive")
                origin = SpacerOrigin::Naive;
            else if (origin_str == "primed")
                origin = SpacerOrigin::Primed;
            else
                throw ParseError("unknown spacer origin '" + origin_str + "'", line_no);
            try {
                spacers.push_back({NucleotideSequence::dna(bases), origin, acquired_at});
            } catch (const std::invalid_argument& e) {
                throw ParseError(e.what(), line_no);
            }
        } else {
            throw ParseError("unknown key '" + key + "'", line_no);
        }
    }
    if (!saw_repeat || !saw_length || !saw_leader)
        throw ParseError("truncated locus file: missing leader/repeat/spacer-length");

    try {
        CrisprLocus locus(NucleotideSequence::dna(leader), NucleotideSequence::dna(repeat),
                          spacer_length);
        for (auto& rec : spacers)
            locus.insert_spacer(std::move(rec.sequence), rec.origin, rec.acquired_at,
                                InsertPosition::DistalEnd);
        return locus;
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
}

inline void save_locus_file(const CrisprLocus& locus, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write locus file: " + path);
    save_locus(locus, out);
}

inline CrisprLocus load_locus_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open locus file: " + path);
    return load_locus(in);
}

}  // namespace cadeft
