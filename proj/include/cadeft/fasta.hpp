#pragma once

#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cadeft/errors.hpp"
#include "cadeft/seq.hpp"

namespace cadeft {

struct FastaRecord {
    std::string id;
    NucleotideSequence sequence;

    friend bool operator==(const FastaRecord&, const FastaRecord&) = default;
};

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace detail

// Reads '>'-headed records; sequence lines are concatenated, case-normalized
// to uppercase. Symbols outside ACGT (whitespace aside) are rejected with the
// line they occur on.
inline std::vector<FastaRecord> parse_fasta(std::istream& in) {
    std::vector<FastaRecord> records;
    std::string line;
    long long line_no = 0;
    std::string id;
    std::string bases;
    bool open_record = false;

    auto flush = [&] {
        if (open_record) records.push_back({id, NucleotideSequence::dna(std::move(bases))});
        bases.clear();
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '>') {
            flush();
            id = detail::trim(line.substr(1));
            open_record = true;
            continue;
        }
        if (!open_record)
            throw ParseError("sequence data before first '>' header", line_no);
        for (char c : line) {
            if (std::isspace(static_cast<unsigned char>(c))) continue;
            const char u = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            if (!is_dna_base(u))
                throw ParseError(std::string("invalid symbol '") + c + "'", line_no);
            bases.push_back(u);
        }
    }
    flush();
    return records;
}

inline std::vector<FastaRecord> parse_fasta(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_fasta(in);
}

// 70-column sequence lines.
inline void write_fasta(const std::vector<FastaRecord>& records, std::ostream& out) {
    constexpr std::size_t kWrap = 70;
    for (const auto& rec : records) {
        out << '>' << rec.id << '\n';
        const std::string& b = rec.sequence.bases();
        for (std::size_t i = 0; i < b.size(); i += kWrap)
            out << std::string_view(b).substr(i, kWrap) << '\n';
    }
}

inline std::vector<FastaRecord> read_fasta_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open FASTA file: " + path);
    return parse_fasta(in);
}

inline void write_fasta_file(const std::string& path, const std::vector<FastaRecord>& records) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write FASTA file: " + path);
    write_fasta(records, out);
}

}  // namespace cadeft
