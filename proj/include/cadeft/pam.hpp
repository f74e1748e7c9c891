#pragma once

#include <array>
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

enum class PamClass { Stable, Interfering, Intermediate };

inline const char* pam_class_name(PamClass c) {
    switch (c) {
        case PamClass::Stable: return "stable";
        case PamClass::Interfering: return "interfering";
        case PamClass::Intermediate: return "intermediate";
    }
    return "?";
}

namespace detail {

inline int trinucleotide_index(std::string_view pam) {
    if (pam.size() != 3) return -1;
    int idx = 0;
    for (char c : pam) {
        int v;
        switch (c) {
            case 'A': v = 0; break;
            case 'C': v = 1; break;
            case 'G': v = 2; break;
            case 'T': v = 3; break;
            default: return -1;
        }
        idx = idx * 4 + v;
    }
    return idx;
}

inline std::string trinucleotide_at(int idx) {
    static constexpr char kBases[4] = {'A', 'C', 'G', 'T'};
    std::string s(3, ' ');
    s[0] = kBases[(idx >> 4) & 3];
    s[1] = kBases[(idx >> 2) & 3];
    s[2] = kBases[idx & 3];
    return s;
}

}  // namespace detail

// Partition of the 64 trinucleotides into stable / interfering / intermediate
// classes. Construction rejects anything that is not a full disjoint cover.
class PamTable {
public:
    PamTable(const std::vector<std::string>& stable, const std::vector<std::string>& interfering,
             const std::vector<std::string>& intermediate) {
        std::array<int, 64> seen{};
        seen.fill(0);
        auto assign = [&](const std::vector<std::string>& pams, PamClass cls) {
            for (const auto& p : pams) {
                const int idx = detail::trinucleotide_index(p);
                if (idx < 0) throw std::invalid_argument("invalid PAM trinucleotide '" + p + "'");
                if (seen[idx]++)
                    throw std::invalid_argument("PAM '" + p + "' assigned to more than one class");
                classes_[static_cast<std::size_t>(idx)] = cls;
            }
        };
        assign(stable, PamClass::Stable);
        assign(interfering, PamClass::Interfering);
        assign(intermediate, PamClass::Intermediate);
        for (int i = 0; i < 64; ++i)
            if (!seen[i])
                throw std::invalid_argument("PAM table does not cover '" +
                                            detail::trinucleotide_at(i) + "'");
    }

    PamClass classify(std::string_view pam) const {
        const int idx = detail::trinucleotide_index(pam);
        if (idx < 0)
            throw std::invalid_argument("PAM must be a 3-nt DNA string, got '" + std::string(pam) +
                                        "'");
        return classes_[static_cast<std::size_t>(idx)];
    }

    std::vector<std::string> members(PamClass cls) const {
        std::vector<std::string> out;
        for (int i = 0; i < 64; ++i)
            if (classes_[static_cast<std::size_t>(i)] == cls)
                out.push_back(detail::trinucleotide_at(i));
        return out;
    }

    std::size_t count(PamClass cls) const {
        std::size_t n = 0;
        for (auto c : classes_)
            if (c == cls) ++n;
        return n;
    }

    friend bool operator==(const PamTable&, const PamTable&) = default;

private:
    std::array<PamClass, 64> classes_{};
};

// E. coli classification: 36 stable, 17 interfering, 11 intermediate.
inline const PamTable& default_pam_table() {
    static const PamTable table(
        {"ACA", "ACC", "ACT", "AGT", "CAC", "CAT", "CCA", "CCC", "CCG", "CCT", "CGA", "CGC",
         "CGG", "CGT", "CTA", "CTC", "CTT", "GAT", "GCA", "GCC", "GCG", "GCT", "GGA", "GGC",
         "GGT", "GTC", "GTT", "TCA", "TCC", "TCG", "TCT", "TGA", "TGC", "TGT", "TTC", "TTT"},
        {"AAA", "AAC", "AAG", "AAT", "AGG", "ATA", "ATC", "ATG", "CAG", "GAA", "GAG", "GGG",
         "GTG", "TAA", "TAG", "TGG", "TTG"},
        {"ACG", "AGA", "AGC", "ATT", "CAA", "CTG", "GAC", "GTA", "TAC", "TAT", "TTA"});
    return table;
}

inline PamClass classify_pam(std::string_view pam, const PamTable& table) {
    return table.classify(pam);
}

// Config grammar: one class per line, repeatable and accumulating:
//
//   # comment
//   stable: CCG ACA ...
//   interfering: AAA ...
//   intermediate: ACG ...
inline PamTable load_pam_table(std::istream& in) {
    std::vector<std::string> sets[3];
    std::string line;
    long long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string head;
        ls >> head;
        if (!head.empty() && head.back() == ':') head.pop_back();
        int which;
        if (head == "stable")
            which = 0;
        else if (head == "interfering")
            which = 1;
        else if (head == "intermediate")
            which = 2;
        else
            throw ParseError("unknown PAM class '" + head + "'", line_no);
        std::string pam;
        while (ls >> pam) sets[which].push_back(pam);
    }
    try {
        return PamTable(sets[0], sets[1], sets[2]);
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
}

inline void save_pam_table(const PamTable& table, std::ostream& out) {
    for (PamClass cls : {PamClass::Stable, PamClass::Interfering, PamClass::Intermediate}) {
        out << pam_class_name(cls) << ':';
        for (const auto& p : table.members(cls)) out << ' ' << p;
        out << '\n';
    }
}

inline PamTable load_pam_table_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open PAM table file: " + path);
    return load_pam_table(in);
}

}  // namespace cadeft
