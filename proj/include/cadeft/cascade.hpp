#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cadeft/locus.hpp"
#include "cadeft/match.hpp"
#include "cadeft/pam.hpp"
#include "cadeft/rng.hpp"
#include "cadeft/seq.hpp"

namespace cadeft {

// Repeat-derived crRNA handles, as printed in the source data. The 3' handle
// is used verbatim (20 symbols); both are overridable via CascadeOptions.
inline constexpr std::string_view kFivePrimeHandle = "AUAAACCG";
inline constexpr std::string_view kThreePrimeHandle = "GAGUCCCCGCGCGAGCGGGG";

// Mature guide RNA: a transcribed spacer wrapped in constant repeat-derived
// handles.
struct Crrna {
    NucleotideSequence five_prime_handle;
    NucleotideSequence spacer;
    NucleotideSequence three_prime_handle;
    std::size_t source_spacer_index = 0;

    std::size_t length() const {
        return five_prime_handle.length() + spacer.length() + three_prime_handle.length();
    }

    friend bool operator==(const Crrna&, const Crrna&) = default;
};

enum class MatchKind { Complementary, NearComplementary };

struct TargetHit {
    std::size_t position = 0;  // 0-based offset in the scanned target
    std::size_t mismatches = 0;
    MatchKind kind = MatchKind::Complementary;
    std::optional<std::string> pam;  // 3 nt following the window; nullopt at sequence end
    bool reverse_strand = false;

    friend bool operator==(const TargetHit&, const TargetHit&) = default;
};

enum class CascadeAction { Interference, PrimedAdaptation, NoAction };

struct CascadeOutcome {
    CascadeAction action = CascadeAction::NoAction;
    std::optional<TargetHit> hit;
};

enum class HitPolicy { FirstHit, BestHit };

struct CascadeOptions {
    std::uint32_t max_mm = 3;   // floor(0.10 * 32): the 90% similarity rule
    double bias = 0.9;          // geometric transcription weight per locus index
    HitPolicy policy = HitPolicy::FirstHit;
    bool scan_reverse_complement = false;
    std::string five_prime_handle{kFivePrimeHandle};
    std::string three_prime_handle{kThreePrimeHandle};
};

// n crRNAs; each picks spacer index i with probability proportional to bias^i,
// so leader-proximal (recently acquired) spacers are favored for bias < 1.
inline std::vector<Crrna> transcribe_locus(const CrisprLocus& locus, std::size_t n,
                                           RandomSource& rng, const CascadeOptions& opts = {}) {
    if (locus.spacer_count() == 0)
        throw std::invalid_argument("transcribe_locus: locus has no spacers");
    if (n == 0) throw std::invalid_argument("transcribe_locus: n must be positive");
    if (!(opts.bias > 0.0 && opts.bias <= 1.0))
        throw std::invalid_argument("transcribe_locus: bias must be in (0, 1]");

    const std::size_t k = locus.spacer_count();
    std::vector<double> cumulative(k);
    double total = 0.0, w = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
        total += w;
        cumulative[i] = total;
        w *= opts.bias;
    }

    const auto five = NucleotideSequence::rna(opts.five_prime_handle);
    const auto three = NucleotideSequence::rna(opts.three_prime_handle);

    std::vector<Crrna> out;
    out.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double u = rng.next_double() * total;
        std::size_t idx = static_cast<std::size_t>(
            std::lower_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
        if (idx >= k) idx = k - 1;
        out.push_back({five, transcribe(locus.spacers()[idx].sequence), three, idx});
    }
    return out;
}

namespace detail {

inline std::optional<std::string> pam_after(std::string_view target, std::size_t pos,
                                            std::size_t window_len) {
    const std::size_t end = pos + window_len;
    if (end + 3 > target.size()) return std::nullopt;
    return std::string(target.substr(end, 3));
}

}  // namespace detail

// Every window of spacer length whose Hamming distance to the back-transcribed
// spacer is at most max_mm, in position order, each with its trailing PAM.
inline std::vector<TargetHit> find_targets(const Crrna& crrna, const NucleotideSequence& target,
                                           std::uint32_t max_mm = 3) {
    const NucleotideSequence spacer_dna = back_transcribe(crrna.spacer);
    std::vector<TargetHit> hits;
    for (const WindowHit& wh : find_windows(target.view(), spacer_dna.view(), max_mm)) {
        hits.push_back({wh.position, wh.mismatches,
                        wh.mismatches == 0 ? MatchKind::Complementary : MatchKind::NearComplementary,
                        detail::pam_after(target.view(), wh.position, spacer_dna.length()), false});
    }
    return hits;
}

// Decision table gating the response on the PAM class:
//   no hit or no PAM        -> NoAction
//   stable PAM              -> NoAction (any match kind)
//   interfering PAM         -> Interference
//   intermediate PAM        -> Interference if complementary, else PrimedAdaptation
inline CascadeOutcome cascade_action(const std::optional<TargetHit>& hit, const PamTable& table) {
    if (!hit) return {CascadeAction::NoAction, std::nullopt};
    if (!hit->pam) return {CascadeAction::NoAction, hit};
    switch (table.classify(*hit->pam)) {
        case PamClass::Stable: return {CascadeAction::NoAction, hit};
        case PamClass::Interfering: return {CascadeAction::Interference, hit};
        case PamClass::Intermediate:
            if (hit->kind == MatchKind::Complementary)
                return {CascadeAction::Interference, hit};
            return {CascadeAction::PrimedAdaptation, hit};
    }
    return {CascadeAction::NoAction, hit};
}

struct OutcomeTally {
    std::uint64_t interference = 0;
    std::uint64_t primed = 0;
    std::uint64_t no_action = 0;

    std::uint64_t total() const { return interference + primed + no_action; }

    friend bool operator==(const OutcomeTally&, const OutcomeTally&) = default;
};

struct ScanGenomeResult {
    OutcomeTally tally;
    // Near-complementary windows flagged for integration, verbatim target DNA.
    std::vector<NucleotideSequence> primed_protospacers;
};

namespace detail {

inline std::optional<TargetHit> deciding_hit(const bitmatch::PackedDna& packed_target,
                                             std::string_view target,
                                             const NucleotideSequence& spacer_dna,
                                             const CascadeOptions& opts, bool reverse) {
    const auto ppat = bitmatch::PackedDna::pack(spacer_dna.view());
    const std::optional<WindowHit> wh = opts.policy == HitPolicy::FirstHit
                                            ? find_first_window(packed_target, ppat, opts.max_mm)
                                            : find_best_window(packed_target, ppat, opts.max_mm);
    if (!wh) return std::nullopt;
    return TargetHit{wh->position, wh->mismatches,
                     wh->mismatches == 0 ? MatchKind::Complementary : MatchKind::NearComplementary,
                     pam_after(target, wh->position, spacer_dna.length()), reverse};
}

}  // namespace detail

// Resolves one CascadeOutcome per crRNA (first hit in position order decides
// under FirstHit; fewest mismatches under BestHit) and tallies the outcomes.
// The tallies always partition the crRNA count.
inline ScanGenomeResult scan_genome(std::span<const Crrna> crrnas,
                                    const NucleotideSequence& genome, const PamTable& table,
                                    const CascadeOptions& opts = {}) {
    if (crrnas.empty()) throw std::invalid_argument("scan_genome: no crRNAs");

    ScanGenomeResult result;
    const auto packed_fwd = bitmatch::PackedDna::pack(genome.view());
    std::optional<NucleotideSequence> rc;
    std::optional<bitmatch::PackedDna> packed_rc;
    if (opts.scan_reverse_complement) {
        rc = reverse_complement(genome);
        packed_rc = bitmatch::PackedDna::pack(rc->view());
    }

    for (const Crrna& crrna : crrnas) {
        const NucleotideSequence spacer_dna = back_transcribe(crrna.spacer);
        std::optional<TargetHit> hit =
            detail::deciding_hit(packed_fwd, genome.view(), spacer_dna, opts, false);
        if (!hit && packed_rc)
            hit = detail::deciding_hit(*packed_rc, rc->view(), spacer_dna, opts, true);

        const CascadeOutcome outcome = cascade_action(hit, table);
        switch (outcome.action) {
            case CascadeAction::Interference: ++result.tally.interference; break;
            case CascadeAction::NoAction: ++result.tally.no_action; break;
            case CascadeAction::PrimedAdaptation: {
                ++result.tally.primed;
                const auto& h = *outcome.hit;
                const NucleotideSequence& src = h.reverse_strand ? *rc : genome;
                result.primed_protospacers.push_back(
                    src.substr(h.position, spacer_dna.length()));
                break;
            }
        }
    }
    return result;
}

}  // namespace cadeft
