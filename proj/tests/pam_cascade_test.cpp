#include <catch2/catch.hpp>

#include <map>
#include <set>
#include <sstream>

#include "cadeft/cascade.hpp"
#include "cadeft/pam.hpp"
#include "testutil.hpp"

using namespace cadeft;

TEST_CASE("default PAM table partitions all 64 trinucleotides as 36/17/11") {
    const auto& table = default_pam_table();
    CHECK(table.count(PamClass::Stable) == 36);
    CHECK(table.count(PamClass::Interfering) == 17);
    CHECK(table.count(PamClass::Intermediate) == 11);

    // exhaustive: every trinucleotide classifies into exactly one class
    static constexpr char kBases[4] = {'A', 'C', 'G', 'T'};
    std::set<std::string> seen;
    for (char a : kBases)
        for (char b : kBases)
            for (char c : kBases) {
                const std::string pam{a, b, c};
                CHECK_NOTHROW(table.classify(pam));
                seen.insert(pam);
            }
    CHECK(seen.size() == 64);
}

TEST_CASE("PAM classification of known members") {
    const auto& table = default_pam_table();
    CHECK(table.classify("CCG") == PamClass::Stable);
    CHECK(table.classify("AAA") == PamClass::Interfering);
    CHECK(table.classify("ACG") == PamClass::Intermediate);
    CHECK_THROWS_AS(table.classify("CC"), std::invalid_argument);
    CHECK_THROWS_AS(table.classify("CCGG"), std::invalid_argument);
    CHECK_THROWS_AS(table.classify("CCN"), std::invalid_argument);
}

TEST_CASE("partial or overlapping PAM tables are rejected") {
    CHECK_THROWS_AS(PamTable({"AAA"}, {"AAC"}, {"AAG"}), std::invalid_argument);
    auto stable = default_pam_table().members(PamClass::Stable);
    auto interfering = default_pam_table().members(PamClass::Interfering);
    auto intermediate = default_pam_table().members(PamClass::Intermediate);
    intermediate.push_back("CCG");  // duplicate of a stable member
    CHECK_THROWS_AS(PamTable(stable, interfering, intermediate), std::invalid_argument);
}

TEST_CASE("PAM table config round-trip") {
    std::ostringstream out;
    save_pam_table(default_pam_table(), out);
    std::istringstream in(out.str());
    CHECK(load_pam_table(in) == default_pam_table());

    std::istringstream bad("stable: CCG\nwhatever: AAA\n");
    CHECK_THROWS_AS(load_pam_table(bad), ParseError);
}

TEST_CASE("locus transcription wraps spacers in the fixed handles") {
    auto locus = CrisprLocus::with_defaults();
    RandomSource rng(51);
    const auto spacer = NucleotideSequence::dna(testutil::random_dna(rng, 32));
    locus.insert_spacer(spacer, SpacerOrigin::Naive);

    const auto crrnas = transcribe_locus(locus, 5, rng);
    REQUIRE(crrnas.size() == 5);
    for (const auto& c : crrnas) {
        CHECK(c.length() == 8 + 32 + 20);
        CHECK(c.five_prime_handle.bases() == "AUAAACCG");
        CHECK(c.three_prime_handle.bases() == "GAGUCCCCGCGCGAGCGGGG");
        CHECK(c.spacer == transcribe(spacer));
        CHECK(c.source_spacer_index == 0);
    }

    auto empty = CrisprLocus::with_defaults();
    CHECK_THROWS_AS(transcribe_locus(empty, 1, rng), std::invalid_argument);
}

TEST_CASE("transcription bias weights spacer selection geometrically") {
    auto locus = CrisprLocus::with_defaults();
    RandomSource rng(52);
    locus.insert_spacer(NucleotideSequence::dna(testutil::random_dna(rng, 32)),
                        SpacerOrigin::Naive);
    locus.insert_spacer(NucleotideSequence::dna(testutil::random_dna(rng, 32)),
                        SpacerOrigin::Naive);

    auto frequency_of_index0 = [&](double bias, std::size_t draws) {
        CascadeOptions opts;
        opts.bias = bias;
        RandomSource local(42);
        const auto crrnas = transcribe_locus(locus, draws, local, opts);
        std::size_t hits = 0;
        for (const auto& c : crrnas)
            if (c.source_spacer_index == 0) ++hits;
        return double(hits) / double(draws);
    };

    // bias 1.0: uniform, 50/50 within +-3pp over 10000 draws
    CHECK(frequency_of_index0(1.0, 10000) == Approx(0.5).margin(0.03));
    // bias 0.5 over two spacers: P(index 0) = 1/(1+0.5) = 2/3
    CHECK(frequency_of_index0(0.5, 10000) == Approx(2.0 / 3.0).margin(0.03));

    CascadeOptions bad;
    bad.bias = 0.0;
    CHECK_THROWS_AS(transcribe_locus(locus, 1, rng, bad), std::invalid_argument);
}

TEST_CASE("find_targets locates planted spacers with trailing PAM") {
    RandomSource rng(53);
    const auto genome = NucleotideSequence::dna(testutil::random_dna(rng, 400));
    const std::size_t pos = 120;
    const auto spacer = genome.substr(pos, 32);

    Crrna crrna{NucleotideSequence::rna(std::string(kFivePrimeHandle)), transcribe(spacer),
                NucleotideSequence::rna(std::string(kThreePrimeHandle)), 0};

    const auto hits = find_targets(crrna, genome, 3);
    REQUIRE_FALSE(hits.empty());
    bool found = false;
    for (const auto& h : hits) {
        if (h.position == pos) {
            found = true;
            CHECK(h.mismatches == 0);
            CHECK(h.kind == MatchKind::Complementary);
            REQUIRE(h.pam.has_value());
            CHECK(*h.pam == genome.substr(pos + 32, 3).bases());
        }
    }
    CHECK(found);

    // hits are sorted by position
    for (std::size_t i = 1; i < hits.size(); ++i) CHECK(hits[i - 1].position < hits[i].position);
}

TEST_CASE("find_targets reports no PAM when the window ends at the target end") {
    RandomSource rng(54);
    const auto target = NucleotideSequence::dna(testutil::random_dna(rng, 32));
    Crrna crrna{NucleotideSequence::rna(std::string(kFivePrimeHandle)), transcribe(target),
                NucleotideSequence::rna(std::string(kThreePrimeHandle)), 0};
    const auto hits = find_targets(crrna, target, 3);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].position == 0);
    CHECK_FALSE(hits[0].pam.has_value());

    // a window whose PAM is cut off 1 nt short is also Absent
    const auto two_more = NucleotideSequence::dna(target.bases() + "GG");
    const auto hits2 = find_targets(crrna, two_more, 0);
    REQUIRE(hits2.size() == 1);
    CHECK_FALSE(hits2[0].pam.has_value());
}

TEST_CASE("find_targets with no qualifying window returns an empty list") {
    const auto genome = NucleotideSequence::dna(std::string(100, 'A'));
    Crrna crrna{NucleotideSequence::rna(std::string(kFivePrimeHandle)),
                NucleotideSequence::rna(std::string(32, 'C')),
                NucleotideSequence::rna(std::string(kThreePrimeHandle)), 0};
    CHECK(find_targets(crrna, genome, 3).empty());
    // target shorter than the spacer: empty, not an error
    CHECK(find_targets(crrna, NucleotideSequence::dna("ACGT"), 3).empty());
}

TEST_CASE("find_targets equals a naive reference scan") {
    RandomSource rng(55);
    for (int iter = 0; iter < 100; ++iter) {
        const auto genome = NucleotideSequence::dna(testutil::random_dna(rng, 200));
        auto spacer_bases = testutil::random_dna(rng, 16);
        if (rng.uniform_below(2)) {
            const auto pos = rng.uniform_below(genome.length() - 16 + 1);
            spacer_bases = genome.bases().substr(pos, 16);
            for (std::size_t f = rng.uniform_below(3); f > 0; --f)
                spacer_bases[rng.uniform_below(16)] = "ACGT"[rng.uniform_below(4)];
        }
        Crrna crrna{NucleotideSequence::rna(std::string(kFivePrimeHandle)),
                    transcribe(NucleotideSequence::dna(spacer_bases)),
                    NucleotideSequence::rna(std::string(kThreePrimeHandle)), 0};
        const auto max_mm = rng.uniform_below(4);
        const auto hits = find_targets(crrna, genome, max_mm);
        const auto naive = testutil::naive_window_scan(genome.view(), spacer_bases, max_mm);
        REQUIRE(hits.size() == naive.size());
        for (std::size_t i = 0; i < hits.size(); ++i) {
            CHECK(hits[i].position == naive[i].position);
            CHECK(hits[i].mismatches == naive[i].mismatches);
        }
    }
}

TEST_CASE("cascade action decision table") {
    const auto& table = default_pam_table();
    auto hit = [](MatchKind kind, std::optional<std::string> pam) {
        return TargetHit{10, kind == MatchKind::Complementary ? 0u : 2u, kind, std::move(pam),
                         false};
    };

    CHECK(cascade_action(std::nullopt, table).action == CascadeAction::NoAction);
    CHECK(cascade_action(hit(MatchKind::Complementary, std::nullopt), table).action ==
          CascadeAction::NoAction);
    CHECK(cascade_action(hit(MatchKind::NearComplementary, std::nullopt), table).action ==
          CascadeAction::NoAction);

    // stable -> NoAction for both kinds
    CHECK(cascade_action(hit(MatchKind::Complementary, "CCG"), table).action ==
          CascadeAction::NoAction);
    CHECK(cascade_action(hit(MatchKind::NearComplementary, "CCG"), table).action ==
          CascadeAction::NoAction);
    // interfering -> Interference for both kinds
    CHECK(cascade_action(hit(MatchKind::Complementary, "AAA"), table).action ==
          CascadeAction::Interference);
    CHECK(cascade_action(hit(MatchKind::NearComplementary, "AAA"), table).action ==
          CascadeAction::Interference);
    // intermediate: Interference when complementary, PrimedAdaptation when near
    CHECK(cascade_action(hit(MatchKind::Complementary, "ACG"), table).action ==
          CascadeAction::Interference);
    CHECK(cascade_action(hit(MatchKind::NearComplementary, "ACG"), table).action ==
          CascadeAction::PrimedAdaptation);
}

TEST_CASE("cascade action never primes on complementary hits or stable PAMs") {
    const auto& table = default_pam_table();
    static constexpr char kBases[4] = {'A', 'C', 'G', 'T'};
    for (char a : kBases)
        for (char b : kBases)
            for (char c : kBases) {
                const std::string pam{a, b, c};
                for (auto kind : {MatchKind::Complementary, MatchKind::NearComplementary}) {
                    const auto out = cascade_action(
                        TargetHit{0, kind == MatchKind::Complementary ? 0u : 1u, kind, pam, false},
                        table);
                    if (out.action == CascadeAction::PrimedAdaptation) {
                        CHECK(kind == MatchKind::NearComplementary);
                        CHECK(table.classify(pam) == PamClass::Intermediate);
                    }
                }
            }
}

TEST_CASE("scan_genome tallies partition the crRNA count") {
    RandomSource rng(56);
    const auto genome = NucleotideSequence::dna(testutil::random_dna(rng, 5000));

    auto locus = CrisprLocus::with_defaults();
    for (const auto& frag : sample_fragments(genome, 100, 32, rng))
        locus.insert_spacer(frag, SpacerOrigin::Naive);

    const auto crrnas = transcribe_locus(locus, 100, rng);
    const auto result = scan_genome(crrnas, genome, default_pam_table());
    CHECK(result.tally.total() == 100);
    // spacers copied verbatim from an unmutated genome never prime
    CHECK(result.tally.primed == 0);
    CHECK(result.primed_protospacers.empty());

    CHECK_THROWS_AS(scan_genome({}, genome, default_pam_table()), std::invalid_argument);
}

TEST_CASE("scan_genome outcome for a single crRNA follows the decision table") {
    // genome with exactly one window matching the spacer, followed by a stable PAM
    RandomSource rng(57);
    const std::string spacer = testutil::random_dna(rng, 32);
    const auto genome = NucleotideSequence::dna(std::string(40, 'A') + spacer + "CCG" +
                                                std::string(40, 'A'));
    auto locus = CrisprLocus::with_defaults();
    locus.insert_spacer(NucleotideSequence::dna(spacer), SpacerOrigin::Naive);
    const auto crrnas = transcribe_locus(locus, 1, rng);

    const auto result = scan_genome(crrnas, genome, default_pam_table());
    CHECK(result.tally.interference == 0);
    CHECK(result.tally.primed == 0);
    CHECK(result.tally.no_action == 1);
}

TEST_CASE("reverse complement scanning is off by default and opt-in") {
    RandomSource rng(59);
    // plant the reverse complement of the spacer, so only an RC scan can see it
    const std::string spacer = testutil::random_dna(rng, 32);
    const auto rc = reverse_complement(NucleotideSequence::dna(spacer));
    const auto genome =
        NucleotideSequence::dna(std::string(20, 'A') + rc.bases() + std::string(20, 'A'));

    auto locus = CrisprLocus::with_defaults();
    locus.insert_spacer(NucleotideSequence::dna(spacer), SpacerOrigin::Naive);
    const auto crrnas = transcribe_locus(locus, 1, rng);

    const auto fwd_only = scan_genome(crrnas, genome, default_pam_table());
    CHECK(fwd_only.tally.no_action == 1);  // no forward hit at all

    CascadeOptions opts;
    opts.scan_reverse_complement = true;
    const auto both = scan_genome(crrnas, genome, default_pam_table(), opts);
    CHECK(both.tally.no_action + both.tally.interference + both.tally.primed == 1);
    // the spacer window exists on the reverse strand, so some outcome other
    // than "never found" must be possible; assert the hit was actually made
    // by checking determinism of the decision against the RC PAM class
    const auto rc_genome = reverse_complement(genome);
    const auto hits = find_targets(crrnas[0], rc_genome, opts.max_mm);
    REQUIRE_FALSE(hits.empty());
}

TEST_CASE("best-hit policy decides by fewest mismatches in scan_genome") {
    RandomSource rng(60);
    // genome layout: near window (1 mm, interfering PAM) ... exact window (stable PAM)
    const std::string spacer = testutil::random_dna(rng, 32);
    std::string near = spacer;
    near[5] = near[5] == 'A' ? 'C' : 'A';
    const auto genome = NucleotideSequence::dna(std::string(10, 'T') + near + "AAA" +
                                                std::string(10, 'T') + spacer + "CCG" +
                                                std::string(10, 'T'));
    auto locus = CrisprLocus::with_defaults();
    locus.insert_spacer(NucleotideSequence::dna(spacer), SpacerOrigin::Naive);
    const auto crrnas = transcribe_locus(locus, 1, rng);

    // first-hit: the near window with the interfering PAM decides
    const auto first = scan_genome(crrnas, genome, default_pam_table());
    CHECK(first.tally.interference == 1);

    // best-hit: the exact window further right decides, and its stable PAM
    // yields no action
    CascadeOptions opts;
    opts.policy = HitPolicy::BestHit;
    const auto best = scan_genome(crrnas, genome, default_pam_table(), opts);
    CHECK(best.tally.no_action == 1);
}

TEST_CASE("scan_genome collects primed protospacers verbatim") {
    RandomSource rng(58);
    // spacer that near-matches a window followed by an intermediate PAM
    std::string window = testutil::random_dna(rng, 32);
    std::string spacer = window;
    spacer[3] = spacer[3] == 'A' ? 'C' : 'A';  // one mismatch
    const auto genome =
        NucleotideSequence::dna(std::string(10, 'T') + window + "ACG" + std::string(10, 'T'));

    auto locus = CrisprLocus::with_defaults();
    locus.insert_spacer(NucleotideSequence::dna(spacer), SpacerOrigin::Naive);
    const auto crrnas = transcribe_locus(locus, 3, rng);

    const auto result = scan_genome(crrnas, genome, default_pam_table());
    CHECK(result.tally.primed == 3);
    REQUIRE(result.primed_protospacers.size() == 3);
    for (const auto& p : result.primed_protospacers) CHECK(p.bases() == window);
}
