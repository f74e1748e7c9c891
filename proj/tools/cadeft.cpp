// cadeft: CRISPR-inspired simulation and bitstream signature scanning.
//
// Subcommands:
//   sim prime    priming experiment: naive spacer acquisition + genome scan
//   sim sweep    mutation-rate sweep with primed (learned) acquisition
//   scan         scan a bitstream against a signature locus
//   corpus gen   generate a synthetic bitstream
//   corpus inject  plant a signature into a bitstream packet
//   locus init/add/list   signature locus management
//
// Exit codes: 0 success (no alerts), 1 signatures detected, 2 usage/IO error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cadeft/bitstream.hpp"
#include "cadeft/detector.hpp"
#include "cadeft/experiments.hpp"

namespace {

constexpr std::uint64_t kDefaultSeed = 0xCADEF7;

void write_text_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw cadeft::ParseError("cannot write file: " + tmp);
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

void emit_to(const std::string& output_path, const std::string& content) {
    if (output_path.empty())
        std::cout << content;
    else
        write_text_file_atomic(output_path, content);
}

std::uint16_t parse_address(const std::string& text) {
    const auto value = std::stoul(text, nullptr, 0);
    if (value > 0xFFF) throw CLI::ValidationError("register address exceeds 12 bits: " + text);
    return static_cast<std::uint16_t>(value);
}

struct SimFlags {
    cadeft::ExperimentConfig cfg;
    std::string pam = "normal";
    std::string output;
    std::string format = "csv";
    bool best_hit = false;
    bool scan_rc = false;
    bool reuse_fragments = false;
    bool adaptive_learning = false;

    void apply() {
        cfg.pam_mode = pam == "modified" ? cadeft::PamMode::Modified : cadeft::PamMode::Normal;
        cfg.hit_policy = best_hit ? cadeft::HitPolicy::BestHit : cadeft::HitPolicy::FirstHit;
        cfg.scan_reverse_complement = scan_rc;
        cfg.regenerate_fragments = !reuse_fragments;
        cfg.adaptive_learning = adaptive_learning;
    }

    void emit(const std::vector<cadeft::BatchStats>& stats) const {
        std::ostringstream out;
        cadeft::emit_stats(stats, format == "json" ? cadeft::StatsFormat::Json
                                                   : cadeft::StatsFormat::Csv,
                           out);
        emit_to(output, out.str());
    }
};

// shared experiment knobs; the config file (--config) can preset any of them
void add_sim_options(CLI::App* cmd, SimFlags& flags) {
    cmd->add_option("--seed", flags.cfg.seed, "random seed")->capture_default_str();
    cmd->add_option("--pam", flags.pam, "PAM classification sets")
        ->check(CLI::IsMember({"normal", "modified"}))
        ->capture_default_str();
    cmd->add_option("--pam-table", flags.cfg.pam_table_path,
                    "custom PAM table file (overrides --pam)");
    cmd->add_option("--fragments", flags.cfg.fragment_count, "fragments sampled per locus priming")
        ->capture_default_str();
    cmd->add_option("--frag-len", flags.cfg.fragment_length, "fragment and spacer length (nt)")
        ->capture_default_str();
    cmd->add_option("--crrnas", flags.cfg.crrnas_per_iteration, "crRNAs transcribed per scan")
        ->capture_default_str();
    cmd->add_option("--max-mm", flags.cfg.max_mm, "mismatch budget per spacer window")
        ->capture_default_str();
    cmd->add_option("--bias", flags.cfg.bias, "leader-proximal transcription bias in (0,1]")
        ->capture_default_str();
    cmd->add_option("--output,-o", flags.output, "output file (default: stdout)");
    cmd->add_option("--format", flags.format, "stats format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    cmd->add_flag("--best-hit", flags.best_hit,
                  "decide each crRNA by its best hit instead of the first");
    cmd->add_flag("--scan-rc", flags.scan_rc, "also scan the reverse complement strand");
    cmd->add_flag("--reuse-fragments", flags.reuse_fragments,
                  "prime every iteration from one shared fragment pool");
}

int run_cli(int argc, char** argv) {
    CLI::App app{"CRISPR-inspired sequence simulation and bitstream signature scanning"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "config file presetting any option (flag > config > default)");

    // --- sim ---------------------------------------------------------------
    auto* sim = app.add_subcommand("sim", "genetic information flow simulations");
    sim->require_subcommand(1);
    sim->fallthrough();

    auto* prime = sim->add_subcommand("prime", "naive-priming interference experiment");
    SimFlags prime_flags;
    std::string prime_source = "phage";
    prime_flags.cfg.seed = kDefaultSeed;
    prime->add_option("--source", prime_source, "genome the spacers are drawn from and scanned")
        ->check(CLI::IsMember({"host", "phage"}))
        ->capture_default_str();
    prime->add_option("--host", prime_flags.cfg.host_path, "host genome FASTA");
    prime->add_option("--phage", prime_flags.cfg.phage_path, "phage genome FASTA");
    prime->add_option("--iterations", prime_flags.cfg.iterations, "iterations per batch")
        ->capture_default_str();
    add_sim_options(prime, prime_flags);
    prime->callback([&] {
        prime_flags.apply();
        const auto source = prime_source == "host" ? cadeft::SpacerSource::HostOnly
                                                   : cadeft::SpacerSource::PhageOnly;
        const auto& path = source == cadeft::SpacerSource::HostOnly ? prime_flags.cfg.host_path
                                                                    : prime_flags.cfg.phage_path;
        if (path.empty())
            throw CLI::ValidationError("--" + prime_source + " FASTA path is required");
        const auto stats = cadeft::run_priming_experiment(prime_flags.cfg, source);
        prime_flags.emit({stats});
    });

    auto* sweep = sim->add_subcommand("sweep", "mutation-rate sweep with primed acquisition");
    SimFlags sweep_flags;
    sweep_flags.cfg.seed = kDefaultSeed;
    sweep->add_option("--phage", sweep_flags.cfg.phage_path, "phage genome FASTA")->required();
    sweep->add_option("--rates", sweep_flags.cfg.mutation_rates,
                      "comma-separated mutation rates in [0,1)")
        ->delimiter(',')
        ->capture_default_str();
    sweep->add_option("--variants", sweep_flags.cfg.variants_per_rate,
                      "mutated genome variants per rate")
        ->capture_default_str();
    sweep->add_flag("--adaptive-learning", sweep_flags.adaptive_learning,
                    "let primed spacers acquired mid-sweep compete for transcription");
    add_sim_options(sweep, sweep_flags);
    sweep->callback([&] {
        sweep_flags.apply();
        for (double r : sweep_flags.cfg.mutation_rates)
            if (!(r >= 0.0 && r < 1.0))
                throw CLI::ValidationError("mutation rate out of range [0,1): " +
                                           std::to_string(r));
        sweep_flags.emit(cadeft::run_mutation_sweep(sweep_flags.cfg));
    });

    // --- scan --------------------------------------------------------------
    auto* scan_cmd = app.add_subcommand("scan", "scan a bitstream against a signature locus");
    std::string scan_bitstream, scan_locus, scan_report, scan_format = "text";
    bool scan_learn = false, scan_overlapping = false, scan_learn_fuzzy = false;
    int scan_exit = 0;
    scan_cmd->add_option("--bitstream", scan_bitstream, "bitstream file")->required();
    scan_cmd->add_option("--locus", scan_locus, "signature locus file")->required();
    scan_cmd->add_flag("--learn", scan_learn, "persist learned signatures back to the locus file");
    scan_cmd->add_option("--report", scan_report, "report file (default: stdout)");
    scan_cmd->add_option("--format", scan_format, "report format")
        ->check(CLI::IsMember({"text", "json"}))
        ->capture_default_str();
    scan_cmd->add_flag("--overlapping", scan_overlapping, "report overlapping matches");
    scan_cmd->add_flag("--learn-fuzzy-alerts", scan_learn_fuzzy,
                       "also learn fuzzy matches found in alert-class packets");
    scan_cmd->callback([&] {
        const auto bytes = cadeft::read_binary_file(scan_bitstream);
        const auto bitstream = cadeft::parse_bitstream(bytes);
        auto locus = cadeft::load_signature_locus_file(scan_locus);

        cadeft::ScanOptions opts;
        opts.overlapping = scan_overlapping;
        opts.learn_fuzzy_alerts = scan_learn_fuzzy;
        const auto report = cadeft::scan(bitstream, locus, opts);

        std::ostringstream out;
        if (scan_format == "json")
            out << cadeft::report_to_json(report).dump(2) << '\n';
        else
            cadeft::write_report_text(report, out);
        emit_to(scan_report, out.str());

        if (scan_learn && report.locus_version_after != report.locus_version_before) {
            std::ostringstream locus_text;
            cadeft::save_signature_locus(locus, locus_text);
            write_text_file_atomic(scan_locus, locus_text.str());
        }
        scan_exit = report.alerts() > 0 ? 1 : 0;
    });

    // --- corpus ------------------------------------------------------------
    auto* corpus = app.add_subcommand("corpus", "bitstream corpus tooling");
    corpus->require_subcommand(1);
    corpus->fallthrough();

    auto* gen = corpus->add_subcommand("gen", "generate a synthetic bitstream");
    std::string gen_output;
    std::vector<std::string> gen_addresses{"0x00A"};
    std::uint64_t gen_seed = kDefaultSeed;
    std::size_t gen_packets = 8, gen_words = 16, gen_header_words = 2;
    std::uint32_t gen_opcode = 1;
    std::string gen_sync = "0xAA995566";
    gen->add_option("--output,-o", gen_output, "output bitstream file")->required();
    gen->add_option("--packets", gen_packets, "number of configuration packets")
        ->capture_default_str();
    gen->add_option("--words", gen_words, "payload words per packet")->capture_default_str();
    gen->add_option("--header-words", gen_header_words, "dummy words before sync")
        ->capture_default_str();
    gen->add_option("--addresses", gen_addresses,
                    "register addresses, cycled across packets (hex or decimal)")
        ->delimiter(',')
        ->capture_default_str();
    gen->add_option("--opcode", gen_opcode, "packet opcode (4 bits)")->capture_default_str();
    gen->add_option("--sync", gen_sync, "sync word")->capture_default_str();
    gen->add_option("--seed", gen_seed, "random seed for payload content")->capture_default_str();
    gen->callback([&] {
        if (gen_opcode > 0xF) throw CLI::ValidationError("opcode exceeds 4 bits");
        std::vector<cadeft::PacketSpec> specs;
        for (std::size_t p = 0; p < gen_packets; ++p)
            specs.push_back({static_cast<std::uint8_t>(gen_opcode),
                             parse_address(gen_addresses[p % gen_addresses.size()]), gen_words});
        cadeft::RandomSource rng(gen_seed);
        const auto sync = static_cast<std::uint32_t>(std::stoul(gen_sync, nullptr, 0));
        const auto bs = cadeft::make_random_bitstream(gen_header_words, specs, rng, sync);
        cadeft::write_binary_file(gen_output, cadeft::generate_bitstream(bs));
    });

    auto* inject = corpus->add_subcommand("inject", "plant a signature inside a packet payload");
    std::string inj_bitstream, inj_output, inj_hex, inj_locus, inj_id;
    std::size_t inj_packet = 0, inj_bit_offset = 0, inj_flips = 0;
    std::uint64_t inj_seed = kDefaultSeed;
    inject->add_option("--bitstream", inj_bitstream, "input bitstream file")->required();
    inject->add_option("--output,-o", inj_output, "output file (default: rewrite input)");
    inject->add_option("--packet", inj_packet, "target packet index")->required();
    inject->add_option("--bit-offset", inj_bit_offset, "bit offset within the packet payload")
        ->capture_default_str();
    auto* hex_opt = inject->add_option("--signature-hex", inj_hex, "signature bits as hex");
    auto* locus_opt =
        inject->add_option("--locus", inj_locus, "signature locus to take the signature from");
    inject->add_option("--id", inj_id, "signature id within --locus");
    inject->add_option("--flips", inj_flips, "flip this many distinct bits before injecting")
        ->capture_default_str();
    inject->add_option("--seed", inj_seed, "seed for --flips bit selection")
        ->capture_default_str();
    hex_opt->excludes(locus_opt);
    inject->callback([&] {
        cadeft::BitPattern sig;
        if (!inj_hex.empty()) {
            sig = cadeft::BitPattern::from_hex(inj_hex);
        } else if (!inj_locus.empty()) {
            const auto locus = cadeft::load_signature_locus_file(inj_locus);
            bool found = false;
            for (const auto& s : locus.signatures())
                if (s.id == inj_id) {
                    sig = s.bits;
                    found = true;
                    break;
                }
            if (!found)
                throw CLI::ValidationError("signature id '" + inj_id + "' not found in " +
                                           inj_locus);
        } else {
            throw CLI::ValidationError("one of --signature-hex or --locus/--id is required");
        }
        if (inj_flips > sig.bit_length())
            throw CLI::ValidationError("--flips exceeds the signature length");
        cadeft::RandomSource rng(inj_seed);
        std::vector<std::size_t> positions(sig.bit_length());
        for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = i;
        for (std::size_t i = 0; i < inj_flips; ++i) {
            const auto j = i + rng.uniform_below(positions.size() - i);
            std::swap(positions[i], positions[j]);
            sig.flip(positions[i]);
        }

        auto bs = cadeft::parse_bitstream(cadeft::read_binary_file(inj_bitstream));
        cadeft::inject_signature(bs, sig, inj_packet, inj_bit_offset);
        cadeft::write_binary_file(inj_output.empty() ? inj_bitstream : inj_output,
                                  cadeft::generate_bitstream(bs));
    });

    // --- locus -------------------------------------------------------------
    auto* locus_cmd = app.add_subcommand("locus", "signature locus management");
    locus_cmd->require_subcommand(1);
    locus_cmd->fallthrough();

    auto* init = locus_cmd->add_subcommand("init", "create an empty signature locus");
    std::string init_output, init_default_marker = "alert", init_markers;
    std::size_t init_length = cadeft::kDefaultSignatureBits;
    double init_theta = cadeft::kDefaultTheta;
    init->add_option("--output,-o", init_output, "locus file to create")->required();
    init->add_option("--length", init_length, "signature length in bits")->capture_default_str();
    init->add_option("--theta", init_theta, "similarity threshold in (0.5, 1]")
        ->capture_default_str();
    init->add_option("--default-marker", init_default_marker,
                     "marker class for unmapped register addresses")
        ->check(CLI::IsMember({"benign", "alert", "learn"}))
        ->capture_default_str();
    init->add_option("--markers", init_markers, "marker table config file");
    init->callback([&] {
        cadeft::MarkerTable markers;
        if (!init_markers.empty()) markers = cadeft::load_marker_table_file(init_markers);
        if (init->count("--default-marker") > 0 || init_markers.empty())
            markers.default_class = *cadeft::marker_class_from_name(init_default_marker);
        const cadeft::SignatureLocus locus(init_length, init_theta, std::move(markers));
        std::ostringstream out;
        cadeft::save_signature_locus(locus, out);
        write_text_file_atomic(init_output, out.str());
    });

    auto* add = locus_cmd->add_subcommand("add", "add a seeded signature");
    std::string add_locus, add_id, add_bits, add_note;
    add->add_option("--locus", add_locus, "locus file to update")->required();
    add->add_option("--id", add_id, "signature id")->required();
    add->add_option("--bits", add_bits, "signature bits as hex")->required();
    add->add_option("--note", add_note, "free-text note");
    add->callback([&] {
        auto locus = cadeft::load_signature_locus_file(add_locus);
        locus.add({add_id, cadeft::BitPattern::from_hex(add_bits, locus.bit_length()),
                   cadeft::SignatureOrigin::Seeded, add_note});
        std::ostringstream out;
        cadeft::save_signature_locus(locus, out);
        write_text_file_atomic(add_locus, out.str());
    });

    auto* list = locus_cmd->add_subcommand("list", "list signatures");
    std::string list_locus;
    list->add_option("--locus", list_locus, "locus file")->required();
    list->callback([&] {
        const auto locus = cadeft::load_signature_locus_file(list_locus);
        std::cout << "length " << locus.bit_length() << " theta "
                  << cadeft::detail::shortest_double(locus.theta()) << " max-mismatches "
                  << locus.max_mismatches() << " version " << locus.version() << '\n';
        std::cout << "index\tid\torigin\tbits\tnote\n";
        for (std::size_t i = 0; i < locus.signatures().size(); ++i) {
            const auto& s = locus.signatures()[i];
            std::cout << i << '\t' << s.id << '\t'
                      << (s.origin == cadeft::SignatureOrigin::Seeded ? "seeded" : "learned")
                      << '\t' << s.bits.to_hex() << '\t' << s.note << '\n';
        }
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // help/version exit 0; any parse failure exits 2
    }
    return scan_exit;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const cadeft::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
