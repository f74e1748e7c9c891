#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cadeft/bits.hpp"
#include "cadeft/bitstream.hpp"
#include "cadeft/errors.hpp"

namespace cadeft {

// Register-address classes gating the scan response, mirroring the
// stable/interfering/intermediate PAM classes: Benign never alerts, Alert
// alerts on any match, Learn alerts on exact matches and acquires fuzzy ones.
enum class MarkerClass { Benign, Alert, Learn };

inline const char* marker_class_name(MarkerClass m) {
    switch (m) {
        case MarkerClass::Benign: return "benign";
        case MarkerClass::Alert: return "alert";
        case MarkerClass::Learn: return "learn";
    }
    return "?";
}

inline std::optional<MarkerClass> marker_class_from_name(std::string_view name) {
    if (name == "benign") return MarkerClass::Benign;
    if (name == "alert") return MarkerClass::Alert;
    if (name == "learn") return MarkerClass::Learn;
    return std::nullopt;
}

struct MarkerTable {
    std::map<std::uint16_t, MarkerClass> by_address;
    // unmapped addresses alert: fail closed
    MarkerClass default_class = MarkerClass::Alert;

    MarkerClass classify(std::uint16_t address) const {
        const auto it = by_address.find(address);
        return it == by_address.end() ? default_class : it->second;
    }

    friend bool operator==(const MarkerTable&, const MarkerTable&) = default;
};

enum class SignatureOrigin { Seeded, Learned };

struct Signature {
    std::string id;
    BitPattern bits;
    SignatureOrigin origin = SignatureOrigin::Seeded;
    std::string note;

    friend bool operator==(const Signature&, const Signature&) = default;
};

inline constexpr std::size_t kMinSignatureBits = 8;
inline constexpr std::size_t kDefaultSignatureBits = 64;
inline constexpr double kDefaultTheta = 0.90;

// Persistent store of bit-pattern signatures, seeded or learned, all of one
// length L, with the similarity threshold and marker table used to scan.
// Index 0 is the most recently inserted signature.
class SignatureLocus {
public:
    explicit SignatureLocus(std::size_t bit_length = kDefaultSignatureBits,
                            double theta = kDefaultTheta, MarkerTable markers = {})
        : bit_length_(bit_length), theta_(theta), markers_(std::move(markers)) {
        if (bit_length_ < kMinSignatureBits)
            throw std::invalid_argument("signature length must be at least " +
                                        std::to_string(kMinSignatureBits) + " bits");
        if (!(theta_ > 0.5 && theta_ <= 1.0))
            throw std::invalid_argument("similarity threshold must be in (0.5, 1]");
    }

    std::size_t bit_length() const { return bit_length_; }
    double theta() const { return theta_; }

    // floor((1 - theta) * L); the epsilon absorbs the usual double rounding of
    // theta so thresholds that are exact in decimal stay exact here.
    std::size_t max_mismatches() const {
        return static_cast<std::size_t>(
            std::floor((1.0 - theta_) * static_cast<double>(bit_length_) + 1e-9));
    }

    const std::vector<Signature>& signatures() const { return signatures_; }
    bool empty() const { return signatures_.empty(); }
    std::uint64_t version() const { return version_; }

    MarkerTable& markers() { return markers_; }
    const MarkerTable& markers() const { return markers_; }

    void add(Signature sig) {
        if (sig.bits.bit_length() != bit_length_)
            throw std::invalid_argument("signature is " + std::to_string(sig.bits.bit_length()) +
                                        " bits, locus holds " + std::to_string(bit_length_) +
                                        "-bit signatures");
        if (sig.id.empty() || sig.id.find_first_of(" \t") != std::string::npos)
            throw std::invalid_argument("signature id must be non-empty and free of whitespace");
        for (const auto& existing : signatures_)
            if (existing.id == sig.id)
                throw std::invalid_argument("duplicate signature id '" + sig.id + "'");
        signatures_.insert(signatures_.begin(), std::move(sig));
        ++version_;
    }

    struct LearnOutcome {
        bool inserted = false;
        std::string id;  // the new signature, or the existing duplicate
    };

    // Primed-adaptation analog: the observed window joins the locus at index 0
    // as a Learned signature. Bit-identical duplicates are a reported no-op.
    LearnOutcome learn(const BitPattern& observed, std::string note = {}) {
        if (observed.bit_length() != bit_length_)
            throw std::invalid_argument("observed window is " +
                                        std::to_string(observed.bit_length()) +
                                        " bits, locus holds " + std::to_string(bit_length_) +
                                        "-bit signatures");
        for (const auto& existing : signatures_)
            if (existing.bits == observed) return {false, existing.id};
        Signature sig{"learned-" + std::to_string(version_ + 1), observed,
                      SignatureOrigin::Learned, std::move(note)};
        signatures_.insert(signatures_.begin(), sig);
        ++version_;
        return {true, signatures_.front().id};
    }

    // deserialization path only
    void restore_version(std::uint64_t v) { version_ = v; }
    void restore_signature(Signature sig) {
        signatures_.push_back(std::move(sig));  // file order is index order
    }

    friend bool operator==(const SignatureLocus&, const SignatureLocus&) = default;

private:
    std::size_t bit_length_;
    double theta_;
    MarkerTable markers_;
    std::vector<Signature> signatures_;
    std::uint64_t version_ = 0;
};

enum class EventKind { ExactAlert, FuzzyAlert, Learned, Ignored };

inline const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::ExactAlert: return "exact-alert";
        case EventKind::FuzzyAlert: return "fuzzy-alert";
        case EventKind::Learned: return "learned";
        case EventKind::Ignored: return "ignored";
    }
    return "?";
}

struct DetectionEvent {
    EventKind kind = EventKind::Ignored;
    std::size_t packet_index = 0;
    // file offset of the byte containing the window start; the window's first
    // bit is at file bit  absolute_byte_offset * 8 + bit_offset_in_payload % 8
    std::size_t absolute_byte_offset = 0;
    std::size_t bit_offset_in_payload = 0;
    std::string signature_id;
    std::size_t mismatch_count = 0;
    std::optional<BitPattern> observed_bits;  // Learned events carry the window

    friend bool operator==(const DetectionEvent&, const DetectionEvent&) = default;
};

struct DetectionReport {
    std::vector<DetectionEvent> events;
    std::uint64_t exact_alerts = 0;
    std::uint64_t fuzzy_alerts = 0;
    std::uint64_t learned = 0;
    std::uint64_t ignored = 0;
    std::uint64_t locus_version_before = 0;
    std::uint64_t locus_version_after = 0;
    std::size_t signature_bit_length = 0;
    double theta = 0.0;
    std::size_t max_mismatches = 0;
    std::size_t packets_scanned = 0;
    bool overlapping = false;

    std::uint64_t alerts() const { return exact_alerts + fuzzy_alerts; }
};

struct ScanOptions {
    // report every matching offset instead of resuming L bits past a match
    bool overlapping = false;
    // also acquire fuzzy matches found in Alert-class packets
    bool learn_fuzzy_alerts = false;
};

// Scans every packet payload against every signature. Marker class of the
// packet's register address gates the response per window:
//
//   Benign                  -> Ignored event, never an alert
//   Alert/Learn, 0 mismatch -> ExactAlert
//   Alert, 1..max mismatch  -> FuzzyAlert
//   Learn, 1..max mismatch  -> Learned: the observed window is acquired
//
// Windows never span packet boundaries, and nothing before the sync word is
// examined (the parser never saw it as configuration data). Learned windows
// are committed to the locus in one pass at the end of the scan, in (packet,
// offset) order, so signatures learned mid-scan do not scan the same stream.
inline DetectionReport scan(const Bitstream& bitstream, SignatureLocus& locus,
                            const ScanOptions& options = {}) {
    if (locus.empty()) throw std::invalid_argument("scan: signature locus is empty");

    const std::size_t L = locus.bit_length();
    const std::size_t max_mm = locus.max_mismatches();

    DetectionReport report;
    report.locus_version_before = locus.version();
    report.signature_bit_length = L;
    report.theta = locus.theta();
    report.max_mismatches = max_mm;
    report.packets_scanned = bitstream.packets.size();
    report.overlapping = options.overlapping;

    // snapshot of the signature list; learned candidates never join this scan
    const auto& snapshot = locus.signatures();
    std::vector<bitscan::ScanWords> patterns;
    patterns.reserve(snapshot.size());
    for (const auto& sig : snapshot) patterns.push_back(bitscan::ScanWords::from_pattern(sig.bits));

    struct PendingEvent {
        DetectionEvent event;
        std::size_t signature_index;
    };
    std::vector<PendingEvent> pending;

    struct LearnCandidate {
        std::size_t packet_index;
        std::size_t bit_offset;
        std::size_t signature_index;
        BitPattern bits;
    };
    std::vector<LearnCandidate> candidates;

    for (std::size_t p = 0; p < bitstream.packets.size(); ++p) {
        const auto& packet = bitstream.packets[p];
        const std::size_t payload_bits = packet.payload.size() * 32;
        if (payload_bits < L) continue;
        const MarkerClass marker = locus.markers().classify(packet.register_address);
        const auto scanwords = bitscan::ScanWords::from_payload(packet.payload);
        const std::size_t base_byte = payload_byte_offset(bitstream, p);

        for (std::size_t si = 0; si < snapshot.size(); ++si) {
            for (std::size_t o = 0; o + L <= payload_bits;) {
                const std::size_t mm =
                    bitscan::window_mismatches(scanwords, o, patterns[si], L, max_mm);
                if (mm > max_mm) {
                    ++o;
                    continue;
                }

                DetectionEvent ev;
                ev.packet_index = p;
                ev.absolute_byte_offset = base_byte + o / 8;
                ev.bit_offset_in_payload = o;
                ev.signature_id = snapshot[si].id;
                ev.mismatch_count = mm;

                bool emit = true;
                if (marker == MarkerClass::Benign) {
                    ev.kind = EventKind::Ignored;
                } else if (mm == 0) {
                    ev.kind = EventKind::ExactAlert;
                } else if (marker == MarkerClass::Alert) {
                    ev.kind = EventKind::FuzzyAlert;
                    if (options.learn_fuzzy_alerts) {
                        auto window = extract_payload_bits(packet.payload, o, L);
                        candidates.push_back({p, o, si, std::move(window)});
                    }
                } else {  // Learn marker, fuzzy match
                    auto window = extract_payload_bits(packet.payload, o, L);
                    // a window identical to another stored signature is that
                    // signature's exact match, not something new to learn
                    bool already_known = false;
                    for (const auto& sig : snapshot)
                        if (sig.bits == window) {
                            already_known = true;
                            break;
                        }
                    if (already_known) {
                        emit = false;
                    } else {
                        ev.kind = EventKind::Learned;
                        ev.observed_bits = window;
                        candidates.push_back({p, o, si, std::move(window)});
                    }
                }

                if (emit) pending.push_back({std::move(ev), si});
                o += options.overlapping ? 1 : L;
            }
        }
    }

    std::stable_sort(pending.begin(), pending.end(), [](const auto& a, const auto& b) {
        if (a.event.packet_index != b.event.packet_index)
            return a.event.packet_index < b.event.packet_index;
        if (a.event.bit_offset_in_payload != b.event.bit_offset_in_payload)
            return a.event.bit_offset_in_payload < b.event.bit_offset_in_payload;
        return a.signature_index < b.signature_index;
    });
    for (auto& pe : pending) {
        switch (pe.event.kind) {
            case EventKind::ExactAlert: ++report.exact_alerts; break;
            case EventKind::FuzzyAlert: ++report.fuzzy_alerts; break;
            case EventKind::Learned: ++report.learned; break;
            case EventKind::Ignored: ++report.ignored; break;
        }
        report.events.push_back(std::move(pe.event));
    }

    std::stable_sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        if (a.packet_index != b.packet_index) return a.packet_index < b.packet_index;
        if (a.bit_offset != b.bit_offset) return a.bit_offset < b.bit_offset;
        return a.signature_index < b.signature_index;
    });
    for (const auto& c : candidates)
        locus.learn(c.bits, "acquired at packet " + std::to_string(c.packet_index) + " bit " +
                                std::to_string(c.bit_offset));

    report.locus_version_after = locus.version();
    return report;
}

// --- persistence ------------------------------------------------------------

inline constexpr std::string_view kSignatureLocusMagic = "SIGNATURE-LOCUS v1";

namespace detail {

inline std::string shortest_double(double v) {
    return nlohmann::json(v).dump();  // shortest representation that re-parses exactly
}

}  // namespace detail

// Text format:
//
//   SIGNATURE-LOCUS v1
//   length 64
//   theta 0.9
//   version 3
//   default-marker alert
//   marker 0x001 benign                     (sorted by address)
//   signature <id> <seeded|learned> <hex> [note ...]   (index order)
inline void save_signature_locus(const SignatureLocus& locus, std::ostream& out) {
    out << kSignatureLocusMagic << '\n';
    out << "length " << locus.bit_length() << '\n';
    out << "theta " << detail::shortest_double(locus.theta()) << '\n';
    out << "version " << locus.version() << '\n';
    out << "default-marker " << marker_class_name(locus.markers().default_class) << '\n';
    for (const auto& [addr, cls] : locus.markers().by_address) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "0x%03x", addr);
        out << "marker " << buf << ' ' << marker_class_name(cls) << '\n';
    }
    for (const auto& sig : locus.signatures()) {
        out << "signature " << sig.id << ' '
            << (sig.origin == SignatureOrigin::Seeded ? "seeded" : "learned") << ' '
            << sig.bits.to_hex();
        if (!sig.note.empty()) out << ' ' << sig.note;
        out << '\n';
    }
}

inline SignatureLocus load_signature_locus(std::istream& in) {
    std::string line;
    long long line_no = 0;
    if (!std::getline(in, line)) throw ParseError("empty signature locus file");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kSignatureLocusMagic)
        throw ParseError("bad magic, expected '" + std::string(kSignatureLocusMagic) + "'",
                         line_no);

    std::size_t length = 0;
    double theta = 0.0;
    std::uint64_t version = 0;
    bool saw_length = false, saw_theta = false;
    MarkerTable markers;
    std::vector<Signature> signatures;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "length") {
            if (!(ls >> length)) throw ParseError("bad length", line_no);
            saw_length = true;
        } else if (key == "theta") {
            if (!(ls >> theta)) throw ParseError("bad theta", line_no);
            saw_theta = true;
        } else if (key == "version") {
            if (!(ls >> version)) throw ParseError("bad version", line_no);
        } else if (key == "default-marker") {
            std::string name;
            ls >> name;
            const auto cls = marker_class_from_name(name);
            if (!cls) throw ParseError("unknown marker class '" + name + "'", line_no);
            markers.default_class = *cls;
        } else if (key == "marker") {
            std::string addr_str, name;
            if (!(ls >> addr_str >> name)) throw ParseError("malformed marker line", line_no);
            const auto cls = marker_class_from_name(name);
            if (!cls) throw ParseError("unknown marker class '" + name + "'", line_no);
            std::uint32_t addr = 0;
            try {
                addr = static_cast<std::uint32_t>(std::stoul(addr_str, nullptr, 0));
            } catch (const std::exception&) {
                throw ParseError("bad register address '" + addr_str + "'", line_no);
            }
            if (addr > 0xFFF) throw ParseError("register address exceeds 12 bits", line_no);
            markers.by_address[static_cast<std::uint16_t>(addr)] = *cls;
        } else if (key == "signature") {
            if (!saw_length) throw ParseError("signature before length", line_no);
            std::string id, origin_str, hex;
            if (!(ls >> id >> origin_str >> hex))
                throw ParseError("malformed signature line", line_no);
            SignatureOrigin origin;
            if (origin_str == "seeded")
                origin = SignatureOrigin::Seeded;
            else if (origin_str == "learned")
                origin = SignatureOrigin::Learned;
            else
                throw ParseError("unknown signature origin '" + origin_str + "'", line_no);
            std::string note;
            std::getline(ls, note);
            if (!note.empty() && note.front() == ' ') note.erase(0, 1);
            try {
                signatures.push_back({id, BitPattern::from_hex(hex, length), origin, note});
            } catch (const std::invalid_argument& e) {
                throw ParseError(e.what(), line_no);
            }
        } else {
            throw ParseError("unknown key '" + key + "'", line_no);
        }
    }
    if (!saw_length || !saw_theta)
        throw ParseError("truncated signature locus file: missing length/theta");

    try {
        SignatureLocus locus(length, theta, std::move(markers));
        for (auto& sig : signatures) locus.restore_signature(std::move(sig));
        locus.restore_version(version);
        return locus;
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
}

inline void save_signature_locus_file(const SignatureLocus& locus, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write signature locus file: " + path);
    save_signature_locus(locus, out);
}

inline SignatureLocus load_signature_locus_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open signature locus file: " + path);
    return load_signature_locus(in);
}

// Standalone marker table config:
//
//   default alert
//   0x001 benign
//   2 learn
inline MarkerTable load_marker_table(std::istream& in) {
    MarkerTable markers;
    std::string line;
    long long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string first, name;
        if (!(ls >> first >> name)) throw ParseError("malformed marker line", line_no);
        const auto cls = marker_class_from_name(name);
        if (!cls) throw ParseError("unknown marker class '" + name + "'", line_no);
        if (first == "default") {
            markers.default_class = *cls;
            continue;
        }
        std::uint32_t addr = 0;
        try {
            addr = static_cast<std::uint32_t>(std::stoul(first, nullptr, 0));
        } catch (const std::exception&) {
            throw ParseError("bad register address '" + first + "'", line_no);
        }
        if (addr > 0xFFF) throw ParseError("register address exceeds 12 bits", line_no);
        markers.by_address[static_cast<std::uint16_t>(addr)] = *cls;
    }
    return markers;
}

inline MarkerTable load_marker_table_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open marker table file: " + path);
    return load_marker_table(in);
}

// --- report emission ---------------------------------------------------------

inline nlohmann::json report_to_json(const DetectionReport& report) {
    nlohmann::json events = nlohmann::json::array();
    for (const auto& ev : report.events) {
        nlohmann::json j{{"kind", event_kind_name(ev.kind)},
                         {"packet_index", ev.packet_index},
                         {"absolute_byte_offset", ev.absolute_byte_offset},
                         {"bit_offset_in_payload", ev.bit_offset_in_payload},
                         {"signature_id", ev.signature_id},
                         {"mismatch_count", ev.mismatch_count}};
        if (ev.observed_bits) j["observed_bits"] = ev.observed_bits->to_hex();
        events.push_back(std::move(j));
    }
    return {{"config",
             {{"signature_bit_length", report.signature_bit_length},
              {"theta", report.theta},
              {"max_mismatches", report.max_mismatches},
              {"overlapping", report.overlapping}}},
            {"packets_scanned", report.packets_scanned},
            {"locus_version_before", report.locus_version_before},
            {"locus_version_after", report.locus_version_after},
            {"counters",
             {{"exact_alerts", report.exact_alerts},
              {"fuzzy_alerts", report.fuzzy_alerts},
              {"learned", report.learned},
              {"ignored", report.ignored}}},
            {"events", std::move(events)}};
}

inline void write_report_text(const DetectionReport& report, std::ostream& out) {
    out << "scan: " << report.packets_scanned << " packets, " << report.signature_bit_length
        << "-bit signatures, theta " << detail::shortest_double(report.theta) << " (max "
        << report.max_mismatches << " mismatches)\n";
    out << "counters: exact-alerts " << report.exact_alerts << ", fuzzy-alerts "
        << report.fuzzy_alerts << ", learned " << report.learned << ", ignored " << report.ignored
        << '\n';
    if (report.locus_version_after != report.locus_version_before)
        out << "locus updated: version " << report.locus_version_before << " -> "
            << report.locus_version_after << '\n';
    for (const auto& ev : report.events) {
        out << '[' << event_kind_name(ev.kind) << "] packet " << ev.packet_index << " byte "
            << ev.absolute_byte_offset << " bit " << ev.bit_offset_in_payload << " signature "
            << ev.signature_id << " mismatches " << ev.mismatch_count;
        if (ev.observed_bits) out << " observed " << ev.observed_bits->to_hex();
        out << '\n';
    }
}

}  // namespace cadeft
