#pragma once

#include <stdexcept>
#include <string>

namespace cadeft {

// Malformed input data (FASTA, locus files, bitstreams, config files).
// Carries a 1-based line number for text formats or a byte offset for binary
// formats; -1 means "not applicable".
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& message, long long line = -1,
                        long long byte_offset = -1)
        : std::runtime_error(annotate(message, line, byte_offset)),
          line_(line),
          byte_offset_(byte_offset) {}

    long long line() const { return line_; }
    long long byte_offset() const { return byte_offset_; }

private:
    static std::string annotate(const std::string& message, long long line,
                                long long byte_offset) {
        if (line >= 0) return "line " + std::to_string(line) + ": " + message;
        if (byte_offset >= 0) return "byte " + std::to_string(byte_offset) + ": " + message;
        return message;
    }

    long long line_;
    long long byte_offset_;
};

}  // namespace cadeft
