#pragma once
// Error taxonomy shared by parsers, ingestion, and statistics.

#include <stdexcept>
#include <string>

namespace mpscope {

enum class errc {
    malformed_line,
    unknown_gesture,
    unknown_verb,
    overlap,
    same_channel_overlap,
    missing_column,
    bad_skill_code,
    degenerate_input,
    io_error,
};

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::malformed_line: return "MalformedLine";
        case errc::unknown_gesture: return "UnknownGesture";
        case errc::unknown_verb: return "UnknownVerb";
        case errc::overlap: return "OverlapError";
        case errc::same_channel_overlap: return "SameChannelOverlap";
        case errc::missing_column: return "MissingColumn";
        case errc::bad_skill_code: return "BadSkillCode";
        case errc::degenerate_input: return "DegenerateInput";
        case errc::io_error: return "IoError";
    }
    return "UnknownError";
}

// Carries the error kind and, for line-oriented inputs, the 1-based line.
class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& message, int line = 0)
        : std::runtime_error(line > 0
              ? std::string(errc_name(code)) + " at line " + std::to_string(line) + ": " + message
              : std::string(errc_name(code)) + ": " + message),
          code_(code),
          line_(line) {}

    errc code() const noexcept { return code_; }
    int line() const noexcept { return line_; }

private:
    errc code_;
    int line_;
};

}  // namespace mpscope
