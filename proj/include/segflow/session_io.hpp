#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "segflow/types.hpp"

namespace segflow::io {

// line() == 0 means the problem concerns the stream as a whole (e.g. a
// duplicate timestamp only detectable after sorting), not a single line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : std::runtime_error((line ? "line " + std::to_string(line) + ": " : std::string()) +
                           message),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Ingest adaptation for externally produced tables: rename their columns and
// kind tokens onto ours, and supply metadata their files do not carry.
struct ParseOptions {
  std::map<std::string, std::string> column_aliases;   // their header -> ours
  std::map<std::string, std::string> kind_aliases;     // their kind -> ins/del/fixS/fixT
  std::map<std::string, std::string> default_metadata; // used when a #key=value is absent
};

SessionLog parse_session(std::istream& in, const ParseOptions& opts = {});
SessionLog parse_session_text(const std::string& text, const ParseOptions& opts = {});

std::vector<StateAnnotation> parse_annotations(std::istream& in);
std::vector<StateAnnotation> parse_annotations_text(const std::string& text);

enum class Severity { warning, error };

struct ValidationIssue {
  Severity severity = Severity::error;
  std::string code;     // stable machine-readable identifier
  std::string message;  // human-readable detail
};

// Codes: NO_IKI, BAD_DURATION, DUPLICATE_TIME, KEYS_NOT_SORTED, FIX_NOT_SORTED,
// NEGATIVE_TIME, EMPTY_TEXT, MISSING_META. Empty result iff every invariant
// holds.
std::vector<ValidationIssue> validate_session(const SessionLog& s);

std::string serialize_session(const SessionLog& s);
std::string serialize_annotations(std::span<const StateAnnotation> track);

}  // namespace segflow::io
