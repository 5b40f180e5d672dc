#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace segflow {

enum class KeyKind { insertion, deletion };

enum class GazeWindow { source, target };

// One logged keypress. A single keystroke may produce (or remove) more than
// one character, e.g. a marked-region deletion or paste.
struct KeyEvent {
  int64_t time_ms = 0;     // session-relative
  KeyKind kind = KeyKind::insertion;
  std::string text;        // UTF-8, length >= 1; blanks are stored as '_'
  int64_t cursor = 0;      // character offset in the emerging target text
};

struct FixationEvent {
  int64_t time_ms = 0;     // onset
  int64_t duration_ms = 0; // > 0
  GazeWindow window = GazeWindow::source;
  int64_t token_index = 0; // word index fixated
};

struct SessionLog {
  std::string study_id;
  std::string session_id;
  std::string translator_id;
  std::string source_lang;
  std::string target_lang;
  std::vector<KeyEvent> keys;            // strictly increasing in time
  std::vector<FixationEvent> fixations;  // non-decreasing in time

  int64_t span_start() const;
  int64_t span_end() const;
};

enum class HofState { hesitation, orientation, flow };

char hof_letter(HofState s);
std::optional<HofState> hof_from_letter(char c);

struct StateAnnotation {
  int64_t start_ms = 0;
  int64_t end_ms = 0;  // exclusive; start < end
  HofState state = HofState::flow;
};

// -- small shared utilities ---------------------------------------------------

// Decodes UTF-8 into code points; invalid bytes decode as U+FFFD.
std::u32string utf8_decode(const std::string& s);
std::string utf8_encode(const std::u32string& s);

// FNV-1a 64-bit over raw bytes, as a 16-digit lowercase hex string.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace segflow
