#include "segflow/session_io.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <sstream>

namespace segflow::io {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

int64_t parse_int(const std::string& field, std::size_t line, const char* what) {
  int64_t value = 0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw ParseError(line, std::string("malformed ") + what + " '" + field + "'");
  return value;
}

std::string normalize_text(const std::string& raw) {
  std::string out = raw;
  std::replace(out.begin(), out.end(), ' ', '_');
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

const std::string& mapped(const std::map<std::string, std::string>& aliases,
                          const std::string& token) {
  const auto it = aliases.find(token);
  return it == aliases.end() ? token : it->second;
}

constexpr const char* kColumns[5] = {"time", "kind", "text", "pos", "dur"};

}  // namespace

SessionLog parse_session(std::istream& in, const ParseOptions& opts) {
  SessionLog s;
  std::map<std::string, std::string> meta = opts.default_metadata;
  // column index (position in row) for each canonical column
  std::map<std::string, std::size_t> col;
  bool header_seen = false;
  std::string line;
  std::size_t lineno = 0;

  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (header_seen) continue;  // trailing comments are tolerated
      const auto eq = line.find('=');
      if (eq == std::string::npos || eq == 1) continue;  // bare comment
      meta[line.substr(1, eq - 1)] = line.substr(eq + 1);
      continue;
    }
    const auto fields = split_tabs(line);
    if (!header_seen) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        const std::string name = mapped(opts.column_aliases, fields[i]);
        col.emplace(name, i);  // first occurrence wins
      }
      for (const char* want : kColumns)
        if (!col.count(want))
          throw ParseError(lineno, std::string("column header missing '") + want + "'");
      header_seen = true;
      continue;
    }
    static const std::string kEmpty;
    const auto field = [&](const char* name) -> const std::string& {
      const std::size_t idx = col.at(name);
      // trailing empty fields may be dropped by other tools; treat as empty
      return idx < fields.size() ? fields[idx] : kEmpty;
    };
    const int64_t time = parse_int(field("time"), lineno, "time");
    if (time < 0) throw ParseError(lineno, "negative time");
    const std::string kind = mapped(opts.kind_aliases, field("kind"));
    if (kind == "ins" || kind == "del") {
      if (!field("dur").empty()) throw ParseError(lineno, "key row carries a duration");
      const std::string text = normalize_text(field("text"));
      if (text.empty()) throw ParseError(lineno, "key row with empty text");
      const int64_t cursor = parse_int(field("pos"), lineno, "pos");
      if (cursor < 0) throw ParseError(lineno, "negative cursor position");
      s.keys.push_back({time, kind == "ins" ? KeyKind::insertion : KeyKind::deletion, text,
                        cursor});
    } else if (kind == "fixS" || kind == "fixT") {
      if (!field("text").empty()) throw ParseError(lineno, "fixation row carries text");
      const int64_t dur = parse_int(field("dur"), lineno, "dur");
      if (dur <= 0) throw ParseError(lineno, "non-positive fixation duration");
      const int64_t token = parse_int(field("pos"), lineno, "pos");
      if (token < 0) throw ParseError(lineno, "negative token index");
      s.fixations.push_back(
          {time, dur, kind == "fixS" ? GazeWindow::source : GazeWindow::target, token});
    } else {
      throw ParseError(lineno, "unknown kind '" + field("kind") + "'");
    }
  }
  if (!header_seen) throw ParseError(lineno, "missing column header");

  const auto want_meta = [&](const char* key) -> std::string {
    const auto it = meta.find(key);
    if (it == meta.end() || it->second.empty())
      throw ParseError(lineno, std::string("missing mandatory header '#") + key + "='");
    return it->second;
  };
  s.study_id = want_meta("study");
  s.session_id = want_meta("session");
  s.translator_id = want_meta("translator");
  s.source_lang = want_meta("source_lang");
  s.target_lang = want_meta("target_lang");

  std::stable_sort(s.keys.begin(), s.keys.end(),
                   [](const KeyEvent& a, const KeyEvent& b) { return a.time_ms < b.time_ms; });
  std::stable_sort(s.fixations.begin(), s.fixations.end(),
                   [](const FixationEvent& a, const FixationEvent& b) {
                     return a.time_ms < b.time_ms;
                   });
  for (std::size_t i = 1; i < s.keys.size(); ++i)
    if (s.keys[i].time_ms == s.keys[i - 1].time_ms)
      throw ParseError(0, "duplicate keystroke timestamp " + std::to_string(s.keys[i].time_ms));
  return s;
}

SessionLog parse_session_text(const std::string& text, const ParseOptions& opts) {
  std::istringstream in(text);
  return parse_session(in, opts);
}

std::vector<StateAnnotation> parse_annotations(std::istream& in) {
  std::vector<StateAnnotation> track;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    if (line == "start\tend\tstate") continue;  // literal header tolerated
    const auto fields = split_tabs(line);
    if (fields.size() != 3) throw ParseError(lineno, "annotation row needs 3 fields");
    StateAnnotation a;
    a.start_ms = parse_int(fields[0], lineno, "start");
    a.end_ms = parse_int(fields[1], lineno, "end");
    if (a.start_ms < 0) throw ParseError(lineno, "negative time");
    if (a.end_ms <= a.start_ms) throw ParseError(lineno, "end not after start");
    if (fields[2].size() != 1)
      throw ParseError(lineno, "unknown state '" + fields[2] + "'");
    const auto state = hof_from_letter(fields[2][0]);
    if (!state) throw ParseError(lineno, "unknown state '" + fields[2] + "'");
    a.state = *state;
    track.push_back(a);
  }
  std::sort(track.begin(), track.end(), [](const StateAnnotation& a, const StateAnnotation& b) {
    return a.start_ms < b.start_ms;
  });
  for (std::size_t i = 1; i < track.size(); ++i)
    if (track[i].start_ms < track[i - 1].end_ms)
      throw ParseError(0, "overlapping annotations at " + std::to_string(track[i].start_ms));
  return track;
}

std::vector<StateAnnotation> parse_annotations_text(const std::string& text) {
  std::istringstream in(text);
  return parse_annotations(in);
}

std::vector<ValidationIssue> validate_session(const SessionLog& s) {
  std::vector<ValidationIssue> issues;
  const auto err = [&](const char* code, std::string msg) {
    issues.push_back({Severity::error, code, std::move(msg)});
  };
  if (s.study_id.empty() || s.session_id.empty() || s.translator_id.empty() ||
      s.source_lang.empty() || s.target_lang.empty())
    err("MISSING_META", "one or more identifier fields are empty");
  if (s.keys.size() < 2)
    err("NO_IKI", "fewer than 2 keystrokes, no inter-keystroke interval exists");
  for (std::size_t i = 0; i < s.keys.size(); ++i) {
    const auto& k = s.keys[i];
    if (k.time_ms < 0) {
      err("NEGATIVE_TIME", "keystroke at index " + std::to_string(i) + " has negative time");
      break;
    }
  }
  for (std::size_t i = 1; i < s.keys.size(); ++i) {
    if (s.keys[i].time_ms == s.keys[i - 1].time_ms) {
      err("DUPLICATE_TIME",
          "keystrokes share timestamp " + std::to_string(s.keys[i].time_ms));
      break;
    }
    if (s.keys[i].time_ms < s.keys[i - 1].time_ms) {
      err("KEYS_NOT_SORTED", "keystroke times are not strictly increasing");
      break;
    }
  }
  for (std::size_t i = 0; i < s.keys.size(); ++i)
    if (s.keys[i].text.empty()) {
      err("EMPTY_TEXT", "keystroke at index " + std::to_string(i) + " has empty text");
      break;
    }
  for (std::size_t i = 0; i < s.fixations.size(); ++i) {
    const auto& f = s.fixations[i];
    if (f.duration_ms <= 0) {
      err("BAD_DURATION", "fixation at index " + std::to_string(i) + " has duration <= 0");
      break;
    }
  }
  for (std::size_t i = 0; i < s.fixations.size(); ++i)
    if (s.fixations[i].time_ms < 0) {
      err("NEGATIVE_TIME", "fixation at index " + std::to_string(i) + " has negative time");
      break;
    }
  for (std::size_t i = 1; i < s.fixations.size(); ++i)
    if (s.fixations[i].time_ms < s.fixations[i - 1].time_ms) {
      err("FIX_NOT_SORTED", "fixation times decrease");
      break;
    }
  return issues;
}

std::string serialize_session(const SessionLog& s) {
  std::string out;
  out += "#study=" + s.study_id + "\n";
  out += "#session=" + s.session_id + "\n";
  out += "#translator=" + s.translator_id + "\n";
  out += "#source_lang=" + s.source_lang + "\n";
  out += "#target_lang=" + s.target_lang + "\n";
  out += "time\tkind\ttext\tpos\tdur\n";
  std::size_t ki = 0, fi = 0;
  const auto emit_key = [&] {
    const auto& k = s.keys[ki++];
    out += std::to_string(k.time_ms);
    out += k.kind == KeyKind::insertion ? "\tins\t" : "\tdel\t";
    out += k.text;
    out += '\t';
    out += std::to_string(k.cursor);
    out += "\t\n";
  };
  const auto emit_fix = [&] {
    const auto& f = s.fixations[fi++];
    out += std::to_string(f.time_ms);
    out += f.window == GazeWindow::source ? "\tfixS\t\t" : "\tfixT\t\t";
    out += std::to_string(f.token_index);
    out += '\t';
    out += std::to_string(f.duration_ms);
    out += '\n';
  };
  while (ki < s.keys.size() || fi < s.fixations.size()) {
    const bool key_next =
        fi >= s.fixations.size() ||
        (ki < s.keys.size() && s.keys[ki].time_ms <= s.fixations[fi].time_ms);
    if (key_next)
      emit_key();
    else
      emit_fix();
  }
  return out;
}

std::string serialize_annotations(std::span<const StateAnnotation> track) {
  std::string out = "start\tend\tstate\n";
  for (const auto& a : track) {
    out += std::to_string(a.start_ms);
    out += '\t';
    out += std::to_string(a.end_ms);
    out += '\t';
    out += hof_letter(a.state);
    out += '\n';
  }
  return out;
}

}  // namespace segflow::io
