#include "segflow/types.hpp"

#include <algorithm>

namespace segflow {

int64_t SessionLog::span_start() const {
  int64_t t = keys.empty() ? 0 : keys.front().time_ms;
  if (!fixations.empty()) t = std::min(t, fixations.front().time_ms);
  return t;
}

int64_t SessionLog::span_end() const {
  int64_t t = keys.empty() ? 0 : keys.back().time_ms;
  for (const auto& f : fixations) t = std::max(t, f.time_ms + f.duration_ms);
  return t;
}

char hof_letter(HofState s) {
  switch (s) {
    case HofState::hesitation:  return 'H';
    case HofState::orientation: return 'O';
    case HofState::flow:        return 'F';
  }
  return '?';
}

std::optional<HofState> hof_from_letter(char c) {
  switch (c) {
    case 'H': return HofState::hesitation;
    case 'O': return HofState::orientation;
    case 'F': return HofState::flow;
    default:  return std::nullopt;
  }
}

std::u32string utf8_decode(const std::string& s) {
  std::u32string out;
  out.reserve(s.size());
  size_t i = 0;
  const auto byte = [&](size_t k) { return static_cast<unsigned char>(s[k]); };
  while (i < s.size()) {
    unsigned char c = byte(i);
    char32_t cp = 0xFFFD;
    size_t len = 1;
    if (c < 0x80) {
      cp = c;
    } else if ((c & 0xE0) == 0xC0 && i + 1 < s.size() && (byte(i + 1) & 0xC0) == 0x80) {
      cp = static_cast<char32_t>((c & 0x1F) << 6 | (byte(i + 1) & 0x3F));
      len = 2;
    } else if ((c & 0xF0) == 0xE0 && i + 2 < s.size() && (byte(i + 1) & 0xC0) == 0x80 &&
               (byte(i + 2) & 0xC0) == 0x80) {
      cp = static_cast<char32_t>((c & 0x0F) << 12 | (byte(i + 1) & 0x3F) << 6 |
                                 (byte(i + 2) & 0x3F));
      len = 3;
    } else if ((c & 0xF8) == 0xF0 && i + 3 < s.size() && (byte(i + 1) & 0xC0) == 0x80 &&
               (byte(i + 2) & 0xC0) == 0x80 && (byte(i + 3) & 0xC0) == 0x80) {
      cp = static_cast<char32_t>((c & 0x07) << 18 | (byte(i + 1) & 0x3F) << 12 |
                                 (byte(i + 2) & 0x3F) << 6 | (byte(i + 3) & 0x3F));
      len = 4;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string utf8_encode(const std::u32string& s) {
  std::string out;
  for (char32_t cp : s) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }
  return out;
}

std::string fnv1a_hex(const std::string& bytes) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  static const char* hexd = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<size_t>(i)] = hexd[h & 0xF];
    h >>= 4;
  }
  return out;
}

}  // namespace segflow
