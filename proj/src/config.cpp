#include "segflow/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "segflow/report.hpp"

namespace segflow::config {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

int64_t to_int(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  int64_t v = 0;
  try {
    v = std::stoll(value, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: " + key + ": not an integer: " + value);
  }
  if (used != value.size())
    throw std::invalid_argument("config: " + key + ": not an integer: " + value);
  return v;
}

double to_real(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: " + key + ": not a number: " + value);
  }
  if (used != value.size())
    throw std::invalid_argument("config: " + key + ": not a number: " + value);
  return v;
}

void check_choice(const std::string& key, const std::string& value,
                  std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (value == a) return;
  std::string msg = "config: " + key + ": must be one of {";
  bool first = true;
  for (const char* a : allowed) {
    if (!first) msg += ", ";
    msg += a;
    first = false;
  }
  msg += "}, got: " + value;
  throw std::invalid_argument(msg);
}

}  // namespace

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "delay_threshold_ms")
    cfg.delay_threshold_ms = to_int(key, value);
  else if (key == "boundary_chars")
    cfg.boundary_chars = value;
  else if (key == "rsp_multiplier")
    cfg.rsp_multiplier = to_real(key, value);
  else if (key == "tsp_multiplier")
    cfg.tsp_multiplier = to_real(key, value);
  else if (key == "word_final_policy")
    cfg.word_final_policy = value;
  else if (key == "ks_alpha")
    cfg.ks_alpha = to_real(key, value);
  else if (key == "ks_rule")
    cfg.ks_rule = value;
  else if (key == "identify_filter")
    cfg.identify_filter = value;
  else if (key == "au_min_ms")
    cfg.au_min_ms = to_int(key, value);
  else if (key == "au_idle_ms")
    cfg.au_idle_ms = to_int(key, value);
  else if (key == "orientation_min_ms")
    cfg.orientation_min_ms = to_int(key, value);
  else if (key == "t1_dominance")
    cfg.t1_dominance = to_real(key, value);
  else if (key == "deletion_share")
    cfg.deletion_share = to_real(key, value);
  else if (key == "outside_policy")
    cfg.outside_policy = value;
  else if (key == "histogram_bin_ms")
    cfg.histogram_bin_ms = to_int(key, value);
  else if (key == "float_precision")
    cfg.float_precision = static_cast<int>(to_int(key, value));
  else if (key == "out_dir")
    cfg.out_dir = value;
  else if (key == "seed")
    cfg.seed = static_cast<uint64_t>(to_int(key, value));
  else
    throw std::invalid_argument("config: unknown key: " + key);
}

RunConfig parse_config_text(const std::string& text, const RunConfig& base) {
  RunConfig cfg = base;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
    try {
      apply_override(cfg, key, value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig load_config_file(const std::string& path, const RunConfig& base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("config: cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), base);
}

void validate(const RunConfig& cfg) {
  if (cfg.delay_threshold_ms < 0)
    throw std::invalid_argument("config: delay_threshold_ms: must be >= 0");
  if (cfg.boundary_chars.empty())
    throw std::invalid_argument("config: boundary_chars: must not be empty");
  if (!(cfg.rsp_multiplier > 0))
    throw std::invalid_argument("config: rsp_multiplier: must be > 0");
  if (!(cfg.tsp_multiplier > 0))
    throw std::invalid_argument("config: tsp_multiplier: must be > 0");
  check_choice("word_final_policy", cfg.word_final_policy, {"separate", "fold"});
  if (!(cfg.ks_alpha > 0.0 && cfg.ks_alpha < 1.0))
    throw std::invalid_argument("config: ks_alpha: must be in (0,1)");
  check_choice("ks_rule", cfg.ks_rule, {"conventional", "literal"});
  check_choice("identify_filter", cfg.identify_filter, {"default", "all", "within-word"});
  if (cfg.au_min_ms < 0) throw std::invalid_argument("config: au_min_ms: must be >= 0");
  if (cfg.au_idle_ms <= 0) throw std::invalid_argument("config: au_idle_ms: must be > 0");
  if (cfg.orientation_min_ms < 0)
    throw std::invalid_argument("config: orientation_min_ms: must be >= 0");
  if (!(cfg.t1_dominance >= 0.0 && cfg.t1_dominance <= 1.0))
    throw std::invalid_argument("config: t1_dominance: must be in [0,1]");
  if (!(cfg.deletion_share >= 0.0 && cfg.deletion_share <= 1.0))
    throw std::invalid_argument("config: deletion_share: must be in [0,1]");
  check_choice("outside_policy", cfg.outside_policy, {"nearest", "preceding", "following"});
  if (cfg.histogram_bin_ms <= 0)
    throw std::invalid_argument("config: histogram_bin_ms: must be > 0");
  if (cfg.float_precision < 1 || cfg.float_precision > 17)
    throw std::invalid_argument("config: float_precision: must be in [1,17]");
}

std::string canonical_text(const RunConfig& cfg) {
  std::ostringstream out;
  out << "au_idle_ms=" << cfg.au_idle_ms << "\n";
  out << "au_min_ms=" << cfg.au_min_ms << "\n";
  out << "boundary_chars=" << cfg.boundary_chars << "\n";
  out << "delay_threshold_ms=" << cfg.delay_threshold_ms << "\n";
  out << "deletion_share=" << report::format_real(cfg.deletion_share, 17) << "\n";
  out << "float_precision=" << cfg.float_precision << "\n";
  out << "histogram_bin_ms=" << cfg.histogram_bin_ms << "\n";
  out << "identify_filter=" << cfg.identify_filter << "\n";
  out << "ks_alpha=" << report::format_real(cfg.ks_alpha, 17) << "\n";
  out << "ks_rule=" << cfg.ks_rule << "\n";
  out << "orientation_min_ms=" << cfg.orientation_min_ms << "\n";
  out << "outside_policy=" << cfg.outside_policy << "\n";
  out << "rsp_multiplier=" << report::format_real(cfg.rsp_multiplier, 17) << "\n";
  out << "seed=" << cfg.seed << "\n";
  out << "t1_dominance=" << report::format_real(cfg.t1_dominance, 17) << "\n";
  out << "tsp_multiplier=" << report::format_real(cfg.tsp_multiplier, 17) << "\n";
  out << "word_final_policy=" << cfg.word_final_policy << "\n";
  return out.str();
}

std::string config_hash(const RunConfig& cfg) { return fnv1a_hex(canonical_text(cfg)); }

iki::IkiParams iki_params(const RunConfig& cfg) {
  iki::IkiParams p;
  p.boundary_chars = utf8_decode(cfg.boundary_chars);
  p.rsp_multiplier = cfg.rsp_multiplier;
  p.tsp_multiplier = cfg.tsp_multiplier;
  p.delay_threshold_ms = cfg.delay_threshold_ms;
  p.word_final_policy = cfg.word_final_policy == "fold" ? iki::WordFinalPolicy::fold_within
                                                        : iki::WordFinalPolicy::separate;
  return p;
}

hof::AuParams au_params(const RunConfig& cfg) {
  hof::AuParams p;
  p.min_duration_ms = cfg.au_min_ms;
  p.idle_threshold_ms = cfg.au_idle_ms;
  return p;
}

hof::SuggestParams suggest_params(const RunConfig& cfg) {
  hof::SuggestParams p;
  p.orientation_min_ms = cfg.orientation_min_ms;
  p.t1_dominance = cfg.t1_dominance;
  p.deletion_share = cfg.deletion_share;
  return p;
}

hof::OutsidePolicy outside_policy_of(const RunConfig& cfg) {
  if (cfg.outside_policy == "preceding") return hof::OutsidePolicy::preceding;
  if (cfg.outside_policy == "following") return hof::OutsidePolicy::following;
  return hof::OutsidePolicy::nearest;
}

}  // namespace segflow::config
