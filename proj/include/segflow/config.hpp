#pragma once

#include <cstdint>
#include <string>

#include "segflow/hof.hpp"
#include "segflow/iki.hpp"

namespace segflow::config {

// Every tunable of the pipeline, with the analysis defaults baked in. The
// config file is plain `key = value` text; CLI flags override file values.
struct RunConfig {
  int64_t delay_threshold_ms = 200;
  std::string boundary_chars = "`\"_.!?:=@$%&*()[]{}";
  double rsp_multiplier = 2.0;
  double tsp_multiplier = 3.0;
  std::string word_final_policy = "separate";  // separate | fold

  double ks_alpha = 0.05;
  std::string ks_rule = "conventional";    // conventional | literal
  std::string identify_filter = "default";  // default | all | within-word

  int64_t au_min_ms = 40;
  int64_t au_idle_ms = 1000;
  int64_t orientation_min_ms = 2500;
  double t1_dominance = 0.5;
  double deletion_share = 0.4;
  std::string outside_policy = "nearest";  // nearest | preceding | following

  int64_t histogram_bin_ms = 50;
  int float_precision = 6;
  std::string out_dir = "out";
  uint64_t seed = 0;
};

// Applies one `key=value` pair. Throws std::invalid_argument for unknown keys
// or unparseable values.
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

// Parses config text on top of `base`: one `key = value` per line, `#`
// comments and blank lines ignored. Throws std::invalid_argument with the
// offending line number.
RunConfig parse_config_text(const std::string& text, const RunConfig& base = {});

// Reads and parses a config file. Throws std::invalid_argument when the file
// cannot be read.
RunConfig load_config_file(const std::string& path, const RunConfig& base = {});

// Range and enum checks (multipliers > 0, alpha in (0,1), ...). Throws
// std::invalid_argument naming the bad field.
void validate(const RunConfig& cfg);

// Full key=value listing in fixed key order, one per line; the basis of
// config_hash and of the manifest's config record. out_dir is excluded: where
// results are written must not change what is written.
std::string canonical_text(const RunConfig& cfg);

// FNV-1a 64 hash of canonical_text, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

iki::IkiParams iki_params(const RunConfig& cfg);
hof::AuParams au_params(const RunConfig& cfg);
hof::SuggestParams suggest_params(const RunConfig& cfg);
hof::OutsidePolicy outside_policy_of(const RunConfig& cfg);

}  // namespace segflow::config
