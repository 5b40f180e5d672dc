#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "segflow/types.hpp"

namespace segflow::iki {

enum class KeyClass { boundary, word_initial, within_word, word_final };

const char* key_class_name(KeyClass c);

// word_final is a residual class for the letter-before-a-boundary case; it can
// be folded into within_word, which also moves those intervals into the WP
// sample.
enum class WordFinalPolicy { separate, fold_within };

struct IkiParams {
  std::u32string boundary_chars = U"`\"_.!?:=@$%&*()[]{}";
  double rsp_multiplier = 2.0;
  double tsp_multiplier = 3.0;
  int64_t delay_threshold_ms = 200;
  WordFinalPolicy word_final_policy = WordFinalPolicy::separate;
};

struct IkiRecord {
  std::size_t index = 0;  // index of the later keystroke of the pair
  int64_t iki_ms = 0;
  KeyClass later_class = KeyClass::boundary;
};

struct TranslatorProfile {
  std::string translator_id;
  double median_wp = 0.0;
  double median_bp = 0.0;
  double rsp = 0.0;            // 2 x median_wp, exact, never clamped
  double tsp = 0.0;            // 3 x median_bp, exact
  double rsp_effective = 0.0;  // rsp raised to the delay floor when below it
  std::size_t n_wp = 0;
  std::size_t n_bp = 0;
  bool rsp_clamped = false;
  bool valid = false;  // tsp > rsp_effective
  std::vector<std::string> warnings;
};

// One class per keystroke. Multi-character keystrokes are classified by their
// first code point. Throws std::invalid_argument on empty keystroke text.
std::vector<KeyClass> classify_keystrokes(const SessionLog& s, const IkiParams& params = {});

// n-1 records for n keystrokes; record i carries time[i] - time[i-1] and the
// class of keystroke i.
std::vector<IkiRecord> compute_ikis(const SessionLog& s, std::span<const KeyClass> classes);

// WP sample = intervals whose later key is within_word; BP sample = intervals
// whose later key is word_initial.
std::vector<double> wp_sample(std::span<const IkiRecord> records);
std::vector<double> bp_sample(std::span<const IkiRecord> records);

// Pools every session of one translator. Throws std::invalid_argument when
// either pooled sample is empty.
TranslatorProfile build_profile(const std::string& translator_id,
                                std::span<const SessionLog> sessions,
                                const IkiParams& params = {});

// For tests and explicit-threshold runs: a profile with the given effective
// thresholds and no clamping.
TranslatorProfile profile_from_thresholds(std::string translator_id, double rsp, double tsp);

struct CdfPoint {
  double x = 0.0;
  double f = 0.0;  // P(X <= x), right-continuous
};

struct HistBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};

struct KdePoint {
  double x = 0.0;
  double density = 0.0;
};

struct DistOptions {
  bool kde = false;
  double bin_width_ms = 50.0;
  std::size_t kde_points = 128;
  std::vector<double> probes = {0.0, 0.05, 0.25, 0.5, 0.75, 0.95, 1.0};
};

struct DistributionSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  std::vector<std::pair<double, double>> quantile_table;  // (probe, value)
  std::vector<CdfPoint> cdf;                              // one point per distinct value
  std::vector<HistBin> histogram;                         // counts sum to count
  std::vector<KdePoint> kde;                              // empty unless requested
};

DistributionSummary iki_distribution(std::span<const double> sample,
                                     const DistOptions& opts = {});

}  // namespace segflow::iki
