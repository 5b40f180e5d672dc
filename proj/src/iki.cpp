#include "segflow/iki.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "segflow/stats.hpp"

namespace segflow::iki {

namespace {

bool is_boundary_key(const KeyEvent& k, const std::unordered_set<char32_t>& boundary) {
  const std::u32string cps = utf8_decode(k.text);
  if (cps.empty()) throw std::invalid_argument("classify_keystrokes: empty keystroke text");
  return boundary.count(cps.front()) > 0;
}

}  // namespace

const char* key_class_name(KeyClass c) {
  switch (c) {
    case KeyClass::boundary: return "boundary";
    case KeyClass::word_initial: return "word_initial";
    case KeyClass::within_word: return "within_word";
    case KeyClass::word_final: return "word_final";
  }
  return "boundary";
}

std::vector<KeyClass> classify_keystrokes(const SessionLog& s, const IkiParams& params) {
  const std::unordered_set<char32_t> boundary(params.boundary_chars.begin(),
                                              params.boundary_chars.end());
  const std::size_t n = s.keys.size();
  std::vector<bool> is_b(n);
  for (std::size_t i = 0; i < n; ++i) is_b[i] = is_boundary_key(s.keys[i], boundary);

  std::vector<KeyClass> classes(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (is_b[i]) {
      classes[i] = KeyClass::boundary;
      continue;
    }
    // the sequence edge acts like a boundary neighbour
    const bool pred_b = i == 0 || is_b[i - 1];
    const bool succ_b = i + 1 == n || is_b[i + 1];
    if (pred_b) {
      classes[i] = KeyClass::word_initial;  // wins for one-letter words
    } else if (succ_b) {
      classes[i] = params.word_final_policy == WordFinalPolicy::fold_within
                       ? KeyClass::within_word
                       : KeyClass::word_final;
    } else {
      classes[i] = KeyClass::within_word;
    }
  }
  return classes;
}

std::vector<IkiRecord> compute_ikis(const SessionLog& s, std::span<const KeyClass> classes) {
  if (classes.size() != s.keys.size())
    throw std::invalid_argument("compute_ikis: classes do not match keystrokes");
  std::vector<IkiRecord> out;
  if (s.keys.size() < 2) return out;
  out.reserve(s.keys.size() - 1);
  for (std::size_t i = 1; i < s.keys.size(); ++i)
    out.push_back({i, s.keys[i].time_ms - s.keys[i - 1].time_ms, classes[i]});
  return out;
}

std::vector<double> wp_sample(std::span<const IkiRecord> records) {
  std::vector<double> out;
  for (const auto& r : records)
    if (r.later_class == KeyClass::within_word) out.push_back(static_cast<double>(r.iki_ms));
  return out;
}

std::vector<double> bp_sample(std::span<const IkiRecord> records) {
  std::vector<double> out;
  for (const auto& r : records)
    if (r.later_class == KeyClass::word_initial) out.push_back(static_cast<double>(r.iki_ms));
  return out;
}

TranslatorProfile build_profile(const std::string& translator_id,
                                std::span<const SessionLog> sessions,
                                const IkiParams& params) {
  std::vector<double> wp, bp;
  for (const SessionLog& s : sessions) {
    const auto classes = classify_keystrokes(s, params);
    const auto records = compute_ikis(s, classes);
    for (const auto& r : records) {
      if (r.later_class == KeyClass::within_word) wp.push_back(static_cast<double>(r.iki_ms));
      if (r.later_class == KeyClass::word_initial) bp.push_back(static_cast<double>(r.iki_ms));
    }
  }
  if (wp.empty())
    throw std::invalid_argument("build_profile: translator '" + translator_id +
                                "' has no within-word intervals");
  if (bp.empty())
    throw std::invalid_argument("build_profile: translator '" + translator_id +
                                "' has no word-initial intervals");
  TranslatorProfile p;
  p.translator_id = translator_id;
  p.median_wp = stats::median(wp);
  p.median_bp = stats::median(bp);
  p.n_wp = wp.size();
  p.n_bp = bp.size();
  p.rsp = params.rsp_multiplier * p.median_wp;
  p.tsp = params.tsp_multiplier * p.median_bp;
  p.rsp_effective = p.rsp;
  const auto floor_ms = static_cast<double>(params.delay_threshold_ms);
  if (p.rsp < floor_ms) {
    p.rsp_effective = floor_ms;
    p.rsp_clamped = true;
    p.warnings.push_back("rsp " + std::to_string(p.rsp) + " ms is below the " +
                         std::to_string(params.delay_threshold_ms) +
                         " ms delay floor; using the floor");
  }
  p.valid = p.tsp > p.rsp_effective;
  if (!p.valid)
    p.warnings.push_back("tsp " + std::to_string(p.tsp) +
                         " ms does not exceed the effective rsp; profile unusable");
  return p;
}

TranslatorProfile profile_from_thresholds(std::string translator_id, double rsp, double tsp) {
  TranslatorProfile p;
  p.translator_id = std::move(translator_id);
  p.median_wp = rsp / 2.0;
  p.median_bp = tsp / 3.0;
  p.rsp = rsp;
  p.tsp = tsp;
  p.rsp_effective = rsp;
  p.valid = tsp > rsp;
  return p;
}

DistributionSummary iki_distribution(std::span<const double> sample, const DistOptions& opts) {
  if (sample.empty()) throw std::invalid_argument("iki_distribution: empty sample");
  if (opts.bin_width_ms <= 0.0)
    throw std::invalid_argument("iki_distribution: non-positive bin width");
  DistributionSummary d;
  d.count = sample.size();
  d.mean = stats::mean(sample);
  d.median = stats::median(sample);
  for (double p : opts.probes) d.quantile_table.emplace_back(p, stats::quantile(sample, p));

  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const bool last_of_value = i + 1 == sorted.size() || sorted[i + 1] != sorted[i];
    if (last_of_value) d.cdf.push_back({sorted[i], static_cast<double>(i + 1) / n});
  }

  const double lo = std::floor(sorted.front() / opts.bin_width_ms) * opts.bin_width_ms;
  const double hi = sorted.back();
  const auto n_bins = static_cast<std::size_t>(
      std::max(1.0, std::floor((hi - lo) / opts.bin_width_ms) + 1.0));
  d.histogram.resize(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    d.histogram[b].lo = lo + static_cast<double>(b) * opts.bin_width_ms;
    d.histogram[b].hi = d.histogram[b].lo + opts.bin_width_ms;
  }
  for (double v : sorted) {
    auto b = static_cast<std::size_t>((v - lo) / opts.bin_width_ms);
    if (b >= n_bins) b = n_bins - 1;
    ++d.histogram[b].count;
  }

  if (opts.kde && opts.kde_points >= 2) {
    double sd = 0.0;
    for (double v : sorted) sd += (v - d.mean) * (v - d.mean);
    sd = std::sqrt(sd / std::max(1.0, n - 1.0));
    const double iqr = stats::quantile(sorted, 0.75) - stats::quantile(sorted, 0.25);
    double spread = sd;
    if (iqr > 0.0) spread = std::min(spread, iqr / 1.34);
    double h = 0.9 * spread * std::pow(n, -0.2);  // Silverman's rule
    if (h <= 0.0) h = 1.0;
    const double g_lo = sorted.front() - 3.0 * h;
    const double g_hi = sorted.back() + 3.0 * h;
    const double step = (g_hi - g_lo) / static_cast<double>(opts.kde_points - 1);
    const double inv = 1.0 / (h * std::sqrt(2.0 * 3.14159265358979323846));
    for (std::size_t i = 0; i < opts.kde_points; ++i) {
      const double x = g_lo + static_cast<double>(i) * step;
      double dens = 0.0;
      for (double v : sorted) {
        const double z = (x - v) / h;
        dens += std::exp(-0.5 * z * z);
      }
      d.kde.push_back({x, dens * inv / n});
    }
  }
  return d;
}

}  // namespace segflow::iki
