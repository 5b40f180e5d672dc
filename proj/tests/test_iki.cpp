#include <catch2/catch.hpp>

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "segflow/iki.hpp"
#include "segflow/types.hpp"

using namespace segflow;
using namespace segflow::iki;

namespace {

SessionLog make_session(const std::vector<std::pair<int64_t, std::string>>& keys) {
  SessionLog s;
  s.study_id = "T";
  s.session_id = "T-P01";
  s.translator_id = "P01";
  s.source_lang = "en";
  s.target_lang = "es";
  int64_t cursor = 0;
  for (const auto& [t, text] : keys) {
    s.keys.push_back({t, KeyKind::insertion, text, cursor});
    cursor += static_cast<int64_t>(text.size());
  }
  return s;
}

std::vector<KeyClass> classify_texts(const std::vector<std::string>& texts) {
  std::vector<std::pair<int64_t, std::string>> keys;
  int64_t t = 0;
  for (const auto& text : texts) keys.emplace_back(t += 300, text);
  return classify_keystrokes(make_session(keys));
}

double sort_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

}  // namespace

TEST_CASE("keystroke classes for a plain word") {
  const auto c = classify_texts({"t", "h", "e", "_"});
  REQUIRE(c.size() == 4);
  CHECK(c[0] == KeyClass::word_initial);
  CHECK(c[1] == KeyClass::within_word);
  CHECK(c[2] == KeyClass::word_final);
  CHECK(c[3] == KeyClass::boundary);
}

TEST_CASE("one-letter word resolves to word_initial") {
  const auto c = classify_texts({"_", "a", "_"});
  REQUIRE(c.size() == 3);
  CHECK(c[0] == KeyClass::boundary);
  CHECK(c[1] == KeyClass::word_initial);
  CHECK(c[2] == KeyClass::boundary);
}

TEST_CASE("boundary characters follow the default list") {
  CHECK(classify_texts({"a", "?", "b"})[1] == KeyClass::boundary);
  CHECK(classify_texts({"a", ".", "b"})[1] == KeyClass::boundary);
  CHECK(classify_texts({"a", "\"", "b"})[1] == KeyClass::boundary);
  // comma and semicolon are intentionally not boundaries by default
  CHECK(classify_texts({"a", ",", "b"})[1] == KeyClass::within_word);
  CHECK(classify_texts({"a", ";", "b"})[1] == KeyClass::within_word);
}

TEST_CASE("multi-character keystrokes classify by first code point") {
  const auto c1 = classify_texts({"_", "the", "_"});
  CHECK(c1[1] == KeyClass::word_initial);
  const auto c2 = classify_texts({"a", "_b", "c"});
  CHECK(c2[1] == KeyClass::boundary);
  CHECK(c2[0] == KeyClass::word_initial);  // successor is a boundary key, initial wins at start
}

TEST_CASE("sequence edges act as boundaries") {
  const auto c = classify_texts({"a", "b"});
  REQUIRE(c.size() == 2);
  CHECK(c[0] == KeyClass::word_initial);
  CHECK(c[1] == KeyClass::word_final);
  const auto lone = classify_texts({"x"});
  CHECK(lone[0] == KeyClass::word_initial);
}

TEST_CASE("word_final can fold into within_word") {
  IkiParams params;
  params.word_final_policy = WordFinalPolicy::fold_within;
  std::vector<std::pair<int64_t, std::string>> keys{{0, "t"}, {100, "h"}, {230, "e"}, {500, "_"}};
  const auto c = classify_keystrokes(make_session(keys), params);
  CHECK(c[2] == KeyClass::within_word);
  const auto recs = compute_ikis(make_session(keys), c);
  const auto wp = wp_sample(recs);
  REQUIRE(wp.size() == 2);  // 'h' and the folded 'e'
  CHECK(wp[0] == 100.0);
  CHECK(wp[1] == 130.0);
}

TEST_CASE("classes partition the keystroke sequence") {
  std::mt19937 rng(404);
  std::uniform_int_distribution<int> pick(0, 9);
  for (int iter = 0; iter < 100; ++iter) {
    std::vector<std::pair<int64_t, std::string>> keys;
    int64_t t = 0;
    const int n = 2 + iter % 40;
    for (int i = 0; i < n; ++i) {
      const int r = pick(rng);
      std::string text = r < 3 ? "_" : r == 3 ? "." : std::string(1, static_cast<char>('a' + r));
      keys.emplace_back(t += 150 + 10 * pick(rng), text);
    }
    const auto s = make_session(keys);
    const auto c = classify_keystrokes(s);
    REQUIRE(c.size() == s.keys.size());
    std::size_t counts[4] = {0, 0, 0, 0};
    for (auto cls : c) ++counts[static_cast<int>(cls)];
    CHECK(counts[0] + counts[1] + counts[2] + counts[3] == s.keys.size());

    const auto recs = compute_ikis(s, c);
    REQUIRE(recs.size() == s.keys.size() - 1);
    // WP and BP are disjoint subsets of all intervals
    CHECK(wp_sample(recs).size() + bp_sample(recs).size() <= recs.size());
  }
}

TEST_CASE("iki values are plain time differences") {
  const auto s = make_session({{0, "a"}, {150, "b"}, {400, "c"}});
  const auto recs = compute_ikis(s, classify_keystrokes(s));
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].iki_ms == 150);
  CHECK(recs[0].index == 1);
  CHECK(recs[1].iki_ms == 250);

  // caller-supplied classes flow straight into the sample selection
  const auto two = make_session({{0, "t"}, {160, "h"}});
  const std::vector<KeyClass> given{KeyClass::word_initial, KeyClass::within_word};
  const auto r2 = compute_ikis(two, given);
  const auto wp = wp_sample(r2);
  REQUIRE(wp.size() == 1);
  CHECK(wp[0] == 160.0);
}

TEST_CASE("profile formulas: rsp = 2 x median WP, tsp = 3 x median BP") {
  // engineered so WP = {100,150,300} and BP = {200,300,400}
  const auto s = make_session({{0, "a"},    {100, "b"},  {200, "c"},  {300, "_"},
                               {500, "a"},  {650, "b"},  {700, "c"},  {800, "_"},
                               {1100, "a"}, {1400, "b"}, {1450, "c"}, {1500, "_"},
                               {1900, "a"}});
  const std::vector<SessionLog> sessions{s};
  const auto p = build_profile("P01", sessions);
  CHECK(p.median_wp == 150.0);
  CHECK(p.median_bp == 300.0);
  CHECK(p.rsp == 300.0);
  CHECK(p.tsp == 900.0);
  CHECK(p.rsp_effective == 300.0);
  CHECK_FALSE(p.rsp_clamped);
  CHECK(p.valid);
  CHECK(p.n_wp == 3);
  CHECK(p.n_bp == 3);
}

TEST_CASE("profiles pool sessions and clamp rsp to the delay floor") {
  // WP = {80, 90} in two sessions -> median 85, rsp 170 -> clamped to 200
  const auto s1 = make_session({{0, "a"}, {80, "b"}, {160, "c"}, {600, "_"}, {1200, "x"}});
  const auto s2 = make_session({{0, "a"}, {90, "b"}, {180, "c"}, {700, "_"}, {1400, "x"}});
  const std::vector<SessionLog> sessions{s1, s2};
  const auto p = build_profile("P02", sessions);
  CHECK(p.n_wp == 2);
  CHECK(p.rsp == 170.0);
  CHECK(p.rsp_clamped);
  CHECK(p.rsp_effective == 200.0);
  CHECK_FALSE(p.warnings.empty());
  CHECK(p.rsp == 2.0 * p.median_wp);  // raw value preserved
}

TEST_CASE("profile medians agree with a sort-based oracle on random sessions") {
  std::mt19937 rng(777);
  std::uniform_int_distribution<int64_t> gap(1, 1500);
  std::uniform_int_distribution<int> pick(0, 8);
  for (int iter = 0; iter < 60; ++iter) {
    std::vector<std::pair<int64_t, std::string>> keys;
    int64_t t = 0;
    for (int i = 0; i < 120; ++i) {
      const int r = pick(rng);
      keys.emplace_back(t += gap(rng), r < 2 ? "_" : std::string(1, static_cast<char>('a' + r)));
    }
    const auto s = make_session(keys);
    const auto recs = compute_ikis(s, classify_keystrokes(s));
    const auto wp = wp_sample(recs);
    const auto bp = bp_sample(recs);
    if (wp.empty() || bp.empty()) continue;
    const std::vector<SessionLog> sessions{s};
    const auto p = build_profile("PX", sessions);
    CHECK(p.rsp == 2.0 * sort_median(wp));
    CHECK(p.tsp == 3.0 * sort_median(bp));
  }
}

TEST_CASE("build_profile rejects sessions without WP or BP samples") {
  const auto only_boundary = make_session({{0, "_"}, {300, "_"}, {600, "_"}});
  const std::vector<SessionLog> s1{only_boundary};
  CHECK_THROWS_AS(build_profile("P", s1), std::invalid_argument);
  // one word of two letters: word_initial + word_final, no within_word interval
  const auto no_wp = make_session({{0, "a"}, {200, "b"}, {500, "_"}, {900, "c"}});
  const std::vector<SessionLog> s2{no_wp};
  CHECK_THROWS_AS(build_profile("P", s2), std::invalid_argument);
}

TEST_CASE("distribution summary: cdf, quantiles, histogram") {
  const std::vector<double> sample{100.0, 200.0, 300.0};
  const auto d = iki_distribution(sample);
  CHECK(d.count == 3);
  CHECK(d.mean == Approx(200.0));
  CHECK(d.median == 200.0);
  REQUIRE(d.cdf.size() == 3);
  CHECK(d.cdf[1].x == 200.0);
  CHECK(d.cdf[1].f == Approx(2.0 / 3.0));
  CHECK(d.cdf.back().f == 1.0);

  std::size_t total = 0;
  for (const auto& b : d.histogram) total += b.count;
  CHECK(total == d.count);

  // right-continuity / monotonicity on a sample with ties
  const std::vector<double> tied{5.0, 5.0, 5.0, 9.0};
  const auto dt = iki_distribution(tied);
  REQUIRE(dt.cdf.size() == 2);
  CHECK(dt.cdf[0].x == 5.0);
  CHECK(dt.cdf[0].f == 0.75);
  CHECK(dt.cdf[1].f == 1.0);

  const std::vector<double> single{42.0};
  const auto ds = iki_distribution(single);
  REQUIRE(ds.cdf.size() == 1);
  CHECK(ds.cdf[0].f == 1.0);
  CHECK(ds.histogram.size() == 1);

  CHECK_THROWS_AS(iki_distribution(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("kde is off by default and well-formed when requested") {
  const std::vector<double> sample{120.0, 150.0, 180.0, 240.0, 300.0, 410.0};
  CHECK(iki_distribution(sample).kde.empty());
  DistOptions opts;
  opts.kde = true;
  const auto d = iki_distribution(sample, opts);
  REQUIRE(d.kde.size() == opts.kde_points);
  for (const auto& p : d.kde) CHECK(p.density >= 0.0);
  double mass = 0.0;
  for (std::size_t i = 1; i < d.kde.size(); ++i)
    mass += (d.kde[i].x - d.kde[i - 1].x) * (d.kde[i].density + d.kde[i - 1].density) / 2.0;
  CHECK(mass == Approx(1.0).margin(0.02));  // kernel mass inside the padded grid
}
