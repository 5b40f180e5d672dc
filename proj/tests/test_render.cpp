#include <catch2/catch.hpp>

#include <string>
#include <vector>

#include "segflow/render.hpp"
#include "segflow/session_io.hpp"

using namespace segflow;

namespace {

// Minimal well-formedness check: single root, balanced tags, no stray
// angle brackets. Good enough to catch structural emission bugs.
bool well_formed_xml(const std::string& doc) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  std::size_t roots = 0;
  while (i < doc.size()) {
    const char c = doc[i];
    if (c == '>') return false;
    if (c != '<') {
      ++i;
      continue;
    }
    const std::size_t end = doc.find('>', i);
    if (end == std::string::npos) return false;
    std::string tag = doc.substr(i + 1, end - i - 1);
    i = end + 1;
    if (tag.empty()) return false;
    if (tag.front() == '?') {
      if (tag.back() != '?') return false;
      continue;
    }
    if (tag.front() == '/') {
      if (stack.empty()) return false;
      const std::string name = tag.substr(1);
      if (stack.back() != name) return false;
      stack.pop_back();
      if (stack.empty()) ++roots;
      continue;
    }
    const bool self_closing = tag.back() == '/';
    if (self_closing) tag.pop_back();
    std::string name;
    for (char tc : tag) {
      if (tc == ' ' || tc == '\t' || tc == '\n') break;
      name.push_back(tc);
    }
    if (name.empty()) return false;
    if (self_closing) {
      if (stack.empty()) ++roots;
      continue;
    }
    stack.push_back(name);
  }
  return stack.empty() && roots == 1;
}

std::size_t count_of(const std::string& doc, const std::string& needle) {
  std::size_t n = 0;
  std::size_t pos = 0;
  while ((pos = doc.find(needle, pos)) != std::string::npos) {
    ++n;
    pos += needle.size();
  }
  return n;
}

SessionLog fig_session() {
  SessionLog s;
  s.study_id = "ST";
  s.session_id = "S1";
  s.translator_id = "T1";
  s.source_lang = "en";
  s.target_lang = "es";
  auto ins = [&](int64_t t, const std::string& text) {
    s.keys.push_back({t, KeyKind::insertion, text, static_cast<int64_t>(s.keys.size())});
  };
  ins(135000, ".");
  ins(136200, "u");
  ins(136400, "n");
  ins(136600, "_");
  ins(136750, "a");
  ins(137150, "y");
  ins(137300, "u");
  ins(137450, "m");
  s.keys.push_back({137950, KeyKind::deletion, "muy", 5});
  ins(138350, "u");
  ins(138500, "g");
  ins(138650, "m");
  ins(138800, "e");
  ins(138950, "n");
  ins(139100, "t");
  ins(139250, "o");
  ins(139650, "_");
  ins(139800, "e");
  ins(139950, "n");
  ins(140350, "_");
  ins(140500, "l");
  ins(140650, "a");
  ins(142000, "x");
  return s;
}

}  // namespace

TEST_CASE("progression graph: keystroke layer only") {
  SessionLog s;
  s.keys.push_back({1000, KeyKind::insertion, "a", 0});
  s.keys.push_back({1200, KeyKind::insertion, "b", 1});
  s.keys.push_back({1500, KeyKind::deletion, "b", 1});
  const auto profile = iki::profile_from_thresholds("T", 300, 900);
  const auto tree = seg::build_segmentation(s, profile);
  const auto svg = render::render_progression_graph(s, tree, nullptr, {}, {});
  CHECK(well_formed_xml(svg));
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(count_of(svg, "fill=\"red\"") == 1);       // one deletion glyph
  CHECK(svg.find("stroke-dasharray=\"6,4\"") == std::string::npos);  // no state band
  CHECK(svg.find("<circle") == std::string::npos);  // no fixations
}

TEST_CASE("progression graph: fig-2-style window shows 6 task bars in 1 segment") {
  const auto s = fig_session();
  const auto profile = iki::profile_from_thresholds("T1", 300, 900);
  const auto tree = seg::build_segmentation(s, profile);
  REQUIRE(tree.segments.size() == 3);
  render::GraphSpec spec;
  spec.t0 = 136000;
  spec.t1 = 141000;
  const auto svg = render::render_progression_graph(s, tree, nullptr, {}, spec);
  CHECK(well_formed_xml(svg));
  CHECK(count_of(svg, "fill=\"#9a9a9a\"") == 1);  // one visible segment bar
  CHECK(count_of(svg, "fill=\"#5a5a5a\"") == 6);  // its six task bars
  CHECK(count_of(svg, "fill=\"violet\"") == 2);   // flanking pause boxes
  CHECK(count_of(svg, "fill=\"red\"") == 1);      // the deletion
}

TEST_CASE("progression graph: fixations, states, activity units, alignments") {
  auto s = fig_session();
  s.fixations.push_back({136300, 250, GazeWindow::source, 2});
  s.fixations.push_back({137000, 300, GazeWindow::target, 1});
  const auto profile = iki::profile_from_thresholds("T1", 300, 900);
  const auto tree = seg::build_segmentation(s, profile);
  const auto aus = hof::derive_activity_units(s, profile);
  const auto track = hof::build_track(std::vector<StateAnnotation>{
      {130000, 137000, HofState::orientation}, {137000, 143000, HofState::flow}});

  render::GraphSpec spec;
  spec.alignments = {{0, 1}, {2, 3}};
  const auto svg = render::render_progression_graph(s, tree, &track, aus, spec);
  CHECK(well_formed_xml(svg));
  CHECK(count_of(svg, "<circle") == 1);                            // ST fixation
  CHECK(count_of(svg, "<polygon") == 1);                           // TT fixation
  CHECK(svg.find("stroke-dasharray=\"6,4\"") != std::string::npos);  // state band line
  CHECK(svg.find(">O</text>") != std::string::npos);
  CHECK(svg.find(">F</text>") != std::string::npos);
  CHECK(svg.find("fill=\"yellow\"") != std::string::npos);  // t4 band from typing
  CHECK(count_of(svg, "stroke=\"#dddddd\"") == 2);          // alignment arcs

  // Layer toggles drop their elements.
  render::GraphSpec off = spec;
  off.layers.fixations = false;
  off.layers.activity_units = false;
  off.layers.tsp_boxes = false;
  const auto svg2 = render::render_progression_graph(s, tree, &track, aus, off);
  CHECK(svg2.find("<circle") == std::string::npos);
  CHECK(svg2.find("fill=\"yellow\"") == std::string::npos);
  CHECK(svg2.find("fill=\"violet\"") == std::string::npos);

  // Color overrides take effect.
  render::GraphSpec recolor = spec;
  recolor.au_colors = {{"T4", "#123456"}};
  const auto svg3 = render::render_progression_graph(s, tree, &track, aus, recolor);
  CHECK(svg3.find("fill=\"#123456\"") != std::string::npos);
  CHECK(svg3.find("fill=\"yellow\"") == std::string::npos);
}

TEST_CASE("progression graph is deterministic and rejects empty ranges") {
  const auto s = fig_session();
  const auto profile = iki::profile_from_thresholds("T1", 300, 900);
  const auto tree = seg::build_segmentation(s, profile);
  const auto a = render::render_progression_graph(s, tree, nullptr, {}, {});
  const auto b = render::render_progression_graph(s, tree, nullptr, {}, {});
  CHECK(a == b);

  render::GraphSpec bad;
  bad.t0 = 5000;
  bad.t1 = 5000;
  CHECK_THROWS_AS(render::render_progression_graph(s, tree, nullptr, {}, bad),
                  std::invalid_argument);

  SessionLog empty;
  empty.keys.push_back({100, KeyKind::insertion, "a", 0});
  const auto tree2 = seg::build_segmentation(empty, profile);
  CHECK_THROWS_AS(render::render_progression_graph(empty, tree2, nullptr, {}, {}),
                  std::invalid_argument);
}

TEST_CASE("distribution figure: cdf steps, mean and median verticals") {
  std::vector<double> sample = {100, 200, 200, 300, 500};
  render::DistSeries series;
  series.label = "es";
  series.summary = iki::iki_distribution(sample);
  std::vector<render::DistSeries> all = {series};
  const auto svg = render::render_distribution(all, render::DistKind::cdf);
  CHECK(well_formed_xml(svg));
  CHECK(svg.find("probability") != std::string::npos);
  CHECK(svg.find("ms") != std::string::npos);
  CHECK(count_of(svg, "<path") == 1);
  CHECK(svg.find("stroke-dasharray=\"2,3\"") != std::string::npos);  // dotted median
  CHECK(svg.find(">es</text>") != std::string::npos);               // legend

  // Determinism.
  CHECK(render::render_distribution(all, render::DistKind::cdf) == svg);
}

TEST_CASE("distribution figure: single-value sample still steps") {
  std::vector<double> sample = {42};
  render::DistSeries series{"one", iki::iki_distribution(sample)};
  std::vector<render::DistSeries> all = {series};
  const auto svg = render::render_distribution(all, render::DistKind::cdf);
  CHECK(well_formed_xml(svg));
  CHECK(count_of(svg, "<path") == 1);
}

TEST_CASE("distribution figure: density uses histogram unless kde is present") {
  std::vector<double> sample;
  for (int i = 0; i < 200; ++i) sample.push_back(100 + (i * 7) % 400);
  render::DistSeries hist{"h", iki::iki_distribution(sample)};
  std::vector<render::DistSeries> hs = {hist};
  const auto svg = render::render_distribution(hs, render::DistKind::density);
  CHECK(well_formed_xml(svg));
  CHECK(svg.find("density") != std::string::npos);
  CHECK(count_of(svg, "fill-opacity=\"0.45\"") > 0);  // histogram bars
  CHECK(count_of(svg, "<path") == 0);

  iki::DistOptions opts;
  opts.kde = true;
  render::DistSeries kde{"k", iki::iki_distribution(sample, opts)};
  std::vector<render::DistSeries> ks = {kde};
  const auto svg2 = render::render_distribution(ks, render::DistKind::density);
  CHECK(well_formed_xml(svg2));
  CHECK(count_of(svg2, "<path") == 1);

  std::vector<render::DistSeries> none;
  CHECK_THROWS_AS(render::render_distribution(none, render::DistKind::cdf),
                  std::invalid_argument);
}

TEST_CASE("overlaid series get distinct colors") {
  std::vector<double> fast = {100, 120, 140, 160, 180};
  std::vector<double> slow = {400, 450, 500, 550, 600};
  std::vector<render::DistSeries> all = {{"es", iki::iki_distribution(fast)},
                                         {"ar", iki::iki_distribution(slow)}};
  const auto svg = render::render_distribution(all, render::DistKind::cdf);
  CHECK(well_formed_xml(svg));
  CHECK(count_of(svg, "<path") == 2);
  CHECK(svg.find("#1f77b4") != std::string::npos);
  CHECK(svg.find("#d62728") != std::string::npos);
  CHECK(svg.find(">es</text>") != std::string::npos);
  CHECK(svg.find(">ar</text>") != std::string::npos);
}

TEST_CASE("alignment pair parsing") {
  const std::string good = "st_token\ttt_token\n0\t1\n# comment\n2\t3\n";
  const auto pairs = render::parse_alignment_pairs(good);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0] == std::pair<int64_t, int64_t>{0, 1});
  CHECK(pairs[1] == std::pair<int64_t, int64_t>{2, 3});

  CHECK_THROWS_AS(render::parse_alignment_pairs("0\t1\t2\n"), io::ParseError);
  CHECK_THROWS_AS(render::parse_alignment_pairs("a\tb\n"), io::ParseError);
}
