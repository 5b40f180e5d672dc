#include "segflow/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "segflow/stats.hpp"

namespace segflow::pipeline {

namespace fs = std::filesystem;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

const std::array<HofState, 3> kStateOrder = {HofState::orientation, HofState::flow,
                                             HofState::hesitation};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string basename_of(const std::string& path) {
  const auto slash = path.find_last_of('/');
  return slash == std::string::npos ? path : path.substr(slash + 1);
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string state_name(HofState s) { return std::string(1, hof_letter(s)); }

// Lexicographically smallest target language each translator works into.
std::map<std::string, std::string> translator_languages(const Corpus& corpus) {
  std::map<std::string, std::string> lang;
  for (const auto& ls : corpus.sessions) {
    auto it = lang.find(ls.log.translator_id);
    if (it == lang.end())
      lang.emplace(ls.log.translator_id, ls.log.target_lang);
    else if (ls.log.target_lang < it->second)
      it->second = ls.log.target_lang;
  }
  return lang;
}

std::vector<double> all_intervals(const SessionLog& s) {
  std::vector<double> out;
  for (std::size_t i = 1; i < s.keys.size(); ++i)
    out.push_back(static_cast<double>(s.keys[i].time_ms - s.keys[i - 1].time_ms));
  return out;
}

}  // namespace

std::vector<std::string> discover_session_files(std::span<const std::string> paths) {
  std::vector<std::string> files;
  for (const auto& p : paths) {
    std::error_code ec;
    const auto status = fs::status(p, ec);
    if (ec || status.type() == fs::file_type::not_found)
      throw std::invalid_argument("no such path: " + p);
    if (fs::is_directory(status)) {
      for (const auto& entry : fs::directory_iterator(p)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (ends_with(name, ".session.tsv")) files.push_back(entry.path().string());
      }
    } else {
      files.push_back(p);
    }
  }
  std::sort(files.begin(), files.end());
  files.erase(std::unique(files.begin(), files.end()), files.end());
  return files;
}

Corpus load_corpus(std::span<const std::string> files, const io::ParseOptions& opts) {
  Corpus corpus;
  for (const auto& path : files) {
    LoadedSession ls;
    ls.path = path;
    std::string bytes;
    try {
      bytes = read_file(path);
    } catch (const std::invalid_argument& e) {
      throw io::ParseError(0, e.what());
    }
    ls.digest = fnv1a_hex(bytes);
    try {
      ls.log = io::parse_session_text(bytes, opts);
    } catch (const io::ParseError& e) {
      throw io::ParseError(0, path + ": " + e.what());
    }
    corpus.sessions.push_back(std::move(ls));
  }
  return corpus;
}

const LoadedSession* find_session(const Corpus& corpus, const std::string& session_id) {
  const LoadedSession* found = nullptr;
  for (const auto& ls : corpus.sessions) {
    if (ls.log.session_id != session_id) continue;
    if (found) throw std::invalid_argument("ambiguous session id: " + session_id);
    found = &ls;
  }
  return found;
}

std::map<std::string, iki::TranslatorProfile> build_profiles(const Corpus& corpus,
                                                             const iki::IkiParams& params,
                                                             std::vector<std::string>* warnings) {
  std::map<std::string, std::vector<SessionLog>> by_translator;
  for (const auto& ls : corpus.sessions) by_translator[ls.log.translator_id].push_back(ls.log);

  std::map<std::string, iki::TranslatorProfile> profiles;
  for (const auto& [id, sessions] : by_translator) {
    iki::TranslatorProfile p;
    try {
      p = iki::build_profile(id, sessions, params);
    } catch (const std::invalid_argument& e) {
      if (warnings) warnings->push_back("translator " + id + ": " + e.what() + "; skipped");
      continue;
    }
    if (!p.valid) {
      if (warnings)
        warnings->push_back("translator " + id + ": tsp does not exceed effective rsp; skipped");
      continue;
    }
    profiles.emplace(id, std::move(p));
  }
  return profiles;
}

report::ReportTable profiles_table(const Corpus& corpus,
                                   const std::map<std::string, iki::TranslatorProfile>& profiles) {
  const auto langs = translator_languages(corpus);
  report::ReportTable t;
  t.name = "profiles";
  t.columns = {{"translator", report::ColType::text, ""},
               {"language", report::ColType::text, ""},
               {"n_wp", report::ColType::integer, ""},
               {"n_bp", report::ColType::integer, ""},
               {"median_wp", report::ColType::real, "ms"},
               {"median_bp", report::ColType::real, "ms"},
               {"rsp", report::ColType::real, "ms"},
               {"tsp", report::ColType::real, "ms"},
               {"rsp_effective", report::ColType::real, "ms"}};
  for (const auto& [id, p] : profiles) {
    const auto lit = langs.find(id);
    t.rows.push_back({id, lit == langs.end() ? std::string() : lit->second,
                      static_cast<int64_t>(p.n_wp), static_cast<int64_t>(p.n_bp), p.median_wp,
                      p.median_bp, p.rsp, p.tsp, p.rsp_effective});
  }
  t.provenance.operation = "build_profiles";
  for (const auto& ls : corpus.sessions) t.provenance.input_digests.push_back(ls.digest);
  return t;
}

std::map<std::string, iki::TranslatorProfile> parse_profiles_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw io::ParseError(1, "empty profiles table");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = report::parse_csv_line(line);
  const auto col = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw io::ParseError(1, "profiles table: missing column: " + name);
  };
  const std::size_t c_id = col("translator");
  const std::size_t c_nwp = col("n_wp");
  const std::size_t c_nbp = col("n_bp");
  const std::size_t c_mwp = col("median_wp");
  const std::size_t c_mbp = col("median_bp");
  const std::size_t c_rsp = col("rsp");
  const std::size_t c_tsp = col("tsp");
  const std::size_t c_eff = col("rsp_effective");

  std::map<std::string, iki::TranslatorProfile> profiles;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = report::parse_csv_line(line);
    if (fields.size() != header.size())
      throw io::ParseError(lineno, "profiles table: wrong field count");
    iki::TranslatorProfile p;
    try {
      p.translator_id = fields[c_id];
      p.n_wp = static_cast<std::size_t>(std::stoull(fields[c_nwp]));
      p.n_bp = static_cast<std::size_t>(std::stoull(fields[c_nbp]));
      p.median_wp = std::stod(fields[c_mwp]);
      p.median_bp = std::stod(fields[c_mbp]);
      p.rsp = std::stod(fields[c_rsp]);
      p.tsp = std::stod(fields[c_tsp]);
      p.rsp_effective = std::stod(fields[c_eff]);
    } catch (const std::exception&) {
      throw io::ParseError(lineno, "profiles table: bad number");
    }
    p.rsp_clamped = p.rsp_effective > p.rsp;
    p.valid = p.tsp > p.rsp_effective;
    if (p.translator_id.empty()) throw io::ParseError(lineno, "profiles table: empty translator");
    profiles[p.translator_id] = std::move(p);
  }
  return profiles;
}

report::ReportTable study_summary(const Corpus& corpus) {
  struct Acc {
    std::set<std::string> langs;
    std::set<std::string> translators;
    int64_t keystrokes = 0;
    double hours = 0.0;
    std::vector<double> intervals;
    std::size_t sessions = 0;
  };
  std::map<std::string, Acc> by_study;
  for (const auto& ls : corpus.sessions) {
    auto& acc = by_study[ls.log.study_id];
    acc.langs.insert(ls.log.target_lang);
    acc.translators.insert(ls.log.translator_id);
    acc.keystrokes += static_cast<int64_t>(ls.log.keys.size());
    acc.hours += static_cast<double>(ls.log.span_end() - ls.log.span_start()) / 3.6e6;
    auto iv = all_intervals(ls.log);
    acc.intervals.insert(acc.intervals.end(), iv.begin(), iv.end());
    ++acc.sessions;
  }

  report::ReportTable t;
  t.name = "study_summary";
  t.columns = {{"study", report::ColType::text, ""},
               {"target_lang", report::ColType::text, ""},
               {"keystrokes", report::ColType::integer, ""},
               {"duration", report::ColType::real, "h"},
               {"sessions", report::ColType::integer, ""},
               {"translators", report::ColType::integer, ""},
               {"mean_iki", report::ColType::real, "ms"},
               {"median_iki", report::ColType::real, "ms"}};
  for (const auto& [study, acc] : by_study) {
    std::string langs;
    for (const auto& l : acc.langs) {
      if (!langs.empty()) langs += "+";
      langs += l;
    }
    const double mean_iki = acc.intervals.empty() ? kNan : stats::mean(acc.intervals);
    const double median_iki = acc.intervals.empty() ? kNan : stats::median(acc.intervals);
    t.rows.push_back({study, langs, acc.keystrokes, acc.hours,
                      static_cast<int64_t>(acc.sessions),
                      static_cast<int64_t>(acc.translators.size()), mean_iki, median_iki});
  }
  t.provenance.operation = "study_summary";
  for (const auto& ls : corpus.sessions) t.provenance.input_digests.push_back(ls.digest);
  return t;
}

report::ReportTable thresholds_by_language(
    const Corpus& corpus, const std::map<std::string, iki::TranslatorProfile>& profiles) {
  const auto langs = translator_languages(corpus);
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_lang;
  for (const auto& [id, p] : profiles) {
    const auto lit = langs.find(id);
    if (lit == langs.end()) continue;
    by_lang[lit->second].first.push_back(p.rsp);
    by_lang[lit->second].second.push_back(p.tsp);
  }

  report::ReportTable t;
  t.name = "thresholds_by_language";
  t.columns = {{"language", report::ColType::text, ""},
               {"metric", report::ColType::text, ""},
               {"min", report::ColType::real, "ms"},
               {"max", report::ColType::real, "ms"},
               {"mean", report::ColType::real, "ms"},
               {"median", report::ColType::real, "ms"}};
  const auto add = [&](const std::string& lang, const char* metric, std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    t.rows.push_back({lang, std::string(metric), v.front(), v.back(), stats::mean(v),
                      stats::median(v)});
  };
  for (auto& [lang, samples] : by_lang) {
    if (samples.first.empty()) continue;
    add(lang, "RSP", samples.first);
    add(lang, "TSP", samples.second);
  }
  t.provenance.operation = "thresholds_by_language";
  for (const auto& ls : corpus.sessions) t.provenance.input_digests.push_back(ls.digest);
  return t;
}

std::vector<seg::SegmentationTree> build_trees(
    const Corpus& corpus, const std::map<std::string, iki::TranslatorProfile>& profiles,
    const config::RunConfig& cfg) {
  std::vector<seg::SegmentationTree> trees;
  trees.reserve(corpus.sessions.size());
  for (const auto& ls : corpus.sessions) {
    const auto it = profiles.find(ls.log.translator_id);
    if (it == profiles.end())
      throw std::invalid_argument("no profile for translator: " + ls.log.translator_id);
    trees.push_back(seg::build_segmentation(ls.log, it->second, cfg.delay_threshold_ms));
  }
  return trees;
}

report::ReportTable a_only_table(std::span<const seg::SegmentationTree> trees) {
  const auto cov = seg::a_only_coverage(trees);
  report::ReportTable t;
  t.name = "a_only_coverage";
  t.columns = {{"metric", report::ColType::text, ""}, {"value", report::ColType::real, ""}};
  t.rows.push_back({std::string("ts_fraction"), cov.ts_fraction});
  t.rows.push_back({std::string("key_fraction"), cov.key_fraction});
  t.provenance.operation = "a_only_coverage";
  return t;
}

HofBundle build_hof_bundle(const Corpus& corpus,
                           const std::map<std::string, iki::TranslatorProfile>& profiles,
                           const std::string& annotations_dir, const config::RunConfig& cfg) {
  HofBundle bundle;
  const auto policy = config::outside_policy_of(cfg);
  for (std::size_t i = 0; i < corpus.sessions.size(); ++i) {
    const auto& ls = corpus.sessions[i];
    const std::string file = annotations_dir + "/" + ls.log.session_id + ".hof.tsv";
    if (!fs::exists(file)) {
      bundle.warnings.push_back("session " + ls.log.session_id +
                                ": no annotation file; skipped");
      continue;
    }
    const auto pit = profiles.find(ls.log.translator_id);
    if (pit == profiles.end())
      throw std::invalid_argument("no profile for translator: " + ls.log.translator_id);

    std::vector<StateAnnotation> annotations;
    hof::StateTrack track;
    try {
      annotations = io::parse_annotations_text(read_file(file));
      track = hof::build_track(annotations);
    } catch (const io::ParseError& e) {
      throw io::ParseError(0, file + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw io::ParseError(0, file + ": " + e.what());
    }

    const auto tree = seg::build_segmentation(ls.log, pit->second, cfg.delay_threshold_ms);
    bundle.session_index.push_back(i);
    bundle.cuts.push_back(hof::cut_at_state_boundaries(tree, track, policy));
    bundle.tracks.push_back(std::move(track));
  }
  return bundle;
}

report::ReportTable state_counts_table(const HofBundle& bundle) {
  std::map<std::string, std::array<int64_t, 3>> by_lang;
  for (std::size_t i = 0; i < bundle.tracks.size(); ++i) {
    auto& counts = by_lang[bundle.cuts[i].tree.target_lang];
    for (std::size_t k = 0; k < kStateOrder.size(); ++k)
      counts[k] += static_cast<int64_t>(bundle.tracks[i].instances(kStateOrder[k]));
  }

  report::ReportTable t;
  t.name = "state_counts";
  t.columns = {{"language", report::ColType::text, ""},
               {"state", report::ColType::text, ""},
               {"instances", report::ColType::integer, ""},
               {"share", report::ColType::real, ""}};
  for (const auto& [lang, counts] : by_lang) {
    const int64_t total = counts[0] + counts[1] + counts[2];
    for (std::size_t k = 0; k < kStateOrder.size(); ++k) {
      const double share =
          total == 0 ? kNan : static_cast<double>(counts[k]) / static_cast<double>(total);
      t.rows.push_back({lang, state_name(kStateOrder[k]), counts[k], share});
    }
  }
  t.provenance.operation = "state_counts";
  return t;
}

report::ReportTable transitions_by_language(const HofBundle& bundle) {
  std::map<std::string, std::vector<hof::StateTrack>> by_lang;
  for (std::size_t i = 0; i < bundle.tracks.size(); ++i)
    by_lang[bundle.cuts[i].tree.target_lang].push_back(bundle.tracks[i]);

  report::ReportTable t;
  t.name = "transitions_by_language";
  t.columns = {{"language", report::ColType::text, ""},
               {"from_state", report::ColType::text, ""},
               {"to_state", report::ColType::text, ""},
               {"count", report::ColType::integer, ""},
               {"probability", report::ColType::real, ""}};
  for (const auto& [lang, tracks] : by_lang) {
    const auto m = hof::transition_matrix(tracks);
    for (const auto from : kStateOrder)
      for (const auto to : kStateOrder) {
        if (from == to) continue;
        const auto fi = static_cast<std::size_t>(from);
        const auto ti = static_cast<std::size_t>(to);
        t.rows.push_back({lang, state_name(from), state_name(to),
                          static_cast<int64_t>(m.counts[fi][ti]), m.probabilities[fi][ti]});
      }
  }
  t.provenance.operation = "transition_matrix";
  t.provenance.parameters.emplace_back("states", "O,F,H");
  return t;
}

report::ReportTable cut_stats_table(const HofBundle& bundle) {
  struct Acc {
    int64_t ts_before = 0, ts_after = 0, ts_cut = 0;
    int64_t tasks_before = 0, tasks_after = 0, tasks_cut = 0;
    int64_t outside = 0;
  };
  std::map<std::string, Acc> by_lang;
  Acc all;
  const auto fold = [](Acc& a, const hof::CutStats& s) {
    a.ts_before += static_cast<int64_t>(s.ts_before);
    a.ts_after += static_cast<int64_t>(s.ts_after);
    a.ts_cut += static_cast<int64_t>(s.ts_cut);
    a.tasks_before += static_cast<int64_t>(s.tasks_before);
    a.tasks_after += static_cast<int64_t>(s.tasks_after);
    a.tasks_cut += static_cast<int64_t>(s.tasks_cut);
    a.outside += static_cast<int64_t>(s.outside_keys);
  };
  for (const auto& cut : bundle.cuts) {
    fold(by_lang[cut.tree.target_lang], cut.stats);
    fold(all, cut.stats);
  }

  report::ReportTable t;
  t.name = "cut_stats";
  t.columns = {{"language", report::ColType::text, ""},
               {"ts_before", report::ColType::integer, ""},
               {"ts_after", report::ColType::integer, ""},
               {"ts_cut", report::ColType::integer, ""},
               {"ts_cut_share", report::ColType::real, ""},
               {"tasks_before", report::ColType::integer, ""},
               {"tasks_after", report::ColType::integer, ""},
               {"tasks_cut", report::ColType::integer, ""},
               {"outside_keys", report::ColType::integer, ""}};
  const auto emit = [&](const std::string& lang, const Acc& a) {
    const double share =
        a.ts_before == 0 ? kNan : static_cast<double>(a.ts_cut) / static_cast<double>(a.ts_before);
    t.rows.push_back({lang, a.ts_before, a.ts_after, a.ts_cut, share, a.tasks_before, a.tasks_after,
                      a.tasks_cut, a.outside});
  };
  for (const auto& [lang, acc] : by_lang) emit(lang, acc);
  emit("all", all);
  t.provenance.operation = "cut_stats";
  return t;
}

std::vector<PlannedPair> parse_pairs_plan(const std::string& text) {
  std::vector<PlannedPair> plan;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (line == "session_a\tsession_b\tclass") continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string::npos ? tab : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 3)
      throw io::ParseError(lineno, "pairs plan: expected 3 tab-separated fields");
    if (fields[0].empty() || fields[1].empty())
      throw io::ParseError(lineno, "pairs plan: empty session id");
    std::string cls = fields[2];
    std::transform(cls.begin(), cls.end(), cls.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (cls != "a" && cls != "b" && cls != "c")
      throw io::ParseError(lineno, "pairs plan: unknown pair class: " + fields[2]);
    plan.push_back({fields[0], fields[1], cls[0]});
  }
  return plan;
}

IdentifyResult identification_experiment(const Corpus& corpus,
                                         std::span<const PlannedPair> plan,
                                         const config::RunConfig& cfg) {
  const auto params = config::iki_params(cfg);

  struct Samples {
    std::vector<double> all;
    std::vector<double> within_word;
  };
  std::map<std::string, Samples> cache;
  const auto samples_of = [&](const std::string& id) -> const Samples& {
    auto it = cache.find(id);
    if (it != cache.end()) return it->second;
    const auto* ls = find_session(corpus, id);
    if (!ls) throw std::invalid_argument("unknown session id: " + id);
    Samples s;
    s.all = all_intervals(ls->log);
    const auto classes = iki::classify_keystrokes(ls->log, params);
    const auto records = iki::compute_ikis(ls->log, classes);
    s.within_word = iki::wp_sample(records);
    return cache.emplace(id, std::move(s)).first->second;
  };

  IdentifyResult result;
  auto& detail = result.detail;
  detail.name = "identify_pairs";
  detail.columns = {{"pair", report::ColType::integer, ""},
                    {"class", report::ColType::text, ""},
                    {"session_a", report::ColType::text, ""},
                    {"session_b", report::ColType::text, ""},
                    {"filter", report::ColType::text, ""},
                    {"n_a", report::ColType::integer, ""},
                    {"n_b", report::ColType::integer, ""},
                    {"d", report::ColType::real, ""},
                    {"p", report::ColType::real, ""},
                    {"method", report::ColType::text, ""},
                    {"same_conventional", report::ColType::text, ""},
                    {"same_literal", report::ColType::text, ""},
                    {"truth", report::ColType::text, ""}};

  struct ClassAcc {
    int64_t pairs = 0;
    int64_t same = 0;
    int64_t different = 0;
    int64_t undecided = 0;
  };
  std::map<char, ClassAcc> by_class;

  for (std::size_t i = 0; i < plan.size(); ++i) {
    const auto& pair = plan[i];
    std::string filter = cfg.identify_filter;
    if (filter == "default") filter = pair.cls == 'b' ? "within-word" : "all";
    const auto& sa = samples_of(pair.session_a);
    const auto& sb = samples_of(pair.session_b);
    const auto& a = filter == "within-word" ? sa.within_word : sa.all;
    const auto& b = filter == "within-word" ? sb.within_word : sb.all;
    const std::string truth = pair.cls == 'c' ? "different" : "same";

    auto& acc = by_class[pair.cls];
    ++acc.pairs;

    double d = kNan, p = kNan;
    std::string method = "none";
    bool decided = false;
    if (!a.empty() && !b.empty()) {
      const auto r = stats::ks2_test(a, b);
      d = r.statistic;
      p = r.p_value;
      method = stats::method_name(r.method);
      decided = true;
    } else {
      result.warnings.push_back("pair " + pair.session_a + "/" + pair.session_b +
                                ": empty interval sample; undecided");
    }

    std::string conv = "undecided", lit = "undecided";
    if (decided) {
      conv = p >= cfg.ks_alpha ? "yes" : "no";
      lit = p < cfg.ks_alpha ? "yes" : "no";
      const std::string& ruled = cfg.ks_rule == "literal" ? lit : conv;
      if (ruled == "yes")
        ++acc.same;
      else
        ++acc.different;
    } else {
      ++acc.undecided;
    }

    detail.rows.push_back({static_cast<int64_t>(i + 1), std::string(1, pair.cls), pair.session_a,
                           pair.session_b, filter, static_cast<int64_t>(a.size()),
                           static_cast<int64_t>(b.size()), d, p, method, conv, lit, truth});
  }

  detail.provenance.operation = "identification_experiment";
  detail.provenance.parameters.emplace_back("alpha", report::format_real(cfg.ks_alpha));
  detail.provenance.parameters.emplace_back("rule", cfg.ks_rule);
  detail.provenance.parameters.emplace_back("filter", cfg.identify_filter);
  for (const auto& ls : corpus.sessions) detail.provenance.input_digests.push_back(ls.digest);

  auto& summary = result.summary;
  summary.name = "identify_summary";
  summary.columns = {{"class", report::ColType::text, ""},
                     {"truth", report::ColType::text, ""},
                     {"pairs", report::ColType::integer, ""},
                     {"same", report::ColType::integer, ""},
                     {"same_share", report::ColType::real, ""},
                     {"different", report::ColType::integer, ""},
                     {"different_share", report::ColType::real, ""},
                     {"undecided", report::ColType::integer, ""},
                     {"rule", report::ColType::text, ""}};
  for (const auto& [cls, acc] : by_class) {
    const int64_t decided = acc.same + acc.different;
    const double same_share =
        decided == 0 ? kNan : static_cast<double>(acc.same) / static_cast<double>(decided);
    const double diff_share =
        decided == 0 ? kNan : static_cast<double>(acc.different) / static_cast<double>(decided);
    summary.rows.push_back({std::string(1, cls), cls == 'c' ? "different" : "same", acc.pairs,
                            acc.same, same_share, acc.different, diff_share, acc.undecided,
                            cfg.ks_rule});
  }
  summary.provenance = detail.provenance;
  return result;
}

std::string manifest_json(const std::string& command, const config::RunConfig& cfg,
                          const Corpus& corpus,
                          std::span<const std::pair<std::string, std::string>> extra_inputs) {
  nlohmann::ordered_json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["command"] = command;
  j["config_hash"] = config::config_hash(cfg);
  nlohmann::ordered_json jc = nlohmann::ordered_json::object();
  std::istringstream lines(config::canonical_text(cfg));
  std::string line;
  while (std::getline(lines, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) jc[line.substr(0, eq)] = line.substr(eq + 1);
  }
  j["config"] = std::move(jc);
  j["inputs"] = nlohmann::ordered_json::array();
  for (const auto& ls : corpus.sessions) {
    nlohmann::ordered_json ji;
    ji["file"] = basename_of(ls.path);
    ji["digest"] = ls.digest;
    j["inputs"].push_back(std::move(ji));
  }
  for (const auto& [name, digest] : extra_inputs) {
    nlohmann::ordered_json ji;
    ji["file"] = basename_of(name);
    ji["digest"] = digest;
    j["inputs"].push_back(std::move(ji));
  }
  return j.dump(2) + "\n";
}

}  // namespace segflow::pipeline
