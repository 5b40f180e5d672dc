#include "segflow/hof.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "segflow/session_io.hpp"
#include "segflow/stats.hpp"

namespace segflow::hof {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Presentation order used by every state-keyed table.
constexpr std::array<HofState, 3> kStateOrder = {HofState::orientation, HofState::flow,
                                                 HofState::hesitation};

std::size_t state_index(HofState s) { return static_cast<std::size_t>(s); }

std::string state_name(HofState s) { return std::string(1, hof_letter(s)); }

}  // namespace

int64_t StateTrack::total_ms(HofState s) const {
  int64_t total = 0;
  for (const auto& r : regions)
    if (r.state == s) total += r.end_ms - r.start_ms;
  return total;
}

std::size_t StateTrack::instances(HofState s) const {
  std::size_t n = 0;
  for (const auto& r : regions)
    if (r.state == s) ++n;
  return n;
}

StateTrack build_track(std::span<const StateAnnotation> annotations) {
  if (annotations.empty()) throw std::invalid_argument("state track needs at least one region");
  std::vector<StateAnnotation> regions(annotations.begin(), annotations.end());
  std::stable_sort(regions.begin(), regions.end(),
                   [](const StateAnnotation& a, const StateAnnotation& b) {
                     return a.start_ms < b.start_ms;
                   });
  for (const auto& r : regions)
    if (r.end_ms <= r.start_ms) throw std::invalid_argument("state region must have end > start");
  for (std::size_t i = 1; i < regions.size(); ++i)
    if (regions[i].start_ms < regions[i - 1].end_ms)
      throw std::invalid_argument("state regions overlap");

  StateTrack track;
  for (const auto& r : regions) {
    if (!track.regions.empty() && track.regions.back().end_ms == r.start_ms &&
        track.regions.back().state == r.state) {
      track.regions.back().end_ms = r.end_ms;
    } else {
      track.regions.push_back(r);
    }
  }
  return track;
}

std::optional<HofState> state_at(const StateTrack& track, int64_t t) {
  auto it = std::upper_bound(track.regions.begin(), track.regions.end(), t,
                             [](int64_t v, const StateAnnotation& r) { return v < r.start_ms; });
  if (it == track.regions.begin()) return std::nullopt;
  --it;
  if (t < it->end_ms) return it->state;
  return std::nullopt;
}

namespace {

// Region index for time t under the given outside policy. Regions are
// non-empty, sorted and non-overlapping.
std::size_t region_for(const StateTrack& track, int64_t t, OutsidePolicy policy, bool& outside) {
  const auto& rs = track.regions;
  auto it = std::upper_bound(rs.begin(), rs.end(), t,
                             [](int64_t v, const StateAnnotation& r) { return v < r.start_ms; });
  const std::size_t after = static_cast<std::size_t>(it - rs.begin());  // first region starting > t
  if (after > 0 && t < rs[after - 1].end_ms) {
    outside = false;
    return after - 1;
  }
  outside = true;
  const bool has_prev = after > 0;
  const bool has_next = after < rs.size();
  if (!has_prev) return 0;
  if (!has_next) return rs.size() - 1;
  switch (policy) {
    case OutsidePolicy::preceding:
      return after - 1;
    case OutsidePolicy::following:
      return after;
    case OutsidePolicy::nearest: {
      const int64_t d_prev = t - (rs[after - 1].end_ms - 1);
      const int64_t d_next = rs[after].start_ms - t;
      return d_next < d_prev ? after : after - 1;
    }
  }
  return after - 1;
}

const char* policy_name(OutsidePolicy p) {
  switch (p) {
    case OutsidePolicy::nearest:
      return "nearest";
    case OutsidePolicy::preceding:
      return "preceding";
    case OutsidePolicy::following:
      return "following";
  }
  return "nearest";
}

std::optional<int64_t> pause_before(const std::vector<int64_t>& times, std::size_t first_key) {
  if (first_key == 0) return std::nullopt;
  return times[first_key] - times[first_key - 1];
}

double mean_internal(const std::vector<int64_t>& times, std::size_t first, std::size_t last) {
  if (last <= first) return kNan;
  double sum = 0.0;
  for (std::size_t i = first + 1; i <= last; ++i) sum += static_cast<double>(times[i] - times[i - 1]);
  return sum / static_cast<double>(last - first);
}

// Splits [first,last] into maximal runs of keys sharing one region.
std::vector<std::pair<std::size_t, std::size_t>> region_runs(
    const std::vector<std::size_t>& key_regions, std::size_t first, std::size_t last) {
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  std::size_t run_start = first;
  for (std::size_t i = first + 1; i <= last; ++i) {
    if (key_regions[i] != key_regions[i - 1]) {
      runs.emplace_back(run_start, i - 1);
      run_start = i;
    }
  }
  runs.emplace_back(run_start, last);
  return runs;
}

}  // namespace

CutResult cut_at_state_boundaries(const seg::SegmentationTree& tree, const StateTrack& track,
                                  OutsidePolicy policy) {
  if (track.regions.empty()) throw std::invalid_argument("empty state track");
  CutResult out;
  out.tree.study_id = tree.study_id;
  out.tree.session_id = tree.session_id;
  out.tree.translator_id = tree.translator_id;
  out.tree.source_lang = tree.source_lang;
  out.tree.target_lang = tree.target_lang;
  out.tree.profile = tree.profile;
  out.tree.key_times = tree.key_times;
  out.tree.key_kinds = tree.key_kinds;

  const std::size_t n = tree.key_times.size();
  out.key_regions.resize(n);
  out.key_states.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    bool outside = false;
    const std::size_t r = region_for(track, tree.key_times[i], policy, outside);
    out.key_regions[i] = r;
    out.key_states[i] = track.regions[r].state;
    if (outside) ++out.stats.outside_keys;
  }
  if (out.stats.outside_keys > 0) {
    std::ostringstream w;
    w << out.stats.outside_keys << " keystroke(s) outside every state region; attached by "
      << policy_name(policy) << " policy";
    out.warnings.push_back(w.str());
  }

  const auto& times = out.tree.key_times;
  const auto& kinds = out.tree.key_kinds;

  for (const auto& p : tree.programs) {
    for (const auto& [a, b] : region_runs(out.key_regions, p.first_key, p.last_key)) {
      seg::MotorProgram frag;
      frag.first_key = a;
      frag.last_key = b;
      frag.start_ms = times[a];
      frag.end_ms = times[b];
      out.tree.programs.push_back(frag);
    }
  }

  out.stats.ts_before = tree.segments.size();
  out.stats.tasks_before = tree.tasks.size();

  // Old segments tile old tasks in order, so rebuilding both in one pass keeps
  // the new task indices contiguous per new segment.
  for (const auto& s : tree.segments) {
    const std::size_t seg_task_first = out.tree.tasks.size();
    for (std::size_t ti = s.first_task; ti <= s.last_task; ++ti) {
      const auto& task = tree.tasks[ti];
      const auto runs = region_runs(out.key_regions, task.first_key, task.last_key);
      if (runs.size() > 1) ++out.stats.tasks_cut;
      for (const auto& [a, b] : runs) {
        seg::Task frag;
        frag.first_key = a;
        frag.last_key = b;
        frag.label = seg::label_task(kinds, a, b);
        frag.start_ms = times[a];
        frag.end_ms = times[b];
        frag.preceding_pause_ms = pause_before(times, a);
        out.tree.tasks.push_back(frag);
      }
    }
    const std::size_t seg_task_last = out.tree.tasks.size();  // exclusive

    // Group the new tasks of this old segment into runs of equal region.
    std::size_t frag_count = 0;
    std::size_t group_first = seg_task_first;
    while (group_first < seg_task_last) {
      const std::size_t region = out.key_regions[out.tree.tasks[group_first].first_key];
      std::size_t group_last = group_first;
      while (group_last + 1 < seg_task_last &&
             out.key_regions[out.tree.tasks[group_last + 1].first_key] == region) {
        ++group_last;
      }
      seg::TaskSegment frag;
      frag.first_task = group_first;
      frag.last_task = group_last;
      frag.first_key = out.tree.tasks[group_first].first_key;
      frag.last_key = out.tree.tasks[group_last].last_key;
      frag.key_count = frag.last_key - frag.first_key + 1;
      frag.start_ms = times[frag.first_key];
      frag.end_ms = times[frag.last_key];
      frag.preceding_pause_ms = pause_before(times, frag.first_key);
      frag.mean_internal_iki = mean_internal(times, frag.first_key, frag.last_key);
      for (std::size_t ti = group_first; ti <= group_last; ++ti)
        frag.label.push_back(seg::task_label_letter(out.tree.tasks[ti].label));
      out.tree.segments.push_back(frag);
      ++frag_count;
      group_first = group_last + 1;
    }
    if (frag_count > 1) ++out.stats.ts_cut;
  }

  out.stats.ts_after = out.tree.segments.size();
  out.stats.tasks_after = out.tree.tasks.size();
  return out;
}

TransitionMatrix transition_matrix(const StateTrack& track) {
  TransitionMatrix m;
  for (std::size_t i = 1; i < track.regions.size(); ++i) {
    const HofState a = track.regions[i - 1].state;
    const HofState b = track.regions[i].state;
    if (a == b) continue;
    ++m.counts[state_index(a)][state_index(b)];
  }
  std::size_t total = 0;
  for (const auto& row : m.counts)
    for (std::size_t c : row) total += c;
  if (total == 0) {
    m.warnings.push_back("track has a single state; transition matrix is all zeros");
    return m;
  }
  for (std::size_t r = 0; r < 3; ++r) {
    std::size_t row_total = 0;
    for (std::size_t c : m.counts[r]) row_total += c;
    if (row_total == 0) continue;
    for (std::size_t c = 0; c < 3; ++c)
      m.probabilities[r][c] =
          static_cast<double>(m.counts[r][c]) / static_cast<double>(row_total);
  }
  return m;
}

TransitionMatrix transition_matrix(std::span<const StateTrack> tracks) {
  TransitionMatrix total;
  for (const auto& track : tracks) {
    const TransitionMatrix part = transition_matrix(track);
    for (std::size_t r = 0; r < 3; ++r)
      for (std::size_t c = 0; c < 3; ++c) total.counts[r][c] += part.counts[r][c];
  }
  std::size_t grand = 0;
  for (const auto& row : total.counts)
    for (std::size_t c : row) grand += c;
  if (grand == 0) {
    total.warnings.push_back("no state transitions in any track");
    return total;
  }
  for (std::size_t r = 0; r < 3; ++r) {
    std::size_t row_total = 0;
    for (std::size_t c : total.counts[r]) row_total += c;
    if (row_total == 0) continue;
    for (std::size_t c = 0; c < 3; ++c)
      total.probabilities[r][c] =
          static_cast<double>(total.counts[r][c]) / static_cast<double>(row_total);
  }
  return total;
}

report::ReportTable transition_table(const TransitionMatrix& m) {
  report::ReportTable t;
  t.name = "hof_transitions";
  t.columns.push_back({"from_state", report::ColType::text, ""});
  t.columns.push_back({"to_state", report::ColType::text, ""});
  t.columns.push_back({"count", report::ColType::integer, ""});
  t.columns.push_back({"probability", report::ColType::real, ""});
  for (HofState from : kStateOrder) {
    for (HofState to : kStateOrder) {
      if (from == to) continue;
      const std::size_t r = state_index(from);
      const std::size_t c = state_index(to);
      t.rows.push_back({state_name(from), state_name(to),
                        static_cast<int64_t>(m.counts[r][c]), m.probabilities[r][c]});
    }
  }
  t.provenance.operation = "transition_matrix";
  t.provenance.parameters = {{"states", "O,F,H"}};
  return t;
}

report::ReportTable task_distribution_by_state(std::span<const CutResult> sessions,
                                               std::vector<std::string>* warnings) {
  // counts[lang][state][label]
  std::map<std::string, std::array<std::array<std::size_t, 3>, 3>> counts;
  for (const auto& s : sessions) {
    auto& by_state = counts[s.tree.target_lang];
    for (const auto& task : s.tree.tasks) {
      const HofState st = s.key_states[task.first_key];
      ++by_state[state_index(st)][static_cast<std::size_t>(task.label)];
    }
  }

  report::ReportTable t;
  t.name = "task_distribution_by_state";
  t.columns.push_back({"language", report::ColType::text, ""});
  t.columns.push_back({"state", report::ColType::text, ""});
  t.columns.push_back({"label", report::ColType::text, ""});
  t.columns.push_back({"tasks", report::ColType::integer, ""});
  t.columns.push_back({"share", report::ColType::real, ""});
  constexpr std::array<seg::TaskLabel, 3> labels = {seg::TaskLabel::A, seg::TaskLabel::D,
                                                    seg::TaskLabel::C};
  for (const auto& [lang, by_state] : counts) {
    for (HofState st : kStateOrder) {
      const auto& row = by_state[state_index(st)];
      const std::size_t total = row[0] + row[1] + row[2];
      if (total == 0) {
        if (warnings) {
          warnings->push_back("state " + state_name(st) + " has no tasks in language " + lang +
                              "; rows omitted");
        }
        continue;
      }
      for (seg::TaskLabel l : labels) {
        const std::size_t c = row[static_cast<std::size_t>(l)];
        t.rows.push_back({lang, state_name(st), std::string(1, seg::task_label_letter(l)),
                          static_cast<int64_t>(c),
                          static_cast<double>(c) / static_cast<double>(total)});
      }
    }
  }
  t.provenance.operation = "task_distribution_by_state";
  t.provenance.parameters = {{"sessions", std::to_string(sessions.size())}};
  return t;
}

report::ReportTable ts_label_ranking_by_state(std::span<const CutResult> sessions,
                                              std::size_t k) {
  // counts[lang][state][label]
  std::map<std::string, std::array<std::map<std::string, std::size_t>, 3>> counts;
  for (const auto& s : sessions) {
    auto& by_state = counts[s.tree.target_lang];
    for (const auto& seg : s.tree.segments)
      ++by_state[state_index(s.key_states[seg.first_key])][seg.label];
  }

  report::ReportTable t;
  t.name = "ts_label_ranking_by_state";
  t.columns.push_back({"language", report::ColType::text, ""});
  t.columns.push_back({"state", report::ColType::text, ""});
  t.columns.push_back({"rank", report::ColType::integer, ""});
  t.columns.push_back({"label", report::ColType::text, ""});
  t.columns.push_back({"count", report::ColType::integer, ""});
  for (const auto& [lang, by_state] : counts) {
    for (HofState st : kStateOrder) {
      const auto& label_counts = by_state[state_index(st)];
      std::vector<std::pair<std::string, std::size_t>> ranked(label_counts.begin(),
                                                              label_counts.end());
      std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
      });
      const std::size_t top = std::min(k, ranked.size());
      for (std::size_t i = 0; i < top; ++i) {
        t.rows.push_back({lang, state_name(st), static_cast<int64_t>(i + 1), ranked[i].first,
                          static_cast<int64_t>(ranked[i].second)});
      }
    }
  }
  t.provenance.operation = "ts_label_ranking_by_state";
  t.provenance.parameters = {{"sessions", std::to_string(sessions.size())},
                             {"k", std::to_string(k)}};
  return t;
}

report::ReportTable state_summary(std::span<const CutResult> sessions,
                                  std::span<const StateTrack> tracks, HofState state) {
  if (sessions.size() != tracks.size())
    throw std::invalid_argument("state_summary needs one track per session");

  struct SessionValues {
    double dur = kNan, keys = kNan, ts = kNan, tasks = kNan;
    double keys_per_ts = kNan, keys_per_task = kNan;
  };
  std::map<std::string, std::vector<SessionValues>> by_lang;

  for (std::size_t si = 0; si < sessions.size(); ++si) {
    const auto& cut = sessions[si];
    const auto& track = tracks[si];
    std::vector<std::size_t> instance_regions;
    for (std::size_t r = 0; r < track.regions.size(); ++r)
      if (track.regions[r].state == state) instance_regions.push_back(r);
    if (instance_regions.empty()) continue;

    std::vector<std::size_t> keys_per_region(track.regions.size(), 0);
    for (std::size_t r : cut.key_regions) ++keys_per_region[r];
    std::vector<std::size_t> ts_per_region(track.regions.size(), 0);
    for (const auto& seg : cut.tree.segments) ++ts_per_region[cut.key_regions[seg.first_key]];
    std::vector<std::size_t> tasks_per_region(track.regions.size(), 0);
    for (const auto& task : cut.tree.tasks) ++tasks_per_region[cut.key_regions[task.first_key]];

    double dur_sum = 0, key_sum = 0, ts_sum = 0, task_sum = 0;
    for (std::size_t r : instance_regions) {
      dur_sum += static_cast<double>(track.regions[r].end_ms - track.regions[r].start_ms);
      key_sum += static_cast<double>(keys_per_region[r]);
      ts_sum += static_cast<double>(ts_per_region[r]);
      task_sum += static_cast<double>(tasks_per_region[r]);
    }
    const double inst = static_cast<double>(instance_regions.size());
    SessionValues v;
    v.dur = dur_sum / inst;
    v.keys = key_sum / inst;
    v.ts = ts_sum / inst;
    v.tasks = task_sum / inst;
    v.keys_per_ts = ts_sum > 0 ? key_sum / ts_sum : kNan;
    v.keys_per_task = task_sum > 0 ? key_sum / task_sum : kNan;
    by_lang[cut.tree.target_lang].push_back(v);
  }

  if (by_lang.empty())
    throw std::invalid_argument("state " + state_name(state) + " absent from every session");

  report::ReportTable t;
  t.name = "state_summary_" + state_name(state);
  t.columns.push_back({"language", report::ColType::text, ""});
  t.columns.push_back({"stat", report::ColType::text, ""});
  t.columns.push_back({"dur", report::ColType::real, "ms"});
  t.columns.push_back({"keys", report::ColType::real, ""});
  t.columns.push_back({"ts", report::ColType::real, ""});
  t.columns.push_back({"tasks", report::ColType::real, ""});
  t.columns.push_back({"keys_per_ts", report::ColType::real, ""});
  t.columns.push_back({"keys_per_task", report::ColType::real, ""});

  auto aggregate = [](const std::vector<SessionValues>& vs, auto pick) {
    std::vector<double> defined;
    for (const auto& v : vs) {
      const double x = pick(v);
      if (!std::isnan(x)) defined.push_back(x);
    }
    struct Agg {
      double mean = kNan, min = kNan, max = kNan;
    } a;
    if (defined.empty()) return a;
    a.mean = stats::mean(defined);
    a.min = *std::min_element(defined.begin(), defined.end());
    a.max = *std::max_element(defined.begin(), defined.end());
    return a;
  };

  for (const auto& [lang, vs] : by_lang) {
    const auto dur = aggregate(vs, [](const SessionValues& v) { return v.dur; });
    const auto keys = aggregate(vs, [](const SessionValues& v) { return v.keys; });
    const auto ts = aggregate(vs, [](const SessionValues& v) { return v.ts; });
    const auto tasks = aggregate(vs, [](const SessionValues& v) { return v.tasks; });
    const auto kpt = aggregate(vs, [](const SessionValues& v) { return v.keys_per_ts; });
    const auto kpk = aggregate(vs, [](const SessionValues& v) { return v.keys_per_task; });
    t.rows.push_back({lang, std::string("mean"), dur.mean, keys.mean, ts.mean, tasks.mean,
                      kpt.mean, kpk.mean});
    t.rows.push_back(
        {lang, std::string("min"), dur.min, keys.min, ts.min, tasks.min, kpt.min, kpk.min});
    t.rows.push_back(
        {lang, std::string("max"), dur.max, keys.max, ts.max, tasks.max, kpt.max, kpk.max});
  }
  t.provenance.operation = "state_summary";
  t.provenance.parameters = {{"state", state_name(state)},
                             {"sessions", std::to_string(sessions.size())}};
  return t;
}

report::ReportTable pause_fraction_by_state(std::span<const CutResult> sessions,
                                            std::span<const StateTrack> tracks) {
  if (sessions.size() != tracks.size())
    throw std::invalid_argument("pause_fraction_by_state needs one track per session");

  // per language, per state: total region time and clipped pause time
  std::map<std::string, std::array<std::pair<int64_t, int64_t>, 3>> totals;
  for (std::size_t si = 0; si < sessions.size(); ++si) {
    const auto& cut = sessions[si];
    const auto& track = tracks[si];
    auto& per_state = totals[cut.tree.target_lang];
    for (const auto& r : track.regions)
      per_state[state_index(r.state)].first += r.end_ms - r.start_ms;

    const double tsp = cut.tree.profile.tsp;
    const auto& times = cut.tree.key_times;
    for (std::size_t i = 1; i < times.size(); ++i) {
      const int64_t gap = times[i] - times[i - 1];
      if (static_cast<double>(gap) < tsp) continue;
      for (const auto& r : track.regions) {
        const int64_t lo = std::max(times[i - 1], r.start_ms);
        const int64_t hi = std::min(times[i], r.end_ms);
        if (hi > lo) per_state[state_index(r.state)].second += hi - lo;
      }
    }
  }

  report::ReportTable t;
  t.name = "pause_fraction_by_state";
  t.columns.push_back({"language", report::ColType::text, ""});
  t.columns.push_back({"state", report::ColType::text, ""});
  t.columns.push_back({"state_dur", report::ColType::integer, "ms"});
  t.columns.push_back({"pause_dur", report::ColType::integer, "ms"});
  t.columns.push_back({"fraction", report::ColType::real, ""});
  for (const auto& [lang, per_state] : totals) {
    for (HofState st : kStateOrder) {
      const auto& [state_ms, pause_ms] = per_state[state_index(st)];
      if (state_ms == 0) continue;
      t.rows.push_back({lang, state_name(st), state_ms, pause_ms,
                        static_cast<double>(pause_ms) / static_cast<double>(state_ms)});
    }
  }
  t.provenance.operation = "pause_fraction_by_state";
  t.provenance.parameters = {{"sessions", std::to_string(sessions.size())}};
  return t;
}

report::ReportTable label_share_correlations(std::span<const CutResult> sessions,
                                             std::size_t top) {
  // label counts per (state letter, language) series; only F and H carry
  // enough segments to correlate.
  std::map<std::string, std::map<std::string, std::size_t>> series;  // key "F:lang"
  std::map<std::string, std::size_t> lang_segments;
  for (const auto& s : sessions) {
    lang_segments[s.tree.target_lang] += s.tree.segments.size();
    for (const auto& seg : s.tree.segments) {
      const HofState st = s.key_states[seg.first_key];
      if (st == HofState::orientation) continue;
      ++series[state_name(st) + ":" + s.tree.target_lang][seg.label];
    }
  }

  std::vector<std::string> langs;
  {
    std::vector<std::pair<std::string, std::size_t>> ranked(lang_segments.begin(),
                                                            lang_segments.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    for (const auto& [lang, cnt] : ranked) langs.push_back(lang);
  }

  std::vector<std::pair<std::string, std::string>> pairs;
  if (langs.size() >= 2) {
    const std::string& l1 = langs[0];
    const std::string& l2 = langs[1];
    pairs.emplace_back("F:" + l1, "F:" + l2);
    pairs.emplace_back("H:" + l1, "H:" + l2);
    pairs.emplace_back("F:" + l1, "H:" + l2);
    pairs.emplace_back("F:" + l2, "H:" + l1);
  } else if (langs.size() == 1) {
    pairs.emplace_back("F:" + langs[0], "H:" + langs[0]);
  }

  report::ReportTable t;
  t.name = "label_share_correlations";
  t.columns.push_back({"series_a", report::ColType::text, ""});
  t.columns.push_back({"series_b", report::ColType::text, ""});
  t.columns.push_back({"n", report::ColType::integer, ""});
  t.columns.push_back({"r", report::ColType::real, ""});
  t.columns.push_back({"p_value", report::ColType::real, ""});
  t.columns.push_back({"method", report::ColType::text, ""});

  for (const auto& [a, b] : pairs) {
    const auto& ca = series[a];
    const auto& cb = series[b];
    double ta = 0, tb = 0;
    for (const auto& [label, c] : ca) ta += static_cast<double>(c);
    for (const auto& [label, c] : cb) tb += static_cast<double>(c);

    std::map<std::string, std::size_t> combined;
    for (const auto& [label, c] : ca) combined[label] += c;
    for (const auto& [label, c] : cb) combined[label] += c;
    std::vector<std::pair<std::string, std::size_t>> ranked(combined.begin(), combined.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
      if (x.second != y.second) return x.second > y.second;
      return x.first < y.first;
    });
    if (ranked.size() > top) ranked.resize(top);

    std::vector<double> xs, ys;
    for (const auto& [label, cnt] : ranked) {
      const auto ia = ca.find(label);
      const auto ib = cb.find(label);
      xs.push_back(ta > 0 ? 100.0 * (ia == ca.end() ? 0.0 : static_cast<double>(ia->second)) / ta
                          : 0.0);
      ys.push_back(tb > 0 ? 100.0 * (ib == cb.end() ? 0.0 : static_cast<double>(ib->second)) / tb
                          : 0.0);
    }

    if (xs.size() < 3) {
      t.rows.push_back({a, b, static_cast<int64_t>(xs.size()), kNan, kNan,
                        std::string("undefined")});
      continue;
    }
    try {
      const stats::TestResult r = stats::pearson_correlation(xs, ys);
      t.rows.push_back({a, b, static_cast<int64_t>(xs.size()), r.statistic, r.p_value,
                        std::string(stats::method_name(r.method))});
    } catch (const std::invalid_argument&) {
      t.rows.push_back({a, b, static_cast<int64_t>(xs.size()), kNan, kNan,
                        std::string("undefined")});
    }
  }
  t.provenance.operation = "label_share_correlations";
  t.provenance.parameters = {{"sessions", std::to_string(sessions.size())},
                             {"top", std::to_string(top)}};
  return t;
}

// -- activity units -----------------------------------------------------------

std::string au_code(AuType t) {
  switch (t) {
    case AuType::t1:
      return "T1";
    case AuType::t2:
      return "T2";
    case AuType::t4:
      return "T4";
    case AuType::t5:
      return "T5";
    case AuType::t6:
      return "T6";
    case AuType::t8:
      return "T8";
  }
  return "T8";
}

std::optional<AuType> au_from_code(std::string_view code) {
  if (code == "T1") return AuType::t1;
  if (code == "T2") return AuType::t2;
  if (code == "T4") return AuType::t4;
  if (code == "T5") return AuType::t5;
  if (code == "T6") return AuType::t6;
  if (code == "T8") return AuType::t8;
  return std::nullopt;
}

std::string au_color(AuType t) {
  switch (t) {
    case AuType::t1:
      return "blue";
    case AuType::t2:
      return "lightgreen";
    case AuType::t4:
      return "yellow";
    case AuType::t5:
      return "red";
    case AuType::t6:
      return "darkgreen";
    case AuType::t8:
      return "black";
  }
  return "black";
}

namespace {

struct Interval {
  int64_t start = 0;
  int64_t end = 0;
};

void merge_equal_neighbors(std::vector<ActivityUnit>& units) {
  std::vector<ActivityUnit> merged;
  for (const auto& u : units) {
    if (!merged.empty() && merged.back().type == u.type && merged.back().end_ms == u.start_ms)
      merged.back().end_ms = u.end_ms;
    else
      merged.push_back(u);
  }
  units.swap(merged);
}

}  // namespace

std::vector<ActivityUnit> derive_activity_units(const SessionLog& s,
                                                const iki::TranslatorProfile& profile,
                                                const AuParams& params) {
  if (s.keys.empty() && s.fixations.empty()) return {};
  const int64_t span_a = s.span_start();
  const int64_t span_b = s.span_end();
  if (span_b <= span_a) return {};

  // Production chains: runs of keystrokes whose gaps stay below tsp.
  std::vector<Interval> chains;
  for (const auto& k : s.keys) {
    if (!chains.empty() && static_cast<double>(k.time_ms - chains.back().end) < profile.tsp)
      chains.back().end = k.time_ms;
    else
      chains.push_back({k.time_ms, k.time_ms});
  }

  std::vector<int64_t> bounds = {span_a, span_b};
  for (const auto& c : chains) {
    bounds.push_back(c.start);
    bounds.push_back(c.end);
  }
  for (const auto& f : s.fixations) {
    bounds.push_back(f.time_ms);
    bounds.push_back(f.time_ms + f.duration_ms);
  }
  std::sort(bounds.begin(), bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
  bounds.erase(std::remove_if(bounds.begin(), bounds.end(),
                              [&](int64_t b) { return b < span_a || b > span_b; }),
               bounds.end());

  // Sweep: at slice [u,v), active intervals are those with start <= u < end.
  std::size_t chain_i = 0;
  std::size_t fix_i = 0;
  std::multiset<std::pair<int64_t, int64_t>> active_s;  // (end, duration)
  std::multiset<std::pair<int64_t, int64_t>> active_t;
  std::multiset<int64_t> dur_s, dur_t;
  std::multiset<int64_t> chain_ends;

  struct RawSlice {
    int64_t start, end;
    bool idle;
    AuType type;
  };
  std::vector<RawSlice> slices;

  for (std::size_t bi = 0; bi + 1 < bounds.size(); ++bi) {
    const int64_t u = bounds[bi];
    const int64_t v = bounds[bi + 1];
    while (chain_i < chains.size() && chains[chain_i].start <= u) {
      if (chains[chain_i].end > u) chain_ends.insert(chains[chain_i].end);
      ++chain_i;
    }
    while (!chain_ends.empty() && *chain_ends.begin() <= u) chain_ends.erase(chain_ends.begin());
    while (fix_i < s.fixations.size() && s.fixations[fix_i].time_ms <= u) {
      const auto& f = s.fixations[fix_i];
      const int64_t end = f.time_ms + f.duration_ms;
      if (end > u) {
        if (f.window == GazeWindow::source) {
          active_s.insert({end, f.duration_ms});
          dur_s.insert(f.duration_ms);
        } else {
          active_t.insert({end, f.duration_ms});
          dur_t.insert(f.duration_ms);
        }
      }
      ++fix_i;
    }
    while (!active_s.empty() && active_s.begin()->first <= u) {
      dur_s.erase(dur_s.find(active_s.begin()->second));
      active_s.erase(active_s.begin());
    }
    while (!active_t.empty() && active_t.begin()->first <= u) {
      dur_t.erase(dur_t.find(active_t.begin()->second));
      active_t.erase(active_t.begin());
    }

    const bool producing = !chain_ends.empty();
    const bool reading_s = !dur_s.empty();
    const bool reading_t = !dur_t.empty();
    RawSlice slice{u, v, false, AuType::t8};
    if (producing) {
      if (reading_s && reading_t)
        slice.type = *dur_s.rbegin() >= *dur_t.rbegin() ? AuType::t5 : AuType::t6;
      else if (reading_s)
        slice.type = AuType::t5;
      else if (reading_t)
        slice.type = AuType::t6;
      else
        slice.type = AuType::t4;
    } else if (reading_s || reading_t) {
      if (reading_s && reading_t)
        slice.type = *dur_s.rbegin() >= *dur_t.rbegin() ? AuType::t1 : AuType::t2;
      else
        slice.type = reading_s ? AuType::t1 : AuType::t2;
    } else {
      slice.idle = true;
    }
    slices.push_back(slice);
  }

  // Coalesce idle runs, then decide t8 vs absorb-into-neighbor.
  std::vector<RawSlice> coalesced;
  for (const auto& sl : slices) {
    if (!coalesced.empty() && coalesced.back().idle && sl.idle)
      coalesced.back().end = sl.end;
    else
      coalesced.push_back(sl);
  }

  std::vector<ActivityUnit> units;
  std::size_t pending_follow = 0;  // leading idle time to prepend to the next unit
  int64_t pending_start = span_a;
  for (const auto& sl : coalesced) {
    if (sl.idle) {
      if (sl.end - sl.start > params.idle_threshold_ms) {
        units.push_back({sl.start, sl.end, AuType::t8});
      } else if (!units.empty()) {
        units.back().end_ms = sl.end;
      } else {
        pending_follow = 1;
        pending_start = sl.start;
      }
      continue;
    }
    ActivityUnit u{sl.start, sl.end, sl.type};
    if (pending_follow) {
      u.start_ms = pending_start;
      pending_follow = 0;
    }
    units.push_back(u);
  }
  if (units.empty()) return {};
  merge_equal_neighbors(units);

  // Slivers below the minimum duration merge into the longer neighbor.
  bool changed = true;
  while (changed && units.size() >= 2) {
    changed = false;
    for (std::size_t i = 0; i < units.size(); ++i) {
      if (units[i].end_ms - units[i].start_ms >= params.min_duration_ms) continue;
      const bool has_prev = i > 0;
      const bool has_next = i + 1 < units.size();
      bool into_prev;
      if (!has_prev)
        into_prev = false;
      else if (!has_next)
        into_prev = true;
      else {
        const int64_t dp = units[i - 1].end_ms - units[i - 1].start_ms;
        const int64_t dn = units[i + 1].end_ms - units[i + 1].start_ms;
        into_prev = dp >= dn;
      }
      if (into_prev)
        units[i - 1].end_ms = units[i].end_ms;
      else
        units[i + 1].start_ms = units[i].start_ms;
      units.erase(units.begin() + static_cast<std::ptrdiff_t>(i));
      merge_equal_neighbors(units);
      changed = true;
      break;
    }
  }
  return units;
}

std::string serialize_activity_units(std::span<const ActivityUnit> aus) {
  std::ostringstream out;
  out << "start\tend\tstate\n";
  for (const auto& u : aus) out << u.start_ms << "\t" << u.end_ms << "\t" << au_code(u.type) << "\n";
  return out.str();
}

std::vector<ActivityUnit> parse_activity_units(const std::string& text) {
  std::vector<ActivityUnit> aus;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#' || line == "start\tend\tstate") continue;
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
      const std::size_t tab = line.find('\t', pos);
      fields.push_back(line.substr(pos, tab == std::string::npos ? tab : tab - pos));
      if (tab == std::string::npos) break;
      pos = tab + 1;
    }
    if (fields.size() != 3) throw io::ParseError(line_no, "expected 3 tab-separated fields");
    int64_t start = 0, end = 0;
    try {
      start = std::stoll(fields[0]);
      end = std::stoll(fields[1]);
    } catch (const std::exception&) {
      throw io::ParseError(line_no, "bad activity unit times");
    }
    if (end <= start) throw io::ParseError(line_no, "activity unit must have end > start");
    const auto type = au_from_code(fields[2]);
    if (!type) throw io::ParseError(line_no, "unknown activity unit type '" + fields[2] + "'");
    aus.push_back({start, end, *type});
  }
  std::sort(aus.begin(), aus.end(),
            [](const ActivityUnit& a, const ActivityUnit& b) { return a.start_ms < b.start_ms; });
  for (std::size_t i = 1; i < aus.size(); ++i)
    if (aus[i].start_ms < aus[i - 1].end_ms) throw io::ParseError(0, "activity units overlap");
  return aus;
}

// -- draft state suggestions --------------------------------------------------

std::vector<SuggestedState> suggest_hof_states(const SessionLog& s,
                                               const seg::SegmentationTree& tree,
                                               std::span<const ActivityUnit> aus,
                                               const SuggestParams& params) {
  std::vector<SuggestedState> out;
  if (s.keys.empty() && s.fixations.empty()) return out;
  const int64_t span_a = s.span_start();
  const int64_t span_b = s.span_end() + 1;  // end-exclusive cover includes the last event

  struct Candidate {
    int64_t start, end;
    HofState state;
    double confidence;
  };
  std::vector<Candidate> candidates;

  // Orientation: production-free AU runs, long enough and dominated by ST
  // reading.
  std::size_t i = 0;
  while (i < aus.size()) {
    const auto passive = [](AuType t) {
      return t == AuType::t1 || t == AuType::t2 || t == AuType::t8;
    };
    if (!passive(aus[i].type)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    int64_t t1_time = 0;
    while (j < aus.size() && passive(aus[j].type)) {
      if (aus[j].type == AuType::t1) t1_time += aus[j].end_ms - aus[j].start_ms;
      ++j;
    }
    const int64_t run_start = aus[i].start_ms;
    const int64_t run_end = aus[j - 1].end_ms;
    const int64_t run_dur = run_end - run_start;
    if (run_dur >= params.orientation_min_ms &&
        static_cast<double>(t1_time) >= params.t1_dominance * static_cast<double>(run_dur)) {
      candidates.push_back({run_start, run_end, HofState::orientation,
                            static_cast<double>(t1_time) / static_cast<double>(run_dur)});
    }
    i = j;
  }

  // Hesitation: tsp-class pauses whose neighboring tasks are deletion-heavy.
  std::vector<std::size_t> task_of_key(tree.key_times.size(), 0);
  for (std::size_t ti = 0; ti < tree.tasks.size(); ++ti)
    for (std::size_t k = tree.tasks[ti].first_key; k <= tree.tasks[ti].last_key; ++k)
      task_of_key[k] = ti;
  for (std::size_t k = 1; k < tree.key_times.size(); ++k) {
    const int64_t gap = tree.key_times[k] - tree.key_times[k - 1];
    if (static_cast<double>(gap) < tree.profile.tsp) continue;
    const auto& before = tree.tasks[task_of_key[k - 1]];
    const auto& after = tree.tasks[task_of_key[k]];
    std::size_t dels = 0, total = 0;
    for (std::size_t kk = before.first_key; kk <= before.last_key; ++kk, ++total)
      if (tree.key_kinds[kk] == KeyKind::deletion) ++dels;
    for (std::size_t kk = after.first_key; kk <= after.last_key; ++kk, ++total)
      if (tree.key_kinds[kk] == KeyKind::deletion) ++dels;
    const double share = total > 0 ? static_cast<double>(dels) / static_cast<double>(total) : 0.0;
    if (share >= params.deletion_share)
      candidates.push_back({before.start_ms, after.end_ms, HofState::hesitation, share});
  }

  // Paint: H over O over the F default, on the elementary timeline.
  std::vector<int64_t> bounds = {span_a, span_b};
  for (auto& c : candidates) {
    c.start = std::clamp(c.start, span_a, span_b);
    c.end = std::clamp(c.end == s.span_end() ? span_b : c.end, span_a, span_b);
    if (c.end > c.start) {
      bounds.push_back(c.start);
      bounds.push_back(c.end);
    }
  }
  std::sort(bounds.begin(), bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());

  int64_t produced = 0;
  for (const auto& u : aus)
    if (u.type == AuType::t4 || u.type == AuType::t5 || u.type == AuType::t6)
      produced += u.end_ms - u.start_ms;
  const int64_t au_total = aus.empty() ? 0 : aus.back().end_ms - aus.front().start_ms;
  const double flow_conf =
      au_total > 0
          ? std::clamp(static_cast<double>(produced) / static_cast<double>(au_total), 0.05, 1.0)
          : 0.5;

  std::vector<SuggestedState> painted;
  for (std::size_t bi = 0; bi + 1 < bounds.size(); ++bi) {
    const int64_t u = bounds[bi];
    const int64_t v = bounds[bi + 1];
    HofState state = HofState::flow;
    double conf = flow_conf;
    for (const auto& c : candidates) {
      if (c.state != HofState::orientation) continue;
      if (c.start <= u && c.end >= v && (state != HofState::orientation || c.confidence > conf)) {
        state = HofState::orientation;
        conf = c.confidence;
      }
    }
    for (const auto& c : candidates) {
      if (c.state != HofState::hesitation) continue;
      if (c.start <= u && c.end >= v) {
        if (state != HofState::hesitation) {
          state = HofState::hesitation;
          conf = c.confidence;
        } else {
          conf = std::max(conf, c.confidence);
        }
      }
    }
    SuggestedState ss;
    ss.annotation = {u, v, state};
    ss.confidence = conf;
    painted.push_back(ss);
  }

  for (const auto& p : painted) {
    if (!out.empty() && out.back().annotation.state == p.annotation.state &&
        out.back().annotation.end_ms == p.annotation.start_ms) {
      out.back().annotation.end_ms = p.annotation.end_ms;
      out.back().confidence = std::max(out.back().confidence, p.confidence);
    } else {
      out.push_back(p);
    }
  }
  return out;
}

}  // namespace segflow::hof
