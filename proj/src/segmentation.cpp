#include "segflow/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "segflow/stats.hpp"

namespace segflow::seg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_keys(std::span<const KeyEvent> keys, const char* who) {
  if (keys.empty()) throw std::invalid_argument(std::string(who) + ": no keystrokes");
}

void require_valid_profile(const iki::TranslatorProfile& p, const char* who) {
  if (!p.valid)
    throw std::invalid_argument(std::string(who) + ": profile '" + p.translator_id +
                                "' is not valid (tsp must exceed effective rsp)");
}

double segment_mean_iki(const TaskSegment& ts, std::span<const KeyEvent> keys) {
  if (ts.key_count < 2) return kNaN;
  double sum = 0.0;
  for (std::size_t i = ts.first_key + 1; i <= ts.last_key; ++i)
    sum += static_cast<double>(keys[i].time_ms - keys[i - 1].time_ms);
  return sum / static_cast<double>(ts.key_count - 1);
}

bool is_a_only(const std::string& label) {
  return !label.empty() &&
         std::all_of(label.begin(), label.end(), [](char c) { return c == 'A'; });
}

}  // namespace

char task_label_letter(TaskLabel l) {
  switch (l) {
    case TaskLabel::A: return 'A';
    case TaskLabel::D: return 'D';
    case TaskLabel::C: return 'C';
  }
  return 'A';
}

std::vector<MotorProgram> split_motor_programs(std::span<const KeyEvent> keys,
                                               int64_t delay_threshold_ms) {
  require_keys(keys, "split_motor_programs");
  std::vector<MotorProgram> out;
  std::size_t first = 0;
  for (std::size_t i = 1; i <= keys.size(); ++i) {
    const bool cut = i == keys.size() || keys[i].time_ms - keys[i - 1].time_ms >= delay_threshold_ms;
    if (!cut) continue;
    out.push_back({first, i - 1, keys[first].time_ms, keys[i - 1].time_ms});
    first = i;
  }
  return out;
}

TaskLabel label_task(std::span<const KeyKind> kinds, std::size_t first_key,
                     std::size_t last_key) {
  bool any_ins = false, any_del = false;
  for (std::size_t i = first_key; i <= last_key; ++i) {
    if (kinds[i] == KeyKind::insertion) any_ins = true;
    else any_del = true;
  }
  if (any_ins && any_del) return TaskLabel::C;
  return any_del ? TaskLabel::D : TaskLabel::A;
}

std::vector<Task> split_tasks(std::span<const KeyEvent> keys,
                              const iki::TranslatorProfile& profile) {
  require_keys(keys, "split_tasks");
  require_valid_profile(profile, "split_tasks");
  std::vector<KeyKind> kinds(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) kinds[i] = keys[i].kind;

  std::vector<Task> out;
  std::size_t first = 0;
  std::optional<int64_t> pause;  // pause preceding the task being built
  for (std::size_t i = 1; i <= keys.size(); ++i) {
    const int64_t iki =
        i < keys.size() ? keys[i].time_ms - keys[i - 1].time_ms : 0;
    const bool cut = i == keys.size() || static_cast<double>(iki) >= profile.rsp_effective;
    if (!cut) continue;
    Task t;
    t.first_key = first;
    t.last_key = i - 1;
    t.start_ms = keys[first].time_ms;
    t.end_ms = keys[i - 1].time_ms;
    t.preceding_pause_ms = pause;
    t.label = label_task(kinds, t.first_key, t.last_key);
    out.push_back(t);
    if (i < keys.size()) pause = iki;
    first = i;
  }
  return out;
}

std::vector<TaskSegment> split_task_segments(std::span<const Task> tasks,
                                             std::span<const KeyEvent> keys,
                                             const iki::TranslatorProfile& profile) {
  if (tasks.empty()) throw std::invalid_argument("split_task_segments: no tasks");
  std::vector<TaskSegment> out;
  std::size_t first = 0;
  for (std::size_t i = 1; i <= tasks.size(); ++i) {
    const bool cut = i == tasks.size() ||
                     (tasks[i].preceding_pause_ms &&
                      static_cast<double>(*tasks[i].preceding_pause_ms) >= profile.tsp);
    if (!cut) continue;
    TaskSegment ts;
    ts.first_task = first;
    ts.last_task = i - 1;
    for (std::size_t k = first; k < i; ++k) ts.label.push_back(task_label_letter(tasks[k].label));
    ts.start_ms = tasks[first].start_ms;
    ts.end_ms = tasks[i - 1].end_ms;
    ts.preceding_pause_ms = tasks[first].preceding_pause_ms;
    ts.first_key = tasks[first].first_key;
    ts.last_key = tasks[i - 1].last_key;
    ts.key_count = ts.last_key - ts.first_key + 1;
    ts.mean_internal_iki = segment_mean_iki(ts, keys);
    out.push_back(std::move(ts));
    first = i;
  }
  return out;
}

SegmentationTree build_segmentation(const SessionLog& s, const iki::TranslatorProfile& profile,
                                    int64_t delay_threshold_ms) {
  require_keys(s.keys, "build_segmentation");
  require_valid_profile(profile, "build_segmentation");
  SegmentationTree tree;
  tree.study_id = s.study_id;
  tree.session_id = s.session_id;
  tree.translator_id = s.translator_id;
  tree.source_lang = s.source_lang;
  tree.target_lang = s.target_lang;
  tree.profile = profile;
  tree.key_times.reserve(s.keys.size());
  tree.key_kinds.reserve(s.keys.size());
  for (const auto& k : s.keys) {
    tree.key_times.push_back(k.time_ms);
    tree.key_kinds.push_back(k.kind);
  }
  tree.programs = split_motor_programs(s.keys, delay_threshold_ms);
  tree.tasks = split_tasks(s.keys, profile);
  tree.segments = split_task_segments(tree.tasks, s.keys, profile);
  return tree;
}

report::ReportTable corpus_ts_summary(std::span<const SegmentationTree> trees) {
  if (trees.empty()) throw std::invalid_argument("corpus_ts_summary: no trees");

  struct LabelAgg {
    std::size_t count = 0;
    std::map<std::string, std::size_t> count_by_lang;
    double dur_sum = 0.0;
    double iki_sum = 0.0;
    std::size_t iki_n = 0;
    std::size_t keys = 0;
    std::size_t tasks = 0;
  };
  std::map<std::string, LabelAgg> agg;
  std::map<std::string, std::size_t> ts_by_lang;
  for (const auto& tree : trees) {
    for (const auto& ts : tree.segments) {
      auto& a = agg[ts.label];
      ++a.count;
      ++a.count_by_lang[tree.target_lang];
      ++ts_by_lang[tree.target_lang];
      a.dur_sum += static_cast<double>(ts.end_ms - ts.start_ms);
      if (ts.key_count >= 2) {
        a.iki_sum += ts.mean_internal_iki * static_cast<double>(ts.key_count - 1);
        a.iki_n += ts.key_count - 1;
      }
      a.keys += ts.key_count;
      a.tasks += ts.last_task - ts.first_task + 1;
    }
  }

  std::vector<std::string> langs;
  for (const auto& [lang, n] : ts_by_lang) langs.push_back(lang);

  report::ReportTable t;
  t.name = "ts_summary";
  t.columns.push_back({"label", report::ColType::text, ""});
  t.columns.push_back({"count", report::ColType::integer, ""});
  for (const auto& lang : langs)
    t.columns.push_back({"pct_" + lang, report::ColType::real, "%"});
  t.columns.push_back({"mean_dur", report::ColType::real, "ms"});
  t.columns.push_back({"mean_iki", report::ColType::real, "ms"});
  t.columns.push_back({"keys_per_task", report::ColType::real, ""});

  std::vector<std::pair<std::string, const LabelAgg*>> order;
  for (const auto& [label, a] : agg) order.emplace_back(label, &a);
  std::sort(order.begin(), order.end(), [](const auto& x, const auto& y) {
    if (x.second->count != y.second->count) return x.second->count > y.second->count;
    return x.first < y.first;
  });

  for (const auto& [label, a] : order) {
    report::Row row;
    row.emplace_back(label);
    row.emplace_back(static_cast<int64_t>(a->count));
    for (const auto& lang : langs) {
      const auto it = a->count_by_lang.find(lang);
      const double pct = it == a->count_by_lang.end()
                             ? 0.0
                             : 100.0 * static_cast<double>(it->second) /
                                   static_cast<double>(ts_by_lang.at(lang));
      row.emplace_back(pct);
    }
    row.emplace_back(a->dur_sum / static_cast<double>(a->count));
    row.emplace_back(a->iki_n ? a->iki_sum / static_cast<double>(a->iki_n) : kNaN);
    row.emplace_back(static_cast<double>(a->keys) / static_cast<double>(a->tasks));
    t.rows.push_back(std::move(row));
  }
  t.provenance.operation = "corpus_ts_summary";
  t.provenance.parameters = {{"trees", std::to_string(trees.size())}};
  return t;
}

report::ReportTable ts_overall(std::span<const SegmentationTree> trees) {
  if (trees.empty()) throw std::invalid_argument("ts_overall: no trees");

  std::map<std::string, std::size_t> label_counts;
  std::map<std::string, std::map<std::string, std::size_t>> lang_label_counts;
  std::vector<double> durations;
  std::vector<double> tasks_per_ts;
  std::size_t total = 0;
  for (const auto& tree : trees) {
    for (const auto& ts : tree.segments) {
      ++total;
      ++label_counts[ts.label];
      ++lang_label_counts[tree.target_lang][ts.label];
      durations.push_back(static_cast<double>(ts.end_ms - ts.start_ms));
      tasks_per_ts.push_back(static_cast<double>(ts.last_task - ts.first_task + 1));
    }
  }

  std::vector<std::pair<std::string, std::size_t>> by_freq(label_counts.begin(),
                                                           label_counts.end());
  std::sort(by_freq.begin(), by_freq.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  std::size_t rare_labels = 0, rare_ts = 0;
  for (const auto& [label, n] : by_freq)
    if (n < 10) {
      ++rare_labels;
      rare_ts += n;
    }
  std::size_t top20_ts = 0;
  for (std::size_t i = 0; i < by_freq.size() && i < 20; ++i) top20_ts += by_freq[i].second;

  // labels collected greedily until they cover at least 90% of all segments
  std::set<std::string> head_labels;
  std::size_t head_ts = 0;
  for (const auto& [label, n] : by_freq) {
    if (static_cast<double>(head_ts) >= 0.9 * static_cast<double>(total)) break;
    head_labels.insert(label);
    head_ts += n;
  }
  std::vector<double> head_durations;
  std::vector<double> head_tasks;
  for (const auto& tree : trees)
    for (const auto& ts : tree.segments)
      if (head_labels.count(ts.label)) {
        head_durations.push_back(static_cast<double>(ts.end_ms - ts.start_ms));
        head_tasks.push_back(static_cast<double>(ts.last_task - ts.first_task + 1));
      }

  // share-of-language correlation across the two largest languages
  double share_r = kNaN;
  if (lang_label_counts.size() >= 2) {
    std::vector<std::pair<std::size_t, std::string>> langs;
    for (const auto& [lang, counts] : lang_label_counts) {
      std::size_t n = 0;
      for (const auto& [label, c] : counts) n += c;
      langs.emplace_back(n, lang);
    }
    std::sort(langs.rbegin(), langs.rend());
    const auto& la = lang_label_counts.at(langs[0].second);
    const auto& lb = lang_label_counts.at(langs[1].second);
    const double na = static_cast<double>(langs[0].first);
    const double nb = static_cast<double>(langs[1].first);
    std::set<std::string> labels;
    for (const auto& [label, c] : la) labels.insert(label);
    for (const auto& [label, c] : lb) labels.insert(label);
    std::vector<double> xa, xb;
    for (const auto& label : labels) {
      const auto ia = la.find(label);
      const auto ib = lb.find(label);
      xa.push_back(ia == la.end() ? 0.0 : 100.0 * static_cast<double>(ia->second) / na);
      xb.push_back(ib == lb.end() ? 0.0 : 100.0 * static_cast<double>(ib->second) / nb);
    }
    if (labels.size() >= 3) {
      try {
        share_r = stats::pearson_correlation(xa, xb).statistic;
      } catch (const std::invalid_argument&) {
        share_r = kNaN;  // constant shares carry no correlation
      }
    }
  }

  report::ReportTable t;
  t.name = "ts_overall";
  t.columns = {{"metric", report::ColType::text, ""}, {"value", report::ColType::real, ""}};
  const auto add = [&](const char* metric, double value) {
    t.rows.push_back({std::string(metric), value});
  };
  add("ts_count", static_cast<double>(total));
  add("distinct_labels", static_cast<double>(label_counts.size()));
  add("labels_below_10", static_cast<double>(rare_labels));
  add("ts_with_rare_labels", static_cast<double>(rare_ts));
  add("rare_label_ts_share", static_cast<double>(rare_ts) / static_cast<double>(total));
  add("top20_label_ts_share", static_cast<double>(top20_ts) / static_cast<double>(total));
  add("mean_dur_ms", stats::mean(durations));
  add("median_dur_ms", stats::median(durations));
  add("tasks_per_ts_mean", stats::mean(tasks_per_ts));
  add("tasks_per_ts_median", stats::median(tasks_per_ts));
  add("tasks_per_ts_max", *std::max_element(tasks_per_ts.begin(), tasks_per_ts.end()));
  add("head90_mean_dur_ms", head_durations.empty() ? kNaN : stats::mean(head_durations));
  add("head90_median_dur_ms", head_durations.empty() ? kNaN : stats::median(head_durations));
  add("head90_tasks_per_ts_mean", head_tasks.empty() ? kNaN : stats::mean(head_tasks));
  add("label_share_pearson_r", share_r);
  t.provenance.operation = "ts_overall";
  t.provenance.parameters = {{"trees", std::to_string(trees.size())}};
  return t;
}

AOnlyCoverage a_only_coverage(std::span<const SegmentationTree> trees) {
  if (trees.empty()) throw std::invalid_argument("a_only_coverage: no trees");
  std::size_t ts_total = 0, ts_a = 0, keys_total = 0, keys_a = 0;
  for (const auto& tree : trees)
    for (const auto& ts : tree.segments) {
      ++ts_total;
      keys_total += ts.key_count;
      if (is_a_only(ts.label)) {
        ++ts_a;
        keys_a += ts.key_count;
      }
    }
  AOnlyCoverage c;
  c.ts_fraction = static_cast<double>(ts_a) / static_cast<double>(ts_total);
  c.key_fraction = static_cast<double>(keys_a) / static_cast<double>(keys_total);
  return c;
}

report::ReportTable hierarchy_correlations(std::span<const SegmentationTree> trees) {
  if (trees.empty()) throw std::invalid_argument("hierarchy_correlations: no trees");

  struct TranslatorAgg {
    std::size_t tasks = 0;
    std::size_t keys = 0;
    std::size_t segments = 0;
    double rsp = 0.0;
    double tsp = 0.0;
  };
  // language -> translator -> aggregate
  std::map<std::string, std::map<std::string, TranslatorAgg>> groups;
  for (const auto& tree : trees) {
    auto& a = groups[tree.target_lang][tree.translator_id];
    for (const auto& ts : tree.segments) {
      ++a.segments;
      a.tasks += ts.last_task - ts.first_task + 1;
      a.keys += ts.key_count;
    }
    a.rsp = tree.profile.rsp_effective;
    a.tsp = tree.profile.tsp;
  }

  report::ReportTable t;
  t.name = "hierarchy_correlations";
  t.columns = {{"metric", report::ColType::text, ""},
               {"language", report::ColType::text, ""},
               {"flavor", report::ColType::text, ""},
               {"statistic", report::ColType::real, ""},
               {"p_value", report::ColType::real, ""},
               {"n", report::ColType::integer, ""},
               {"method", report::ColType::text, ""}};

  bool any = false;
  for (const auto& [lang, translators] : groups) {
    if (translators.size() < 3) continue;
    any = true;
    std::vector<double> tasks_per_seg, keys_per_seg, keys_per_task, rsp, tsp;
    for (const auto& [id, a] : translators) {
      tasks_per_seg.push_back(static_cast<double>(a.tasks) / static_cast<double>(a.segments));
      keys_per_seg.push_back(static_cast<double>(a.keys) / static_cast<double>(a.segments));
      keys_per_task.push_back(static_cast<double>(a.keys) / static_cast<double>(a.tasks));
      rsp.push_back(a.rsp);
      tsp.push_back(a.tsp);
    }
    const std::pair<const char*, std::pair<const std::vector<double>*, const std::vector<double>*>>
        metrics[] = {
            {"tasks_per_ts_vs_keys_per_ts", {&tasks_per_seg, &keys_per_seg}},
            {"tasks_per_ts_vs_keys_per_task", {&tasks_per_seg, &keys_per_task}},
            {"rsp_vs_tsp", {&rsp, &tsp}},
        };
    for (const auto& [metric, xy] : metrics) {
      for (auto flavor : {stats::RankFlavor::spearman_rho, stats::RankFlavor::kendall_tau}) {
        report::Row row;
        row.emplace_back(std::string(metric));
        row.emplace_back(lang);
        row.emplace_back(
            std::string(flavor == stats::RankFlavor::spearman_rho ? "spearman" : "kendall"));
        try {
          const auto r = stats::rank_correlation(*xy.first, *xy.second, flavor);
          row.emplace_back(r.statistic);
          row.emplace_back(r.p_value);
          row.emplace_back(static_cast<int64_t>(r.n));
          row.emplace_back(std::string(stats::method_name(r.method)));
        } catch (const std::invalid_argument&) {
          row.emplace_back(kNaN);
          row.emplace_back(kNaN);
          row.emplace_back(static_cast<int64_t>(xy.first->size()));
          row.emplace_back(std::string("undefined"));
        }
        t.rows.push_back(std::move(row));
      }
    }
  }
  if (!any)
    throw std::invalid_argument(
        "hierarchy_correlations: need at least 3 translators in some language");
  t.provenance.operation = "hierarchy_correlations";
  t.provenance.parameters = {{"trees", std::to_string(trees.size())}};
  return t;
}

std::string tree_to_json(const SegmentationTree& tree) {
  nlohmann::ordered_json j;
  j["session"] = {{"study", tree.study_id},
                  {"session", tree.session_id},
                  {"translator", tree.translator_id},
                  {"source_lang", tree.source_lang},
                  {"target_lang", tree.target_lang}};
  j["profile"] = {{"translator", tree.profile.translator_id},
                  {"median_wp", tree.profile.median_wp},
                  {"median_bp", tree.profile.median_bp},
                  {"rsp", tree.profile.rsp},
                  {"tsp", tree.profile.tsp},
                  {"rsp_effective", tree.profile.rsp_effective},
                  {"valid", tree.profile.valid}};
  j["key_count"] = tree.key_times.size();
  j["segments"] = nlohmann::ordered_json::array();
  for (const auto& ts : tree.segments) {
    nlohmann::ordered_json js;
    js["label"] = ts.label;
    js["start_ms"] = ts.start_ms;
    js["end_ms"] = ts.end_ms;
    if (ts.preceding_pause_ms)
      js["preceding_pause_ms"] = *ts.preceding_pause_ms;
    else
      js["preceding_pause_ms"] = nullptr;
    js["key_count"] = ts.key_count;
    if (std::isnan(ts.mean_internal_iki))
      js["mean_internal_iki"] = nullptr;
    else
      js["mean_internal_iki"] = ts.mean_internal_iki;
    js["tasks"] = nlohmann::ordered_json::array();
    for (std::size_t ti = ts.first_task; ti <= ts.last_task; ++ti) {
      const auto& task = tree.tasks[ti];
      nlohmann::ordered_json jt;
      jt["label"] = std::string(1, task_label_letter(task.label));
      jt["first_key"] = task.first_key;
      jt["last_key"] = task.last_key;
      jt["start_ms"] = task.start_ms;
      jt["end_ms"] = task.end_ms;
      if (task.preceding_pause_ms)
        jt["preceding_pause_ms"] = *task.preceding_pause_ms;
      else
        jt["preceding_pause_ms"] = nullptr;
      js["tasks"].push_back(jt);
    }
    j["segments"].push_back(js);
  }
  j["programs"] = nlohmann::ordered_json::array();
  for (const auto& p : tree.programs)
    j["programs"].push_back({{"first_key", p.first_key},
                             {"last_key", p.last_key},
                             {"start_ms", p.start_ms},
                             {"end_ms", p.end_ms}});
  return j.dump(2) + "\n";
}

report::ReportTable tasks_table(const SegmentationTree& tree) {
  report::ReportTable t;
  t.name = "tasks";
  t.columns = {{"segment", report::ColType::integer, ""},
               {"task", report::ColType::integer, ""},
               {"label", report::ColType::text, ""},
               {"first_key", report::ColType::integer, ""},
               {"last_key", report::ColType::integer, ""},
               {"start", report::ColType::integer, "ms"},
               {"end", report::ColType::integer, "ms"},
               {"preceding_pause", report::ColType::real, "ms"},
               {"keys", report::ColType::integer, ""}};
  for (std::size_t si = 0; si < tree.segments.size(); ++si) {
    const auto& ts = tree.segments[si];
    for (std::size_t ti = ts.first_task; ti <= ts.last_task; ++ti) {
      const auto& task = tree.tasks[ti];
      t.rows.push_back({static_cast<int64_t>(si), static_cast<int64_t>(ti),
                        std::string(1, task_label_letter(task.label)),
                        static_cast<int64_t>(task.first_key),
                        static_cast<int64_t>(task.last_key), task.start_ms, task.end_ms,
                        task.preceding_pause_ms ? static_cast<double>(*task.preceding_pause_ms)
                                                : kNaN,
                        static_cast<int64_t>(task.last_key - task.first_key + 1)});
    }
  }
  t.provenance.operation = "segment";
  t.provenance.parameters = {{"session", tree.session_id},
                             {"rsp_effective", report::format_real(tree.profile.rsp_effective)},
                             {"tsp", report::format_real(tree.profile.tsp)}};
  return t;
}

}  // namespace segflow::seg
