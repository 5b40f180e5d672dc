#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "segflow/iki.hpp"
#include "segflow/report.hpp"
#include "segflow/types.hpp"

namespace segflow::seg {

// Maximal run of keystrokes whose internal intervals all stay below the delay
// threshold.
struct MotorProgram {
  std::size_t first_key = 0;
  std::size_t last_key = 0;  // inclusive
  int64_t start_ms = 0;
  int64_t end_ms = 0;
};

enum class TaskLabel { A, D, C };

char task_label_letter(TaskLabel l);

struct Task {
  std::size_t first_key = 0;
  std::size_t last_key = 0;  // inclusive
  TaskLabel label = TaskLabel::A;
  int64_t start_ms = 0;
  int64_t end_ms = 0;
  std::optional<int64_t> preceding_pause_ms;  // empty for the session's first task
};

struct TaskSegment {
  std::size_t first_task = 0;
  std::size_t last_task = 0;  // inclusive, indexes the tree's task vector
  std::string label;          // concatenated task letters, e.g. "AAD"
  int64_t start_ms = 0;
  int64_t end_ms = 0;
  std::optional<int64_t> preceding_pause_ms;
  std::size_t first_key = 0;
  std::size_t last_key = 0;
  std::size_t key_count = 0;
  double mean_internal_iki = 0.0;  // NaN when the segment has fewer than 2 keys
};

struct SegmentationTree {
  std::string study_id;
  std::string session_id;
  std::string translator_id;
  std::string source_lang;
  std::string target_lang;
  iki::TranslatorProfile profile;
  std::vector<int64_t> key_times;
  std::vector<KeyKind> key_kinds;
  std::vector<MotorProgram> programs;
  std::vector<Task> tasks;
  std::vector<TaskSegment> segments;
};

// Interval bands: iki < rsp stays inside a Task; rsp <= iki < tsp starts a new
// Task; iki >= tsp starts a new TaskSegment. Pauses attach to the following
// unit.
std::vector<MotorProgram> split_motor_programs(std::span<const KeyEvent> keys,
                                               int64_t delay_threshold_ms = 200);

TaskLabel label_task(std::span<const KeyKind> kinds, std::size_t first_key,
                     std::size_t last_key);

std::vector<Task> split_tasks(std::span<const KeyEvent> keys,
                              const iki::TranslatorProfile& profile);

std::vector<TaskSegment> split_task_segments(std::span<const Task> tasks,
                                             std::span<const KeyEvent> keys,
                                             const iki::TranslatorProfile& profile);

SegmentationTree build_segmentation(const SessionLog& s, const iki::TranslatorProfile& profile,
                                    int64_t delay_threshold_ms = 200);

// One row per distinct segment label: occurrence count, percentage within each
// target language, mean duration, pooled mean internal interval, keystrokes per
// task. Rows ordered by falling frequency, ties alphabetically.
report::ReportTable corpus_ts_summary(std::span<const SegmentationTree> trees);

// Corpus-level scalar metrics (counts, label concentration, duration and
// tasks-per-segment statistics, cross-language label-share correlation).
report::ReportTable ts_overall(std::span<const SegmentationTree> trees);

struct AOnlyCoverage {
  double ts_fraction = 0.0;
  double key_fraction = 0.0;
};

AOnlyCoverage a_only_coverage(std::span<const SegmentationTree> trees);

// Rank correlations over per-translator aggregates, grouped by target
// language: tasks/segment vs keys/segment, tasks/segment vs keys/task, and
// rsp vs tsp. Both rho and tau rows. Throws std::invalid_argument unless some
// language has at least 3 translators.
report::ReportTable hierarchy_correlations(std::span<const SegmentationTree> trees);

std::string tree_to_json(const SegmentationTree& tree);

// Flat one-row-per-task table for downstream tools.
report::ReportTable tasks_table(const SegmentationTree& tree);

}  // namespace segflow::seg
