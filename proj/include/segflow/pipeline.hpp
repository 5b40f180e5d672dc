#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "segflow/config.hpp"
#include "segflow/hof.hpp"
#include "segflow/iki.hpp"
#include "segflow/report.hpp"
#include "segflow/segmentation.hpp"
#include "segflow/session_io.hpp"

namespace segflow::pipeline {

inline constexpr const char* kToolName = "segflow";
inline constexpr const char* kToolVersion = "0.1.0";

// Directories contribute their *.session.tsv entries (non-recursive), plain
// files are taken as given. Result is sorted and de-duplicated. Throws
// std::invalid_argument for a path that does not exist.
std::vector<std::string> discover_session_files(std::span<const std::string> paths);

struct LoadedSession {
  std::string path;
  std::string digest;  // FNV-1a 64 of the raw file bytes
  SessionLog log;
};

struct Corpus {
  std::vector<LoadedSession> sessions;  // in sorted file order
};

// Reads and parses every file. Parse failures become io::ParseError with the
// file name prepended.
Corpus load_corpus(std::span<const std::string> files, const io::ParseOptions& opts = {});

// nullptr when the id is unknown; throws std::invalid_argument when two
// sessions share the id.
const LoadedSession* find_session(const Corpus& corpus, const std::string& session_id);

// WP/BP samples pooled per translator over all their sessions. Translators
// whose thresholds cannot be formed (no BP sample, or tsp <= effective rsp)
// are dropped with a warning.
std::map<std::string, iki::TranslatorProfile> build_profiles(
    const Corpus& corpus, const iki::IkiParams& params,
    std::vector<std::string>* warnings = nullptr);

report::ReportTable profiles_table(const Corpus& corpus,
                                   const std::map<std::string, iki::TranslatorProfile>& profiles);

// Inverse of profiles_table's CSV emission; used by `segment --profiles`.
std::map<std::string, iki::TranslatorProfile> parse_profiles_csv(const std::string& text);

// Per-study roll-up: keystroke count, total hours, session and translator
// counts, pooled mean/median inter-key interval.
report::ReportTable study_summary(const Corpus& corpus);

// Per target language: min/max/mean/median over the translators' RSP and TSP
// thresholds.
report::ReportTable thresholds_by_language(
    const Corpus& corpus, const std::map<std::string, iki::TranslatorProfile>& profiles);

// One tree per session, in corpus order. Throws std::invalid_argument when a
// session's translator has no profile.
std::vector<seg::SegmentationTree> build_trees(
    const Corpus& corpus, const std::map<std::string, iki::TranslatorProfile>& profiles,
    const config::RunConfig& cfg);

report::ReportTable a_only_table(std::span<const seg::SegmentationTree> trees);

// Sessions paired with their state annotations (<dir>/<session_id>.hof.tsv)
// and the segmentation cut at state boundaries. Sessions without an
// annotation file are skipped with a warning.
struct HofBundle {
  std::vector<std::size_t> session_index;  // into corpus.sessions
  std::vector<hof::StateTrack> tracks;     // aligned with session_index
  std::vector<hof::CutResult> cuts;        // aligned with session_index
  std::vector<std::string> warnings;
};

HofBundle build_hof_bundle(const Corpus& corpus,
                           const std::map<std::string, iki::TranslatorProfile>& profiles,
                           const std::string& annotations_dir, const config::RunConfig& cfg);

// State instance counts and shares per target language.
report::ReportTable state_counts_table(const HofBundle& bundle);

// Pooled transition matrices, one block of off-diagonal rows per language.
report::ReportTable transitions_by_language(const HofBundle& bundle);

// How much the state boundaries fragment the segmentation: per-language and
// overall counts of cut units.
report::ReportTable cut_stats_table(const HofBundle& bundle);

struct PlannedPair {
  std::string session_a;
  std::string session_b;
  char cls = 'a';  // a: same translator/task, b: same translator across
                   // tasks, c: different translators
};

// TSV plan: session_a<TAB>session_b<TAB>class. Throws io::ParseError.
std::vector<PlannedPair> parse_pairs_plan(const std::string& text);

struct IdentifyResult {
  report::ReportTable detail;   // one row per pair, both decision rules
  report::ReportTable summary;  // one row per class under the configured rule
  std::vector<std::string> warnings;
};

// Two-sample KS comparison of the paired sessions' interval samples. Class b
// uses within-word intervals only (the classes share typing material, so only
// word-internal rhythm is comparable); a and c use all intervals; the
// identify_filter setting can force one filter for every class.
IdentifyResult identification_experiment(const Corpus& corpus,
                                         std::span<const PlannedPair> plan,
                                         const config::RunConfig& cfg);

// Deterministic run manifest: tool, command, config hash and listing, input
// digests. No timestamps, no absolute paths.
std::string manifest_json(const std::string& command, const config::RunConfig& cfg,
                          const Corpus& corpus,
                          std::span<const std::pair<std::string, std::string>> extra_inputs = {});

}  // namespace segflow::pipeline
