#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "segflow/iki.hpp"
#include "segflow/report.hpp"
#include "segflow/segmentation.hpp"
#include "segflow/types.hpp"

namespace segflow::hof {

// Ordered, non-overlapping state regions. Adjacent regions that touch and
// carry the same state are merged, so consecutive regions either differ in
// state or are separated by a gap.
struct StateTrack {
  std::vector<StateAnnotation> regions;

  int64_t total_ms(HofState s) const;
  std::size_t instances(HofState s) const;
};

// Sorts, validates (no overlaps) and merges annotations into a track.
// Throws std::invalid_argument on overlap or on an empty input.
StateTrack build_track(std::span<const StateAnnotation> annotations);

// State covering time t, or empty when t falls outside every region.
std::optional<HofState> state_at(const StateTrack& track, int64_t t);

// How keystrokes that fall outside every region are attached to one.
enum class OutsidePolicy { nearest, preceding, following };

struct CutStats {
  std::size_t ts_before = 0;
  std::size_t ts_after = 0;
  std::size_t ts_cut = 0;     // segments that were split into >= 2 fragments
  std::size_t tasks_before = 0;
  std::size_t tasks_after = 0;
  std::size_t tasks_cut = 0;
  std::size_t outside_keys = 0;
};

struct CutResult {
  seg::SegmentationTree tree;          // re-segmented so no unit straddles a state boundary
  std::vector<HofState> key_states;    // one entry per keystroke, after policy
  std::vector<std::size_t> key_regions;  // index into the track's regions, after policy
  CutStats stats;
  std::vector<std::string> warnings;
};

// Splits every Task and TaskSegment that straddles a state boundary at that
// boundary; labels, spans and preceding pauses are recomputed for the
// fragments. Keystrokes outside every region are assigned by `policy` and
// counted in a warning.
CutResult cut_at_state_boundaries(const seg::SegmentationTree& tree, const StateTrack& track,
                                  OutsidePolicy policy = OutsidePolicy::nearest);

struct TransitionMatrix {
  // Indexed by HofState enum order (hesitation, orientation, flow).
  std::array<std::array<std::size_t, 3>, 3> counts{};
  std::array<std::array<double, 3>, 3> probabilities{};
  std::vector<std::string> warnings;
};

// Counts consecutive distinct-state pairs along the track; rows with at least
// one transition are normalized to sum to 1. A single-state track yields an
// all-zero matrix plus a warning.
TransitionMatrix transition_matrix(const StateTrack& track);
TransitionMatrix transition_matrix(std::span<const StateTrack> tracks);

// Rows and columns presented in O, F, H order; the diagonal is empty.
report::ReportTable transition_table(const TransitionMatrix& m);

// Share of A/D/C task labels inside each state, grouped by target language.
// Fractions sum to 1 per (language, state); states with no tasks are omitted
// with a warning.
report::ReportTable task_distribution_by_state(std::span<const CutResult> sessions,
                                               std::vector<std::string>* warnings = nullptr);

// Top-k segment labels per (language, state) by frequency; ties break
// lexicographically.
report::ReportTable ts_label_ranking_by_state(std::span<const CutResult> sessions,
                                              std::size_t k = 6);

// Per-session means of per-state-instance features (duration, keys, segments,
// tasks, keys/segment, keys/task), aggregated to mean/min/max across the
// sessions of each language. Throws std::invalid_argument when no session
// contains the state.
report::ReportTable state_summary(std::span<const CutResult> sessions,
                                  std::span<const StateTrack> tracks, HofState state);

// Fraction of each state's total duration covered by inter-key gaps >= tsp,
// clipped at region boundaries; grouped by target language.
report::ReportTable pause_fraction_by_state(std::span<const CutResult> sessions,
                                            std::span<const StateTrack> tracks);

// Pearson correlation between label share vectors of (state, language) pairs
// over the `top` most frequent labels of each pair (union, ties by label).
report::ReportTable label_share_correlations(std::span<const CutResult> sessions,
                                             std::size_t top = 20);

// -- activity units -----------------------------------------------------------

enum class AuType { t1, t2, t4, t5, t6, t8 };

std::string au_code(AuType t);   // "T1", "T2", "T4", "T5", "T6", "T8"
std::optional<AuType> au_from_code(std::string_view code);
std::string au_color(AuType t);  // figure color: blue, lightgreen, yellow, red, darkgreen, black

struct ActivityUnit {
  int64_t start_ms = 0;
  int64_t end_ms = 0;  // exclusive
  AuType type = AuType::t8;
};

struct AuParams {
  int64_t min_duration_ms = 40;    // shorter slivers merge into the longer neighbor
  int64_t idle_threshold_ms = 1000;  // silence longer than this becomes t8
};

// Tiles [span_start, span_end] with activity units: reading-only intervals
// become t1/t2, production (inter-key gaps < tsp) without gaze t4, production
// with ST/TT gaze t5/t6, and silence above the idle threshold t8. Overlapping
// fixations resolve to the longer one.
std::vector<ActivityUnit> derive_activity_units(const SessionLog& s,
                                                const iki::TranslatorProfile& profile,
                                                const AuParams& params = {});

// TSV with a "start\tend\tstate" header; the state column carries T-codes.
std::string serialize_activity_units(std::span<const ActivityUnit> aus);
std::vector<ActivityUnit> parse_activity_units(const std::string& text);

// -- draft state suggestions --------------------------------------------------

struct SuggestParams {
  int64_t orientation_min_ms = 2500;  // minimum production-free stretch for O
  double t1_dominance = 0.5;          // minimum ST-reading share of that stretch
  double deletion_share = 0.4;        // minimum deletion share near a tsp pause for H
};

struct SuggestedState {
  StateAnnotation annotation;
  double confidence = 0.0;  // in [0, 1]
};

// Heuristic first-pass annotation: production-free ST-reading stretches become
// O, deletion-heavy neighborhoods of tsp-class pauses become H, the rest is F.
// The result covers [span_start, span_end] without overlap and serializes to
// the same TSV format parse_annotations reads.
std::vector<SuggestedState> suggest_hof_states(const SessionLog& s,
                                               const seg::SegmentationTree& tree,
                                               std::span<const ActivityUnit> aus,
                                               const SuggestParams& params = {});

}  // namespace segflow::hof
