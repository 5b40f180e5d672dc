#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "segflow/hof.hpp"
#include "segflow/iki.hpp"
#include "segflow/segmentation.hpp"
#include "segflow/types.hpp"

namespace segflow::render {

struct GraphLayers {
  bool keystrokes = true;
  bool fixations = true;
  bool activity_units = true;
  bool tasks = true;
  bool segments = true;
  bool tsp_boxes = true;
  bool hof_bands = true;
};

struct GraphSpec {
  int64_t t0 = 0;  // both zero means "full session span"
  int64_t t1 = 0;
  int width = 1200;
  int height = 620;
  double font_size = 10.0;
  GraphLayers layers;
  // Overrides for the default activity-unit colors, keyed by T-code.
  std::vector<std::pair<std::string, std::string>> au_colors;
  // Optional source-token/target-token alignment pairs; drawn as light arcs.
  std::vector<std::pair<int64_t, int64_t>> alignments;
};

// Timeline figure of one session: keystrokes (insertions black, deletions
// red) and fixations (source blue circles, target green diamonds) on token
// lanes, gray segment bars and violet pause boxes on top, colored activity
// unit bands at the bottom, and state letters above a dashed line. Throws
// std::invalid_argument on an empty time range.
std::string render_progression_graph(const SessionLog& s, const seg::SegmentationTree& tree,
                                     const hof::StateTrack* track,
                                     std::span<const hof::ActivityUnit> aus,
                                     const GraphSpec& spec = {});

enum class DistKind { density, cdf };

struct DistSeries {
  std::string label;
  iki::DistributionSummary summary;
};

struct DistSpec {
  int width = 900;
  int height = 560;
  double font_size = 10.0;
};

// Overlaid interval distributions: step curves (cdf) or histogram/KDE
// (density), with a solid vertical at each mean and a dotted vertical at each
// median. Throws std::invalid_argument when no series has data.
std::string render_distribution(std::span<const DistSeries> series, DistKind kind,
                                const DistSpec& spec = {});

// "st_token<TAB>tt_token" rows; '#' comments and a literal header allowed.
std::vector<std::pair<int64_t, int64_t>> parse_alignment_pairs(const std::string& text);

}  // namespace segflow::render
