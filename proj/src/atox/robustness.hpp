#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "atox/detector.hpp"

namespace atox {

// Gini impurity 1 - sum(p_i^2) over the multiset of words. Throws on empty.
double gini_impurity(const std::vector<std::string>& words);

struct FlagThresholds {
  double contribution_max = 0.40;
  double gini_min = 0.90;
};

// True iff contribution < contribution_max AND gini > gini_min (both strict).
bool flag(double contribution, double gini, const FlagThresholds& thresholds);

// The target word aligned to the source descriptor for one record, plus the
// bookkeeping robustness and the statistical battery share.
struct DescriptorAlignment {
  std::string sentence_id;
  std::string language;
  std::string descriptor_id;
  std::string template_id;
  std::string noun_id;                 // empty for descriptor-only templates
  bool has_aligned_word = false;
  std::string aligned_surface;         // casefolded, whitespace-normalized
  double contribution = 0.0;           // mean source contribution of that word
  bool toxic = false;                  // a toxic target word aligns to the descriptor
};

// One alignment per record that carries attributions. If several target
// words align to the descriptor, the lowest-index one is used.
std::vector<DescriptorAlignment> build_descriptor_alignments(
    const std::vector<TranslationView>& records,
    const std::map<std::string, const ToxicityFinding*>& findings_by_key);

// Key used for the findings map: "<language>\x1f<sentence_id>".
std::string alignment_key(const std::string& language, const std::string& sentence_id);

struct GiniCell {
  std::string language;
  std::string descriptor_id;
  std::string template_id;
  std::vector<std::string> aligned_words;  // sorted for deterministic output
  size_t group_size = 0;                   // one slot per noun variant
  std::optional<double> gini;              // defined iff every variant aligned
};

// Cells over noun-bearing records grouped by (language, descriptor,
// template), ordered by that key. A cell is undefined when any noun variant
// lacks an aligned descriptor word.
std::vector<GiniCell> build_cells(const std::vector<DescriptorAlignment>& alignments);

struct PopulationItem {
  double contribution = 0.0;
  double gini = 0.0;
  bool toxic = false;
};

// Joins alignments with their cell's Gini value. Records in undefined cells
// (and descriptor-only records, which have no cell) are excluded and
// counted.
struct PopulationBuild {
  std::vector<PopulationItem> items;
  size_t excluded_undefined = 0;
  size_t undefined_cells = 0;
  size_t defined_cells = 0;
};
PopulationBuild build_population(const std::vector<DescriptorAlignment>& alignments,
                                 const std::vector<GiniCell>& cells);

struct RegionReport {
  size_t population = 0;
  size_t flagged = 0;
  size_t toxic_total = 0;
  size_t toxic_flagged = 0;
  double flagged_share = 0.0;        // flagged / population
  double toxic_flagged_share = 0.0;  // toxic_flagged / toxic_total (0 when no toxic)
  double toxicity_in_region = 0.0;   // toxic_flagged / flagged (0 when empty region)
  double toxicity_overall = 0.0;     // toxic_total / population
  std::optional<double> ratio;       // in-region / overall; absent when overall is 0
};

RegionReport region_stats(std::span<const PopulationItem> population,
                          const FlagThresholds& thresholds);

struct GridCell {
  size_t count = 0;
  size_t toxic = 0;
};

// Left-closed, right-open bins; the final bin is right-closed so 1.0 lands
// inside. Cell (i,j) holds contribution bin i and gini bin j.
struct HeatmapGrid {
  std::vector<double> contribution_edges;
  std::vector<double> gini_edges;
  std::vector<GridCell> cells;  // row-major: i * (gini bins) + j

  size_t contribution_bins() const { return contribution_edges.size() - 1; }
  size_t gini_bins() const { return gini_edges.size() - 1; }
  const GridCell& at(size_t ci, size_t gi) const { return cells[ci * gini_bins() + gi]; }
};

// Edges must be strictly increasing and cover [0,1].
HeatmapGrid heatmap_grid(std::span<const PopulationItem> population,
                         const std::vector<double>& contribution_edges,
                         const std::vector<double>& gini_edges);

std::vector<double> uniform_edges(size_t bins);

io::json region_to_json(const RegionReport& r);

}  // namespace atox
