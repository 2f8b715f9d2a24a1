#include "atox/robustness.hpp"

#include <algorithm>

#include "atox/error.hpp"

namespace atox {

double gini_impurity(const std::vector<std::string>& words) {
  if (words.empty()) throw RuntimeError("gini_impurity: empty multiset");
  std::map<std::string, size_t> counts;
  for (const auto& w : words) counts[w]++;
  const double total = static_cast<double>(words.size());
  double sum_sq = 0.0;
  for (const auto& [w, c] : counts) {
    double p = static_cast<double>(c) / total;
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

bool flag(double contribution, double gini, const FlagThresholds& thresholds) {
  return contribution < thresholds.contribution_max && gini > thresholds.gini_min;
}

std::string alignment_key(const std::string& language, const std::string& sentence_id) {
  return language + '\x1f' + sentence_id;
}

std::vector<DescriptorAlignment> build_descriptor_alignments(
    const std::vector<TranslationView>& records,
    const std::map<std::string, const ToxicityFinding*>& findings_by_key) {
  std::vector<DescriptorAlignment> out;
  uni::NormalizationConfig surface_norm;  // NFKC + casefold
  for (const auto& view : records) {
    if (!view.attribution) continue;
    DescriptorAlignment a;
    a.sentence_id = view.translation->sentence_id;
    a.language = view.translation->language;
    a.descriptor_id = view.sentence->descriptor_id;
    a.template_id = view.sentence->template_id;
    a.noun_id = view.sentence->noun_id;

    std::vector<WordSpan> target_words = segment_words(view.translation->target_text);
    std::vector<Role> roles(target_words.size());
    for (size_t w = 0; w < target_words.size(); ++w) {
      roles[w] = classify_alignment_role(*view.sentence, *view.attribution, w);
      if (!a.has_aligned_word && roles[w] == Role::Descriptor) {
        a.has_aligned_word = true;
        a.aligned_surface = uni::normalize(target_words[w].text, surface_norm);
        a.contribution =
            word_contribution(*view.attribution, w).mean_source_contribution;
      }
    }

    auto it = findings_by_key.find(alignment_key(a.language, a.sentence_id));
    if (it != findings_by_key.end()) {
      for (const auto& m : it->second->matched) {
        if (m.word_index < roles.size() && roles[m.word_index] == Role::Descriptor) {
          a.toxic = true;
          break;
        }
      }
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<GiniCell> build_cells(const std::vector<DescriptorAlignment>& alignments) {
  std::map<std::tuple<std::string, std::string, std::string>,
           std::vector<const DescriptorAlignment*>>
      groups;
  for (const auto& a : alignments) {
    if (a.noun_id.empty()) continue;  // descriptor-only templates have no noun variation
    groups[{a.language, a.descriptor_id, a.template_id}].push_back(&a);
  }
  std::vector<GiniCell> cells;
  cells.reserve(groups.size());
  for (const auto& [key, members] : groups) {
    GiniCell cell;
    cell.language = std::get<0>(key);
    cell.descriptor_id = std::get<1>(key);
    cell.template_id = std::get<2>(key);
    cell.group_size = members.size();
    bool all_aligned = true;
    for (const auto* m : members) {
      if (!m->has_aligned_word) {
        all_aligned = false;
        continue;
      }
      cell.aligned_words.push_back(m->aligned_surface);
    }
    std::sort(cell.aligned_words.begin(), cell.aligned_words.end());
    if (all_aligned && !cell.aligned_words.empty()) {
      cell.gini = gini_impurity(cell.aligned_words);
    }
    cells.push_back(std::move(cell));
  }
  return cells;
}

PopulationBuild build_population(const std::vector<DescriptorAlignment>& alignments,
                                 const std::vector<GiniCell>& cells) {
  std::map<std::tuple<std::string, std::string, std::string>, const GiniCell*> by_key;
  PopulationBuild out;
  for (const auto& c : cells) {
    by_key[{c.language, c.descriptor_id, c.template_id}] = &c;
    if (c.gini) ++out.defined_cells;
    else ++out.undefined_cells;
  }
  for (const auto& a : alignments) {
    if (a.noun_id.empty() || !a.has_aligned_word) {
      ++out.excluded_undefined;
      continue;
    }
    auto it = by_key.find({a.language, a.descriptor_id, a.template_id});
    if (it == by_key.end() || !it->second->gini) {
      ++out.excluded_undefined;
      continue;
    }
    out.items.push_back(PopulationItem{a.contribution, *it->second->gini, a.toxic});
  }
  return out;
}

RegionReport region_stats(std::span<const PopulationItem> population,
                          const FlagThresholds& thresholds) {
  if (population.empty()) throw ValidationError("region_stats: empty population");
  RegionReport r;
  r.population = population.size();
  for (const auto& item : population) {
    bool flagged = flag(item.contribution, item.gini, thresholds);
    if (flagged) ++r.flagged;
    if (item.toxic) {
      ++r.toxic_total;
      if (flagged) ++r.toxic_flagged;
    }
  }
  r.flagged_share = static_cast<double>(r.flagged) / static_cast<double>(r.population);
  r.toxic_flagged_share =
      r.toxic_total ? static_cast<double>(r.toxic_flagged) / static_cast<double>(r.toxic_total)
                    : 0.0;
  r.toxicity_in_region =
      r.flagged ? static_cast<double>(r.toxic_flagged) / static_cast<double>(r.flagged) : 0.0;
  r.toxicity_overall = static_cast<double>(r.toxic_total) / static_cast<double>(r.population);
  if (r.toxicity_overall > 0.0) r.ratio = r.toxicity_in_region / r.toxicity_overall;
  return r;
}

namespace {

void check_edges(const std::vector<double>& edges, const char* axis) {
  if (edges.size() < 2) throw ValidationError(std::string(axis) + " bins: need at least one bin");
  if (edges.front() != 0.0 || edges.back() != 1.0) {
    throw ValidationError(std::string(axis) + " bins: edges must cover [0,1]");
  }
  for (size_t i = 1; i < edges.size(); ++i) {
    if (edges[i] <= edges[i - 1]) {
      throw ValidationError(std::string(axis) + " bins: edges must be strictly increasing");
    }
  }
}

size_t bin_of(const std::vector<double>& edges, double v) {
  auto it = std::upper_bound(edges.begin(), edges.end(), v);
  size_t idx = static_cast<size_t>(it - edges.begin());
  if (idx == 0) return 0;  // v < 0 cannot happen for valid inputs
  size_t bin = idx - 1;
  size_t last = edges.size() - 2;
  return bin > last ? last : bin;  // v == 1.0 closes into the final bin
}

}  // namespace

std::vector<double> uniform_edges(size_t bins) {
  if (bins == 0) throw ValidationError("bins must be positive");
  std::vector<double> edges(bins + 1);
  for (size_t i = 0; i <= bins; ++i) {
    edges[i] = static_cast<double>(i) / static_cast<double>(bins);
  }
  edges.back() = 1.0;
  return edges;
}

HeatmapGrid heatmap_grid(std::span<const PopulationItem> population,
                         const std::vector<double>& contribution_edges,
                         const std::vector<double>& gini_edges) {
  check_edges(contribution_edges, "contribution");
  check_edges(gini_edges, "gini");
  HeatmapGrid grid;
  grid.contribution_edges = contribution_edges;
  grid.gini_edges = gini_edges;
  grid.cells.assign(grid.contribution_bins() * grid.gini_bins(), GridCell{});
  for (const auto& item : population) {
    size_t ci = bin_of(contribution_edges, item.contribution);
    size_t gi = bin_of(gini_edges, item.gini);
    auto& cell = grid.cells[ci * grid.gini_bins() + gi];
    ++cell.count;
    if (item.toxic) ++cell.toxic;
  }
  return grid;
}

io::json region_to_json(const RegionReport& r) {
  io::json doc;
  doc["population"] = r.population;
  doc["flagged"] = r.flagged;
  doc["toxic_total"] = r.toxic_total;
  doc["toxic_flagged"] = r.toxic_flagged;
  doc["flagged_share"] = r.flagged_share;
  doc["toxic_flagged_share"] = r.toxic_flagged_share;
  doc["toxicity_in_region"] = r.toxicity_in_region;
  doc["toxicity_overall"] = r.toxicity_overall;
  if (r.ratio) doc["ratio"] = *r.ratio;
  else doc["ratio"] = nullptr;
  return doc;
}

}  // namespace atox
