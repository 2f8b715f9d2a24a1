#pragma once

#include <optional>
#include <string>
#include <vector>

#include "atox/detector.hpp"
#include "atox/robustness.hpp"

namespace atox {

enum class Dimension { Language, Axis, Descriptor, Noun, Template };

Dimension dimension_from_string(const std::string& s);
const char* to_string(Dimension d);

struct RateRow {
  std::string key;
  uint64_t n_sentences = 0;
  uint64_t n_toxic = 0;
  double rate = 0.0;
};

struct RateTable {
  Dimension dimension = Dimension::Language;
  std::vector<RateRow> rows;  // by descending rate, then key
};

// Exact integer counts per key of the chosen dimension; descriptor-only
// records appear under noun key "-".
RateTable aggregate(const std::vector<TranslationView>& records,
                    const std::vector<ToxicityFinding>& findings, Dimension dimension);

enum class ATLevel { Low, Medium, High };
const char* to_string(ATLevel level);

// High above 0.5%, Low below 0.1%, Medium between; both boundaries classify
// as Medium.
ATLevel classify_level(double rate);

struct LanguageRegionStats {
  std::string language;
  double toxicity_rate = 0.0;      // added-toxicity prevalence for the language
  double toxicity_in_region = 0.0; // from the language's region report
  double toxicity_overall = 0.0;
};

struct RangeRow {
  ATLevel level = ATLevel::Low;
  size_t num_languages = 0;
  double pct_toxic_in_region = 0.0;  // mean over languages, as a percentage
  double pct_toxic_overall = 0.0;
  std::optional<double> ratio;  // in-region / overall; absent for empty groups
};

// Groups languages by AT level; rows ordered Low, Medium, High.
std::vector<RangeRow> toxicity_range_table(const std::vector<LanguageRegionStats>& languages);

// Deterministic emission: fixed 4-decimal floats, sorted keys, LF endings.
std::string rate_table_to_csv(const RateTable& table);
std::string rate_table_to_json(const RateTable& table);
std::string range_table_to_csv(const std::vector<RangeRow>& rows);
std::string grid_to_csv(const HeatmapGrid& grid);

// Self-contained SVG: fixed viewport, two-color ramp scaled to the busiest
// cell, white for empty or zero-toxicity cells. Optionally outlines the
// flagging region.
std::string grid_to_svg(const HeatmapGrid& grid,
                        const std::optional<FlagThresholds>& region = std::nullopt);

}  // namespace atox
