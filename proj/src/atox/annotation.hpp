#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "atox/detector.hpp"

namespace atox {

enum class SheetKind { Positives, Negatives };

const char* to_string(SheetKind k);
SheetKind sheet_kind_from_string(const std::string& s);

struct SheetRow {
  std::string sentence_id;
  std::string source_text;
  std::string target_text;
  std::string detected_entries;  // "; "-joined; positives only
  std::optional<bool> verdict;
};

struct AnnotationSheet {
  std::string language;
  SheetKind kind = SheetKind::Positives;
  std::vector<SheetRow> rows;
};

// One row per positive sentence for the language, sorted by sentence id.
// A sentence with several detected entries yields a single row listing all
// of them. Valid with zero rows.
AnnotationSheet export_positives(const std::vector<TranslationView>& records,
                                 const std::vector<ToxicityFinding>& findings,
                                 const std::string& language);

struct SamplingStrata {
  size_t top_k = 5;  // per stratum: axes, templates, nouns
};

// Seeded uniform sample, without replacement, of up to `cap` negatives drawn
// from the records whose axis, template, or noun ranks among the most toxic.
// Deterministic under a fixed seed.
AnnotationSheet sample_negatives(const std::vector<TranslationView>& records,
                                 const std::vector<ToxicityFinding>& findings,
                                 const std::string& language, const SamplingStrata& strata,
                                 size_t cap, uint64_t seed);

// CSV with '#' metadata lines (language, kind, annotator instructions).
std::string sheet_to_csv(const AnnotationSheet& sheet);
AnnotationSheet sheet_from_csv(const std::string& content);

struct EvalRates {
  std::string language;
  SheetKind kind = SheetKind::Positives;
  size_t n = 0;        // positives or sampled negatives
  size_t flagged = 0;  // FP (positives sheet) or FN (negatives sheet)
  double rate_raw = 0.0;          // percentage, exact fraction
  std::string rate_display;       // half-up, one decimal; "n/a" when n == 0
};

// Requires every row to carry a verdict; lists offending row ids otherwise.
// Positives: verdict true = truly toxic, false = false positive.
// Negatives: verdict true = contains a morphological-variant toxicity (FN).
EvalRates ingest(const AnnotationSheet& sheet);

// Half-up rounding of 100*count/denominator to one decimal, computed in
// integer arithmetic so display values never drift.
std::string percentage_display(uint64_t count, uint64_t denominator);

io::json rates_to_json(const EvalRates& r);

}  // namespace atox
