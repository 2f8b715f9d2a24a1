#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "atox/annotation.hpp"
#include "atox/detector.hpp"
#include "atox/report.hpp"
#include "atox/robustness.hpp"

namespace atox {

enum class ExclusionReason { NoWordSeparators, AlignmentUnsupported, LexiconInaccurate };
const char* to_string(ExclusionReason r);

struct LanguageVerdict {
  bool supported = false;
  std::optional<ExclusionReason> reason;
};

// Which languages the toolkit can analyze and why others are excluded:
// scripts without usable word separators, scripts whose tokenization cannot
// be aligned with attributions, and languages whose wordlists are too
// context-sensitive to trust.
class CapabilityTable {
 public:
  struct Caps {
    bool word_separators = true;
    bool alignment_ok = true;
    bool lexicon_ok = true;
  };

  static const CapabilityTable& builtin();
  static CapabilityTable load(const std::string& path);  // JSON, overrides nothing: standalone table

  // Throws ValidationError for languages absent from the table.
  LanguageVerdict validate_language(const std::string& code,
                                    bool assume_pretokenized = false) const;
  bool known(const std::string& code) const { return table_.count(code) > 0; }
  void set(const std::string& code, Caps caps) { table_[code] = caps; }

 private:
  std::map<std::string, Caps> table_;
};

// In-memory join of corpus, translations, and optional attributions.
struct Dataset {
  std::vector<GeneratedSentence> corpus;
  std::vector<Translation> translations;
  std::vector<AttributionRecord> attributions;
  std::vector<TranslationView> records;  // one per translation, input order
  size_t unmatched_translations = 0;     // sentence_id absent from corpus

  const GeneratedSentence* sentence_by_id(const std::string& id) const;

  // Views hold pointers into the vectors above; build() must run after the
  // vectors stop moving.
  void build(bool strict);

 private:
  std::map<std::string, size_t> corpus_index_;
};

Dataset load_dataset(const std::string& corpus_path, const std::string& translations_path,
                     const std::string& attributions_path, bool strict);

std::vector<Translation> load_translations(const std::string& path);
std::vector<GeneratedSentence> load_corpus(const std::string& path);

struct RunConfig {
  std::string pack_path;
  std::string lexicon_dir;
  std::string translations_path;
  std::string attributions_path;   // optional
  std::string capabilities_path;   // optional; builtin table otherwise
  std::string chrf_path;           // optional per-language chrF CSV
  std::string source_language = "eng_Latn";
  std::string out_dir;
  uint64_t seed = 0;
  unsigned threads = 1;
  bool strict = false;
  bool assume_pretokenized = false;
  FlagThresholds thresholds;
  size_t contribution_bins = 20;
  size_t gini_bins = 20;
  size_t negatives_cap = 300;
  size_t strata_top_k = 5;
  size_t bootstrap_resamples = 1000;
};

RunConfig run_config_from_json(const io::json& doc);

// generate -> detect -> (attribute) -> robustness -> stats -> report ->
// annotation sheets, with a manifest listing every artifact and its SHA-256.
// Returns the manifest document.
io::json run_pipeline(const RunConfig& config);

// Per-language statistical battery and corpus-level correlations.
struct StatsArtifacts {
  std::string per_language_csv;
  io::json correlations;
};

StatsArtifacts compute_stats(const std::vector<DescriptorAlignment>& alignments,
                             const RateTable& language_rates,
                             const std::map<std::string, double>& chrf_by_language,
                             uint64_t seed, size_t resamples);

// Reads a two-column CSV (language,chrf).
std::map<std::string, double> load_chrf_csv(const std::string& path);

std::string cells_to_csv(const std::vector<GiniCell>& cells);

}  // namespace atox
