#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "atox/attribution.hpp"
#include "atox/lexicon.hpp"
#include "atox/template_pack.hpp"

namespace atox {

struct Translation {
  std::string sentence_id;
  std::string language;
  std::string target_text;
};

struct WordSpan {
  std::string text;
  size_t start = 0;  // code-point offsets
  size_t end = 0;
};

// Maximal runs of word characters (letters, digits, marks, apostrophes,
// hyphen) in the original text.
std::vector<WordSpan> segment_words(std::string_view text);

// A joined record: source sentence, its translation, optional attributions.
struct TranslationView {
  const GeneratedSentence* sentence = nullptr;
  const Translation* translation = nullptr;
  const AttributionRecord* attribution = nullptr;  // may be null
};

struct MatchedWord {
  size_t word_index = 0;
  std::string entry;
  size_t start = 0;
  size_t end = 0;
};

struct ToxicityFinding {
  std::string sentence_id;
  std::string language;
  std::vector<MatchedWord> matched;       // every boundary-valid occurrence
  size_t representative_word = 0;         // one of the matched word indices
  std::optional<Role> alignment_role;     // present iff attribution present
  std::optional<double> source_contribution;  // of the representative word
};

// Returns a finding iff the target is toxic and the source is not (added
// toxicity only). The finding carries matches; representative selection and
// role classification happen separately.
std::optional<ToxicityFinding> detect_added_toxicity(const TranslationView& view,
                                                     const ToxicityLexicon& source_lexicon,
                                                     const ToxicityLexicon& target_lexicon);

// Uniform seeded choice among candidate word indices, keyed by
// (seed, sentence_id) so sharding cannot change selections.
size_t select_representative(const std::vector<size_t>& candidates, uint64_t seed,
                             std::string_view sentence_id);

// Maps a target word, via its aligned source word, to the role of the
// enclosing source span.
Role classify_alignment_role(const GeneratedSentence& sentence, const AttributionRecord& attr,
                             size_t target_word_index);

struct RoleCounts {
  uint64_t descriptor = 0;
  uint64_t template_ = 0;
  uint64_t noun = 0;
  uint64_t total() const { return descriptor + template_ + noun; }
};

struct LanguageCounts {
  uint64_t records = 0;
  uint64_t findings = 0;
};

struct ScanSummary {
  uint64_t records = 0;
  uint64_t findings = 0;
  uint64_t findings_with_attribution = 0;
  uint64_t multi_word_findings = 0;
  uint64_t errors = 0;
  RoleCounts roles;
  std::map<std::string, LanguageCounts> per_language;
  std::vector<std::string> error_samples;  // first few error messages
};

struct ScanResult {
  std::vector<ToxicityFinding> findings;  // input order
  ScanSummary summary;
};

// Applies detect + select + classify to every record. Per-record errors are
// counted without aborting the stream. Record-parallel when threads > 1;
// output is identical for any thread count.
ScanResult scan_corpus(const std::vector<TranslationView>& records,
                       const ToxicityLexicon& source_lexicon, const LexiconSet& target_lexicons,
                       uint64_t seed, unsigned threads = 1);

io::json finding_to_json(const ToxicityFinding& f);
ToxicityFinding finding_from_json(const io::json& doc);
io::json summary_to_json(const ScanSummary& s);

}  // namespace atox
