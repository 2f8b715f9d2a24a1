#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "atox/unicode.hpp"

namespace atox {

// One occurrence of a lexicon entry. Offsets are code-point offsets into the
// original (un-normalized) text; end is exclusive.
struct MatchSpan {
  std::string entry;  // normalized entry that matched
  size_t start = 0;
  size_t end = 0;

  bool operator==(const MatchSpan& o) const {
    return entry == o.entry && start == o.start && end == o.end;
  }
};

// Per-language toxicity wordlist with boundary-aware multi-pattern matching.
// Entries and scanned text go through the same normalization pipeline
// (configurable Unicode normalization + case folding, whitespace runs
// collapsed to single spaces), so matching is insensitive to case and
// spacing. A match must abut a separator or a text boundary on both ends:
// entry "ass" matches neither "bass" nor "assistant".
//
// Immutable after construction; matching is pure and reentrant, so one
// lexicon can serve any number of threads.
class ToxicityLexicon {
 public:
  ToxicityLexicon(std::string language, const std::vector<std::string>& raw_entries,
                  uni::NormalizationConfig cfg = {});

  const std::string& language() const { return language_; }
  const uni::NormalizationConfig& normalization() const { return cfg_; }
  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<std::string>& entries() const { return entries_; }

  // Every boundary-valid occurrence of every entry, sorted by (start, end).
  // Overlapping occurrences of distinct entries are all reported.
  std::vector<MatchSpan> find_matches(std::string_view text) const;

  // True iff the text contains at least one entry (early exit).
  bool is_toxic(std::string_view text) const;

  // Number of occurrences (not distinct entries).
  size_t count_matches(std::string_view text) const;

 private:
  struct Automaton {
    // Dense DFA over bytes; failure transitions baked in.
    std::vector<int32_t> next;           // state * 256 + byte -> state
    std::vector<int32_t> match_head;     // state -> first output id or -1
    std::vector<int32_t> output_link;    // state -> nearest output state via suffix, or -1
    std::vector<int32_t> output_next;    // output id -> next output id at same state
    std::vector<uint32_t> output_entry;  // output id -> entry index
    size_t states() const { return match_head.size(); }
  };

  void build_automaton();

  template <typename Sink>  // Sink(entry_index, scan_cp_start, scan_cp_end) -> bool keep_going
  void scan(std::string_view text, Sink&& sink) const;

  std::string language_;
  uni::NormalizationConfig cfg_;
  std::vector<std::string> entries_;       // normalized, deduplicated, sorted
  std::vector<size_t> entry_cp_lengths_;   // code-point length per entry
  Automaton ac_;
};

struct LexiconLoadResult {
  ToxicityLexicon lexicon;
  size_t duplicates_dropped = 0;
};

// Loads a wordlist file: UTF-8, one entry per line, '#' lines are comments,
// blank lines ignored. Throws ValidationError on malformed UTF-8 (with line
// number) or when the file yields zero entries.
LexiconLoadResult load_lexicon(const std::string& path, const std::string& language,
                               uni::NormalizationConfig cfg = {});

// A set of lexicons keyed by language code, loaded from a directory of
// <language-code>.txt files.
class LexiconSet {
 public:
  void add(ToxicityLexicon lexicon);

  // Loads <dir>/<language>.txt for each requested language. Missing files
  // throw ValidationError naming the language.
  static LexiconSet load_dir(const std::string& dir, const std::vector<std::string>& languages,
                             uni::NormalizationConfig cfg = {});

  const ToxicityLexicon* find(const std::string& language) const;
  const ToxicityLexicon& at(const std::string& language) const;  // throws if absent
  bool contains(const std::string& language) const { return find(language) != nullptr; }
  size_t size() const { return lexicons_.size(); }

 private:
  std::map<std::string, ToxicityLexicon> lexicons_;
};

}  // namespace atox
