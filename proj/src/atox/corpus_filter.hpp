#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>

#include "atox/jsonl.hpp"
#include "atox/lexicon.hpp"

namespace atox {

struct PairToxicity {
  uint64_t src_tox = 0;
  uint64_t tgt_tox = 0;
};

enum class FilterPolicy { Baseline, MaxAdd1, NoAdd, NoTox };

FilterPolicy filter_policy_from_string(const std::string& s);
const char* to_string(FilterPolicy p);

// Occurrence counts per side (not distinct entries).
PairToxicity pair_toxicity(std::string_view src, std::string_view tgt,
                           const ToxicityLexicon& src_lexicon,
                           const ToxicityLexicon& tgt_lexicon);

// baseline: keep everything. max_add_1: |src-tgt| <= 1. no_add: src == tgt.
// no_tox: src + tgt == 0.
bool keep(const PairToxicity& pair, FilterPolicy policy);

enum class BitextFormat { Tsv, Jsonl };

struct FilterReport {
  uint64_t input = 0;
  uint64_t kept = 0;
  uint64_t dropped = 0;
  uint64_t malformed = 0;
  std::map<std::pair<uint64_t, uint64_t>, uint64_t> drop_histogram;  // (src_tox, tgt_tox)
};

// Order-preserving streaming filter. Malformed records are skipped and
// counted; strict mode aborts on the first one instead.
FilterReport filter_corpus(std::istream& in, std::ostream& out, BitextFormat format,
                           FilterPolicy policy, const ToxicityLexicon& src_lexicon,
                           const ToxicityLexicon& tgt_lexicon, bool strict = false);

io::json filter_report_to_json(const FilterReport& r, FilterPolicy policy);

}  // namespace atox
