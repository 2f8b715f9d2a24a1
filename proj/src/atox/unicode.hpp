#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace atox::uni {

enum class NormForm { NFC, NFKC };

struct NormalizationConfig {
  bool casefold = true;
  NormForm form = NormForm::NFKC;
};

// Decodes UTF-8 into code points. Throws ValidationError on malformed input,
// reporting the byte offset of the offending sequence.
std::vector<char32_t> decode_utf8(std::string_view text);

std::string encode_utf8(const std::vector<char32_t>& cps);
void append_utf8(std::string& out, char32_t cp);

// Normalized view of a text with a map from each normalized code point back
// to the range of original code points it was produced from. Normalization
// runs segment-wise at normalization boundaries, so concatenating the
// segments equals normalizing the whole string.
struct NormalizedText {
  std::string bytes;                // normalized (and optionally casefolded) UTF-8
  std::vector<uint32_t> cp_byte;    // byte offset of normalized cp i; size = n_cps + 1
  std::vector<uint32_t> orig_begin; // original cp range [orig_begin[i], orig_end[i])
  std::vector<uint32_t> orig_end;

  size_t cp_count() const { return orig_begin.size(); }
};

// Normalize without offset bookkeeping (lexicon entries).
std::string normalize(std::string_view text, const NormalizationConfig& cfg);

// Normalize with per-code-point offset map (scanned text).
NormalizedText normalize_with_map(std::string_view text, const NormalizationConfig& cfg);

// Word-character class used for boundary checks and word segmentation:
// Unicode letters, digits/numbers, combining marks, the apostrophes ' and
// U+2019, and hyphen-minus. Everything else separates words.
bool is_word_char(char32_t cp);

// Code-point count of a UTF-8 string (throws on malformed input).
size_t cp_length(std::string_view text);

}  // namespace atox::uni
