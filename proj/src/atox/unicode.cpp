#include "atox/unicode.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unorm2.h>
#include <unicode/ustring.h>
#include <unicode/utf16.h>

#include <unordered_map>

#include "atox/error.hpp"

namespace atox::uni {

namespace {

const UNormalizer2* normalizer_for(NormForm form) {
  UErrorCode status = U_ZERO_ERROR;
  const UNormalizer2* n = form == NormForm::NFKC ? unorm2_getNFKCInstance(&status)
                                                 : unorm2_getNFCInstance(&status);
  if (U_FAILURE(status) || n == nullptr) {
    throw RuntimeError("ICU normalizer unavailable");
  }
  return n;
}

std::u16string to_utf16(const char32_t* cps, size_t n) {
  std::u16string out;
  out.reserve(n + 4);
  for (size_t i = 0; i < n; ++i) {
    char32_t cp = cps[i];
    if (cp <= 0xFFFF) {
      out.push_back(static_cast<char16_t>(cp));
    } else {
      out.push_back(static_cast<char16_t>(U16_LEAD(cp)));
      out.push_back(static_cast<char16_t>(U16_TRAIL(cp)));
    }
  }
  return out;
}

// Normalize + optionally casefold one normalization-closed segment, given as
// UTF-16. Returns the resulting code points.
std::vector<char32_t> transform_segment(const UNormalizer2* norm, bool casefold,
                                        const std::u16string& seg) {
  UErrorCode status = U_ZERO_ERROR;
  UChar buf[64];
  std::u16string normalized;
  int32_t len = unorm2_normalize(norm, reinterpret_cast<const UChar*>(seg.data()),
                                 static_cast<int32_t>(seg.size()), buf, 64, &status);
  if (status == U_BUFFER_OVERFLOW_ERROR) {
    status = U_ZERO_ERROR;
    normalized.resize(static_cast<size_t>(len));
    unorm2_normalize(norm, reinterpret_cast<const UChar*>(seg.data()),
                     static_cast<int32_t>(seg.size()),
                     reinterpret_cast<UChar*>(normalized.data()), len, &status);
  } else if (U_SUCCESS(status)) {
    normalized.assign(reinterpret_cast<const char16_t*>(buf), static_cast<size_t>(len));
  }
  if (U_FAILURE(status)) throw RuntimeError("unicode normalization failed");

  if (casefold) {
    UChar fbuf[64];
    status = U_ZERO_ERROR;
    int32_t flen =
        u_strFoldCase(fbuf, 64, reinterpret_cast<const UChar*>(normalized.data()),
                      static_cast<int32_t>(normalized.size()), U_FOLD_CASE_DEFAULT, &status);
    std::u16string folded;
    if (status == U_BUFFER_OVERFLOW_ERROR) {
      status = U_ZERO_ERROR;
      folded.resize(static_cast<size_t>(flen));
      u_strFoldCase(reinterpret_cast<UChar*>(folded.data()), flen,
                    reinterpret_cast<const UChar*>(normalized.data()),
                    static_cast<int32_t>(normalized.size()), U_FOLD_CASE_DEFAULT, &status);
    } else if (U_SUCCESS(status)) {
      folded.assign(reinterpret_cast<const char16_t*>(fbuf), static_cast<size_t>(flen));
    }
    if (U_FAILURE(status)) throw RuntimeError("unicode case folding failed");
    normalized = std::move(folded);
  }

  std::vector<char32_t> out;
  out.reserve(normalized.size());
  int32_t i = 0;
  int32_t n = static_cast<int32_t>(normalized.size());
  const UChar* p = reinterpret_cast<const UChar*>(normalized.data());
  while (i < n) {
    UChar32 cp;
    U16_NEXT(p, i, n, cp);
    out.push_back(static_cast<char32_t>(cp));
  }
  return out;
}

// Most segments are a single code point; cache their transforms.
struct SegCacheKey {
  char32_t cp;
  uint8_t form_fold;
  bool operator==(const SegCacheKey& o) const {
    return cp == o.cp && form_fold == o.form_fold;
  }
};

struct SegCacheHash {
  size_t operator()(const SegCacheKey& k) const {
    return std::hash<uint64_t>()((static_cast<uint64_t>(k.cp) << 8) | k.form_fold);
  }
};

const std::vector<char32_t>& cached_single(const UNormalizer2* norm, bool casefold,
                                           NormForm form, char32_t cp) {
  thread_local std::unordered_map<SegCacheKey, std::vector<char32_t>, SegCacheHash> cache;
  SegCacheKey key{cp, static_cast<uint8_t>((form == NormForm::NFKC ? 2 : 0) | (casefold ? 1 : 0))};
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto cps = transform_segment(norm, casefold, to_utf16(&cp, 1));
  return cache.emplace(key, std::move(cps)).first->second;
}

bool all_ascii(std::string_view text) {
  for (unsigned char c : text) {
    if (c >= 0x80) return false;
  }
  return true;
}

}  // namespace

std::vector<char32_t> decode_utf8(std::string_view text) {
  std::vector<char32_t> cps;
  cps.reserve(text.size());
  size_t i = 0;
  const size_t n = text.size();
  while (i < n) {
    unsigned char b0 = static_cast<unsigned char>(text[i]);
    char32_t cp = 0;
    size_t len = 0;
    if (b0 < 0x80) {
      cp = b0;
      len = 1;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      len = 2;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      len = 3;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      len = 4;
    } else {
      throw ValidationError("malformed UTF-8 at byte offset " + std::to_string(i));
    }
    if (i + len > n) {
      throw ValidationError("truncated UTF-8 sequence at byte offset " + std::to_string(i));
    }
    for (size_t k = 1; k < len; ++k) {
      unsigned char b = static_cast<unsigned char>(text[i + k]);
      if ((b & 0xC0) != 0x80) {
        throw ValidationError("malformed UTF-8 at byte offset " + std::to_string(i + k));
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    // Reject overlongs, surrogates, and out-of-range values.
    static constexpr char32_t kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      throw ValidationError("invalid UTF-8 code point at byte offset " + std::to_string(i));
    }
    cps.push_back(cp);
    i += len;
  }
  return cps;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string encode_utf8(const std::vector<char32_t>& cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) append_utf8(out, cp);
  return out;
}

size_t cp_length(std::string_view text) { return decode_utf8(text).size(); }

std::string normalize(std::string_view text, const NormalizationConfig& cfg) {
  if (all_ascii(text)) {
    std::string out(text);
    if (cfg.casefold) {
      for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      }
    }
    return out;
  }
  NormalizedText nt = normalize_with_map(text, cfg);
  return std::move(nt.bytes);
}

NormalizedText normalize_with_map(std::string_view text, const NormalizationConfig& cfg) {
  NormalizedText out;
  if (all_ascii(text)) {
    out.bytes.assign(text);
    if (cfg.casefold) {
      for (char& c : out.bytes) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      }
    }
    size_t n = text.size();
    out.cp_byte.resize(n + 1);
    out.orig_begin.resize(n);
    out.orig_end.resize(n);
    for (size_t i = 0; i < n; ++i) {
      out.cp_byte[i] = static_cast<uint32_t>(i);
      out.orig_begin[i] = static_cast<uint32_t>(i);
      out.orig_end[i] = static_cast<uint32_t>(i + 1);
    }
    out.cp_byte[n] = static_cast<uint32_t>(n);
    return out;
  }

  std::vector<char32_t> cps = decode_utf8(text);
  const UNormalizer2* norm = normalizer_for(cfg.form);

  auto emit = [&](const std::vector<char32_t>& produced, uint32_t ob, uint32_t oe) {
    for (char32_t cp : produced) {
      out.cp_byte.push_back(static_cast<uint32_t>(out.bytes.size()));
      append_utf8(out.bytes, cp);
      out.orig_begin.push_back(ob);
      out.orig_end.push_back(oe);
    }
  };

  size_t i = 0;
  const size_t n = cps.size();
  while (i < n) {
    // A segment runs until the next normalization boundary; segments
    // normalize independently of their neighbours.
    size_t j = i + 1;
    while (j < n && !unorm2_hasBoundaryBefore(norm, static_cast<UChar32>(cps[j]))) ++j;
    if (j == i + 1) {
      emit(cached_single(norm, cfg.casefold, cfg.form, cps[i]), static_cast<uint32_t>(i),
           static_cast<uint32_t>(j));
    } else {
      auto produced = transform_segment(norm, cfg.casefold, to_utf16(cps.data() + i, j - i));
      emit(produced, static_cast<uint32_t>(i), static_cast<uint32_t>(j));
    }
    i = j;
  }
  out.cp_byte.push_back(static_cast<uint32_t>(out.bytes.size()));
  return out;
}

bool is_word_char(char32_t cp) {
  if (cp == U'\'' || cp == U'’' || cp == U'-') return true;
  if (cp < 0x80) {
    return (cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z') ||
           (cp >= U'0' && cp <= U'9');
  }
  int8_t type = u_charType(static_cast<UChar32>(cp));
  switch (type) {
    case U_UPPERCASE_LETTER:
    case U_LOWERCASE_LETTER:
    case U_TITLECASE_LETTER:
    case U_MODIFIER_LETTER:
    case U_OTHER_LETTER:
    case U_DECIMAL_DIGIT_NUMBER:
    case U_LETTER_NUMBER:
    case U_OTHER_NUMBER:
    case U_NON_SPACING_MARK:
    case U_ENCLOSING_MARK:
    case U_COMBINING_SPACING_MARK:
      return true;
    default:
      return false;
  }
}

}  // namespace atox::uni
