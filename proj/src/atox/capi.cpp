#include "atox/atox.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "atox/commands.hpp"
#include "atox/error.hpp"
#include "atox/lexicon.hpp"

namespace {

thread_local std::string g_last_error;

atox_status fail(atox_status code, const char* what) {
  g_last_error = what;
  return code;
}

template <typename Fn>
atox_status wrap(Fn&& fn) {
  try {
    fn();
    return ATOX_OK;
  } catch (const atox::ValidationError& e) {
    return fail(ATOX_ERR_VALIDATION, e.what());
  } catch (const std::exception& e) {
    return fail(ATOX_ERR_RUNTIME, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) return nullptr;
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

}  // namespace

struct atox_lexicon {
  atox::ToxicityLexicon impl;
};

extern "C" {

const char* atox_version(void) { return "1.0.0"; }

const char* atox_last_error(void) { return g_last_error.c_str(); }

atox_status atox_lexicon_open(const char* path, const char* language, int casefold, int nfkc,
                              atox_lexicon** out) {
  if (!path || !language || !out) return fail(ATOX_ERR_VALIDATION, "null argument");
  *out = nullptr;
  return wrap([&] {
    atox::uni::NormalizationConfig cfg;
    cfg.casefold = casefold != 0;
    cfg.form = nfkc ? atox::uni::NormForm::NFKC : atox::uni::NormForm::NFC;
    auto loaded = atox::load_lexicon(path, language, cfg);
    *out = new atox_lexicon{std::move(loaded.lexicon)};
  });
}

void atox_lexicon_close(atox_lexicon* lexicon) { delete lexicon; }

size_t atox_lexicon_entry_count(const atox_lexicon* lexicon) {
  return lexicon ? lexicon->impl.size() : 0;
}

atox_status atox_lexicon_is_toxic(const atox_lexicon* lexicon, const char* text, int* out_toxic) {
  if (!lexicon || !text || !out_toxic) return fail(ATOX_ERR_VALIDATION, "null argument");
  return wrap([&] { *out_toxic = lexicon->impl.is_toxic(text) ? 1 : 0; });
}

atox_status atox_lexicon_count_matches(const atox_lexicon* lexicon, const char* text,
                                       size_t* out_count) {
  if (!lexicon || !text || !out_count) return fail(ATOX_ERR_VALIDATION, "null argument");
  return wrap([&] { *out_count = lexicon->impl.count_matches(text); });
}

atox_status atox_lexicon_find_matches(const atox_lexicon* lexicon, const char* text,
                                      atox_match** out_matches, size_t* out_count) {
  if (!lexicon || !text || !out_matches || !out_count) {
    return fail(ATOX_ERR_VALIDATION, "null argument");
  }
  *out_matches = nullptr;
  *out_count = 0;
  return wrap([&] {
    auto spans = lexicon->impl.find_matches(text);
    if (spans.empty()) return;
    auto* arr = static_cast<atox_match*>(std::malloc(spans.size() * sizeof(atox_match)));
    if (!arr) throw atox::RuntimeError("out of memory");
    for (size_t i = 0; i < spans.size(); ++i) {
      arr[i].start = spans[i].start;
      arr[i].end = spans[i].end;
      arr[i].entry = dup_string(spans[i].entry);
      if (!arr[i].entry) {
        atox_matches_free(arr, i);
        throw atox::RuntimeError("out of memory");
      }
    }
    *out_matches = arr;
    *out_count = spans.size();
  });
}

void atox_matches_free(atox_match* matches, size_t count) {
  if (!matches) return;
  for (size_t i = 0; i < count; ++i) std::free(matches[i].entry);
  std::free(matches);
}

atox_status atox_run_command(const char* command, const char* options_json,
                             char** out_result_json) {
  if (!command || !out_result_json) return fail(ATOX_ERR_VALIDATION, "null argument");
  *out_result_json = nullptr;
  return wrap([&] {
    atox::io::json options = atox::io::json::object();
    if (options_json && *options_json) {
      options = atox::io::json::parse(options_json, nullptr, false);
      if (options.is_discarded()) throw atox::ValidationError("options are not valid JSON");
    }
    atox::io::json result = atox::commands::run(command, options);
    char* text = dup_string(result.dump(2));
    if (!text) throw atox::RuntimeError("out of memory");
    *out_result_json = text;
  });
}

void atox_string_free(char* s) { std::free(s); }

}  // extern "C"
