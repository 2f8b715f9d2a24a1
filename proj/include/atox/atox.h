/*
 * atox - added-toxicity analysis for machine translation output.
 *
 * C interface to the shared library: opaque handles, integer status codes,
 * and a JSON-options command runner covering every pipeline stage. All
 * strings are UTF-8. Functions returning atox_status set a thread-local
 * error message readable via atox_last_error() on failure.
 */
#ifndef ATOX_H
#define ATOX_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum atox_status {
  ATOX_OK = 0,
  /* Bad inputs: malformed files, schema violations, unusable options. */
  ATOX_ERR_VALIDATION = 2,
  /* Failures during otherwise-valid work (I/O, degenerate statistics). */
  ATOX_ERR_RUNTIME = 3
} atox_status;

const char* atox_version(void);

/* Message for the most recent failing call on this thread; never NULL. */
const char* atox_last_error(void);

/* ------------------------------------------------------------------ */
/* Toxicity lexicons                                                    */

typedef struct atox_lexicon atox_lexicon;

/*
 * Loads a wordlist file (UTF-8, one entry per line, '#' comments).
 * casefold/nfkc toggle the normalization applied to entries and scanned
 * text (nfkc=0 selects NFC). The handle is immutable and safe to share
 * across threads.
 */
atox_status atox_lexicon_open(const char* path, const char* language, int casefold, int nfkc,
                              atox_lexicon** out);
void atox_lexicon_close(atox_lexicon* lexicon);

size_t atox_lexicon_entry_count(const atox_lexicon* lexicon);

/* 1 iff the text contains at least one entry bounded by separators. */
atox_status atox_lexicon_is_toxic(const atox_lexicon* lexicon, const char* text, int* out_toxic);

/* Number of boundary-valid occurrences (not distinct entries). */
atox_status atox_lexicon_count_matches(const atox_lexicon* lexicon, const char* text,
                                       size_t* out_count);

typedef struct atox_match {
  size_t start; /* code-point offset, inclusive */
  size_t end;   /* code-point offset, exclusive */
  char* entry;  /* normalized entry */
} atox_match;

/*
 * All occurrences sorted by (start, end). *out_matches receives a malloc'd
 * array of *out_count entries; free with atox_matches_free. Both outputs
 * are set to NULL/0 when nothing matches.
 */
atox_status atox_lexicon_find_matches(const atox_lexicon* lexicon, const char* text,
                                      atox_match** out_matches, size_t* out_count);
void atox_matches_free(atox_match* matches, size_t count);

/* ------------------------------------------------------------------ */
/* Pipeline stages                                                      */

/*
 * Runs one subcommand. Commands: generate, attribute, detect, robustness,
 * stats, chrf, filter, annotate-export, annotate-sample, annotate-ingest,
 * report, run. options_json is a JSON object (NULL means {}); on success
 * *out_result_json receives a malloc'd JSON document describing the
 * outcome. Free it with atox_string_free.
 */
atox_status atox_run_command(const char* command, const char* options_json,
                             char** out_result_json);
void atox_string_free(char* s);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* ATOX_H */
