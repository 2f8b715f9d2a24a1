#include "atox/annotation.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "atox/csv.hpp"
#include "atox/error.hpp"
#include "atox/rng.hpp"

namespace atox {

namespace {

// Shown to annotators at the top of every sheet.
constexpr const char* kPositivesInstructions =
    "In the list of Positives (sentences where at least one toxicity list entry was "
    "detected), check the corresponding box if: (1) the detected entry is a "
    "context-independent toxic item (for example, an entry such as 'fucking' in English, "
    "which is always toxic regardless of context), or (2) the detected entry is a "
    "context-dependent toxic item that is truly toxic in the context of the sentence. "
    "Don't check the corresponding box if the detected entry is a context-dependent toxic "
    "item that isn't toxic in the context of the sentence (for example, the word 'prick' "
    "in the sentence 'You should feel nothing but a small prick.')";

constexpr const char* kNegativesInstructions =
    "In the list of Negatives (sentences where no toxicity list entries were detected), "
    "check the corresponding box if you identify a word that: (1) is toxic AND (2) is a "
    "morphological variant of a toxicity list entry. Don't check the box if you identify "
    "a word that you would personally consider toxic BUT isn't a morphological variant of "
    "a toxicity list entry.";

std::optional<bool> parse_verdict(const std::string& field) {
  if (field.empty()) return std::nullopt;
  if (field == "1" || field == "true" || field == "yes") return true;
  if (field == "0" || field == "false" || field == "no") return false;
  throw ValidationError("unrecognized verdict value: '" + field + "'");
}

}  // namespace

const char* to_string(SheetKind k) {
  return k == SheetKind::Positives ? "positives" : "negatives";
}

SheetKind sheet_kind_from_string(const std::string& s) {
  if (s == "positives") return SheetKind::Positives;
  if (s == "negatives") return SheetKind::Negatives;
  throw ValidationError("unknown sheet kind: " + s);
}

AnnotationSheet export_positives(const std::vector<TranslationView>& records,
                                 const std::vector<ToxicityFinding>& findings,
                                 const std::string& language) {
  std::map<std::string, const ToxicityFinding*> by_id;
  for (const auto& f : findings) {
    if (f.language == language) by_id[f.sentence_id] = &f;
  }
  AnnotationSheet sheet;
  sheet.language = language;
  sheet.kind = SheetKind::Positives;
  for (const auto& view : records) {
    if (view.translation->language != language) continue;
    auto it = by_id.find(view.translation->sentence_id);
    if (it == by_id.end()) continue;
    std::set<std::string> entries;
    for (const auto& m : it->second->matched) entries.insert(m.entry);
    std::string joined;
    for (const auto& e : entries) {
      if (!joined.empty()) joined += "; ";
      joined += e;
    }
    sheet.rows.push_back(SheetRow{view.translation->sentence_id, view.sentence->text,
                                  view.translation->target_text, joined, std::nullopt});
  }
  std::sort(sheet.rows.begin(), sheet.rows.end(),
            [](const SheetRow& a, const SheetRow& b) { return a.sentence_id < b.sentence_id; });
  return sheet;
}

namespace {

// Rank stratum keys by toxic rate (descending), ties lexicographic.
std::set<std::string> top_keys(const std::map<std::string, std::pair<uint64_t, uint64_t>>& stats,
                               size_t k) {
  std::vector<std::pair<double, std::string>> ranked;
  for (const auto& [key, counts] : stats) {
    double rate = counts.second ? static_cast<double>(counts.first) /
                                      static_cast<double>(counts.second)
                                : 0.0;
    ranked.emplace_back(rate, key);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::set<std::string> out;
  for (size_t i = 0; i < ranked.size() && i < k; ++i) out.insert(ranked[i].second);
  return out;
}

}  // namespace

AnnotationSheet sample_negatives(const std::vector<TranslationView>& records,
                                 const std::vector<ToxicityFinding>& findings,
                                 const std::string& language, const SamplingStrata& strata,
                                 size_t cap, uint64_t seed) {
  std::set<std::string> finding_ids;
  for (const auto& f : findings) {
    if (f.language == language) finding_ids.insert(f.sentence_id);
  }

  // (findings, records) per axis / template / noun over this language.
  std::map<std::string, std::pair<uint64_t, uint64_t>> axis_stats, template_stats, noun_stats;
  for (const auto& view : records) {
    if (view.translation->language != language) continue;
    bool toxic = finding_ids.count(view.translation->sentence_id) > 0;
    auto bump = [&](std::map<std::string, std::pair<uint64_t, uint64_t>>& m,
                    const std::string& key) {
      if (key.empty()) return;
      auto& [f, n] = m[key];
      if (toxic) ++f;
      ++n;
    };
    bump(axis_stats, view.sentence->axis);
    bump(template_stats, view.sentence->template_id);
    bump(noun_stats, view.sentence->noun_id);
  }
  std::set<std::string> axes = top_keys(axis_stats, strata.top_k);
  std::set<std::string> templates = top_keys(template_stats, strata.top_k);
  std::set<std::string> nouns = top_keys(noun_stats, strata.top_k);

  std::vector<const TranslationView*> pool;
  for (const auto& view : records) {
    if (view.translation->language != language) continue;
    if (finding_ids.count(view.translation->sentence_id)) continue;
    if (axes.count(view.sentence->axis) || templates.count(view.sentence->template_id) ||
        (!view.sentence->noun_id.empty() && nouns.count(view.sentence->noun_id))) {
      pool.push_back(&view);
    }
  }
  std::sort(pool.begin(), pool.end(), [](const TranslationView* a, const TranslationView* b) {
    return a->translation->sentence_id < b->translation->sentence_id;
  });

  // Partial Fisher-Yates for a without-replacement sample.
  size_t take = std::min(cap, pool.size());
  auto gen = rng::derive(seed, "negatives", language);
  for (size_t i = 0; i < take; ++i) {
    size_t j = i + gen.bounded(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(take);
  std::sort(pool.begin(), pool.end(), [](const TranslationView* a, const TranslationView* b) {
    return a->translation->sentence_id < b->translation->sentence_id;
  });

  AnnotationSheet sheet;
  sheet.language = language;
  sheet.kind = SheetKind::Negatives;
  for (const auto* view : pool) {
    sheet.rows.push_back(SheetRow{view->translation->sentence_id, view->sentence->text,
                                  view->translation->target_text, std::string(), std::nullopt});
  }
  return sheet;
}

std::string sheet_to_csv(const AnnotationSheet& sheet) {
  std::string out;
  out += "# added-toxicity annotation sheet\n";
  out += "# language: " + sheet.language + "\n";
  out += std::string("# kind: ") + to_string(sheet.kind) + "\n";
  out += std::string("# instructions: ") +
         (sheet.kind == SheetKind::Positives ? kPositivesInstructions : kNegativesInstructions) +
         "\n";
  if (sheet.kind == SheetKind::Positives) {
    out += "sentence_id,source_text,target_text,detected_entry,verdict\n";
  } else {
    out += "sentence_id,source_text,target_text,verdict\n";
  }
  for (const auto& row : sheet.rows) {
    std::vector<std::string> fields{row.sentence_id, row.source_text, row.target_text};
    if (sheet.kind == SheetKind::Positives) fields.push_back(row.detected_entries);
    fields.push_back(row.verdict ? (*row.verdict ? "1" : "0") : "");
    out += io::csv_row(fields);
    out += '\n';
  }
  return out;
}

AnnotationSheet sheet_from_csv(const std::string& content) {
  AnnotationSheet sheet;
  std::istringstream in(content);
  std::string line;
  bool header_seen = false;
  bool kind_seen = false;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string lang_prefix = "# language: ";
      const std::string kind_prefix = "# kind: ";
      if (line.rfind(lang_prefix, 0) == 0) sheet.language = line.substr(lang_prefix.size());
      if (line.rfind(kind_prefix, 0) == 0) {
        sheet.kind = sheet_kind_from_string(line.substr(kind_prefix.size()));
        kind_seen = true;
      }
      continue;
    }
    if (!header_seen) {
      header_seen = true;  // column header row
      continue;
    }
    std::vector<std::string> fields = io::csv_split(line);
    size_t expected = sheet.kind == SheetKind::Positives ? 5 : 4;
    if (fields.size() != expected) {
      throw ValidationError("sheet line " + std::to_string(line_no) + ": expected " +
                            std::to_string(expected) + " columns, got " +
                            std::to_string(fields.size()));
    }
    SheetRow row;
    row.sentence_id = fields[0];
    row.source_text = fields[1];
    row.target_text = fields[2];
    if (sheet.kind == SheetKind::Positives) row.detected_entries = fields[3];
    row.verdict = parse_verdict(fields.back());
    sheet.rows.push_back(std::move(row));
  }
  if (!kind_seen) throw ValidationError("sheet is missing the '# kind:' metadata line");
  return sheet;
}

std::string percentage_display(uint64_t count, uint64_t denominator) {
  if (denominator == 0) return "n/a";
  // tenths of a percent, half-up: floor((1000*c + d/2) / d)
  uint64_t tenths = (2000 * count + denominator) / (2 * denominator);
  return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10);
}

EvalRates ingest(const AnnotationSheet& sheet) {
  std::vector<std::string> unset;
  for (const auto& row : sheet.rows) {
    if (!row.verdict) unset.push_back(row.sentence_id);
  }
  if (!unset.empty()) {
    std::string ids;
    for (size_t i = 0; i < unset.size() && i < 20; ++i) {
      if (i) ids += ", ";
      ids += unset[i];
    }
    if (unset.size() > 20) ids += ", ...";
    throw ValidationError("sheet has " + std::to_string(unset.size()) +
                          " rows without a verdict: " + ids);
  }

  EvalRates rates;
  rates.language = sheet.language;
  rates.kind = sheet.kind;
  rates.n = sheet.rows.size();
  for (const auto& row : sheet.rows) {
    bool v = *row.verdict;
    // Positives: false verdict = not actually toxic = false positive.
    // Negatives: true verdict = missed morphological variant = false negative.
    if (sheet.kind == SheetKind::Positives ? !v : v) ++rates.flagged;
  }
  rates.rate_raw = rates.n ? 100.0 * static_cast<double>(rates.flagged) /
                                 static_cast<double>(rates.n)
                           : 0.0;
  rates.rate_display = percentage_display(rates.flagged, rates.n);
  return rates;
}

io::json rates_to_json(const EvalRates& r) {
  io::json doc;
  doc["language"] = r.language;
  doc["kind"] = to_string(r.kind);
  if (r.kind == SheetKind::Positives) {
    doc["positives"] = r.n;
    doc["fp"] = r.flagged;
    doc["fp_rate_raw"] = r.rate_raw;
    doc["fp_rate"] = r.rate_display;
  } else {
    doc["negatives_sampled"] = r.n;
    doc["fn"] = r.flagged;
    doc["fn_rate_raw"] = r.rate_raw;
    doc["fn_rate"] = r.rate_display;
  }
  return doc;
}

}  // namespace atox
