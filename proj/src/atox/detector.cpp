#include "atox/detector.hpp"

#include <algorithm>
#include <atomic>
#include <set>
#include <thread>

#include "atox/error.hpp"
#include "atox/rng.hpp"

namespace atox {

std::vector<WordSpan> segment_words(std::string_view text) {
  std::vector<char32_t> cps = uni::decode_utf8(text);
  std::vector<WordSpan> words;
  size_t i = 0;
  while (i < cps.size()) {
    if (!uni::is_word_char(cps[i])) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j < cps.size() && uni::is_word_char(cps[j])) ++j;
    std::string w;
    for (size_t k = i; k < j; ++k) uni::append_utf8(w, cps[k]);
    words.push_back(WordSpan{std::move(w), i, j});
    i = j;
  }
  return words;
}

namespace {

// First word whose span contains the match start. Multi-word entries map to
// their first word.
std::optional<size_t> containing_word(const std::vector<WordSpan>& words, size_t match_start) {
  for (size_t i = 0; i < words.size(); ++i) {
    if (match_start >= words[i].start && match_start < words[i].end) return i;
  }
  return std::nullopt;
}

}  // namespace

std::optional<ToxicityFinding> detect_added_toxicity(const TranslationView& view,
                                                     const ToxicityLexicon& source_lexicon,
                                                     const ToxicityLexicon& target_lexicon) {
  const std::string& target_text = view.translation->target_text;
  std::vector<MatchSpan> matches = target_lexicon.find_matches(target_text);
  if (matches.empty()) return std::nullopt;
  // Added toxicity only: a toxic source disqualifies the record entirely.
  if (source_lexicon.is_toxic(view.sentence->text)) return std::nullopt;

  ToxicityFinding f;
  f.sentence_id = view.translation->sentence_id;
  f.language = view.translation->language;
  std::vector<WordSpan> words = segment_words(target_text);
  for (const auto& m : matches) {
    auto w = containing_word(words, m.start);
    if (!w) continue;  // match on a separator-only region cannot happen
    f.matched.push_back(MatchedWord{*w, m.entry, m.start, m.end});
  }
  if (f.matched.empty()) return std::nullopt;
  return f;
}

size_t select_representative(const std::vector<size_t>& candidates, uint64_t seed,
                             std::string_view sentence_id) {
  if (candidates.empty()) throw ValidationError("select_representative: no candidates");
  if (candidates.size() == 1) return candidates.front();
  auto gen = rng::derive(seed, "representative", sentence_id);
  return candidates[gen.bounded(candidates.size())];
}

Role classify_alignment_role(const GeneratedSentence& sentence, const AttributionRecord& attr,
                             size_t target_word_index) {
  WordContribution wc = word_contribution(attr, target_word_index);
  std::vector<WordSpan> source_words = segment_words(sentence.text);
  if (wc.aligned_source_word < 0 ||
      static_cast<size_t>(wc.aligned_source_word) >= source_words.size()) {
    throw RuntimeError("aligned source word " + std::to_string(wc.aligned_source_word) +
                       " out of range for sentence " + sentence.id);
  }
  return sentence.role_at(source_words[static_cast<size_t>(wc.aligned_source_word)].start);
}

namespace {

struct ChunkResult {
  std::vector<ToxicityFinding> findings;
  ScanSummary summary;
};

void merge_summary(ScanSummary& into, const ScanSummary& from) {
  into.records += from.records;
  into.findings += from.findings;
  into.findings_with_attribution += from.findings_with_attribution;
  into.multi_word_findings += from.multi_word_findings;
  into.errors += from.errors;
  into.roles.descriptor += from.roles.descriptor;
  into.roles.template_ += from.roles.template_;
  into.roles.noun += from.roles.noun;
  for (const auto& [lang, counts] : from.per_language) {
    auto& c = into.per_language[lang];
    c.records += counts.records;
    c.findings += counts.findings;
  }
  for (const auto& msg : from.error_samples) {
    if (into.error_samples.size() < 8) into.error_samples.push_back(msg);
  }
}

void scan_one(const TranslationView& view, const ToxicityLexicon& source_lexicon,
              const LexiconSet& target_lexicons, uint64_t seed, ChunkResult& out) {
  ScanSummary& s = out.summary;
  ++s.records;
  const std::string& lang = view.translation->language;
  ++s.per_language[lang].records;
  try {
    const ToxicityLexicon* tgt = target_lexicons.find(lang);
    if (!tgt) throw ValidationError("no lexicon loaded for language: " + lang);
    auto finding = detect_added_toxicity(view, source_lexicon, *tgt);
    if (!finding) return;

    std::set<size_t> distinct;
    for (const auto& m : finding->matched) distinct.insert(m.word_index);
    std::vector<size_t> candidates(distinct.begin(), distinct.end());
    finding->representative_word = select_representative(candidates, seed, finding->sentence_id);
    if (candidates.size() > 1) ++s.multi_word_findings;

    if (view.attribution) {
      Role role = classify_alignment_role(*view.sentence, *view.attribution,
                                          finding->representative_word);
      finding->alignment_role = role;
      finding->source_contribution =
          word_contribution(*view.attribution, finding->representative_word)
              .mean_source_contribution;
      ++s.findings_with_attribution;
      switch (role) {
        case Role::Descriptor: ++s.roles.descriptor; break;
        case Role::Template: ++s.roles.template_; break;
        case Role::Noun: ++s.roles.noun; break;
      }
    }
    ++s.findings;
    ++s.per_language[lang].findings;
    out.findings.push_back(std::move(*finding));
  } catch (const std::exception& e) {
    ++s.errors;
    if (s.error_samples.size() < 8) {
      s.error_samples.push_back(view.translation->sentence_id + " [" + lang + "]: " + e.what());
    }
  }
}

}  // namespace

ScanResult scan_corpus(const std::vector<TranslationView>& records,
                       const ToxicityLexicon& source_lexicon, const LexiconSet& target_lexicons,
                       uint64_t seed, unsigned threads) {
  const size_t n = records.size();
  if (threads == 0) threads = 1;
  size_t n_chunks = threads == 1 ? 1 : (n + 1023) / 1024;
  if (n_chunks < threads && n_chunks > 0) n_chunks = std::min<size_t>(threads, n);
  if (n_chunks == 0) n_chunks = 1;

  std::vector<ChunkResult> chunks(n_chunks);
  size_t per_chunk = (n + n_chunks - 1) / n_chunks;

  auto work = [&](size_t chunk) {
    size_t begin = chunk * per_chunk;
    size_t end = std::min(n, begin + per_chunk);
    for (size_t i = begin; i < end; ++i) {
      scan_one(records[i], source_lexicon, target_lexicons, seed, chunks[chunk]);
    }
  };

  if (threads == 1 || n_chunks == 1) {
    for (size_t c = 0; c < n_chunks; ++c) work(c);
  } else {
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&]() {
        for (;;) {
          size_t c = next.fetch_add(1);
          if (c >= n_chunks) return;
          work(c);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  // Ordered merge keeps output independent of scheduling.
  ScanResult result;
  for (auto& chunk : chunks) {
    merge_summary(result.summary, chunk.summary);
    for (auto& f : chunk.findings) result.findings.push_back(std::move(f));
  }
  return result;
}

io::json finding_to_json(const ToxicityFinding& f) {
  io::json matched = io::json::array();
  for (const auto& m : f.matched) {
    matched.push_back(io::json{
        {"word_index", m.word_index}, {"entry", m.entry}, {"start", m.start}, {"end", m.end}});
  }
  io::json doc;
  doc["sentence_id"] = f.sentence_id;
  doc["language"] = f.language;
  doc["matched"] = std::move(matched);
  doc["representative_word"] = f.representative_word;
  if (f.alignment_role) doc["alignment_role"] = to_string(*f.alignment_role);
  if (f.source_contribution) doc["source_contribution"] = *f.source_contribution;
  return doc;
}

ToxicityFinding finding_from_json(const io::json& doc) {
  ToxicityFinding f;
  try {
    f.sentence_id = doc.at("sentence_id").get<std::string>();
    f.language = doc.value("language", std::string());
    for (const auto& m : doc.value("matched", io::json::array())) {
      f.matched.push_back(MatchedWord{m.at("word_index").get<size_t>(),
                                      m.at("entry").get<std::string>(),
                                      m.at("start").get<size_t>(), m.at("end").get<size_t>()});
    }
    f.representative_word = doc.value("representative_word", size_t{0});
    if (doc.contains("alignment_role")) {
      f.alignment_role = role_from_string(doc["alignment_role"].get<std::string>());
    }
    if (doc.contains("source_contribution")) {
      f.source_contribution = doc["source_contribution"].get<double>();
    }
  } catch (const io::json::exception& e) {
    throw ValidationError(std::string("finding record: ") + e.what());
  }
  return f;
}

io::json summary_to_json(const ScanSummary& s) {
  io::json per_lang;
  for (const auto& [lang, c] : s.per_language) {
    double rate = c.records ? static_cast<double>(c.findings) / static_cast<double>(c.records) : 0.0;
    per_lang[lang] = io::json{{"records", c.records}, {"findings", c.findings}, {"rate", rate}};
  }
  io::json roles;
  uint64_t role_total = s.roles.total();
  auto role_entry = [&](uint64_t count) {
    return io::json{{"count", count},
                    {"pct", role_total ? 100.0 * static_cast<double>(count) /
                                             static_cast<double>(role_total)
                                       : 0.0}};
  };
  roles["descriptor"] = role_entry(s.roles.descriptor);
  roles["template"] = role_entry(s.roles.template_);
  roles["noun"] = role_entry(s.roles.noun);

  io::json doc;
  doc["records"] = s.records;
  doc["findings"] = s.findings;
  doc["findings_with_attribution"] = s.findings_with_attribution;
  doc["multi_word_findings"] = s.multi_word_findings;
  doc["errors"] = s.errors;
  doc["alignment_roles"] = std::move(roles);
  doc["per_language"] = std::move(per_lang);
  if (!s.error_samples.empty()) doc["error_samples"] = s.error_samples;
  return doc;
}

}  // namespace atox
