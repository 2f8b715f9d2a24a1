#include "atox/corpus_filter.hpp"

#include <cstdlib>
#include <istream>
#include <ostream>

#include "atox/error.hpp"

namespace atox {

FilterPolicy filter_policy_from_string(const std::string& s) {
  if (s == "baseline") return FilterPolicy::Baseline;
  if (s == "max_add_1") return FilterPolicy::MaxAdd1;
  if (s == "no_add") return FilterPolicy::NoAdd;
  if (s == "no_tox") return FilterPolicy::NoTox;
  throw ValidationError("unknown filter policy: " + s);
}

const char* to_string(FilterPolicy p) {
  switch (p) {
    case FilterPolicy::Baseline: return "baseline";
    case FilterPolicy::MaxAdd1: return "max_add_1";
    case FilterPolicy::NoAdd: return "no_add";
    case FilterPolicy::NoTox: return "no_tox";
  }
  return "?";
}

PairToxicity pair_toxicity(std::string_view src, std::string_view tgt,
                           const ToxicityLexicon& src_lexicon,
                           const ToxicityLexicon& tgt_lexicon) {
  return PairToxicity{src_lexicon.count_matches(src), tgt_lexicon.count_matches(tgt)};
}

bool keep(const PairToxicity& pair, FilterPolicy policy) {
  uint64_t diff = pair.src_tox > pair.tgt_tox ? pair.src_tox - pair.tgt_tox
                                              : pair.tgt_tox - pair.src_tox;
  switch (policy) {
    case FilterPolicy::Baseline: return true;
    case FilterPolicy::MaxAdd1: return diff <= 1;
    case FilterPolicy::NoAdd: return diff == 0;
    case FilterPolicy::NoTox: return pair.src_tox + pair.tgt_tox == 0;
  }
  return true;
}

FilterReport filter_corpus(std::istream& in, std::ostream& out, BitextFormat format,
                           FilterPolicy policy, const ToxicityLexicon& src_lexicon,
                           const ToxicityLexicon& tgt_lexicon, bool strict) {
  FilterReport report;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++report.input;

    std::string src, tgt;
    bool ok = true;
    if (format == BitextFormat::Tsv) {
      size_t tab = line.find('\t');
      if (tab == std::string::npos) ok = false;
      else {
        src = line.substr(0, tab);
        tgt = line.substr(tab + 1);
        // A bitext row is exactly src \t tgt.
        if (tgt.find('\t') != std::string::npos) ok = false;
      }
    } else {
      io::json rec = io::json::parse(line, nullptr, false);
      if (rec.is_discarded() || !rec.contains("src") || !rec.contains("tgt") ||
          !rec["src"].is_string() || !rec["tgt"].is_string()) {
        ok = false;
      } else {
        src = rec["src"].get<std::string>();
        tgt = rec["tgt"].get<std::string>();
      }
    }
    if (!ok) {
      if (strict) {
        throw ValidationError("malformed bitext record at line " + std::to_string(line_no));
      }
      ++report.malformed;
      continue;
    }

    PairToxicity pair;
    try {
      pair = pair_toxicity(src, tgt, src_lexicon, tgt_lexicon);
    } catch (const std::exception&) {
      if (strict) throw;
      ++report.malformed;
      continue;
    }
    if (keep(pair, policy)) {
      ++report.kept;
      out << line << '\n';
    } else {
      ++report.dropped;
      ++report.drop_histogram[{pair.src_tox, pair.tgt_tox}];
    }
  }
  return report;
}

io::json filter_report_to_json(const FilterReport& r, FilterPolicy policy) {
  io::json hist = io::json::array();
  for (const auto& [key, count] : r.drop_histogram) {
    hist.push_back(
        io::json{{"src_tox", key.first}, {"tgt_tox", key.second}, {"dropped", count}});
  }
  io::json doc;
  doc["policy"] = to_string(policy);
  doc["input"] = r.input;
  doc["kept"] = r.kept;
  doc["dropped"] = r.dropped;
  doc["malformed"] = r.malformed;
  doc["drop_histogram"] = std::move(hist);
  return doc;
}

}  // namespace atox
