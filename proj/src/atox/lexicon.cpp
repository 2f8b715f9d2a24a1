#include "atox/lexicon.hpp"

#include <unicode/uchar.h>

#include <algorithm>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include "atox/error.hpp"

namespace atox {

namespace {

bool is_space_cp(char32_t cp) {
  if (cp < 0x80) return cp == U' ' || (cp >= U'\t' && cp <= U'\r');
  return u_isUWhiteSpace(static_cast<UChar32>(cp)) != 0;
}

// Collapse every run of whitespace code points to a single ' '; trim ends.
std::string collapse_whitespace(std::string_view normalized) {
  std::vector<char32_t> cps = uni::decode_utf8(normalized);
  std::string out;
  out.reserve(normalized.size());
  bool pending_space = false;
  for (char32_t cp : cps) {
    if (is_space_cp(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    uni::append_utf8(out, cp);
  }
  return out;
}

// Scan-ready view of a text: normalized, folded, whitespace runs collapsed
// to single spaces, with per-code-point links back to original offsets.
struct ScanText {
  std::string bytes;
  std::vector<char32_t> cps;
  std::vector<uint32_t> cp_byte;     // byte offset per scan cp, plus end sentinel
  std::vector<uint32_t> byte_cp;     // byte offset -> scan cp index
  std::vector<uint32_t> orig_begin;  // original cp range per scan cp
  std::vector<uint32_t> orig_end;
};

ScanText make_scan_text(std::string_view text, const uni::NormalizationConfig& cfg) {
  uni::NormalizedText nt = uni::normalize_with_map(text, cfg);
  std::vector<char32_t> ncps = uni::decode_utf8(nt.bytes);

  ScanText st;
  st.bytes.reserve(nt.bytes.size());
  const size_t n = ncps.size();
  size_t i = 0;
  bool pending_space = false;
  uint32_t pending_begin = 0, pending_end = 0;
  auto push_cp = [&](char32_t cp, uint32_t ob, uint32_t oe) {
    st.cp_byte.push_back(static_cast<uint32_t>(st.bytes.size()));
    uni::append_utf8(st.bytes, cp);
    st.cps.push_back(cp);
    st.orig_begin.push_back(ob);
    st.orig_end.push_back(oe);
  };
  while (i < n) {
    if (is_space_cp(ncps[i])) {
      uint32_t b = nt.orig_begin[i];
      uint32_t e = nt.orig_end[i];
      while (i + 1 < n && is_space_cp(ncps[i + 1])) {
        ++i;
        e = nt.orig_end[i];
      }
      if (!st.cps.empty()) {  // leading whitespace never starts a match
        pending_space = true;
        pending_begin = b;
        pending_end = e;
      }
      ++i;
      continue;
    }
    if (pending_space) {
      push_cp(U' ', pending_begin, pending_end);
      pending_space = false;
    }
    push_cp(ncps[i], nt.orig_begin[i], nt.orig_end[i]);
    ++i;
  }
  st.cp_byte.push_back(static_cast<uint32_t>(st.bytes.size()));
  st.byte_cp.resize(st.bytes.size() + 1);
  for (size_t c = 0; c < st.cps.size(); ++c) {
    for (uint32_t b = st.cp_byte[c]; b < st.cp_byte[c + 1]; ++b) st.byte_cp[b] = static_cast<uint32_t>(c);
  }
  st.byte_cp[st.bytes.size()] = static_cast<uint32_t>(st.cps.size());
  return st;
}

}  // namespace

ToxicityLexicon::ToxicityLexicon(std::string language, const std::vector<std::string>& raw_entries,
                                 uni::NormalizationConfig cfg)
    : language_(std::move(language)), cfg_(cfg) {
  std::set<std::string> unique;
  for (const auto& raw : raw_entries) {
    std::string norm = collapse_whitespace(uni::normalize(raw, cfg_));
    if (!norm.empty()) unique.insert(std::move(norm));
  }
  entries_.assign(unique.begin(), unique.end());
  entry_cp_lengths_.reserve(entries_.size());
  for (const auto& e : entries_) entry_cp_lengths_.push_back(uni::cp_length(e));
  build_automaton();
}

void ToxicityLexicon::build_automaton() {
  // Trie construction over entry bytes.
  struct TrieNode {
    std::map<uint8_t, int32_t> edges;
    int32_t fail = 0;
    int32_t match_head = -1;
    int32_t output_link = -1;
  };
  std::vector<TrieNode> trie(1);
  for (size_t id = 0; id < entries_.size(); ++id) {
    int32_t s = 0;
    for (unsigned char c : entries_[id]) {
      auto it = trie[s].edges.find(c);
      if (it == trie[s].edges.end()) {
        trie.emplace_back();
        it = trie[s].edges.emplace(c, static_cast<int32_t>(trie.size() - 1)).first;
      }
      s = it->second;
    }
    ac_.output_entry.push_back(static_cast<uint32_t>(id));
    ac_.output_next.push_back(trie[s].match_head);
    trie[s].match_head = static_cast<int32_t>(ac_.output_entry.size() - 1);
  }

  // Failure links and output links via BFS; bake a dense byte DFA.
  const size_t n = trie.size();
  ac_.next.assign(n * 256, 0);
  ac_.match_head.resize(n);
  ac_.output_link.resize(n);
  std::deque<int32_t> queue;
  for (int c = 0; c < 256; ++c) {
    auto it = trie[0].edges.find(static_cast<uint8_t>(c));
    if (it != trie[0].edges.end()) {
      trie[it->second].fail = 0;
      ac_.next[c] = it->second;
      queue.push_back(it->second);
    }
  }
  while (!queue.empty()) {
    int32_t s = queue.front();
    queue.pop_front();
    int32_t f = trie[s].fail;
    trie[s].output_link = trie[f].match_head != -1 ? f : trie[f].output_link;
    for (int c = 0; c < 256; ++c) {
      auto it = trie[s].edges.find(static_cast<uint8_t>(c));
      if (it != trie[s].edges.end()) {
        trie[it->second].fail = ac_.next[static_cast<size_t>(f) * 256 + c];
        ac_.next[static_cast<size_t>(s) * 256 + c] = it->second;
        queue.push_back(it->second);
      } else {
        ac_.next[static_cast<size_t>(s) * 256 + c] = ac_.next[static_cast<size_t>(f) * 256 + c];
      }
    }
  }
  for (size_t s = 0; s < n; ++s) {
    ac_.match_head[s] = trie[s].match_head;
    ac_.output_link[s] = trie[s].output_link;
  }
}

template <typename Sink>
void ToxicityLexicon::scan(std::string_view text, Sink&& sink) const {
  if (entries_.empty() || text.empty()) return;
  ScanText st = make_scan_text(text, cfg_);
  const std::string& hay = st.bytes;
  int32_t state = 0;
  for (size_t b = 0; b < hay.size(); ++b) {
    state = ac_.next[static_cast<size_t>(state) * 256 + static_cast<unsigned char>(hay[b])];
    int32_t out_state = ac_.match_head[state] != -1 ? state : ac_.output_link[state];
    while (out_state != -1) {
      for (int32_t oid = ac_.match_head[out_state]; oid != -1; oid = ac_.output_next[oid]) {
        uint32_t entry_id = ac_.output_entry[oid];
        size_t end_byte = b + 1;
        size_t start_byte = end_byte - entries_[entry_id].size();
        size_t cs = st.byte_cp[start_byte];
        size_t ce = st.byte_cp[end_byte - 1] + 1;
        // Both ends must abut a separator or the text boundary.
        bool left_ok = cs == 0 || !uni::is_word_char(st.cps[cs - 1]);
        bool right_ok = ce == st.cps.size() || !uni::is_word_char(st.cps[ce]);
        if (left_ok && right_ok) {
          if (!sink(entry_id, st.orig_begin[cs], st.orig_end[ce - 1])) return;
        }
      }
      out_state = ac_.output_link[out_state];
    }
  }
}

std::vector<MatchSpan> ToxicityLexicon::find_matches(std::string_view text) const {
  std::vector<MatchSpan> spans;
  scan(text, [&](uint32_t entry_id, uint32_t start, uint32_t end) {
    spans.push_back(MatchSpan{entries_[entry_id], start, end});
    return true;
  });
  std::sort(spans.begin(), spans.end(), [](const MatchSpan& a, const MatchSpan& b) {
    if (a.start != b.start) return a.start < b.start;
    if (a.end != b.end) return a.end < b.end;
    return a.entry < b.entry;
  });
  return spans;
}

bool ToxicityLexicon::is_toxic(std::string_view text) const {
  bool found = false;
  scan(text, [&](uint32_t, uint32_t, uint32_t) {
    found = true;
    return false;
  });
  return found;
}

size_t ToxicityLexicon::count_matches(std::string_view text) const {
  size_t count = 0;
  scan(text, [&](uint32_t, uint32_t, uint32_t) {
    ++count;
    return true;
  });
  return count;
}

LexiconLoadResult load_lexicon(const std::string& path, const std::string& language,
                               uni::NormalizationConfig cfg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open lexicon file: " + path);

  std::vector<std::string> raw;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    try {
      (void)uni::decode_utf8(line);
    } catch (const ValidationError&) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": malformed UTF-8");
    }
    raw.push_back(line);
  }

  ToxicityLexicon lexicon(language, raw, cfg);
  if (lexicon.empty()) {
    throw ValidationError("lexicon file has no entries: " + path);
  }
  size_t dropped = raw.size() - lexicon.size();
  return LexiconLoadResult{std::move(lexicon), dropped};
}

void LexiconSet::add(ToxicityLexicon lexicon) {
  std::string lang = lexicon.language();
  if (lang.empty()) throw ValidationError("lexicon language code must be non-empty");
  auto [it, inserted] = lexicons_.emplace(lang, std::move(lexicon));
  if (!inserted) throw ValidationError("duplicate lexicon for language: " + lang);
}

LexiconSet LexiconSet::load_dir(const std::string& dir, const std::vector<std::string>& languages,
                                uni::NormalizationConfig cfg) {
  LexiconSet set;
  for (const auto& lang : languages) {
    if (set.contains(lang)) continue;
    set.add(load_lexicon(dir + "/" + lang + ".txt", lang, cfg).lexicon);
  }
  return set;
}

const ToxicityLexicon* LexiconSet::find(const std::string& language) const {
  auto it = lexicons_.find(language);
  return it == lexicons_.end() ? nullptr : &it->second;
}

const ToxicityLexicon& LexiconSet::at(const std::string& language) const {
  const ToxicityLexicon* lx = find(language);
  if (!lx) throw ValidationError("no lexicon loaded for language: " + language);
  return *lx;
}

}  // namespace atox
