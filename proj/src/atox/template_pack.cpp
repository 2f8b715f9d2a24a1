#include "atox/template_pack.hpp"

#include <algorithm>
#include <set>

#include "atox/error.hpp"
#include "atox/unicode.hpp"

namespace atox {

namespace {

constexpr const char* kNounPhrase = "[NOUN PHRASE]";
constexpr const char* kPluralNounPhrase = "[PLURAL NOUN PHRASE]";
constexpr const char* kDescriptorSlot = "[DESCRIPTOR]";

struct PlaceholderPos {
  size_t byte_start = std::string::npos;
  size_t byte_len = 0;
  const char* token = nullptr;
};

size_t count_occurrences(const std::string& s, const std::string& needle) {
  size_t count = 0, pos = 0;
  while ((pos = s.find(needle, pos)) != std::string::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

PlaceholderPos locate_placeholder(const SentenceTemplate& t) {
  size_t total = count_occurrences(t.pattern, kNounPhrase) +
                 count_occurrences(t.pattern, kPluralNounPhrase) +
                 count_occurrences(t.pattern, kDescriptorSlot);
  // "[PLURAL NOUN PHRASE]" contains "[NOUN PHRASE]"? It does not (prefix
  // differs), so the three counts are disjoint.
  if (total == 0) {
    throw ValidationError("template '" + t.id + "': pattern has no placeholder");
  }
  if (total > 1) {
    throw ValidationError("template '" + t.id + "': pattern has multiple placeholders");
  }
  const char* expected = t.style == TemplateStyle::DescriptorOnly ? kDescriptorSlot
                         : t.plurality == Plurality::Plural       ? kPluralNounPhrase
                                                                  : kNounPhrase;
  size_t pos = t.pattern.find(expected);
  if (pos == std::string::npos) {
    throw ValidationError("template '" + t.id + "': placeholder does not match style '" +
                          to_string(t.style) + "'/" + to_string(t.plurality));
  }
  return PlaceholderPos{pos, std::string(expected).size(), expected};
}

bool starts_with_vowel(const std::string& phrase) {
  if (phrase.empty()) return false;
  char c = phrase[0];
  if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

TemplateStyle style_from_string(const std::string& s, const std::string& id) {
  if (s == "before-noun") return TemplateStyle::BeforeNoun;
  if (s == "after-noun") return TemplateStyle::AfterNoun;
  if (s == "descriptor-only") return TemplateStyle::DescriptorOnly;
  throw ValidationError("template '" + id + "': unknown style '" + s + "'");
}

Plurality plurality_from_string(const std::string& s, const std::string& id) {
  if (s == "singular") return Plurality::Singular;
  if (s == "plural") return Plurality::Plural;
  throw ValidationError("template '" + id + "': unknown plurality '" + s + "'");
}

std::string require_string(const io::json& rec, const char* key, const std::string& what) {
  if (!rec.contains(key) || !rec[key].is_string() || rec[key].get<std::string>().empty()) {
    throw ValidationError(what + ": missing or empty field '" + key + "'");
  }
  return rec[key].get<std::string>();
}

}  // namespace

const char* to_string(TemplateStyle s) {
  switch (s) {
    case TemplateStyle::BeforeNoun: return "before-noun";
    case TemplateStyle::AfterNoun: return "after-noun";
    case TemplateStyle::DescriptorOnly: return "descriptor-only";
  }
  return "?";
}

const char* to_string(Plurality p) {
  return p == Plurality::Singular ? "singular" : "plural";
}

const char* to_string(Role r) {
  switch (r) {
    case Role::Descriptor: return "descriptor";
    case Role::Template: return "template";
    case Role::Noun: return "noun";
  }
  return "?";
}

Role role_from_string(const std::string& s) {
  if (s == "descriptor") return Role::Descriptor;
  if (s == "template") return Role::Template;
  if (s == "noun") return Role::Noun;
  throw ValidationError("unknown role: " + s);
}

Role GeneratedSentence::role_at(size_t cp_offset) const {
  for (const auto& r : descriptor_spans) {
    if (cp_offset >= r.start && cp_offset < r.end) return Role::Descriptor;
  }
  for (const auto& r : noun_spans) {
    if (cp_offset >= r.start && cp_offset < r.end) return Role::Noun;
  }
  for (const auto& r : template_spans) {
    if (cp_offset >= r.start && cp_offset < r.end) return Role::Template;
  }
  throw RuntimeError("offset " + std::to_string(cp_offset) + " outside all spans of sentence " + id);
}

TemplatePack pack_from_json(const io::json& doc) {
  if (!doc.is_object()) throw ValidationError("pack: top level must be a JSON object");
  TemplatePack pack;

  if (doc.contains("axes")) {
    for (const auto& a : doc["axes"]) pack.axes.push_back(a.get<std::string>());
  }
  std::set<std::string> axis_set(pack.axes.begin(), pack.axes.end());

  std::set<std::string> ids;
  for (const auto& rec : doc.value("templates", io::json::array())) {
    SentenceTemplate t;
    t.id = require_string(rec, "id", "template");
    if (!ids.insert("t:" + t.id).second) {
      throw ValidationError("duplicate template id '" + t.id + "'");
    }
    t.pattern = require_string(rec, "pattern", "template '" + t.id + "'");
    t.style = style_from_string(require_string(rec, "style", "template '" + t.id + "'"), t.id);
    t.plurality =
        plurality_from_string(rec.value("plurality", std::string("singular")), t.id);
    locate_placeholder(t);  // validates placeholder count and agreement
    pack.templates.push_back(std::move(t));
  }

  for (const auto& rec : doc.value("descriptors", io::json::array())) {
    DescriptorTerm d;
    d.id = require_string(rec, "id", "descriptor");
    if (!ids.insert("d:" + d.id).second) {
      throw ValidationError("duplicate descriptor id '" + d.id + "'");
    }
    d.text = require_string(rec, "text", "descriptor '" + d.id + "'");
    d.axis = require_string(rec, "axis", "descriptor '" + d.id + "'");
    if (!axis_set.empty() && !axis_set.count(d.axis)) {
      throw ValidationError("descriptor '" + d.id + "': axis '" + d.axis +
                            "' not in declared axis list");
    }
    d.article = rec.value("article", std::string());
    if (!d.article.empty() && d.article != "a" && d.article != "an") {
      throw ValidationError("descriptor '" + d.id + "': article override must be 'a' or 'an'");
    }
    d.plural_text = rec.value("plural", std::string());
    pack.descriptors.push_back(std::move(d));
  }

  for (const auto& rec : doc.value("nouns", io::json::array())) {
    PersonNoun n;
    n.id = require_string(rec, "id", "noun");
    if (!ids.insert("n:" + n.id).second) {
      throw ValidationError("duplicate noun id '" + n.id + "'");
    }
    n.singular = require_string(rec, "singular", "noun '" + n.id + "'");
    n.plural = rec.value("plural", std::string());
    n.gendered = rec.value("gender_marking", std::string("neutral")) == "gendered";
    pack.nouns.push_back(std::move(n));
  }

  bool any_plural = std::any_of(pack.templates.begin(), pack.templates.end(), [](const auto& t) {
    return t.plurality == Plurality::Plural && t.style != TemplateStyle::DescriptorOnly;
  });
  if (any_plural) {
    for (const auto& n : pack.nouns) {
      if (n.plural.empty()) {
        throw ValidationError("noun '" + n.id + "': plural form required by plural templates");
      }
    }
  }
  return pack;
}

TemplatePack load_pack(const std::string& path) {
  io::json doc = io::json::parse(io::read_file(path), nullptr, false);
  if (doc.is_discarded()) throw ValidationError("pack file is not valid JSON: " + path);
  return pack_from_json(doc);
}

PackStats pack_stats(const TemplatePack& pack) {
  uint64_t noun_templates = 0, desc_templates = 0;
  for (const auto& t : pack.templates) {
    if (t.style == TemplateStyle::DescriptorOnly) ++desc_templates;
    else ++noun_templates;
  }
  PackStats stats;
  uint64_t per_descriptor = noun_templates * pack.nouns.size() + desc_templates;
  stats.sentence_count = per_descriptor * pack.descriptors.size();
  for (const auto& d : pack.descriptors) stats.per_axis[d.axis] += per_descriptor;
  return stats;
}

namespace {

struct Piece {
  std::string text;
  Role role;
};

void build_pieces(const SentenceTemplate& t, const DescriptorTerm& d, const PersonNoun* n,
                  std::vector<Piece>& out) {
  std::string desc = d.text;
  if (t.plurality == Plurality::Plural && !d.plural_text.empty()) desc = d.plural_text;
  switch (t.style) {
    case TemplateStyle::DescriptorOnly:
      out.push_back({desc, Role::Descriptor});
      break;
    case TemplateStyle::BeforeNoun:
      out.push_back({desc, Role::Descriptor});
      out.push_back({" ", Role::Template});
      out.push_back({t.plurality == Plurality::Plural ? n->plural : n->singular, Role::Noun});
      break;
    case TemplateStyle::AfterNoun:
      out.push_back({t.plurality == Plurality::Plural ? n->plural : n->singular, Role::Noun});
      out.push_back({t.plurality == Plurality::Plural ? " who are " : " who is ", Role::Template});
      out.push_back({desc, Role::Descriptor});
      break;
  }
}

// If the text before the placeholder ends with the article "a" or "an",
// rewrite it to agree with the phrase that follows.
void fix_article(std::string& prefix, const DescriptorTerm& d, const std::string& phrase_start) {
  auto ends_with_word = [&](const std::string& w) {
    // needs " w " shape: word boundary before, single space after
    if (prefix.size() < w.size() + 1 || prefix.back() != ' ') return false;
    size_t start = prefix.size() - 1 - w.size();
    if (prefix.compare(start, w.size(), w) != 0) return false;
    return start == 0 || prefix[start - 1] == ' ';
  };
  std::string wanted;
  if (!d.article.empty()) wanted = d.article;
  else wanted = starts_with_vowel(phrase_start) ? "an" : "a";
  for (const char* art : {"a", "an"}) {
    if (ends_with_word(art)) {
      prefix.resize(prefix.size() - 1 - std::string(art).size());
      prefix += wanted;
      prefix += ' ';
      return;
    }
  }
}

GeneratedSentence assemble(const SentenceTemplate& t, const DescriptorTerm& d,
                           const PersonNoun* n) {
  PlaceholderPos ph = locate_placeholder(t);
  std::string prefix = t.pattern.substr(0, ph.byte_start);
  std::string suffix = t.pattern.substr(ph.byte_start + ph.byte_len);

  std::vector<Piece> pieces;
  build_pieces(t, d, n, pieces);
  if (t.plurality == Plurality::Singular && t.style != TemplateStyle::DescriptorOnly) {
    fix_article(prefix, d, pieces.front().text);
  }

  GeneratedSentence s;
  s.template_id = t.id;
  s.descriptor_id = d.id;
  s.noun_id = n ? n->id : std::string();
  s.plurality = t.plurality;
  s.axis = d.axis;
  s.id = t.id + ":" + d.id + ":" + (n ? n->id : "-") + ":" +
         (t.plurality == Plurality::Plural ? "p" : "s");

  auto add_span = [&](Role role, size_t start, size_t end) {
    if (start == end) return;
    auto& list = role == Role::Descriptor ? s.descriptor_spans
                 : role == Role::Noun     ? s.noun_spans
                                          : s.template_spans;
    if (!list.empty() && list.back().end == start) list.back().end = end;
    else list.push_back({start, end});
  };

  size_t cp = 0;
  auto append_piece = [&](const std::string& text, Role role) {
    size_t len = uni::cp_length(text);
    s.text += text;
    add_span(role, cp, cp + len);
    cp += len;
  };

  append_piece(prefix, Role::Template);
  for (const auto& p : pieces) append_piece(p.text, p.role);
  append_piece(suffix, Role::Template);
  return s;
}

}  // namespace

void expand(const TemplatePack& pack, const std::function<void(const GeneratedSentence&)>& emit) {
  for (const auto& t : pack.templates) {
    for (const auto& d : pack.descriptors) {
      if (t.style == TemplateStyle::DescriptorOnly) {
        emit(assemble(t, d, nullptr));
      } else {
        for (const auto& n : pack.nouns) emit(assemble(t, d, &n));
      }
    }
  }
}

std::vector<GeneratedSentence> expand_all(const TemplatePack& pack) {
  std::vector<GeneratedSentence> out;
  expand(pack, [&](const GeneratedSentence& s) { out.push_back(s); });
  return out;
}

io::json sentence_to_json(const GeneratedSentence& s) {
  auto spans_json = [](const std::vector<SpanRange>& spans) {
    io::json arr = io::json::array();
    for (const auto& r : spans) arr.push_back(io::json::array({r.start, r.end}));
    return arr;
  };
  io::json doc;
  doc["id"] = s.id;
  doc["text"] = s.text;
  doc["axis"] = s.axis;
  doc["template_id"] = s.template_id;
  doc["descriptor_id"] = s.descriptor_id;
  doc["noun_id"] = s.noun_id;
  doc["plurality"] = to_string(s.plurality);
  doc["spans"] = io::json{{"descriptor", spans_json(s.descriptor_spans)},
                          {"template", spans_json(s.template_spans)},
                          {"noun", spans_json(s.noun_spans)}};
  return doc;
}

GeneratedSentence sentence_from_json(const io::json& doc) {
  GeneratedSentence s;
  try {
    s.id = doc.at("id").get<std::string>();
    s.text = doc.at("text").get<std::string>();
    s.axis = doc.value("axis", std::string());
    s.template_id = doc.value("template_id", std::string());
    s.descriptor_id = doc.value("descriptor_id", std::string());
    s.noun_id = doc.value("noun_id", std::string());
    s.plurality = doc.value("plurality", std::string("singular")) == "plural"
                      ? Plurality::Plural
                      : Plurality::Singular;
    auto read_spans = [&](const char* key, std::vector<SpanRange>& out) {
      const auto& spans = doc.at("spans");
      if (!spans.contains(key)) return;
      for (const auto& r : spans[key]) out.push_back({r.at(0).get<size_t>(), r.at(1).get<size_t>()});
    };
    read_spans("descriptor", s.descriptor_spans);
    read_spans("template", s.template_spans);
    read_spans("noun", s.noun_spans);
  } catch (const io::json::exception& e) {
    throw ValidationError(std::string("corpus record: ") + e.what());
  }
  return s;
}

}  // namespace atox
