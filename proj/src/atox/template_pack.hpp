#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "atox/jsonl.hpp"

namespace atox {

enum class TemplateStyle { BeforeNoun, AfterNoun, DescriptorOnly };
enum class Plurality { Singular, Plural };
enum class Role { Descriptor, Template, Noun };

const char* to_string(TemplateStyle s);
const char* to_string(Plurality p);
const char* to_string(Role r);
Role role_from_string(const std::string& s);

struct SentenceTemplate {
  std::string id;
  std::string pattern;  // contains exactly one placeholder
  TemplateStyle style;
  Plurality plurality;
};

struct DescriptorTerm {
  std::string id;
  std::string text;
  std::string axis;
  std::string article;      // optional override: "a" or "an"
  std::string plural_text;  // optional override; descriptors are invariant by default
};

struct PersonNoun {
  std::string id;
  std::string singular;
  std::string plural;
  bool gendered = false;
};

struct TemplatePack {
  std::vector<std::string> axes;
  std::vector<SentenceTemplate> templates;
  std::vector<DescriptorTerm> descriptors;
  std::vector<PersonNoun> nouns;
};

struct SpanRange {
  size_t start = 0;  // code-point offsets, end exclusive
  size_t end = 0;
  bool operator==(const SpanRange& o) const { return start == o.start && end == o.end; }
};

// One expanded sentence with every character assigned to exactly one role;
// inter-word spaces, articles, and punctuation belong to the template role.
struct GeneratedSentence {
  std::string id;  // "<template_id>:<descriptor_id>:<noun_id or '-'>:<s|p>"
  std::string text;
  std::string axis;
  std::string template_id;
  std::string descriptor_id;
  std::string noun_id;  // empty for descriptor-only templates
  Plurality plurality = Plurality::Singular;
  std::vector<SpanRange> descriptor_spans;
  std::vector<SpanRange> template_spans;
  std::vector<SpanRange> noun_spans;

  // Role owning a given code-point offset; throws if out of range.
  Role role_at(size_t cp_offset) const;
};

// Parses and validates a pack file (JSON with keys axes/templates/
// descriptors/nouns). Schema violations name the offending record.
TemplatePack load_pack(const std::string& path);
TemplatePack pack_from_json(const io::json& doc);

struct PackStats {
  uint64_t sentence_count = 0;
  std::map<std::string, uint64_t> per_axis;
};

// Counts without materializing the corpus.
PackStats pack_stats(const TemplatePack& pack);

// Deterministic template-major, then descriptor, then noun order.
void expand(const TemplatePack& pack, const std::function<void(const GeneratedSentence&)>& emit);
std::vector<GeneratedSentence> expand_all(const TemplatePack& pack);

io::json sentence_to_json(const GeneratedSentence& s);
GeneratedSentence sentence_from_json(const io::json& doc);

}  // namespace atox
