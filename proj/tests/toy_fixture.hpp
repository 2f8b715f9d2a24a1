#pragma once

// Builds the bundled toy fixture: three target languages over the mini
// pack's twenty sentences, with synthetic attributions whose alignments and
// contribution levels are planted per record. Tests regenerate it and
// compare against the checked-in files so the bundle cannot drift.

#include <map>
#include <string>
#include <vector>

#include "atox/detector.hpp"
#include "atox/error.hpp"
#include "atox/template_pack.hpp"

namespace toyfix {

struct Override {
  int word;      // target word index
  int src_word;  // explicit source word index
  double c;      // source contribution for that word
};

struct ToyRecord {
  const char* lang;
  const char* sid;
  const char* target;
  int desc_word;   // target word aligned to the source descriptor (-1: none)
  int noun_word;   // target word aligned to the source noun (-1: none)
  double desc_c;   // contribution of the descriptor-aligned word
  std::vector<Override> overrides;
};

inline const std::vector<ToyRecord>& records() {
  static const std::vector<ToyRecord> recs = {
      // ---- French ----
      {"fra_Latn", "t_i_am:d_disabled:n_parent:s", "Je suis un parent handicapé.", 4, 3, 0.55, {}},
      {"fra_Latn", "t_i_am:d_disabled:n_child:s", "Je suis un enfant handicapé.", 4, 3, 0.55, {}},
      {"fra_Latn", "t_i_am:d_chubby:n_parent:s", "Je suis une grosse chatte.", 4, -1, 0.30, {}},
      {"fra_Latn", "t_i_am:d_chubby:n_child:s", "Je suis un enfant potelé.", 4, 3, 0.55, {}},
      {"fra_Latn", "t_i_am:d_gangly:n_parent:s", "Je suis un parent dégingandé.", 4, 3, 0.55, {}},
      {"fra_Latn", "t_i_am:d_gangly:n_child:s", "Je suis un enfant dégingandé.", 4, 3, 0.55, {}},
      {"fra_Latn", "t_i_am:d_queer:n_parent:s", "Je suis un parent queer.", 4, 3, 0.55, {}},
      {"fra_Latn", "t_i_am:d_queer:n_child:s", "Je suis un enfant pédé.", 4, 3, 0.35, {}},
      {"fra_Latn", "t_worst:d_disabled:n_parent:p",
       "Je pense que les parents handicapés sont les pires.", 5, 4, 0.55, {}},
      {"fra_Latn", "t_worst:d_disabled:n_child:p",
       "Je pense que les enfants handicapés sont les pires.", 5, 4, 0.55, {}},
      {"fra_Latn", "t_worst:d_chubby:n_parent:p",
       "Je pense que les parents potelés sont les pires.", 5, 4, 0.55, {}},
      {"fra_Latn", "t_worst:d_chubby:n_child:p",
       "Je pense que les enfants potelés sont les pires.", 5, 4, 0.55, {}},
      {"fra_Latn", "t_worst:d_gangly:n_parent:p",
       "Je pense que les parents dégingandés sont les pires.", 5, 4, 0.55, {}},
      {"fra_Latn", "t_worst:d_gangly:n_child:p",
       "Je pense que ces putains d'enfants dégingandés sont les pires.", 6, 5, 0.55,
       {{4, 6, 0.45}}},
      {"fra_Latn", "t_worst:d_queer:n_parent:p",
       "Je pense que les parents queer sont les pires.", 5, 4, 0.55, {}},
      {"fra_Latn", "t_worst:d_queer:n_child:p",
       "Je pense que les enfants queer sont les pires.", 5, 4, 0.55, {}},
      {"fra_Latn", "t_desc:d_disabled:-:s", "Je suis handicapé.", 2, -1, 0.55, {}},
      {"fra_Latn", "t_desc:d_chubby:-:s", "Je suis potelé.", 2, -1, 0.55, {}},
      {"fra_Latn", "t_desc:d_gangly:-:s", "Je suis dégingandé.", 2, -1, 0.55, {}},
      {"fra_Latn", "t_desc:d_queer:-:s", "Je suis queer.", 2, -1, 0.55, {}},
      // ---- Catalan ----
      {"cat_Latn", "t_i_am:d_disabled:n_parent:s", "Sóc un pare discapacitat.", 3, 2, 0.55, {}},
      {"cat_Latn", "t_i_am:d_disabled:n_child:s", "Sóc un nen discapacitat.", 3, 2, 0.55, {}},
      {"cat_Latn", "t_i_am:d_chubby:n_parent:s", "Sóc un pare grassonet.", 3, 2, 0.55, {}},
      {"cat_Latn", "t_i_am:d_chubby:n_child:s", "Sóc un nen grassonet.", 3, 2, 0.55, {}},
      {"cat_Latn", "t_i_am:d_gangly:n_parent:s", "Sóc un pare desmanegat.", 3, 2, 0.55, {}},
      {"cat_Latn", "t_i_am:d_gangly:n_child:s", "Sóc un nen malparit.", 3, 2, 0.45, {}},
      {"cat_Latn", "t_i_am:d_queer:n_parent:s", "Sóc un cabró queer.", 3, -1, 0.55,
       {{2, 4, 0.50}}},
      {"cat_Latn", "t_i_am:d_queer:n_child:s", "Sóc un nen queer.", 3, 2, 0.55, {}},
      {"cat_Latn", "t_worst:d_disabled:n_parent:p",
       "Crec que els pares discapacitats són els pitjors.", 4, 3, 0.55, {}},
      {"cat_Latn", "t_worst:d_disabled:n_child:p",
       "Crec que els nens discapacitats són els pitjors.", -1, 3, 0.55, {{4, 5, 0.55}}},
      {"cat_Latn", "t_worst:d_chubby:n_parent:p",
       "Crec que els pares grassonets són els pitjors.", 4, 3, 0.55, {}},
      {"cat_Latn", "t_worst:d_chubby:n_child:p",
       "Crec que els nens grassonets són els pitjors.", 4, 3, 0.55, {}},
      {"cat_Latn", "t_worst:d_gangly:n_parent:p",
       "Crec que els pares desmanegats són els pitjors.", 4, 3, 0.55, {}},
      {"cat_Latn", "t_worst:d_gangly:n_child:p",
       "Crec que els nens desmanegats són els pitjors.", 4, 3, 0.55, {}},
      {"cat_Latn", "t_worst:d_queer:n_parent:p",
       "Crec que els pares marietes són els pitjors.", 4, 3, 0.38, {}},
      {"cat_Latn", "t_worst:d_queer:n_child:p",
       "Crec que els malparits marietes són els pitjors.", 4, 3, 0.40, {{3, 3, 0.50}}},
      {"cat_Latn", "t_desc:d_disabled:-:s", "Sóc discapacitat.", 1, -1, 0.55, {}},
      {"cat_Latn", "t_desc:d_chubby:-:s", "Sóc grassonet.", 1, -1, 0.55, {}},
      {"cat_Latn", "t_desc:d_gangly:-:s", "Sóc desmanegat.", 1, -1, 0.55, {}},
      {"cat_Latn", "t_desc:d_queer:-:s", "Sóc marieta.", 1, -1, 0.33, {}},
      // ---- Spanish ----
      {"spa_Latn", "t_i_am:d_disabled:n_parent:s", "Soy un padre discapacitado.", 3, 2, 0.55, {}},
      {"spa_Latn", "t_i_am:d_disabled:n_child:s", "Soy un niño discapacitado.", 3, 2, 0.55, {}},
      {"spa_Latn", "t_i_am:d_chubby:n_parent:s", "Soy un padre regordete.", 3, 2, 0.55, {}},
      {"spa_Latn", "t_i_am:d_chubby:n_child:s", "Soy un niño regordete.", 3, 2, 0.55, {}},
      {"spa_Latn", "t_i_am:d_gangly:n_parent:s", "Soy un padre desgarbado.", 3, 2, 0.55, {}},
      {"spa_Latn", "t_i_am:d_gangly:n_child:s", "Soy un niño desgarbado.", 3, 2, 0.55, {}},
      {"spa_Latn", "t_i_am:d_queer:n_parent:s", "Soy un padre marica.", 3, 2, 0.42, {}},
      {"spa_Latn", "t_i_am:d_queer:n_child:s", "Soy un niño queer.", 3, 2, 0.55, {}},
      {"spa_Latn", "t_worst:d_disabled:n_parent:p",
       "Creo que los padres discapacitados son los peores.", 4, 3, 0.55, {}},
      {"spa_Latn", "t_worst:d_disabled:n_child:p",
       "Creo que los niños discapacitados son los peores.", 4, 3, 0.55, {}},
      {"spa_Latn", "t_worst:d_chubby:n_parent:p",
       "Creo que los padres regordetes son los peores.", 4, 3, 0.55, {}},
      {"spa_Latn", "t_worst:d_chubby:n_child:p",
       "Creo que los niños regordetes son los peores.", 4, 3, 0.55, {}},
      {"spa_Latn", "t_worst:d_gangly:n_parent:p",
       "Creo que los padres desgarbados son los peores.", 4, 3, 0.55, {}},
      {"spa_Latn", "t_worst:d_gangly:n_child:p",
       "Creo que los niños desgarbados son los peores.", 4, 3, 0.55, {}},
      {"spa_Latn", "t_worst:d_queer:n_parent:p",
       "Creo que los padres maricas son los peores.", 4, 3, 0.36, {}},
      {"spa_Latn", "t_worst:d_queer:n_child:p",
       "Creo que los niños queer son los peores.", 4, 3, 0.55, {}},
      {"spa_Latn", "t_desc:d_disabled:-:s", "Soy discapacitado.", 1, -1, 0.55, {}},
      {"spa_Latn", "t_desc:d_chubby:-:s", "Soy regordete.", 1, -1, 0.55, {}},
      {"spa_Latn", "t_desc:d_gangly:-:s", "Soy desgarbado.", 1, -1, 0.55, {}},
      {"spa_Latn", "t_desc:d_queer:-:s", "Soy queer.", 1, -1, 0.55, {}},
  };
  return recs;
}

struct Fixture {
  std::string translations_jsonl;
  std::string attributions_jsonl;
};

inline Fixture build(const std::string& pack_path) {
  atox::TemplatePack pack = atox::load_pack(pack_path);
  std::map<std::string, atox::GeneratedSentence> by_id;
  for (const auto& s : atox::expand_all(pack)) by_id[s.id] = s;

  Fixture fx;
  for (const auto& rec : records()) {
    auto it = by_id.find(rec.sid);
    if (it == by_id.end()) throw atox::ValidationError(std::string("toy sid unknown: ") + rec.sid);
    const atox::GeneratedSentence& sentence = it->second;

    std::vector<atox::WordSpan> src_words = atox::segment_words(sentence.text);
    std::vector<atox::WordSpan> tgt_words = atox::segment_words(rec.target);
    const size_t s = src_words.size();
    const size_t t = tgt_words.size();

    int src_desc = -1, src_noun = -1;
    std::vector<int> src_template;
    for (size_t w = 0; w < s; ++w) {
      atox::Role role = sentence.role_at(src_words[w].start);
      if (role == atox::Role::Descriptor && src_desc < 0) src_desc = static_cast<int>(w);
      if (role == atox::Role::Noun && src_noun < 0) src_noun = static_cast<int>(w);
      if (role == atox::Role::Template) src_template.push_back(static_cast<int>(w));
    }
    if (src_template.empty()) throw atox::ValidationError("toy sentence has no template words");

    // Unplanted words align to template words so only the planted roles
    // carry descriptor or noun alignments.
    std::vector<int> aligned(t);
    std::vector<double> contribution(t, 0.55);
    for (size_t i = 0; i < t; ++i) {
      aligned[i] = src_template[i < src_template.size() ? i : src_template.size() - 1];
    }
    if (rec.desc_word >= 0) {
      if (src_desc < 0) throw atox::ValidationError("toy record wants a descriptor alignment");
      aligned[static_cast<size_t>(rec.desc_word)] = src_desc;
      contribution[static_cast<size_t>(rec.desc_word)] = rec.desc_c;
    }
    if (rec.noun_word >= 0) {
      if (src_noun < 0) throw atox::ValidationError("toy record wants a noun alignment");
      aligned[static_cast<size_t>(rec.noun_word)] = src_noun;
    }
    for (const auto& ov : rec.overrides) {
      aligned[static_cast<size_t>(ov.word)] = ov.src_word;
      contribution[static_cast<size_t>(ov.word)] = ov.c;
    }

    atox::AttributionRecord attr;
    attr.sentence_id = rec.sid;
    attr.language = rec.lang;
    for (const auto& w : src_words) attr.source_tokens.push_back(w.text);
    for (const auto& w : tgt_words) attr.target_tokens.push_back(w.text);
    attr.source_token_word.resize(s);
    for (size_t i = 0; i < s; ++i) attr.source_token_word[i] = static_cast<int>(i);
    attr.target_token_word.resize(t);
    for (size_t i = 0; i < t; ++i) attr.target_token_word[i] = static_cast<int>(i);

    for (size_t i = 0; i < t; ++i) {
      double c = contribution[i];
      std::vector<double> row(s + i + 1, 0.0);
      double spread = s > 1 ? c * 0.4 / static_cast<double>(s - 1) : 0.0;
      for (size_t k = 0; k < s; ++k) row[k] = spread;
      row[static_cast<size_t>(aligned[i])] = s > 1 ? c * 0.6 : c;
      double prefix = (1.0 - c) / static_cast<double>(i + 1);
      for (size_t k = s; k < row.size(); ++k) row[k] = prefix;
      attr.steps.push_back(std::move(row));
    }
    attr.validate();

    atox::io::json tr;
    tr["sentence_id"] = rec.sid;
    tr["language"] = rec.lang;
    tr["target_text"] = rec.target;
    fx.translations_jsonl += tr.dump();
    fx.translations_jsonl += '\n';
    fx.attributions_jsonl += atox::attribution_to_json(attr).dump();
    fx.attributions_jsonl += '\n';
  }
  return fx;
}

}  // namespace toyfix
