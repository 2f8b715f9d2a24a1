#include "atox/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <set>
#include <sstream>

#include "atox/csv.hpp"
#include "atox/error.hpp"
#include "atox/rng.hpp"
#include "atox/sha256.hpp"
#include "atox/stats.hpp"

namespace atox {

namespace fs = std::filesystem;

const char* to_string(ExclusionReason r) {
  switch (r) {
    case ExclusionReason::NoWordSeparators: return "no-word-separators";
    case ExclusionReason::AlignmentUnsupported: return "alignment-unsupported";
    case ExclusionReason::LexiconInaccurate: return "lexicon-inaccurate";
  }
  return "?";
}

namespace {

// Scripts where splitting on non-word characters cannot separate words.
constexpr const char* kNoSeparatorLanguages[] = {
    "asm_Beng", "awa_Deva", "ben_Beng", "bho_Deva", "guj_Gujr", "hin_Deva", "hne_Deva",
    "kan_Knda", "kas_Deva", "khm_Khmr", "lao_Laoo", "mag_Deva", "mai_Deva", "mal_Mlym",
    "mar_Deva", "mni_Beng", "mya_Mymr", "npi_Deva", "ory_Orya", "pan_Guru", "san_Deva",
    "sat_Olck", "shn_Mymr", "sin_Sinh", "tam_Taml", "tel_Telu", "tha_Thai"};

// Word splittings cannot be aligned with attribution output.
constexpr const char* kAlignmentUnsupported[] = {"bod_Tibt", "hun_Latn", "jpn_Jpan",
                                                 "kor_Hang", "taq_Latn", "taq_Tfng",
                                                 "yue_Hant"};

// Wordlists dominated by context-sensitive entries.
constexpr const char* kLexiconInaccurate[] = {"pag_Latn", "ibo_Latn"};

constexpr const char* kSupportedLanguages[] = {
    "ace_Latn", "acm_Arab", "acq_Arab", "aeb_Arab", "afr_Latn", "ajp_Arab", "aka_Latn",
    "als_Latn", "amh_Ethi", "apc_Arab", "arb_Arab", "ars_Arab", "ary_Arab", "arz_Arab",
    "ast_Latn", "ayr_Latn", "azb_Arab", "azj_Latn", "bak_Cyrl", "bam_Latn", "ban_Latn",
    "bel_Cyrl", "bem_Latn", "bjn_Arab", "bjn_Latn", "bos_Latn", "bug_Latn", "bul_Cyrl",
    "cat_Latn", "ceb_Latn", "ces_Latn", "cjk_Latn", "ckb_Arab", "crh_Latn", "cym_Latn",
    "dan_Latn", "deu_Latn", "dik_Latn", "dyu_Latn", "dzo_Tibt", "ell_Grek", "eng_Latn",
    "epo_Latn", "est_Latn", "eus_Latn", "ewe_Latn", "fao_Latn", "fij_Latn", "fon_Latn",
    "fra_Latn", "fur_Latn", "fuv_Latn", "gla_Latn", "gle_Latn", "glg_Latn", "grn_Latn",
    "hat_Latn", "hau_Latn", "heb_Hebr", "hrv_Latn", "hye_Armn", "ilo_Latn", "ind_Latn",
    "isl_Latn", "ita_Latn", "jav_Latn", "kab_Latn", "kac_Latn", "kam_Latn", "kas_Arab",
    "kat_Geor", "kaz_Cyrl", "kbp_Latn", "kea_Latn", "khk_Cyrl", "kik_Latn", "kin_Latn",
    "kir_Cyrl", "kmb_Latn", "kmr_Latn", "knc_Arab", "knc_Latn", "kon_Latn", "lij_Latn",
    "lim_Latn", "lin_Latn", "lit_Latn", "lmo_Latn", "ltg_Latn", "ltz_Latn", "lua_Latn",
    "lug_Latn", "luo_Latn", "lus_Latn", "lvs_Latn", "mkd_Cyrl", "mlt_Latn", "min_Latn",
    "mos_Latn", "mri_Latn", "nld_Latn", "nno_Latn", "nob_Latn", "nso_Latn", "nus_Latn",
    "nya_Latn", "oci_Latn", "pap_Latn", "pbt_Arab", "pes_Arab", "plt_Latn", "pol_Latn",
    "por_Latn", "prs_Arab", "quy_Latn", "ron_Latn", "run_Latn", "rus_Cyrl", "sag_Latn",
    "scn_Latn", "slk_Latn", "slv_Latn", "smo_Latn", "sna_Latn", "snd_Arab", "som_Latn",
    "sot_Latn", "spa_Latn", "srd_Latn", "srp_Cyrl", "ssw_Latn", "sun_Latn", "swe_Latn",
    "swh_Latn", "szl_Latn", "tat_Cyrl", "tgk_Cyrl", "tgl_Latn", "tir_Ethi", "tpi_Latn",
    "tsn_Latn", "tso_Latn", "tuk_Latn", "tum_Latn", "tur_Latn", "twi_Latn", "tzm_Tfng",
    "uig_Arab", "ukr_Cyrl", "umb_Latn", "urd_Arab", "uzn_Latn", "vec_Latn", "vie_Latn",
    "war_Latn", "wol_Latn", "xho_Latn", "ydd_Hebr", "yor_Latn", "zho_Hans", "zho_Hant",
    "zsm_Latn", "zul_Latn"};

}  // namespace

const CapabilityTable& CapabilityTable::builtin() {
  static const CapabilityTable table = [] {
    CapabilityTable t;
    for (const char* code : kSupportedLanguages) t.set(code, Caps{true, true, true});
    for (const char* code : kNoSeparatorLanguages) t.set(code, Caps{false, true, true});
    for (const char* code : kAlignmentUnsupported) t.set(code, Caps{true, false, true});
    for (const char* code : kLexiconInaccurate) t.set(code, Caps{true, true, false});
    return t;
  }();
  return table;
}

CapabilityTable CapabilityTable::load(const std::string& path) {
  io::json doc = io::json::parse(io::read_file(path), nullptr, false);
  if (doc.is_discarded()) throw ValidationError("capabilities file is not valid JSON: " + path);
  CapabilityTable t;
  if (!doc.contains("languages") || !doc["languages"].is_object()) {
    throw ValidationError("capabilities file needs a 'languages' object: " + path);
  }
  for (const auto& [code, caps] : doc["languages"].items()) {
    t.set(code, Caps{caps.value("word_separators", true), caps.value("alignment_ok", true),
                     caps.value("lexicon_ok", true)});
  }
  return t;
}

LanguageVerdict CapabilityTable::validate_language(const std::string& code,
                                                   bool assume_pretokenized) const {
  auto it = table_.find(code);
  if (it == table_.end()) throw ValidationError("unknown language: " + code);
  const Caps& caps = it->second;
  if (!caps.word_separators && !assume_pretokenized) {
    return LanguageVerdict{false, ExclusionReason::NoWordSeparators};
  }
  if (!caps.alignment_ok) return LanguageVerdict{false, ExclusionReason::AlignmentUnsupported};
  if (!caps.lexicon_ok) return LanguageVerdict{false, ExclusionReason::LexiconInaccurate};
  return LanguageVerdict{true, std::nullopt};
}

const GeneratedSentence* Dataset::sentence_by_id(const std::string& id) const {
  auto it = corpus_index_.find(id);
  return it == corpus_index_.end() ? nullptr : &corpus[it->second];
}

void Dataset::build(bool strict) {
  corpus_index_.clear();
  for (size_t i = 0; i < corpus.size(); ++i) corpus_index_[corpus[i].id] = i;

  std::map<std::string, const AttributionRecord*> attr_index;
  for (const auto& a : attributions) attr_index[alignment_key(a.language, a.sentence_id)] = &a;

  records.clear();
  unmatched_translations = 0;
  for (const auto& t : translations) {
    const GeneratedSentence* sentence = sentence_by_id(t.sentence_id);
    if (!sentence) {
      if (strict) {
        throw ValidationError("translation references unknown sentence_id: " + t.sentence_id);
      }
      ++unmatched_translations;
      continue;
    }
    TranslationView view;
    view.sentence = sentence;
    view.translation = &t;
    auto it = attr_index.find(alignment_key(t.language, t.sentence_id));
    view.attribution = it == attr_index.end() ? nullptr : it->second;
    records.push_back(view);
  }
}

std::vector<Translation> load_translations(const std::string& path) {
  std::vector<Translation> out;
  io::for_each_jsonl(path, [&](io::json&& rec, size_t line) {
    try {
      out.push_back(Translation{rec.at("sentence_id").get<std::string>(),
                                rec.at("language").get<std::string>(),
                                rec.at("target_text").get<std::string>()});
    } catch (const io::json::exception& e) {
      throw ValidationError(path + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return out;
}

std::vector<GeneratedSentence> load_corpus(const std::string& path) {
  std::vector<GeneratedSentence> out;
  io::for_each_jsonl(path, [&](io::json&& rec, size_t) { out.push_back(sentence_from_json(rec)); });
  return out;
}

Dataset load_dataset(const std::string& corpus_path, const std::string& translations_path,
                     const std::string& attributions_path, bool strict) {
  Dataset ds;
  ds.corpus = load_corpus(corpus_path);
  ds.translations = load_translations(translations_path);
  if (!attributions_path.empty()) {
    io::for_each_jsonl(attributions_path, [&](io::json&& rec, size_t) {
      ds.attributions.push_back(attribution_from_json(rec));
    });
  }
  ds.build(strict);
  return ds;
}

std::map<std::string, double> load_chrf_csv(const std::string& path) {
  std::map<std::string, double> out;
  std::istringstream in(io::read_file(path));
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = io::csv_split(line);
    if (fields.size() != 2) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": expected language,chrf");
    }
    if (line_no == 1 && fields[1] == "chrf") continue;  // header
    try {
      out[fields[0]] = std::stod(fields[1]);
    } catch (const std::exception&) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": bad chrf value");
    }
  }
  return out;
}

std::string cells_to_csv(const std::vector<GiniCell>& cells) {
  std::string out = "language,descriptor,template,n,gini,defined\n";
  for (const auto& c : cells) {
    out += io::csv_row({c.language, c.descriptor_id, c.template_id,
                        std::to_string(c.group_size),
                        c.gini ? io::format_fixed(*c.gini, 4) : "",
                        c.gini ? "1" : "0"});
    out += '\n';
  }
  return out;
}

namespace {

std::string f6(double v) { return io::format_fixed(v, 6); }

struct CorrInput {
  std::vector<std::pair<double, double>> pairs;  // (x, toxicity rate)
};

io::json correlation_block(const std::vector<std::pair<double, double>>& pairs, uint64_t seed,
                           size_t resamples, const char* tag) {
  io::json block;
  block["n"] = pairs.size();
  if (pairs.size() < 2) {
    block["pearson"] = nullptr;
    block["spearman"] = nullptr;
    return block;
  }
  std::vector<double> x, y;
  for (const auto& [a, b] : pairs) {
    x.push_back(a);
    y.push_back(b);
  }
  auto pearson_stat = [](const stats::PairSample& s) -> std::optional<double> {
    std::vector<double> sx, sy;
    for (const auto& [a, b] : s) {
      sx.push_back(a);
      sy.push_back(b);
    }
    try {
      return stats::pearson(sx, sy);
    } catch (const std::exception&) {
      return std::nullopt;
    }
  };
  auto spearman_stat = [](const stats::PairSample& s) -> std::optional<double> {
    std::vector<double> sx, sy;
    for (const auto& [a, b] : s) {
      sx.push_back(a);
      sy.push_back(b);
    }
    try {
      return stats::spearman(sx, sy);
    } catch (const std::exception&) {
      return std::nullopt;
    }
  };
  try {
    double r = stats::pearson(x, y);
    auto ci = stats::bootstrap_ci(pairs, pearson_stat, resamples, 0.95,
                                  rng::derive_seed(seed, "corr", tag));
    io::json entry;
    entry["r"] = r;
    entry["ci_low"] = ci.first;
    entry["ci_high"] = ci.second;
    block["pearson"] = std::move(entry);
  } catch (const std::exception& e) {
    block["pearson"] = io::json{{"error", std::string(e.what())}};
  }
  try {
    double rho = stats::spearman(x, y);
    auto ci = stats::bootstrap_ci(pairs, spearman_stat, resamples, 0.95,
                                  rng::derive_seed(seed, "corr-spearman", tag));
    io::json entry;
    entry["rho"] = rho;
    entry["ci_low"] = ci.first;
    entry["ci_high"] = ci.second;
    block["spearman"] = std::move(entry);
  } catch (const std::exception& e) {
    block["spearman"] = io::json{{"error", std::string(e.what())}};
  }
  return block;
}

}  // namespace

StatsArtifacts compute_stats(const std::vector<DescriptorAlignment>& alignments,
                             const RateTable& language_rates,
                             const std::map<std::string, double>& chrf_by_language,
                             uint64_t seed, size_t resamples) {
  // Group aligned-descriptor contributions per language, split by toxicity.
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_language;
  for (const auto& a : alignments) {
    if (!a.has_aligned_word) continue;
    auto& [toxic, clean] = by_language[a.language];
    (a.toxic ? toxic : clean).push_back(a.contribution);
  }

  std::string csv =
      "language,n_toxic,n_nontoxic,median_chi2,median_p,median_rejected,"
      "halluc_z,halluc_p,halluc_rejected\n";
  for (const auto& [lang, groups] : by_language) {
    const auto& [toxic, clean] = groups;
    std::vector<std::string> fields{lang, std::to_string(toxic.size()),
                                    std::to_string(clean.size())};
    if (toxic.empty() || clean.empty()) {
      fields.insert(fields.end(), {"n/a", "n/a", "n/a", "n/a", "n/a", "n/a"});
    } else {
      try {
        stats::StatResult med = stats::moods_median_test(toxic, clean);
        fields.push_back(f6(med.statistic));
        fields.push_back(f6(med.p_value));
        fields.push_back(med.p_value < 0.05 ? "1" : "0");
      } catch (const std::exception&) {
        fields.insert(fields.end(), {"n/a", "n/a", "n/a"});
      }
      try {
        auto low = [](const std::vector<double>& v) {
          return static_cast<uint64_t>(
              std::count_if(v.begin(), v.end(), [](double c) { return is_low_contribution(c); }));
        };
        stats::StatResult z =
            stats::two_prop_z_one_sided(low(toxic), toxic.size(), low(clean), clean.size());
        fields.push_back(f6(z.statistic));
        fields.push_back(f6(z.p_value));
        fields.push_back(z.p_value < 0.05 ? "1" : "0");
      } catch (const std::exception&) {
        fields.insert(fields.end(), {"n/a", "n/a", "n/a"});
      }
    }
    csv += io::csv_row(fields);
    csv += '\n';
  }

  // Language-level correlations: mean source contribution vs toxicity rate,
  // and (when supplied) translation quality vs toxicity rate.
  std::map<std::string, double> rate_by_language;
  for (const auto& row : language_rates.rows) rate_by_language[row.key] = row.rate;

  std::vector<std::pair<double, double>> contrib_pairs;
  for (const auto& [lang, groups] : by_language) {
    const auto& [toxic, clean] = groups;
    double sum = 0.0;
    size_t n = toxic.size() + clean.size();
    for (double c : toxic) sum += c;
    for (double c : clean) sum += c;
    auto it = rate_by_language.find(lang);
    if (n == 0 || it == rate_by_language.end()) continue;
    contrib_pairs.emplace_back(sum / static_cast<double>(n), it->second);
  }
  std::vector<std::pair<double, double>> chrf_pairs;
  for (const auto& [lang, score] : chrf_by_language) {
    auto it = rate_by_language.find(lang);
    if (it != rate_by_language.end()) chrf_pairs.emplace_back(score, it->second);
  }

  StatsArtifacts out;
  out.per_language_csv = std::move(csv);
  out.correlations["schema_version"] = 1;
  out.correlations["contribution_vs_toxicity"] =
      correlation_block(contrib_pairs, seed, resamples, "contribution");
  if (!chrf_pairs.empty()) {
    out.correlations["chrf_vs_toxicity"] = correlation_block(chrf_pairs, seed, resamples, "chrf");
  }
  return out;
}

RunConfig run_config_from_json(const io::json& doc) {
  RunConfig cfg;
  cfg.pack_path = doc.value("pack", std::string());
  cfg.lexicon_dir = doc.value("lexicon_dir", std::string());
  cfg.translations_path = doc.value("translations", std::string());
  cfg.attributions_path = doc.value("attributions", std::string());
  cfg.capabilities_path = doc.value("capabilities", std::string());
  cfg.chrf_path = doc.value("chrf", std::string());
  cfg.source_language = doc.value("source_language", std::string("eng_Latn"));
  cfg.out_dir = doc.value("out_dir", std::string());
  cfg.seed = doc.value("seed", uint64_t{0});
  cfg.threads = doc.value("threads", 1u);
  cfg.strict = doc.value("strict", false);
  cfg.assume_pretokenized = doc.value("assume_pretokenized", false);
  if (doc.contains("thresholds")) {
    cfg.thresholds.contribution_max = doc["thresholds"].value("contribution_max", 0.40);
    cfg.thresholds.gini_min = doc["thresholds"].value("gini_min", 0.90);
  }
  cfg.contribution_bins = doc.value("contribution_bins", size_t{20});
  cfg.gini_bins = doc.value("gini_bins", size_t{20});
  cfg.negatives_cap = doc.value("negatives_cap", size_t{300});
  cfg.strata_top_k = doc.value("strata_top_k", size_t{5});
  cfg.bootstrap_resamples = doc.value("bootstrap_resamples", size_t{1000});
  return cfg;
}

namespace {

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw ValidationError(std::string(what) + " path is required");
  if (!fs::exists(path)) throw ValidationError(std::string(what) + " not found: " + path);
}

class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::string dir) : dir_(std::move(dir)) {
    fs::create_directories(dir_);
  }

  void add(const std::string& name, const std::string& content) {
    io::StagedFile file(dir_ + "/" + name);
    file.write(content);
    file.commit();
    entries_.push_back(io::json{{"name", name},
                                {"bytes", content.size()},
                                {"sha256", io::Sha256::of(content)}});
  }

  io::json manifest(uint64_t seed) {
    std::sort(entries_.begin(), entries_.end(), [](const io::json& a, const io::json& b) {
      return a["name"].get<std::string>() < b["name"].get<std::string>();
    });
    io::json doc;
    doc["schema_version"] = 1;
    doc["seed"] = seed;
    doc["artifacts"] = entries_;
    return doc;
  }

 private:
  std::string dir_;
  std::vector<io::json> entries_;
};

}  // namespace

namespace {

// Failures surface with the stage that produced them.
template <typename Fn>
auto with_stage(const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("stage ") + stage + ": " + e.what());
  } catch (const RuntimeError& e) {
    throw RuntimeError(std::string("stage ") + stage + ": " + e.what());
  } catch (const std::exception& e) {
    throw RuntimeError(std::string("stage ") + stage + ": " + e.what());
  }
}

}  // namespace

io::json run_pipeline(const RunConfig& config) {
  require_file(config.pack_path, "pack");
  require_file(config.translations_path, "translations");
  if (config.lexicon_dir.empty()) throw ValidationError("lexicon_dir is required");
  if (!fs::is_directory(config.lexicon_dir)) {
    throw ValidationError("lexicon_dir is not a directory: " + config.lexicon_dir);
  }
  if (!config.attributions_path.empty()) require_file(config.attributions_path, "attributions");
  if (config.out_dir.empty()) throw ValidationError("out_dir is required");

  const CapabilityTable table = config.capabilities_path.empty()
                                    ? CapabilityTable::builtin()
                                    : CapabilityTable::load(config.capabilities_path);

  ArtifactWriter artifacts(config.out_dir);

  Dataset ds;
  with_stage("generate", [&] {
    TemplatePack pack = load_pack(config.pack_path);
    ds.corpus = expand_all(pack);
    std::string corpus_jsonl;
    for (const auto& s : ds.corpus) {
      corpus_jsonl += sentence_to_json(s).dump();
      corpus_jsonl += '\n';
    }
    artifacts.add("corpus.jsonl", corpus_jsonl);
  });

  // language validation and exclusion bookkeeping
  std::map<std::string, std::pair<std::string, uint64_t>> exclusions;  // lang -> (reason, count)
  with_stage("validate", [&] {
    ds.translations = load_translations(config.translations_path);
    std::map<std::string, LanguageVerdict> verdicts;
    std::vector<Translation> kept;
    for (auto& t : ds.translations) {
      auto it = verdicts.find(t.language);
      if (it == verdicts.end()) {
        it = verdicts.emplace(t.language,
                              table.validate_language(t.language, config.assume_pretokenized))
                 .first;
      }
      if (it->second.supported) {
        kept.push_back(std::move(t));
      } else {
        auto& slot = exclusions[t.language];
        slot.first = to_string(*it->second.reason);
        ++slot.second;
      }
    }
    ds.translations = std::move(kept);
  });

  // rollout happens on load when records carry layer stacks
  with_stage("attribute", [&] {
    if (config.attributions_path.empty()) return;
    io::for_each_jsonl(config.attributions_path, [&](io::json&& rec, size_t) {
      ds.attributions.push_back(attribution_from_json(rec));
    });
    std::string attr_jsonl;
    for (const auto& a : ds.attributions) {
      attr_jsonl += attribution_to_json(a).dump();
      attr_jsonl += '\n';
    }
    artifacts.add("attributions.jsonl", attr_jsonl);
  });

  ds.build(config.strict);

  std::set<std::string> languages;
  for (const auto& t : ds.translations) languages.insert(t.language);

  ScanResult scan;
  with_stage("detect", [&] {
    LexiconSet lexicons = LexiconSet::load_dir(
        config.lexicon_dir, std::vector<std::string>(languages.begin(), languages.end()));
    LexiconLoadResult src = load_lexicon(
        config.lexicon_dir + "/" + config.source_language + ".txt", config.source_language);
    scan = scan_corpus(ds.records, src.lexicon, lexicons, config.seed, config.threads);

    std::string findings_jsonl;
    for (const auto& f : scan.findings) {
      findings_jsonl += finding_to_json(f).dump();
      findings_jsonl += '\n';
    }
    artifacts.add("findings.jsonl", findings_jsonl);

    io::json summary = summary_to_json(scan.summary);
    summary["unmatched_translations"] = ds.unmatched_translations;
    io::json excl = io::json::array();
    for (const auto& [lang, info] : exclusions) {
      excl.push_back(
          io::json{{"language", lang}, {"reason", info.first}, {"records", info.second}});
    }
    summary["excluded_languages"] = std::move(excl);
    artifacts.add("detect_summary.json", summary.dump(2) + "\n");
  });

  std::vector<DescriptorAlignment> alignments;
  std::map<std::string, RegionReport> region_by_language;
  with_stage("robustness", [&] {
    std::map<std::string, const ToxicityFinding*> findings_by_key;
    for (const auto& f : scan.findings) {
      findings_by_key[alignment_key(f.language, f.sentence_id)] = &f;
    }
    alignments = build_descriptor_alignments(ds.records, findings_by_key);
    std::vector<GiniCell> cells = build_cells(alignments);
    PopulationBuild population = build_population(alignments, cells);
    artifacts.add("cells.csv", cells_to_csv(cells));

    if (population.items.empty()) return;
    RegionReport region = region_stats(population.items, config.thresholds);
    io::json region_doc = region_to_json(region);
    region_doc["excluded_records"] = population.excluded_undefined;
    region_doc["undefined_cells"] = population.undefined_cells;
    region_doc["defined_cells"] = population.defined_cells;
    artifacts.add("region.json", region_doc.dump(2) + "\n");

    HeatmapGrid grid = heatmap_grid(population.items, uniform_edges(config.contribution_bins),
                                    uniform_edges(config.gini_bins));
    artifacts.add("grid.csv", grid_to_csv(grid));
    artifacts.add("heatmap.svg", grid_to_svg(grid, config.thresholds));

    for (const auto& lang : languages) {
      std::vector<DescriptorAlignment> sub;
      for (const auto& a : alignments) {
        if (a.language == lang) sub.push_back(a);
      }
      std::vector<GiniCell> sub_cells = build_cells(sub);
      PopulationBuild sub_pop = build_population(sub, sub_cells);
      if (!sub_pop.items.empty()) {
        region_by_language[lang] = region_stats(sub_pop.items, config.thresholds);
      }
    }
  });

  RateTable language_rates;
  with_stage("stats", [&] {
    language_rates = aggregate(ds.records, scan.findings, Dimension::Language);
    std::map<std::string, double> chrf_scores;
    if (!config.chrf_path.empty()) chrf_scores = load_chrf_csv(config.chrf_path);
    StatsArtifacts stats_out = compute_stats(alignments, language_rates, chrf_scores,
                                             config.seed, config.bootstrap_resamples);
    artifacts.add("stats_language.csv", stats_out.per_language_csv);
    artifacts.add("correlations.json", stats_out.correlations.dump(2) + "\n");
  });

  with_stage("report", [&] {
    for (Dimension d : {Dimension::Language, Dimension::Axis, Dimension::Descriptor,
                        Dimension::Noun, Dimension::Template}) {
      RateTable t =
          d == Dimension::Language ? language_rates : aggregate(ds.records, scan.findings, d);
      artifacts.add(std::string("rates_") + to_string(d) + ".csv", rate_table_to_csv(t));
      artifacts.add(std::string("rates_") + to_string(d) + ".json", rate_table_to_json(t));
    }
    std::vector<LanguageRegionStats> lang_stats;
    for (const auto& row : language_rates.rows) {
      LanguageRegionStats ls;
      ls.language = row.key;
      ls.toxicity_rate = row.rate;
      auto it = region_by_language.find(row.key);
      if (it != region_by_language.end()) {
        ls.toxicity_in_region = it->second.toxicity_in_region;
        ls.toxicity_overall = it->second.toxicity_overall;
      }
      lang_stats.push_back(ls);
    }
    artifacts.add("range_table.csv", range_table_to_csv(toxicity_range_table(lang_stats)));
  });

  with_stage("annotate", [&] {
    for (const auto& lang : languages) {
      AnnotationSheet positives = export_positives(ds.records, scan.findings, lang);
      artifacts.add("positives_" + lang + ".csv", sheet_to_csv(positives));
      AnnotationSheet negatives =
          sample_negatives(ds.records, scan.findings, lang, SamplingStrata{config.strata_top_k},
                           config.negatives_cap, config.seed);
      artifacts.add("negatives_" + lang + ".csv", sheet_to_csv(negatives));
    }
  });

  io::json manifest = artifacts.manifest(config.seed);
  io::write_file(config.out_dir + "/manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

}  // namespace atox
