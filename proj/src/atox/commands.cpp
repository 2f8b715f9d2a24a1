#include "atox/commands.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "atox/corpus_filter.hpp"
#include "atox/error.hpp"
#include "atox/pipeline.hpp"
#include "atox/stats.hpp"

namespace atox::commands {

namespace {

std::string need(const io::json& opts, const char* key) {
  if (!opts.contains(key) || !opts[key].is_string() || opts[key].get<std::string>().empty()) {
    throw ValidationError(std::string("missing required option: ") + key);
  }
  return opts[key].get<std::string>();
}

io::json cmd_generate(const io::json& opts) {
  TemplatePack pack = load_pack(need(opts, "pack"));
  PackStats stats = pack_stats(pack);

  std::string out_path = need(opts, "out");
  io::StagedFile out(out_path);
  uint64_t written = 0;
  expand(pack, [&](const GeneratedSentence& s) {
    out.write_line(sentence_to_json(s).dump());
    ++written;
  });
  out.commit();
  if (written != stats.sentence_count) {
    throw RuntimeError("expansion produced " + std::to_string(written) +
                       " sentences but pack_stats predicted " +
                       std::to_string(stats.sentence_count));
  }
  io::json result;
  result["sentences"] = stats.sentence_count;
  result["per_axis"] = stats.per_axis;
  result["out"] = out_path;
  return result;
}

io::json cmd_attribute(const io::json& opts) {
  std::string out_path = need(opts, "out");
  io::StagedFile out(out_path);
  uint64_t records = 0, rolled = 0;
  io::for_each_jsonl(need(opts, "in"), [&](io::json&& rec, size_t) {
    bool had_layers = rec.contains("layers");
    AttributionRecord a = attribution_from_json(rec);
    out.write_line(attribution_to_json(a).dump());
    ++records;
    if (had_layers) ++rolled;
  });
  out.commit();
  io::json result;
  result["records"] = records;
  result["rolled_out"] = rolled;
  result["out"] = out_path;
  return result;
}

io::json cmd_detect(const io::json& opts) {
  Dataset ds = load_dataset(need(opts, "corpus"), need(opts, "translations"),
                            opts.value("attributions", std::string()),
                            opts.value("strict", false));
  std::set<std::string> languages;
  for (const auto& t : ds.translations) languages.insert(t.language);
  std::string lexicon_dir = need(opts, "lexicon_dir");
  std::string source_language = opts.value("source_language", std::string("eng_Latn"));
  LexiconSet lexicons = LexiconSet::load_dir(
      lexicon_dir, std::vector<std::string>(languages.begin(), languages.end()));
  LexiconLoadResult src =
      load_lexicon(lexicon_dir + "/" + source_language + ".txt", source_language);

  ScanResult scan = scan_corpus(ds.records, src.lexicon, lexicons, opts.value("seed", uint64_t{0}),
                                opts.value("threads", 1u));

  if (opts.contains("out_findings")) {
    io::StagedFile out(opts["out_findings"].get<std::string>());
    for (const auto& f : scan.findings) out.write_line(finding_to_json(f).dump());
    out.commit();
  }
  io::json summary = summary_to_json(scan.summary);
  summary["unmatched_translations"] = ds.unmatched_translations;
  if (opts.contains("out_summary")) {
    io::StagedFile out(opts["out_summary"].get<std::string>());
    out.write(summary.dump(2) + "\n");
    out.commit();
  }
  return summary;
}

std::vector<ToxicityFinding> load_findings(const std::string& path) {
  std::vector<ToxicityFinding> findings;
  io::for_each_jsonl(path, [&](io::json&& rec, size_t) {
    findings.push_back(finding_from_json(rec));
  });
  return findings;
}

FlagThresholds parse_thresholds(const io::json& opts) {
  FlagThresholds t;
  if (opts.contains("thresholds")) {
    const auto& th = opts["thresholds"];
    if (th.is_string()) {
      // "0.40,0.90"
      std::string s = th.get<std::string>();
      size_t comma = s.find(',');
      if (comma == std::string::npos) {
        throw ValidationError("thresholds must be 'contribution,gini'");
      }
      try {
        t.contribution_max = std::stod(s.substr(0, comma));
        t.gini_min = std::stod(s.substr(comma + 1));
      } catch (const std::exception&) {
        throw ValidationError("thresholds must be numeric: " + s);
      }
    } else {
      t.contribution_max = th.value("contribution_max", 0.40);
      t.gini_min = th.value("gini_min", 0.90);
    }
  }
  if (t.contribution_max < 0 || t.contribution_max > 1 || t.gini_min < 0 || t.gini_min > 1) {
    throw ValidationError("thresholds must lie in [0,1]");
  }
  return t;
}

std::pair<size_t, size_t> parse_bins(const io::json& opts) {
  std::string bins = opts.value("bins", std::string("20x20"));
  size_t x = bins.find('x');
  if (x == std::string::npos) throw ValidationError("bins must look like '20x20'");
  try {
    return {std::stoul(bins.substr(0, x)), std::stoul(bins.substr(x + 1))};
  } catch (const std::exception&) {
    throw ValidationError("bins must be numeric: " + bins);
  }
}

io::json cmd_robustness(const io::json& opts) {
  Dataset ds = load_dataset(need(opts, "corpus"), need(opts, "translations"),
                            need(opts, "attributions"), opts.value("strict", false));
  std::vector<ToxicityFinding> findings = load_findings(need(opts, "findings"));
  std::map<std::string, const ToxicityFinding*> by_key;
  for (const auto& f : findings) by_key[alignment_key(f.language, f.sentence_id)] = &f;

  std::vector<DescriptorAlignment> alignments = build_descriptor_alignments(ds.records, by_key);
  std::vector<GiniCell> cells = build_cells(alignments);
  PopulationBuild population = build_population(alignments, cells);

  if (opts.contains("out_cells")) {
    io::StagedFile out(opts["out_cells"].get<std::string>());
    out.write(cells_to_csv(cells));
    out.commit();
  }

  FlagThresholds thresholds = parse_thresholds(opts);
  io::json result;
  result["cells"] = cells.size();
  result["defined_cells"] = population.defined_cells;
  result["undefined_cells"] = population.undefined_cells;
  result["population"] = population.items.size();
  result["excluded_records"] = population.excluded_undefined;
  if (!population.items.empty()) {
    RegionReport region = region_stats(population.items, thresholds);
    result["region"] = region_to_json(region);

    auto [cbins, gbins] = parse_bins(opts);
    HeatmapGrid grid =
        heatmap_grid(population.items, uniform_edges(cbins), uniform_edges(gbins));
    if (opts.contains("out_grid")) {
      io::StagedFile out(opts["out_grid"].get<std::string>());
      out.write(grid_to_csv(grid));
      out.commit();
    }
    if (opts.contains("out_svg")) {
      io::StagedFile out(opts["out_svg"].get<std::string>());
      out.write(grid_to_svg(grid, thresholds));
      out.commit();
    }
  }
  if (opts.contains("out_region")) {
    io::StagedFile out(opts["out_region"].get<std::string>());
    out.write(result.dump(2) + "\n");
    out.commit();
  }
  return result;
}

io::json cmd_stats(const io::json& opts) {
  Dataset ds = load_dataset(need(opts, "corpus"), need(opts, "translations"),
                            opts.value("attributions", std::string()),
                            opts.value("strict", false));
  std::vector<ToxicityFinding> findings = load_findings(need(opts, "findings"));
  std::map<std::string, const ToxicityFinding*> by_key;
  for (const auto& f : findings) by_key[alignment_key(f.language, f.sentence_id)] = &f;
  std::vector<DescriptorAlignment> alignments = build_descriptor_alignments(ds.records, by_key);

  RateTable language_rates = aggregate(ds.records, findings, Dimension::Language);
  std::map<std::string, double> chrf_scores;
  if (opts.contains("chrf")) chrf_scores = load_chrf_csv(opts["chrf"].get<std::string>());

  StatsArtifacts out = compute_stats(alignments, language_rates, chrf_scores,
                                     opts.value("seed", uint64_t{0}),
                                     opts.value("resamples", size_t{1000}));
  if (opts.contains("out_csv")) {
    io::StagedFile f(opts["out_csv"].get<std::string>());
    f.write(out.per_language_csv);
    f.commit();
  }
  if (opts.contains("out_json")) {
    io::StagedFile f(opts["out_json"].get<std::string>());
    f.write(out.correlations.dump(2) + "\n");
    f.commit();
  }
  return out.correlations;
}

io::json cmd_filter(const io::json& opts) {
  std::string in_path = need(opts, "in");
  std::string out_path = need(opts, "out");
  std::string format_name = opts.value("format", std::string());
  if (format_name.empty()) {
    format_name = in_path.size() > 6 && in_path.substr(in_path.size() - 6) == ".jsonl" ? "jsonl"
                                                                                       : "tsv";
  }
  BitextFormat format;
  if (format_name == "tsv") format = BitextFormat::Tsv;
  else if (format_name == "jsonl") format = BitextFormat::Jsonl;
  else throw ValidationError("format must be tsv or jsonl");

  FilterPolicy policy = filter_policy_from_string(need(opts, "policy"));
  std::string src_path = need(opts, "src_lexicon");
  std::string tgt_path = need(opts, "tgt_lexicon");
  auto stem = [](const std::string& p) {
    return std::filesystem::path(p).stem().string();
  };
  LexiconLoadResult src = load_lexicon(src_path, stem(src_path));
  LexiconLoadResult tgt = load_lexicon(tgt_path, stem(tgt_path));

  std::ifstream in(in_path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + in_path);
  std::ostringstream kept;
  FilterReport report =
      filter_corpus(in, kept, format, policy, src.lexicon, tgt.lexicon, opts.value("strict", false));

  io::StagedFile out(out_path);
  out.write(kept.str());
  out.commit();

  io::json report_doc = filter_report_to_json(report, policy);
  if (opts.contains("report")) {
    io::StagedFile f(opts["report"].get<std::string>());
    f.write(report_doc.dump(2) + "\n");
    f.commit();
  }
  return report_doc;
}

io::json cmd_annotate_export(const io::json& opts) {
  Dataset ds = load_dataset(need(opts, "corpus"), need(opts, "translations"), std::string(),
                            opts.value("strict", false));
  std::vector<ToxicityFinding> findings = load_findings(need(opts, "findings"));
  std::string language = need(opts, "language");
  AnnotationSheet sheet = export_positives(ds.records, findings, language);
  io::StagedFile out(need(opts, "out"));
  out.write(sheet_to_csv(sheet));
  out.commit();
  return io::json{{"language", language}, {"kind", "positives"}, {"rows", sheet.rows.size()}};
}

io::json cmd_annotate_sample(const io::json& opts) {
  Dataset ds = load_dataset(need(opts, "corpus"), need(opts, "translations"), std::string(),
                            opts.value("strict", false));
  std::vector<ToxicityFinding> findings = load_findings(need(opts, "findings"));
  std::string language = need(opts, "language");
  AnnotationSheet sheet = sample_negatives(
      ds.records, findings, language, SamplingStrata{opts.value("top_k", size_t{5})},
      opts.value("cap", size_t{300}), opts.value("seed", uint64_t{0}));
  io::StagedFile out(need(opts, "out"));
  out.write(sheet_to_csv(sheet));
  out.commit();
  return io::json{{"language", language}, {"kind", "negatives"}, {"rows", sheet.rows.size()}};
}

io::json cmd_annotate_ingest(const io::json& opts) {
  io::json result;
  auto ingest_one = [&](const std::string& path) {
    AnnotationSheet sheet = sheet_from_csv(io::read_file(path));
    EvalRates rates = ingest(sheet);
    io::json doc = rates_to_json(rates);
    if (result.contains("language") && result["language"] != doc["language"]) {
      throw ValidationError("positives and negatives sheets are for different languages");
    }
    for (auto& [key, value] : doc.items()) {
      if (key == "kind") continue;
      result[key] = value;
    }
  };
  if (!opts.contains("positives") && !opts.contains("negatives") && !opts.contains("sheet")) {
    throw ValidationError("annotate-ingest needs --positives, --negatives, or --sheet");
  }
  if (opts.contains("sheet")) ingest_one(opts["sheet"].get<std::string>());
  if (opts.contains("positives")) ingest_one(opts["positives"].get<std::string>());
  if (opts.contains("negatives")) ingest_one(opts["negatives"].get<std::string>());
  if (opts.contains("level")) result["at_level"] = opts["level"];
  if (opts.contains("out")) {
    io::StagedFile f(opts["out"].get<std::string>());
    f.write(result.dump(2) + "\n");
    f.commit();
  }
  return result;
}

io::json cmd_report(const io::json& opts) {
  Dataset ds = load_dataset(need(opts, "corpus"), need(opts, "translations"), std::string(),
                            opts.value("strict", false));
  std::vector<ToxicityFinding> findings = load_findings(need(opts, "findings"));
  Dimension dim = dimension_from_string(opts.value("dimension", std::string("language")));
  RateTable table = aggregate(ds.records, findings, dim);
  if (opts.contains("out_csv")) {
    io::StagedFile f(opts["out_csv"].get<std::string>());
    f.write(rate_table_to_csv(table));
    f.commit();
  }
  std::string json_text = rate_table_to_json(table);
  if (opts.contains("out_json")) {
    io::StagedFile f(opts["out_json"].get<std::string>());
    f.write(json_text);
    f.commit();
  }
  return io::json::parse(json_text);
}

io::json cmd_run(const io::json& opts) {
  io::json merged;
  if (opts.contains("config")) {
    std::string path = opts["config"].get<std::string>();
    merged = io::json::parse(io::read_file(path), nullptr, false);
    if (merged.is_discarded()) throw ValidationError("config file is not valid JSON: " + path);
    // Relative paths in the config resolve against the config's directory.
    std::filesystem::path base = std::filesystem::path(path).parent_path();
    for (const char* key :
         {"pack", "lexicon_dir", "translations", "attributions", "capabilities", "chrf"}) {
      if (merged.contains(key) && merged[key].is_string()) {
        std::filesystem::path p = merged[key].get<std::string>();
        if (!p.empty() && p.is_relative()) merged[key] = (base / p).lexically_normal().string();
      }
    }
  }
  // Flag overrides win over the config file.
  for (const auto& [key, value] : opts.items()) {
    if (key != "config") merged[key] = value;
  }
  return run_pipeline(run_config_from_json(merged));
}

io::json cmd_chrf(const io::json& opts) {
  // Convenience scorer: parallel plain-text files, one segment per line.
  std::ifstream hyp(need(opts, "hypotheses"), std::ios::binary);
  std::ifstream ref(need(opts, "references"), std::ios::binary);
  if (!hyp) throw ValidationError("cannot open hypotheses file");
  if (!ref) throw ValidationError("cannot open references file");
  std::string h, r;
  double sum = 0.0;
  uint64_t n = 0;
  while (std::getline(hyp, h) && std::getline(ref, r)) {
    if (!h.empty() && h.back() == '\r') h.pop_back();
    if (!r.empty() && r.back() == '\r') r.pop_back();
    sum += stats::chrf(h, r);
    ++n;
  }
  if (n == 0) throw ValidationError("no segments to score");
  return io::json{{"segments", n}, {"chrf", sum / static_cast<double>(n)}};
}

}  // namespace

io::json run(const std::string& name, const io::json& options) {
  if (!options.is_object() && !options.is_null()) {
    throw ValidationError("options must be a JSON object");
  }
  const io::json& opts = options.is_null() ? io::json::object() : options;
  if (name == "generate") return cmd_generate(opts);
  if (name == "attribute") return cmd_attribute(opts);
  if (name == "detect") return cmd_detect(opts);
  if (name == "robustness") return cmd_robustness(opts);
  if (name == "stats") return cmd_stats(opts);
  if (name == "chrf") return cmd_chrf(opts);
  if (name == "filter") return cmd_filter(opts);
  if (name == "annotate-export") return cmd_annotate_export(opts);
  if (name == "annotate-sample") return cmd_annotate_sample(opts);
  if (name == "annotate-ingest") return cmd_annotate_ingest(opts);
  if (name == "report") return cmd_report(opts);
  if (name == "run") return cmd_run(opts);
  throw ValidationError("unknown command: " + name);
}

}  // namespace atox::commands
