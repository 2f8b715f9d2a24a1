// Command-line front end for the atox shared library. All work happens
// behind the C API; this binary only maps flags onto option documents.

#include <atox/atox.h>

#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

namespace {

using json = nlohmann::ordered_json;

int run_command(const std::string& name, const json& options) {
  char* result = nullptr;
  atox_status status = atox_run_command(name.c_str(), options.dump().c_str(), &result);
  if (status != ATOX_OK) {
    std::fprintf(stderr, "atox %s: error: %s\n", name.c_str(), atox_last_error());
    return static_cast<int>(status);
  }
  if (result) {
    std::printf("%s\n", result);
    atox_string_free(result);
  }
  return 0;
}

void set_if(json& opts, const char* key, const std::string& value) {
  if (!value.empty()) opts[key] = value;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"added-toxicity analysis toolkit"};
  app.require_subcommand(1);

  std::string cmd_name;
  json opts = json::object();

  // generate
  {
    auto* cmd = app.add_subcommand("generate", "expand a template pack into a corpus");
    static std::string pack, out;
    cmd->add_option("--pack", pack, "template pack JSON")->required();
    cmd->add_option("--out", out, "corpus JSONL output")->required();
    cmd->callback([&] {
      cmd_name = "generate";
      opts["pack"] = pack;
      opts["out"] = out;
    });
  }

  // attribute
  {
    auto* cmd = app.add_subcommand("attribute", "aggregate layer stacks into attributions");
    static std::string in, out;
    cmd->add_option("--in", in, "raw attribution JSONL (steps or layers)")->required();
    cmd->add_option("--out", out, "attribution JSONL output")->required();
    cmd->callback([&] {
      cmd_name = "attribute";
      opts["in"] = in;
      opts["out"] = out;
    });
  }

  // detect
  {
    auto* cmd = app.add_subcommand("detect", "find added toxicity in translations");
    static std::string corpus, translations, attr, lexicon_dir, src_lang, out_findings,
        out_summary;
    static uint64_t seed = 0;
    static unsigned threads = 1;
    static bool strict = false;
    cmd->add_option("--corpus", corpus, "corpus JSONL")->required();
    cmd->add_option("--translations", translations, "translations JSONL")->required();
    cmd->add_option("--attr", attr, "attribution JSONL (optional)");
    cmd->add_option("--lexicon-dir", lexicon_dir, "directory of <language>.txt wordlists")
        ->required();
    cmd->add_option("--src-lang", src_lang, "source language code (default eng_Latn)");
    cmd->add_option("--out", out_findings, "findings JSONL output");
    cmd->add_option("--summary", out_summary, "summary JSON output");
    cmd->add_option("--seed", seed, "global seed");
    cmd->add_option("--threads", threads, "worker threads");
    cmd->add_flag("--strict", strict, "abort on malformed records");
    cmd->callback([&] {
      cmd_name = "detect";
      opts["corpus"] = corpus;
      opts["translations"] = translations;
      set_if(opts, "attributions", attr);
      opts["lexicon_dir"] = lexicon_dir;
      set_if(opts, "source_language", src_lang);
      set_if(opts, "out_findings", out_findings);
      set_if(opts, "out_summary", out_summary);
      opts["seed"] = seed;
      opts["threads"] = threads;
      opts["strict"] = strict;
    });
  }

  // robustness
  {
    auto* cmd = app.add_subcommand("robustness", "gini cells, flagging region, heatmap grid");
    static std::string corpus, translations, attr, findings, thresholds, bins, out_cells,
        out_region, out_grid, out_svg;
    cmd->add_option("--corpus", corpus)->required();
    cmd->add_option("--translations", translations)->required();
    cmd->add_option("--attr", attr, "attribution JSONL")->required();
    cmd->add_option("--findings", findings, "findings JSONL")->required();
    cmd->add_option("--thresholds", thresholds, "contribution,gini (default 0.40,0.90)");
    cmd->add_option("--bins", bins, "heatmap bins, e.g. 20x20");
    cmd->add_option("--out-cells", out_cells, "cells CSV output");
    cmd->add_option("--out-region", out_region, "region report JSON output");
    cmd->add_option("--out-grid", out_grid, "heatmap grid CSV output");
    cmd->add_option("--out-svg", out_svg, "heatmap SVG output");
    cmd->callback([&] {
      cmd_name = "robustness";
      opts["corpus"] = corpus;
      opts["translations"] = translations;
      opts["attributions"] = attr;
      opts["findings"] = findings;
      set_if(opts, "thresholds", thresholds);
      set_if(opts, "bins", bins);
      set_if(opts, "out_cells", out_cells);
      set_if(opts, "out_region", out_region);
      set_if(opts, "out_grid", out_grid);
      set_if(opts, "out_svg", out_svg);
    });
  }

  // stats
  {
    auto* cmd = app.add_subcommand("stats", "per-language statistical battery");
    static std::string corpus, translations, attr, findings, chrf, out_csv, out_json;
    static uint64_t seed = 0;
    static size_t resamples = 1000;
    cmd->add_option("--corpus", corpus)->required();
    cmd->add_option("--translations", translations)->required();
    cmd->add_option("--attr", attr, "attribution JSONL")->required();
    cmd->add_option("--findings", findings)->required();
    cmd->add_option("--chrf", chrf, "per-language chrF CSV (language,chrf)");
    cmd->add_option("--per-language", out_csv, "per-language CSV output");
    cmd->add_option("--out-json", out_json, "correlations JSON output");
    cmd->add_option("--seed", seed);
    cmd->add_option("--resamples", resamples, "bootstrap resamples");
    cmd->callback([&] {
      cmd_name = "stats";
      opts["corpus"] = corpus;
      opts["translations"] = translations;
      opts["attributions"] = attr;
      opts["findings"] = findings;
      set_if(opts, "chrf", chrf);
      set_if(opts, "out_csv", out_csv);
      set_if(opts, "out_json", out_json);
      opts["seed"] = seed;
      opts["resamples"] = resamples;
    });
  }

  // chrf
  {
    auto* cmd = app.add_subcommand("chrf", "score hypotheses against references");
    static std::string hyp, ref;
    cmd->add_option("--hyp", hyp, "hypotheses, one per line")->required();
    cmd->add_option("--ref", ref, "references, one per line")->required();
    cmd->callback([&] {
      cmd_name = "chrf";
      opts["hypotheses"] = hyp;
      opts["references"] = ref;
    });
  }

  // filter
  {
    auto* cmd = app.add_subcommand("filter", "filter a parallel corpus by toxicity imbalance");
    static std::string in, out, report, policy, src_lex, tgt_lex, format;
    static bool strict = false;
    cmd->add_option("--in", in, "bitext TSV or JSONL")->required();
    cmd->add_option("--out", out, "kept records output")->required();
    cmd->add_option("--report", report, "filter report JSON output");
    cmd->add_option("--policy", policy, "baseline|max_add_1|no_add|no_tox")->required();
    cmd->add_option("--src-lexicon", src_lex, "source-language wordlist")->required();
    cmd->add_option("--tgt-lexicon", tgt_lex, "target-language wordlist")->required();
    cmd->add_option("--format", format, "tsv or jsonl (default: by extension)");
    cmd->add_flag("--strict", strict, "abort on malformed records");
    cmd->callback([&] {
      cmd_name = "filter";
      opts["in"] = in;
      opts["out"] = out;
      set_if(opts, "report", report);
      opts["policy"] = policy;
      opts["src_lexicon"] = src_lex;
      opts["tgt_lexicon"] = tgt_lex;
      set_if(opts, "format", format);
      opts["strict"] = strict;
    });
  }

  // annotate export|sample|ingest
  {
    auto* annotate = app.add_subcommand("annotate", "human-evaluation sheets");
    annotate->require_subcommand(1);
    {
      auto* cmd = annotate->add_subcommand("export", "export all positives for a language");
      static std::string corpus, translations, findings, language, out;
      cmd->add_option("--corpus", corpus)->required();
      cmd->add_option("--translations", translations)->required();
      cmd->add_option("--findings", findings)->required();
      cmd->add_option("--language", language)->required();
      cmd->add_option("--out", out, "sheet CSV output")->required();
      cmd->callback([&] {
        cmd_name = "annotate-export";
        opts["corpus"] = corpus;
        opts["translations"] = translations;
        opts["findings"] = findings;
        opts["language"] = language;
        opts["out"] = out;
      });
    }
    {
      auto* cmd = annotate->add_subcommand("sample", "sample negatives for a language");
      static std::string corpus, translations, findings, language, out;
      static size_t cap = 300, top_k = 5;
      static uint64_t seed = 0;
      cmd->add_option("--corpus", corpus)->required();
      cmd->add_option("--translations", translations)->required();
      cmd->add_option("--findings", findings)->required();
      cmd->add_option("--language", language)->required();
      cmd->add_option("--out", out, "sheet CSV output")->required();
      cmd->add_option("--cap", cap, "maximum rows (default 300)");
      cmd->add_option("--top-k", top_k, "strata size per dimension (default 5)");
      cmd->add_option("--seed", seed);
      cmd->callback([&] {
        cmd_name = "annotate-sample";
        opts["corpus"] = corpus;
        opts["translations"] = translations;
        opts["findings"] = findings;
        opts["language"] = language;
        opts["out"] = out;
        opts["cap"] = cap;
        opts["top_k"] = top_k;
        opts["seed"] = seed;
      });
    }
    {
      auto* cmd = annotate->add_subcommand("ingest", "compute FP/FN rates from filled sheets");
      static std::string positives, negatives, sheet, level, out;
      cmd->add_option("--positives", positives, "completed positives sheet");
      cmd->add_option("--negatives", negatives, "completed negatives sheet");
      cmd->add_option("--sheet", sheet, "single completed sheet of either kind");
      cmd->add_option("--level", level, "AT level to record (Low|Medium|High)");
      cmd->add_option("--out", out, "rates JSON output");
      cmd->callback([&] {
        cmd_name = "annotate-ingest";
        set_if(opts, "positives", positives);
        set_if(opts, "negatives", negatives);
        set_if(opts, "sheet", sheet);
        set_if(opts, "level", level);
        set_if(opts, "out", out);
      });
    }
  }

  // report
  {
    auto* cmd = app.add_subcommand("report", "aggregate findings into rate tables");
    static std::string corpus, translations, findings, dimension, out_csv, out_json;
    cmd->add_option("--corpus", corpus)->required();
    cmd->add_option("--translations", translations)->required();
    cmd->add_option("--findings", findings)->required();
    cmd->add_option("--dimension", dimension, "language|axis|descriptor|noun|template")
        ->required();
    cmd->add_option("--out-csv", out_csv);
    cmd->add_option("--out-json", out_json);
    cmd->callback([&] {
      cmd_name = "report";
      opts["corpus"] = corpus;
      opts["translations"] = translations;
      opts["findings"] = findings;
      opts["dimension"] = dimension;
      set_if(opts, "out_csv", out_csv);
      set_if(opts, "out_json", out_json);
    });
  }

  // run
  {
    auto* cmd = app.add_subcommand("run", "run the full pipeline from a config file");
    static std::string config, out_dir;
    static uint64_t seed = 0;
    static unsigned threads = 0;
    static bool strict = false;
    static bool seed_set = false, threads_set = false;
    cmd->add_option("--config", config, "pipeline config JSON")->required();
    cmd->add_option("--out-dir", out_dir, "artifact directory (overrides config)");
    cmd->add_option("--seed", seed)->each([&](const std::string&) { seed_set = true; });
    cmd->add_option("--threads", threads)->each([&](const std::string&) { threads_set = true; });
    cmd->add_flag("--strict", strict);
    cmd->callback([&] {
      cmd_name = "run";
      opts["config"] = config;
      set_if(opts, "out_dir", out_dir);
      if (seed_set) opts["seed"] = seed;
      if (threads_set) opts["threads"] = threads;
      if (strict) opts["strict"] = true;
    });
  }

  CLI11_PARSE(app, argc, argv);
  return run_command(cmd_name, opts);
}
