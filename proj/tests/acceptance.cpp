// Acceptance suite: one criterion per check, one pass/fail line each.
// Exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "atox/annotation.hpp"
#include "atox/corpus_filter.hpp"
#include "atox/detector.hpp"
#include "atox/pipeline.hpp"
#include "atox/report.hpp"
#include "atox/robustness.hpp"
#include "atox/rng.hpp"
#include "atox/stats.hpp"
#include "oracles.hpp"

using namespace atox;

namespace {

struct Failure {
  std::string detail;
};

void require(bool condition, const std::string& detail) {
  if (!condition) throw Failure{detail};
}

int g_failures = 0;

void criterion(int number, const std::string& name, const std::function<void()>& body) {
  auto start = std::chrono::steady_clock::now();
  std::string verdict = "PASS";
  std::string detail;
  try {
    body();
  } catch (const Failure& f) {
    verdict = "FAIL";
    detail = f.detail;
    ++g_failures;
  } catch (const std::exception& e) {
    verdict = "FAIL";
    detail = std::string("exception: ") + e.what();
    ++g_failures;
  }
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - start)
                .count();
  std::printf("[%s] %2d. %-22s (%lld ms)%s%s\n", verdict.c_str(), number, name.c_str(),
              static_cast<long long>(ms), detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
}

// Upper-tail of the standard normal via Simpson quadrature of the density;
// independent of the erfc-based implementation path.
double normal_sf_quadrature(double z) {
  const double upper = z + 40.0;
  const int steps = 400000;  // even
  const double h = (upper - z) / steps;
  auto phi = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(8.0 * std::atan(1.0)); };
  double sum = phi(z) + phi(upper);
  for (int i = 1; i < steps; ++i) {
    double t = z + i * h;
    sum += phi(t) * (i % 2 ? 4.0 : 2.0);
  }
  return sum * h / 3.0;
}

std::string data_path(const char* rel) { return std::string(ATOX_DATA_DIR) + "/" + rel; }

std::string fresh_dir(const std::string& name) {
  std::string dir = "acceptance_tmp/" + name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");

  criterion(1, "matcher-semantics", [] {
    ToxicityLexicon lx("tst", {"ass"});
    require(lx.find_matches("bass").empty(), "bass must not match");
    require(lx.find_matches("assistant").empty(), "assistant must not match");
    require(lx.find_matches("the bass assistant").empty(), "no match in carrier sentence");
    require(lx.find_matches("ass").size() == 1, "standalone entry must match");
    auto bang = lx.find_matches("kick ass!");
    require(bang.size() == 1 && bang[0].start == 5 && bang[0].end == 8,
            "punctuation must act as a separator");
  });

  criterion(2, "matcher-oracle", [] {
    const std::vector<std::string> alphabet = {"a", "b", "c", "A",  "B", "d", "e", "Ж", "ж",
                                               "é", "É", "1", "-",  "'", " ", " ", ".", "!",
                                               ",", "?", " ", "\t", "ö", "Ö"};
    rng::SplitMix64 gen(0xACCE9);
    for (int iter = 0; iter < 10000; ++iter) {
      std::vector<std::string> entries;
      size_t n_entries = 1 + gen.bounded(4);
      for (size_t e = 0; e < n_entries; ++e) {
        std::string entry;
        size_t len = 1 + gen.bounded(5);
        for (size_t k = 0; k < len; ++k) entry += alphabet[gen.bounded(12)];
        if (gen.bounded(4) == 0) {
          entry += ' ';
          entry += alphabet[gen.bounded(12)];
        }
        entries.push_back(entry);
      }
      std::string text;
      size_t len = gen.bounded(40);
      for (size_t k = 0; k < len; ++k) text += alphabet[gen.bounded(alphabet.size())];

      ToxicityLexicon lx("tst", entries);
      auto got = lx.find_matches(text);
      auto want = oracles::find_matches(entries, text);
      if (got != want) {
        throw Failure{"mismatch vs naive scan on iteration " + std::to_string(iter) +
                      " text='" + text + "'"};
      }
    }
  });

  criterion(3, "gini-oracle", [] {
    std::vector<std::string> same(30, "w");
    require(gini_impurity(same) == 0.0, "pure cell must be exactly 0");
    std::vector<std::string> distinct;
    for (int i = 0; i < 30; ++i) distinct.push_back("w" + std::to_string(i));
    require(std::abs(gini_impurity(distinct) - 29.0 / 30.0) < 1e-15, "29/30 analytic case");
    require(std::abs(gini_impurity({"a", "a", "b"}) - 4.0 / 9.0) < 1e-15, "4/9 analytic case");

    rng::SplitMix64 gen(0x61111);
    for (int iter = 0; iter < 1000; ++iter) {
      size_t n = 1 + gen.bounded(30);
      size_t vocab = 1 + gen.bounded(6);
      std::vector<std::string> words;
      std::map<std::string, double> counts;
      for (size_t i = 0; i < n; ++i) {
        words.push_back("w" + std::to_string(gen.bounded(vocab)));
        counts[words.back()] += 1.0;
      }
      double expect = 1.0;
      for (auto& [w, c] : counts) {
        double p = c / static_cast<double>(n);
        expect -= p * p;
      }
      require(std::abs(gini_impurity(words) - expect) < 1e-12,
              "gini deviates from 1-sum(p^2) at iteration " + std::to_string(iter));
    }
  });

  criterion(4, "flag-rule", [] {
    FlagThresholds t;
    require(flag(0.35, 0.95, t) == true, "(0.35,0.95) must flag");
    require(flag(0.40, 0.95, t) == false, "(0.40,0.95) must not flag (strict)");
    require(flag(0.35, 0.90, t) == false, "(0.35,0.90) must not flag (strict)");
  });

  criterion(5, "region-bookkeeping", [] {
    std::vector<PopulationItem> population;
    for (int i = 0; i < 5000; ++i) population.push_back({0.2, 0.95, i < 30});
    for (int i = 0; i < 5000; ++i) population.push_back({0.8, 0.2, false});

    RegionReport r = region_stats(population, FlagThresholds{});

    // brute-force oracle over the same population
    size_t oracle_flagged = 0, oracle_toxic = 0, oracle_toxic_flagged = 0;
    for (const auto& item : population) {
      bool f = item.contribution < 0.40 && item.gini > 0.90;
      if (f) ++oracle_flagged;
      if (item.toxic) {
        ++oracle_toxic;
        if (f) ++oracle_toxic_flagged;
      }
    }
    require(r.flagged == oracle_flagged, "flagged count differs from oracle");
    require(r.toxic_total == oracle_toxic, "toxic count differs from oracle");
    require(r.toxic_flagged == oracle_toxic_flagged, "toxic-flagged differs from oracle");
    require(r.toxicity_in_region == 0.006, "in-region toxicity must be 0.60%");
    require(r.toxicity_overall == 0.003, "overall toxicity must be 0.30%");
    require(r.ratio.has_value() && *r.ratio == 2.0, "ratio must be exactly 2.00");
  });

  criterion(6, "attribution-rollout", [] {
    // analytic: identity
    LayerStack id_stack;
    id_stack.encoder_layers = {{{1, 0}, {0, 1}}};
    id_stack.decoder_layers = {{{0, 0, 1}, {0, 0, 0, 1}}};
    auto id_steps = rollout(id_stack);
    require(id_steps[0][2] == 1.0 && id_steps[0][0] == 0.0, "identity case step 0");
    require(id_steps[1][3] == 1.0 && id_steps[1][2] == 0.0, "identity case step 1");
    // analytic: uniform (one decoder layer)
    LayerStack uni_stack;
    uni_stack.encoder_layers = {{{0.5, 0.5}, {0.5, 0.5}}};
    uni_stack.decoder_layers = {{{1.0 / 3, 1.0 / 3, 1.0 / 3},
                                 {0.25, 0.25, 0.25, 0.25}}};
    auto uni_steps = rollout(uni_stack);
    for (size_t i = 0; i < uni_steps.size(); ++i) {
      for (double v : uni_steps[i]) {
        require(std::abs(v - 1.0 / static_cast<double>(2 + i + 1)) < 1e-12,
                "uniform fixed point violated");
      }
    }

    rng::SplitMix64 g(0x5EED);
    for (int iter = 0; iter < 500; ++iter) {
      LayerStack stack = oracles::random_stack(g);
      auto got = rollout(stack);
      auto want = oracles::rollout(stack);
      for (size_t i = 0; i < got.size(); ++i) {
        double sum = 0.0;
        for (size_t k = 0; k < got[i].size(); ++k) {
          require(std::abs(got[i][k] - want[i][k]) < 1e-9,
                  "rollout differs from brute force at iteration " + std::to_string(iter));
          sum += got[i][k];
        }
        require(std::abs(sum - 1.0) < 1e-9, "row mass must stay 1");
      }
    }
  });

  criterion(7, "stat-battery", [] {
    std::vector<double> a = {1, 2, 3, 4};
    std::vector<double> b = {10, 11, 12, 13};
    stats::StatResult med = stats::moods_median_test(a, b);
    require(med.statistic == 8.0, "chi-square must be exactly 8");
    double p_oracle = 2.0 * normal_sf_quadrature(std::sqrt(8.0));
    require(std::abs(med.p_value - p_oracle) < 1e-6,
            "p deviates from the quadrature tail oracle");

    stats::StatResult z = stats::two_prop_z_one_sided(30, 100, 15, 50);
    require(z.statistic == 0.0 && z.p_value == 0.5, "equal proportions must give p=0.5");
    stats::StatResult z2 = stats::two_prop_z_one_sided(60, 100, 40, 100);
    require(std::abs(z2.p_value - normal_sf_quadrature(z2.statistic)) < 1e-6,
            "z-test p deviates from quadrature");

    std::vector<double> x = {1, 2, 3, 4, 5};
    std::vector<double> y = {3, 5, 7, 9, 11};  // 2x+1
    require(std::abs(stats::pearson(x, y) - 1.0) < 1e-12, "pearson of exact line");
    std::vector<double> sx = {1, 2, 3};
    std::vector<double> sy = {1, 3, 2};
    // closed form with distinct ranks: 1 - 6*sum(d^2)/(n(n^2-1))
    double d2 = 0 + 1 + 1;
    require(std::abs(stats::spearman(sx, sy) - (1.0 - 6.0 * d2 / (3.0 * 8.0))) < 1e-12,
            "spearman closed form");
    std::vector<double> rev = {9, 7, 4};
    require(std::abs(stats::spearman(sx, rev) + 1.0) < 1e-12, "reversed order spearman");

    stats::PairSample pairs;
    for (int i = 0; i < 25; ++i) pairs.emplace_back(i, i * i);
    auto mean_stat = [](const stats::PairSample& s) -> std::optional<double> {
      double sum = 0.0;
      for (auto& [px, py] : s) sum += px;
      return sum / static_cast<double>(s.size());
    };
    auto ci1 = stats::bootstrap_ci(pairs, mean_stat, 1000, 0.95, 31337);
    auto ci2 = stats::bootstrap_ci(pairs, mean_stat, 1000, 0.95, 31337);
    require(ci1 == ci2, "bootstrap must be deterministic under a fixed seed");
  });

  criterion(8, "chrf", [] {
    require(stats::chrf("abcd", "abcd") == 100.0, "identity must be exactly 100");
    require(stats::chrf("hello there", "hello there") == 100.0, "identity with space");
    require(stats::chrf("aaaa", "bbbb") == 0.0, "disjoint alphabets must be 0");

    const std::string alphabet = "abcde ";
    rng::SplitMix64 gen(0xC42F);
    for (int iter = 0; iter < 200; ++iter) {
      std::string hyp, ref;
      size_t hlen = gen.bounded(15);
      size_t rlen = 1 + gen.bounded(15);
      for (size_t i = 0; i < hlen; ++i) hyp += alphabet[gen.bounded(alphabet.size())];
      for (size_t i = 0; i < rlen; ++i) ref += alphabet[gen.bounded(alphabet.size())];
      if (ref.find_first_not_of(' ') == std::string::npos) ref += 'a';
      require(std::abs(stats::chrf(hyp, ref) - oracles::chrf(hyp, ref)) < 1e-9,
              "chrf deviates from the exhaustive oracle at iteration " + std::to_string(iter));
    }
  });

  criterion(9, "filter-policies", [] {
    ToxicityLexicon src("eng", {"bad", "evil"});
    ToxicityLexicon tgt("xx", {"mal", "dolent"});
    rng::SplitMix64 gen(0xF117);
    std::vector<std::pair<std::string, std::string>> pairs;
    std::string tsv;
    for (int i = 0; i < 1000; ++i) {
      std::string s = "line " + std::to_string(i);
      std::string t = "linia " + std::to_string(i);
      for (uint64_t k = gen.bounded(3); k > 0; --k) s += " bad";
      for (uint64_t k = gen.bounded(3); k > 0; --k) t += " mal";
      pairs.emplace_back(s, t);
      tsv += s + "\t" + t + "\n";
    }
    std::map<FilterPolicy, std::set<std::string>> survivors;
    for (auto policy : {FilterPolicy::Baseline, FilterPolicy::MaxAdd1, FilterPolicy::NoAdd,
                        FilterPolicy::NoTox}) {
      std::istringstream in(tsv);
      std::ostringstream out;
      FilterReport report = filter_corpus(in, out, BitextFormat::Tsv, policy, src, tgt);

      std::set<std::string> oracle;
      for (const auto& [ps, pt] : pairs) {
        uint64_t stox = src.count_matches(ps);
        uint64_t ttox = tgt.count_matches(pt);
        uint64_t diff = stox > ttox ? stox - ttox : ttox - stox;
        bool keep_it = policy == FilterPolicy::Baseline ||
                       (policy == FilterPolicy::MaxAdd1 && diff <= 1) ||
                       (policy == FilterPolicy::NoAdd && diff == 0) ||
                       (policy == FilterPolicy::NoTox && stox + ttox == 0);
        if (keep_it) oracle.insert(ps + "\t" + pt);
      }
      require(report.kept == oracle.size(), "kept count differs from brute-force oracle");
      std::set<std::string> got;
      std::istringstream lines(out.str());
      std::string line;
      while (std::getline(lines, line)) got.insert(line);
      require(got == oracle, std::string("kept set differs for policy ") + to_string(policy));
      survivors[policy] = std::move(got);
    }
    auto subset = [](const std::set<std::string>& a, const std::set<std::string>& b) {
      for (const auto& line : a) {
        if (!b.count(line)) return false;
      }
      return true;
    };
    require(subset(survivors[FilterPolicy::NoTox], survivors[FilterPolicy::NoAdd]),
            "no_tox must be a subset of no_add");
    require(subset(survivors[FilterPolicy::NoAdd], survivors[FilterPolicy::MaxAdd1]),
            "no_add must be a subset of max_add_1");
    require(subset(survivors[FilterPolicy::MaxAdd1], survivors[FilterPolicy::Baseline]),
            "max_add_1 must be a subset of baseline");
  });

  criterion(10, "table-arithmetic", [] {
    const struct {
      uint64_t count, denom;
      const char* display;
    } cases[] = {
        {313, 5264, "5.9"}, {29, 49, "59.2"}, {427, 1192, "35.8"}, {45, 4802, "0.9"},
        {1, 898, "0.1"},    {8, 276, "2.9"},  {7, 279, "2.5"},     {2, 280, "0.7"},
        {0, 158, "0.0"},    {0, 279, "0.0"},  {0, 280, "0.0"},     {0, 1827, "0.0"},
        {0, 271, "0.0"},    {0, 273, "0.0"},  {0, 255, "0.0"},
    };
    for (const auto& c : cases) {
      std::string got = percentage_display(c.count, c.denom);
      require(got == c.display, std::to_string(c.count) + "/" + std::to_string(c.denom) +
                                    " -> " + got + ", want " + c.display);
    }
    // through the ingest path as well
    AnnotationSheet sheet;
    sheet.language = "kin_Latn";
    sheet.kind = SheetKind::Positives;
    for (uint64_t i = 0; i < 5264; ++i) {
      sheet.rows.push_back(SheetRow{"r" + std::to_string(i), "s", "t", "e", i >= 313});
    }
    require(ingest(sheet).rate_display == "5.9", "ingest path must reproduce 313/5264 -> 5.9");
  });

  criterion(11, "level-classification", [] {
    require(classify_level(0.0242) == ATLevel::High, "2.42% must be High");
    require(classify_level(0.003) == ATLevel::Medium, "0.3% must be Medium");
    require(classify_level(0.0003) == ATLevel::Low, "0.03% must be Low");
    require(classify_level(0.001) == ATLevel::Medium, "0.1% boundary must be Medium");
    require(classify_level(0.005) == ATLevel::Medium, "0.5% boundary must be Medium");
  });

  criterion(12, "golden-run", [] {
    auto config_for = [&](const std::string& out_dir, unsigned threads) {
      RunConfig cfg;
      cfg.pack_path = data_path("mini_pack.json");
      cfg.lexicon_dir = data_path("lexicons");
      cfg.translations_path = data_path("fixtures/toy/translations.jsonl");
      cfg.attributions_path = data_path("fixtures/toy/attributions.jsonl");
      cfg.out_dir = out_dir;
      cfg.seed = 0;
      cfg.threads = threads;
      cfg.thresholds = FlagThresholds{0.40, 0.45};
      cfg.negatives_cap = 10;
      cfg.strata_top_k = 3;
      cfg.bootstrap_resamples = 200;
      return cfg;
    };
    std::string d1 = fresh_dir("golden1");
    std::string d2 = fresh_dir("golden2");
    std::string d8 = fresh_dir("golden8");
    io::json m1 = run_pipeline(config_for(d1, 1));
    io::json m2 = run_pipeline(config_for(d2, 1));
    io::json m8 = run_pipeline(config_for(d8, 8));
    require(m1["artifacts"] == m2["artifacts"], "two runs must produce identical hashes");
    require(m1["artifacts"] == m8["artifacts"], "thread counts 1 and 8 must agree");
    require(m1["artifacts"].size() >= 20, "pipeline must emit the full artifact set");
    for (const auto& artifact : m1["artifacts"]) {
      std::string name = artifact["name"].get<std::string>();
      require(io::read_file(d1 + "/" + name) == io::read_file(d8 + "/" + name),
              "artifact bytes must be identical: " + name);
    }
  });

  criterion(13, "throughput", [] {
    // pack sized to exactly 472,991 sentences:
    // 17 descriptors x (60 noun templates x 463 nouns + 43 descriptor-only)
    TemplatePack pack;
    pack.axes = {"synthetic"};
    for (int t = 0; t < 60; ++t) {
      pack.templates.push_back(SentenceTemplate{
          "tn" + std::to_string(t), "Sentence " + std::to_string(t) + " about a [NOUN PHRASE].",
          TemplateStyle::BeforeNoun, Plurality::Singular});
    }
    for (int t = 0; t < 43; ++t) {
      pack.templates.push_back(SentenceTemplate{
          "td" + std::to_string(t), "Line " + std::to_string(t) + " being [DESCRIPTOR].",
          TemplateStyle::DescriptorOnly, Plurality::Singular});
    }
    for (int d = 0; d < 17; ++d) {
      pack.descriptors.push_back(DescriptorTerm{
          "d" + std::to_string(d), d == 13 ? "trailer trash" : "kind" + std::to_string(d),
          "synthetic", "", ""});
    }
    for (int n = 0; n < 463; ++n) {
      pack.nouns.push_back(PersonNoun{"n" + std::to_string(n), "person" + std::to_string(n),
                                       "people" + std::to_string(n), false});
    }
    PackStats stats = pack_stats(pack);
    require(stats.sentence_count == 472991, "pack must expand to exactly 472,991 sentences");

    std::vector<std::string> texts;
    texts.reserve(stats.sentence_count);
    expand(pack, [&](const GeneratedSentence& s) { texts.push_back(s.text); });
    require(texts.size() == 472991, "expansion count mismatch");

    // 200-entry lexicon: the bundled English list plus synthetic entries
    auto loaded = load_lexicon(data_path("lexicons/eng_Latn.txt"), "eng_Latn");
    std::vector<std::string> entries = loaded.lexicon.entries();
    for (int i = 0; entries.size() < 200; ++i) entries.push_back("zorch" + std::to_string(i));
    ToxicityLexicon lexicon("eng_Latn", entries);
    require(lexicon.size() == 200, "lexicon must hold 200 entries");

    auto start = std::chrono::steady_clock::now();
    size_t toxic = 0;
    for (const auto& text : texts) {
      if (lexicon.is_toxic(text)) ++toxic;
    }
    double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    double rate = static_cast<double>(texts.size()) / seconds;
    // every "trailer trash" descriptor sentence matches
    require(toxic == 472991 / 17, "planted toxic sentences must all be detected");
    require(rate >= 10000.0, "throughput " + std::to_string(static_cast<long long>(rate)) +
                                 " sentences/s is below 10,000/s");
    std::printf("       throughput: %.0f sentences/second/thread over %zu sentences\n", rate,
                texts.size());
  });

  if (g_failures) {
    std::printf("%d criterion(s) FAILED\n", g_failures);
    return 1;
  }
  std::printf("all 13 criteria passed\n");
  return 0;
}
