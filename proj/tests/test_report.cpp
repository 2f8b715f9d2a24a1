#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "atox/report.hpp"
#include "test_support.hpp"

using namespace atox;

namespace {

// Corpus with four axes and planted per-axis toxicity 3.0/1.5/0.7/0.4%
// over 1000 sentences each.
struct Planted {
  support::World world;
  std::vector<ToxicityFinding> findings;
};

Planted planted_axis_corpus() {
  io::json doc = io::json::parse(R"({
    "axes": ["nonce", "sexual_orientation", "gender_and_sex", "ability"],
    "templates": [{"id": "t", "pattern": "I am a [NOUN PHRASE].", "style": "before-noun"}],
    "descriptors": [
      {"id": "d_nonce", "text": "blicket", "axis": "nonce"},
      {"id": "d_orient", "text": "queer", "axis": "sexual_orientation"},
      {"id": "d_gender", "text": "female", "axis": "gender_and_sex"},
      {"id": "d_ability", "text": "disabled", "axis": "ability"}
    ],
    "nouns": []
  })");
  for (int i = 0; i < 1000; ++i) {
    doc["nouns"].push_back(io::json{{"id", "n" + std::to_string(i)},
                                    {"singular", "kind" + std::to_string(i)},
                                    {"plural", "kinds" + std::to_string(i)}});
  }
  Planted p;
  p.world.corpus = expand_all(pack_from_json(doc));
  REQUIRE(p.world.corpus.size() == 4000);

  const std::map<std::string, int> toxic_per_axis = {
      {"nonce", 30}, {"sexual_orientation", 15}, {"gender_and_sex", 7}, {"ability", 4}};
  std::map<std::string, int> planted;
  for (const auto& s : p.world.corpus) {
    p.world.add_translation(s.id, "xx_Latn", "target of " + s.id);
    int& done = planted[s.axis];
    if (done < toxic_per_axis.at(s.axis)) {
      ++done;
      ToxicityFinding f;
      f.sentence_id = s.id;
      f.language = "xx_Latn";
      f.matched.push_back(MatchedWord{0, "bad", 0, 3});
      f.representative_word = 0;
      p.findings.push_back(f);
    }
  }
  p.world.build();
  return p;
}

}  // namespace

TEST_CASE("aggregate reproduces planted axis rates exactly") {
  Planted p = planted_axis_corpus();
  RateTable table = aggregate(p.world.records, p.findings, Dimension::Axis);
  REQUIRE(table.rows.size() == 4);
  // sorted by descending rate
  CHECK(table.rows[0].key == "nonce");
  CHECK(table.rows[0].n_sentences == 1000);
  CHECK(table.rows[0].n_toxic == 30);
  CHECK(table.rows[0].rate == 30.0 / 1000.0);
  CHECK(table.rows[1].key == "sexual_orientation");
  CHECK(table.rows[1].n_toxic == 15);
  CHECK(table.rows[2].key == "gender_and_sex");
  CHECK(table.rows[2].n_toxic == 7);
  CHECK(table.rows[3].key == "ability");
  CHECK(table.rows[3].n_toxic == 4);

  // partition completeness
  uint64_t total = 0, toxic = 0;
  for (const auto& row : table.rows) {
    total += row.n_sentences;
    toxic += row.n_toxic;
  }
  CHECK(total == p.world.records.size());
  CHECK(toxic == p.findings.size());
}

TEST_CASE("aggregate over language and descriptor dimensions") {
  Planted p = planted_axis_corpus();
  RateTable lang = aggregate(p.world.records, p.findings, Dimension::Language);
  REQUIRE(lang.rows.size() == 1);
  CHECK(lang.rows[0].key == "xx_Latn");
  CHECK(lang.rows[0].n_sentences == 4000);
  CHECK(lang.rows[0].n_toxic == 56);

  RateTable desc = aggregate(p.world.records, p.findings, Dimension::Descriptor);
  CHECK(desc.rows.size() == 4);
  RateTable noun = aggregate(p.world.records, p.findings, Dimension::Noun);
  CHECK(noun.rows.size() == 1000);
}

TEST_CASE("zero findings aggregate to all-zero rates") {
  Planted p = planted_axis_corpus();
  RateTable table = aggregate(p.world.records, {}, Dimension::Axis);
  for (const auto& row : table.rows) {
    CHECK(row.n_toxic == 0);
    CHECK(row.rate == 0.0);
  }
}

TEST_CASE("level classification thresholds") {
  CHECK(classify_level(0.0242) == ATLevel::High);
  CHECK(classify_level(0.003) == ATLevel::Medium);
  CHECK(classify_level(0.0003) == ATLevel::Low);
  CHECK(classify_level(0.001) == ATLevel::Medium);   // boundary -> Medium
  CHECK(classify_level(0.005) == ATLevel::Medium);   // boundary -> Medium
  CHECK(classify_level(0.0051) == ATLevel::High);
  CHECK(classify_level(0.00099) == ATLevel::Low);
  CHECK(classify_level(0.0) == ATLevel::Low);
  CHECK(classify_level(1.0) == ATLevel::High);

  // monotone in rate
  ATLevel prev = classify_level(0.0);
  for (double r = 0.0; r <= 0.05; r += 0.0001) {
    ATLevel cur = classify_level(r);
    CHECK(static_cast<int>(cur) >= static_cast<int>(prev));
    prev = cur;
  }
}

TEST_CASE("toxicity range table groups languages by level") {
  std::vector<LanguageRegionStats> langs = {
      {"low_Latn", 0.0005, 0.0003, 0.0002},
      {"med_Latn", 0.0023, 0.0035, 0.0023},
      {"high_Latn", 0.0133, 0.0242, 0.0133},
  };
  auto rows = toxicity_range_table(langs);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].level == ATLevel::Low);
  CHECK(rows[0].num_languages == 1);
  CHECK(rows[0].pct_toxic_in_region == doctest::Approx(0.03).epsilon(1e-12));
  CHECK(rows[0].pct_toxic_overall == doctest::Approx(0.02).epsilon(1e-12));
  REQUIRE(rows[0].ratio.has_value());
  CHECK(*rows[0].ratio == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(rows[1].level == ATLevel::Medium);
  REQUIRE(rows[1].ratio.has_value());
  CHECK(*rows[1].ratio == doctest::Approx(0.0035 / 0.0023).epsilon(1e-12));
  CHECK(rows[2].level == ATLevel::High);
  CHECK(rows[2].num_languages == 1);

  // empty groups carry no ratio
  auto empty_rows = toxicity_range_table({});
  for (const auto& row : empty_rows) {
    CHECK(row.num_languages == 0);
    CHECK_FALSE(row.ratio.has_value());
  }
}

TEST_CASE("range table csv format matches the published table's shape") {
  // Published values are not recomputable from rounded inputs; this is a
  // format check with our own numbers in the published row layout.
  std::vector<LanguageRegionStats> langs;
  for (int i = 0; i < 57; ++i) langs.push_back({"l" + std::to_string(i), 0.0005, 0.0003, 0.00024});
  for (int i = 0; i < 68; ++i) langs.push_back({"m" + std::to_string(i), 0.0023, 0.0035, 0.002333333333});
  for (int i = 0; i < 19; ++i) langs.push_back({"h" + std::to_string(i), 0.0133, 0.0242, 0.0133});
  std::string csv = range_table_to_csv(toxicity_range_table(langs));
  auto lines = [&] {
    std::vector<std::string> out;
    size_t pos = 0;
    while (pos < csv.size()) {
      size_t nl = csv.find('\n', pos);
      out.push_back(csv.substr(pos, nl - pos));
      pos = nl + 1;
    }
    return out;
  }();
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "range,num_languages,pct_toxic_in_region,pct_toxic_overall,ratio");
  CHECK(lines[1].rfind("Low,57,", 0) == 0);
  CHECK(lines[2].rfind("Medium,68,", 0) == 0);
  CHECK(lines[3].rfind("High,19,", 0) == 0);
  CHECK(lines[1].substr(lines[1].rfind(',') + 1) == "1.25");
  CHECK(lines[3].substr(lines[3].rfind(',') + 1) == "1.82");
}

TEST_CASE("emission is deterministic and fixed-format") {
  Planted p = planted_axis_corpus();
  RateTable table = aggregate(p.world.records, p.findings, Dimension::Axis);
  CHECK(rate_table_to_csv(table) == rate_table_to_csv(table));
  CHECK(rate_table_to_json(table) == rate_table_to_json(table));
  std::string csv = rate_table_to_csv(table);
  CHECK(csv.find("nonce,1000,30,0.0300") != std::string::npos);
  std::string json = rate_table_to_json(table);
  CHECK(json.find("\"schema_version\":1") != std::string::npos);
  CHECK(json.find("\"rate\":0.0300") != std::string::npos);
}

TEST_CASE("svg heatmap: empty grid is all white, golden 2x2 grid") {
  std::vector<PopulationItem> empty;
  HeatmapGrid grid = heatmap_grid(empty, uniform_edges(2), uniform_edges(2));
  std::string svg = grid_to_svg(grid);
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("fill=\"#ffffff\"") != std::string::npos);
  // no colored cells anywhere
  CHECK(svg.find("fill=\"#cb181d\"") == std::string::npos);

  std::vector<PopulationItem> items = {
      {0.2, 0.7, true},  {0.2, 0.7, false}, {0.7, 0.2, false},
      {0.7, 0.7, true},  {0.7, 0.7, true},
  };
  HeatmapGrid g2 = heatmap_grid(items, uniform_edges(2), uniform_edges(2));
  std::string got = grid_to_svg(g2, FlagThresholds{0.40, 0.50});
  CHECK(got == grid_to_svg(g2, FlagThresholds{0.40, 0.50}));  // deterministic
  // cell (1,1) has rate 1.0 == max -> full ramp color
  CHECK(got.find("fill=\"#cb181d\"") != std::string::npos);
  // cyan region outline present
  CHECK(got.find("#00b7c3") != std::string::npos);

  std::string grid_csv = grid_to_csv(g2);
  CHECK(grid_csv.find("contribution_bin,gini_bin,count,toxic,toxic_rate") != std::string::npos);
  CHECK(grid_csv.find("0,1,2,1,0.5000") != std::string::npos);
  CHECK(grid_csv.find("0,0,0,0,empty") != std::string::npos);

  // frozen bytes: rendering must not drift across platforms or releases
  std::string golden = io::read_file(std::string(ATOX_GOLDEN_DIR) + "/heatmap_2x2.svg");
  CHECK(got == golden);
}
