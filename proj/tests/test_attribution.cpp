#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "atox/attribution.hpp"
#include "atox/error.hpp"
#include "atox/rng.hpp"
#include "oracles.hpp"

using namespace atox;

namespace {

using Matrix = std::vector<std::vector<double>>;

Matrix identity(size_t n) {
  Matrix m(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i) m[i][i] = 1.0;
  return m;
}

Matrix uniform(size_t n) {
  return Matrix(n, std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

// Identity decoder layer: full self-attention weight on the step's own slot.
std::vector<std::vector<double>> identity_decoder(size_t s, size_t steps) {
  std::vector<std::vector<double>> layer(steps);
  for (size_t i = 0; i < steps; ++i) {
    layer[i].assign(s + i + 1, 0.0);
    layer[i][s + i] = 1.0;
  }
  return layer;
}

std::vector<std::vector<double>> uniform_decoder(size_t s, size_t steps) {
  std::vector<std::vector<double>> layer(steps);
  for (size_t i = 0; i < steps; ++i) {
    layer[i].assign(s + i + 1, 1.0 / static_cast<double>(s + i + 1));
  }
  return layer;
}

AttributionRecord two_word_record() {
  // source: 3 tokens over words [0, 1, 1]; target: 3 tokens over words [0, 0, 1]
  AttributionRecord rec;
  rec.sentence_id = "s1";
  rec.language = "tst_Latn";
  rec.source_tokens = {"a", "b", "c"};
  rec.target_tokens = {"x", "y", "z"};
  rec.source_token_word = {0, 1, 1};
  rec.target_token_word = {0, 0, 1};
  rec.steps = {
      {0.1, 0.1, 0.1, 0.7},
      {0.2, 0.2, 0.1, 0.25, 0.25},
      {0.05, 0.60, 0.05, 0.1, 0.1, 0.1},
  };
  rec.validate();
  return rec;
}

}  // namespace

TEST_CASE("identity stack yields one-hot rows on the step's own slot") {
  LayerStack stack;
  stack.encoder_layers = {identity(3), identity(3)};
  stack.decoder_layers = {identity_decoder(3, 3), identity_decoder(3, 3)};
  auto steps = rollout(stack);
  REQUIRE(steps.size() == 3);
  for (size_t i = 0; i < steps.size(); ++i) {
    for (size_t k = 0; k < steps[i].size(); ++k) {
      CHECK(steps[i][k] == doctest::Approx(k == 3 + i ? 1.0 : 0.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("uniform rows are a fixed point for one decoder layer") {
  LayerStack stack;
  stack.encoder_layers = {uniform(2), uniform(2), uniform(2)};
  stack.decoder_layers = {uniform_decoder(2, 3)};
  auto steps = rollout(stack);
  for (size_t i = 0; i < steps.size(); ++i) {
    double expected = 1.0 / static_cast<double>(2 + i + 1);
    for (double v : steps[i]) CHECK(v == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("encoder composition is a plain matrix product") {
  // two identical layers [[1,0],[0.5,0.5]] compose to [[1,0],[0.75,0.25]]
  Matrix layer = {{1.0, 0.0}, {0.5, 0.5}};
  LayerStack stack;
  stack.encoder_layers = {layer, layer};
  // read row i of the accumulated encoder matrix through a cross-only row
  std::vector<std::vector<double>> probe(2);
  probe[0] = {1.0, 0.0, 0.0};       // step 0 attends source 0 only
  probe[1] = {0.0, 1.0, 0.0, 0.0};  // step 1 attends source 1 only
  stack.decoder_layers = {probe};
  auto steps = rollout(stack);
  CHECK(steps[0][0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(steps[0][1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(steps[1][0] == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(steps[1][1] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("rollout equals brute-force chained block products on random stacks") {
  rng::SplitMix64 gen(0xA77B);
  for (int iter = 0; iter < 500; ++iter) {
    LayerStack stack = oracles::random_stack(gen);
    auto got = rollout(stack);
    auto want = oracles::rollout(stack);
    REQUIRE(got.size() == want.size());
    for (size_t i = 0; i < got.size(); ++i) {
      REQUIRE(got[i].size() == want[i].size());
      double sum = 0.0;
      for (size_t k = 0; k < got[i].size(); ++k) {
        CHECK(std::abs(got[i][k] - want[i][k]) < 1e-9);
        sum += got[i][k];
      }
      CHECK(std::abs(sum - 1.0) < 1e-9);  // normalization preserved
      CHECK(got[i].size() == stack.decoder_layers.front().front().size() - 1 + i + 1);
    }
  }
}

TEST_CASE("shape and value validation") {
  LayerStack stack;
  stack.decoder_layers = {{{0.5, 0.5, 0.5}}};  // row sums 1.5
  CHECK_THROWS_AS(rollout(stack), ValidationError);

  LayerStack negative;
  negative.decoder_layers = {{{1.5, -0.5, 0.0}}};
  CHECK_THROWS_AS(rollout(negative), ValidationError);

  LayerStack mismatch;
  mismatch.encoder_layers = {identity(2)};
  mismatch.decoder_layers = {identity_decoder(3, 2)};
  CHECK_THROWS_AS(rollout(mismatch), ValidationError);
}

TEST_CASE("source_contribution sums the source block") {
  CHECK(source_contribution({0.2, 0.3, 0.1, 0.4}, 3) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(source_contribution({0.0, 0.0, 1.0}, 2) == 0.0);
  CHECK(source_contribution({0.25, 0.25, 0.25, 0.25}, 2) == doctest::Approx(0.5));
}

TEST_CASE("align takes the source argmax with lowest-index ties") {
  CHECK(align({0.1, 0.5, 0.05, 0.35}, 3) == 1);
  CHECK(align({0.3, 0.3, 0.4}, 2) == 0);  // tie between source slots
  CHECK(align({0.0, 0.0, 1.0, 0.0}, 3) == 2);
}

TEST_CASE("is_low_contribution is strict at the 40% boundary") {
  CHECK(is_low_contribution(0.35));
  CHECK_FALSE(is_low_contribution(0.40));
  CHECK_FALSE(is_low_contribution(0.60));
  CHECK(is_low_contribution(0.89, 0.90));
}

TEST_CASE("word_contribution averages steps and aligns by first step") {
  AttributionRecord rec = two_word_record();
  // word 0 covers steps 0 and 1: contributions 0.3 and 0.5 -> mean 0.4
  WordContribution w0 = word_contribution(rec, 0);
  CHECK(w0.mean_source_contribution == doctest::Approx(0.4).epsilon(1e-12));
  // first step argmax among sources of step 0 is token 0 (0.1,0.1,0.1 tie -> 0)
  CHECK(w0.aligned_source_word == 0);

  WordContribution w1 = word_contribution(rec, 1);
  CHECK(w1.mean_source_contribution == doctest::Approx(0.70).epsilon(1e-12));
  CHECK(w1.aligned_source_word == 1);  // argmax token 1 -> source word 1

  CHECK_THROWS_AS(word_contribution(rec, 7), ValidationError);
}

TEST_CASE("record invariants: prefix grows by one per step") {
  AttributionRecord rec = two_word_record();
  rec.steps[1].push_back(0.0);
  CHECK_THROWS_AS(rec.validate(), ValidationError);
}

TEST_CASE("json round-trip and layer payload rollout") {
  AttributionRecord rec = two_word_record();
  io::json doc = attribution_to_json(rec);
  AttributionRecord back = attribution_from_json(doc);
  CHECK(back.sentence_id == rec.sentence_id);
  CHECK(back.steps == rec.steps);

  io::json layered;
  layered["sentence_id"] = "s2";
  layered["language"] = "tst_Latn";
  layered["source_tokens"] = io::json::array({"a", "b"});
  layered["target_tokens"] = io::json::array({"x"});
  layered["layers"] =
      io::json{{"encoder", io::json::array()},
               {"decoder", {{{0.25, 0.25, 0.5}}}}};
  AttributionRecord rolled = attribution_from_json(layered);
  REQUIRE(rolled.steps.size() == 1);
  CHECK(rolled.steps[0][0] == doctest::Approx(0.25));
  CHECK(rolled.steps[0][2] == doctest::Approx(0.5));

  CHECK_THROWS_AS(attribution_from_json(layered, /*roll_layers=*/false), ValidationError);
}

TEST_CASE("source contribution plus target-prefix mass is one") {
  rng::SplitMix64 gen(77);
  for (int iter = 0; iter < 100; ++iter) {
    LayerStack stack = oracles::random_stack(gen);
    auto steps = rollout(stack);
    size_t s = stack.decoder_layers.front().front().size() - 1;
    for (const auto& r : steps) {
      double src = source_contribution(r, s);
      double tgt = 0.0;
      for (size_t k = s; k < r.size(); ++k) tgt += r[k];
      CHECK(std::abs(src + tgt - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("token_to_word defaults to the identity mapping") {
  io::json doc;
  doc["sentence_id"] = "s3";
  doc["language"] = "tst_Latn";
  doc["source_tokens"] = io::json::array({"a", "b"});
  doc["target_tokens"] = io::json::array({"x", "y"});
  doc["steps"] = io::json::array({io::json::array({0.5, 0.3, 0.2}),
                                  io::json::array({0.4, 0.3, 0.2, 0.1})});
  AttributionRecord rec = attribution_from_json(doc);
  CHECK(rec.source_token_word == std::vector<int>{0, 1});
  CHECK(rec.target_token_word == std::vector<int>{0, 1});
}
