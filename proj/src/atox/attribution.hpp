#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "atox/jsonl.hpp"

namespace atox {

// Per-decoding-step input attributions for one translated sentence. Step i
// (0-based) carries a vector over the source tokens followed by the i+1
// target-prefix slots; entries are non-negative and sum to 1.
struct AttributionRecord {
  std::string sentence_id;
  std::string language;
  std::vector<std::string> source_tokens;
  std::vector<std::string> target_tokens;
  std::vector<int> source_token_word;  // token index -> source word index
  std::vector<int> target_token_word;  // token index -> target word index
  std::vector<std::vector<double>> steps;

  size_t source_len() const { return source_tokens.size(); }
  void validate() const;  // throws ValidationError on any invariant breach
};

// Raw per-layer token-to-token contributions. Encoder layers are
// row-stochastic |S|x|S| matrices; each decoder layer carries one row per
// decoding step of length |S|+t combining cross and self contributions
// (source block first, then the t target-prefix slots).
struct LayerStack {
  std::vector<std::vector<std::vector<double>>> encoder_layers;
  std::vector<std::vector<std::vector<double>>> decoder_layers;  // [layer][step][|S|+t]
  void validate() const;
};

// Aggregates the stack into per-step input attributions:
//   - encoder layers compose by matrix product into an accumulated matrix M;
//   - per decoder layer, the source block of each step row composes with M
//     and the target block propagates through the previously accumulated
//     rows of the earlier steps (raw target slots at the input layer);
//   - final rows are renormalized to sum to 1.
std::vector<std::vector<double>> rollout(const LayerStack& stack);

// Sum of the attributions over the source tokens.
double source_contribution(const std::vector<double>& r, size_t source_len);

// Index of the source token with the highest attribution; ties break to the
// lowest index.
size_t align(const std::vector<double>& r, size_t source_len);

// Strictly-below-threshold test (0.40 reproduces the low-contribution rule).
bool is_low_contribution(double contribution, double threshold = 0.40);

struct WordContribution {
  double mean_source_contribution = 0.0;
  int aligned_source_word = -1;
};

// Mean per-step source contribution over the decoding steps of one target
// word; alignment comes from the argmax source token at the word's first
// step.
WordContribution word_contribution(const AttributionRecord& rec, size_t target_word_index);

// JSONL interchange. A record carries either "steps" (final attributions)
// or "layers" (triggering rollout on load when requested).
AttributionRecord attribution_from_json(const io::json& doc, bool roll_layers = true);
io::json attribution_to_json(const AttributionRecord& rec);

}  // namespace atox
