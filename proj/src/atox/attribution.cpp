#include "atox/attribution.hpp"

#include <algorithm>
#include <cmath>

#include "atox/error.hpp"

namespace atox {

namespace {

constexpr double kRowSumTolerance = 1e-6;

void check_row(const std::vector<double>& row, const std::string& what) {
  double sum = 0.0;
  for (double v : row) {
    if (v < 0.0) throw ValidationError(what + ": negative entry");
    if (!std::isfinite(v)) throw ValidationError(what + ": non-finite entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kRowSumTolerance) {
    throw ValidationError(what + ": row sums to " + std::to_string(sum) + ", expected 1");
  }
}

}  // namespace

void AttributionRecord::validate() const {
  if (steps.size() != target_tokens.size()) {
    throw ValidationError("attribution " + sentence_id + ": |steps| != |target_tokens|");
  }
  const size_t s = source_tokens.size();
  for (size_t i = 0; i < steps.size(); ++i) {
    if (steps[i].size() != s + i + 1) {
      throw ValidationError("attribution " + sentence_id + ": step " + std::to_string(i) +
                            " has length " + std::to_string(steps[i].size()) + ", expected " +
                            std::to_string(s + i + 1));
    }
    check_row(steps[i], "attribution " + sentence_id + " step " + std::to_string(i));
  }
  if (source_token_word.size() != source_tokens.size()) {
    throw ValidationError("attribution " + sentence_id + ": token_to_word.source length mismatch");
  }
  if (target_token_word.size() != target_tokens.size()) {
    throw ValidationError("attribution " + sentence_id + ": token_to_word.target length mismatch");
  }
}

void LayerStack::validate() const {
  size_t s = 0;
  if (!encoder_layers.empty()) s = encoder_layers.front().size();
  for (const auto& layer : encoder_layers) {
    if (layer.size() != s) throw ValidationError("layer stack: encoder layers disagree on |S|");
    for (const auto& row : layer) {
      if (row.size() != s) throw ValidationError("layer stack: encoder matrix is not square");
      check_row(row, "encoder row");
    }
  }
  if (decoder_layers.empty()) throw ValidationError("layer stack: no decoder layers");
  size_t t_steps = decoder_layers.front().size();
  if (t_steps == 0) throw ValidationError("layer stack: zero decoding steps");
  if (encoder_layers.empty()) {
    // |S| is implied by the first decoder row: |S| + 1 entries at step 0.
    s = decoder_layers.front().front().size() - 1;
  }
  for (const auto& layer : decoder_layers) {
    if (layer.size() != t_steps) {
      throw ValidationError("layer stack: decoder layers disagree on step count");
    }
    for (size_t i = 0; i < layer.size(); ++i) {
      if (layer[i].size() != s + i + 1) {
        throw ValidationError("layer stack: decoder row " + std::to_string(i) +
                              " has length " + std::to_string(layer[i].size()) + ", expected " +
                              std::to_string(s + i + 1));
      }
      check_row(layer[i], "decoder row");
    }
  }
}

std::vector<std::vector<double>> rollout(const LayerStack& stack) {
  stack.validate();
  const size_t t_steps = stack.decoder_layers.front().size();
  const size_t s = stack.decoder_layers.front().front().size() - 1;

  // Accumulated encoder matrix M = E_L * ... * E_1 (identity when absent).
  std::vector<std::vector<double>> m(s, std::vector<double>(s, 0.0));
  for (size_t i = 0; i < s; ++i) m[i][i] = 1.0;
  for (const auto& layer : stack.encoder_layers) {
    std::vector<std::vector<double>> next(s, std::vector<double>(s, 0.0));
    for (size_t i = 0; i < s; ++i) {
      for (size_t k = 0; k < s; ++k) {
        double w = layer[i][k];
        if (w == 0.0) continue;
        for (size_t j = 0; j < s; ++j) next[i][j] += w * m[k][j];
      }
    }
    m = std::move(next);
  }

  // Accumulated decoder rows: per step, source part (length |S|) and target
  // part (length step+1). Layer 0 is the raw target embedding: one-hot on
  // the step's own prefix slot.
  std::vector<std::vector<double>> rsrc(t_steps, std::vector<double>(s, 0.0));
  std::vector<std::vector<double>> rtgt(t_steps);
  for (size_t i = 0; i < t_steps; ++i) {
    rtgt[i].assign(i + 1, 0.0);
    rtgt[i][i] = 1.0;
  }

  for (const auto& layer : stack.decoder_layers) {
    std::vector<std::vector<double>> nsrc(t_steps, std::vector<double>(s, 0.0));
    std::vector<std::vector<double>> ntgt(t_steps);
    for (size_t i = 0; i < t_steps; ++i) {
      ntgt[i].assign(i + 1, 0.0);
      const auto& row = layer[i];
      // Cross block composes with the accumulated encoder matrix.
      for (size_t k = 0; k < s; ++k) {
        double w = row[k];
        if (w == 0.0) continue;
        for (size_t j = 0; j < s; ++j) nsrc[i][j] += w * m[k][j];
      }
      // Self block propagates through the previously accumulated step rows.
      for (size_t j = 0; j <= i; ++j) {
        double w = row[s + j];
        if (w == 0.0) continue;
        for (size_t k = 0; k < s; ++k) nsrc[i][k] += w * rsrc[j][k];
        for (size_t k = 0; k <= j; ++k) ntgt[i][k] += w * rtgt[j][k];
      }
    }
    rsrc = std::move(nsrc);
    rtgt = std::move(ntgt);
  }

  std::vector<std::vector<double>> steps(t_steps);
  for (size_t i = 0; i < t_steps; ++i) {
    auto& r = steps[i];
    r.reserve(s + i + 1);
    r.insert(r.end(), rsrc[i].begin(), rsrc[i].end());
    r.insert(r.end(), rtgt[i].begin(), rtgt[i].end());
    double sum = 0.0;
    for (double v : r) sum += v;
    if (sum <= 0.0) throw ValidationError("rollout: step row collapsed to zero mass");
    for (double& v : r) v /= sum;
  }
  return steps;
}

double source_contribution(const std::vector<double>& r, size_t source_len) {
  if (source_len > r.size()) {
    throw ValidationError("source_contribution: source_len exceeds attribution length");
  }
  double sum = 0.0;
  for (size_t i = 0; i < source_len; ++i) sum += r[i];
  return sum;
}

size_t align(const std::vector<double>& r, size_t source_len) {
  if (source_len == 0 || source_len > r.size()) {
    throw ValidationError("align: invalid source_len");
  }
  size_t best = 0;
  for (size_t i = 1; i < source_len; ++i) {
    if (r[i] > r[best]) best = i;
  }
  return best;
}

bool is_low_contribution(double contribution, double threshold) {
  return contribution < threshold;
}

WordContribution word_contribution(const AttributionRecord& rec, size_t target_word_index) {
  std::vector<size_t> word_steps;
  for (size_t i = 0; i < rec.target_token_word.size(); ++i) {
    if (rec.target_token_word[i] == static_cast<int>(target_word_index)) word_steps.push_back(i);
  }
  if (word_steps.empty()) {
    throw ValidationError("attribution " + rec.sentence_id + ": no tokens for target word " +
                          std::to_string(target_word_index));
  }
  const size_t s = rec.source_len();
  WordContribution wc;
  double sum = 0.0;
  for (size_t i : word_steps) sum += source_contribution(rec.steps[i], s);
  wc.mean_source_contribution = sum / static_cast<double>(word_steps.size());
  size_t token = align(rec.steps[word_steps.front()], s);
  wc.aligned_source_word = rec.source_token_word[token];
  return wc;
}

AttributionRecord attribution_from_json(const io::json& doc, bool roll_layers) {
  AttributionRecord rec;
  try {
    rec.sentence_id = doc.at("sentence_id").get<std::string>();
    rec.language = doc.value("language", std::string());
    rec.source_tokens = doc.at("source_tokens").get<std::vector<std::string>>();
    rec.target_tokens = doc.at("target_tokens").get<std::vector<std::string>>();
    if (doc.contains("token_to_word")) {
      const auto& ttw = doc["token_to_word"];
      rec.source_token_word = ttw.value("source", std::vector<int>());
      rec.target_token_word = ttw.value("target", std::vector<int>());
    }
    if (rec.source_token_word.empty()) {
      rec.source_token_word.resize(rec.source_tokens.size());
      for (size_t i = 0; i < rec.source_token_word.size(); ++i) rec.source_token_word[i] = static_cast<int>(i);
    }
    if (rec.target_token_word.empty()) {
      rec.target_token_word.resize(rec.target_tokens.size());
      for (size_t i = 0; i < rec.target_token_word.size(); ++i) rec.target_token_word[i] = static_cast<int>(i);
    }

    if (doc.contains("steps")) {
      rec.steps = doc["steps"].get<std::vector<std::vector<double>>>();
    } else if (doc.contains("layers")) {
      if (!roll_layers) {
        throw ValidationError("attribution " + rec.sentence_id +
                              ": has 'layers' payload but rollout was not requested");
      }
      LayerStack stack;
      const auto& layers = doc["layers"];
      if (layers.contains("encoder")) {
        stack.encoder_layers =
            layers["encoder"].get<std::vector<std::vector<std::vector<double>>>>();
      }
      stack.decoder_layers =
          layers.at("decoder").get<std::vector<std::vector<std::vector<double>>>>();
      rec.steps = rollout(stack);
    } else {
      throw ValidationError("attribution " + rec.sentence_id + ": needs 'steps' or 'layers'");
    }
  } catch (const io::json::exception& e) {
    throw ValidationError(std::string("attribution record: ") + e.what());
  }
  rec.validate();
  return rec;
}

io::json attribution_to_json(const AttributionRecord& rec) {
  io::json doc;
  doc["sentence_id"] = rec.sentence_id;
  doc["language"] = rec.language;
  doc["source_tokens"] = rec.source_tokens;
  doc["target_tokens"] = rec.target_tokens;
  doc["token_to_word"] =
      io::json{{"source", rec.source_token_word}, {"target", rec.target_token_word}};
  doc["steps"] = rec.steps;
  return doc;
}

}  // namespace atox
