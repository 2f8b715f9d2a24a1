#include "atox/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "atox/error.hpp"
#include "atox/rng.hpp"
#include "atox/unicode.hpp"

namespace atox::stats {

double chi2_1_sf(double x) {
  if (x <= 0.0) return 1.0;
  return std::erfc(std::sqrt(x / 2.0));
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

StatResult moods_median_test(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ValidationError("moods_median_test: empty sample");
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::sort(pooled.begin(), pooled.end());
  const size_t n = pooled.size();
  double median = n % 2 == 1 ? pooled[n / 2] : 0.5 * (pooled[n / 2 - 1] + pooled[n / 2]);

  auto above = [&](std::span<const double> s) {
    return static_cast<double>(std::count_if(s.begin(), s.end(), [&](double v) { return v > median; }));
  };
  double a_gt = above(a), b_gt = above(b);
  double a_le = static_cast<double>(a.size()) - a_gt;
  double b_le = static_cast<double>(b.size()) - b_gt;

  double c1 = a_gt + b_gt, c2 = a_le + b_le;
  if (c1 == 0.0 || c2 == 0.0) {
    throw RuntimeError("moods_median_test: degenerate table (all values on one side of median)");
  }
  double r1 = a_gt + a_le, r2 = b_gt + b_le;
  double total = r1 + r2;
  double det = a_gt * b_le - a_le * b_gt;
  double chi2 = total * det * det / (r1 * r2 * c1 * c2);

  StatResult res;
  res.statistic = chi2;
  res.p_value = chi2_1_sf(chi2);
  res.n1 = a.size();
  res.n2 = b.size();
  return res;
}

StatResult two_prop_z_one_sided(uint64_t x1, uint64_t n1, uint64_t x2, uint64_t n2) {
  if (n1 == 0 || n2 == 0) throw ValidationError("two_prop_z_one_sided: zero sample size");
  if (x1 > n1 || x2 > n2) throw ValidationError("two_prop_z_one_sided: count exceeds sample size");
  double p1 = static_cast<double>(x1) / static_cast<double>(n1);
  double p2 = static_cast<double>(x2) / static_cast<double>(n2);
  double pooled = static_cast<double>(x1 + x2) / static_cast<double>(n1 + n2);
  if (pooled <= 0.0 || pooled >= 1.0) {
    throw RuntimeError("two_prop_z_one_sided: pooled proportion is 0 or 1, z undefined");
  }
  double se = std::sqrt(pooled * (1.0 - pooled) *
                        (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2)));
  StatResult res;
  res.statistic = (p1 - p2) / se;
  res.p_value = normal_sf(res.statistic);
  res.n1 = n1;
  res.n2 = n2;
  return res;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("pearson: length mismatch");
  if (x.size() < 2) throw ValidationError("pearson: need at least 2 points");
  const double n = static_cast<double>(x.size());
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw RuntimeError("pearson: zero variance");
  return sxy / std::sqrt(sxx * syy);
}

std::vector<double> average_ranks(std::span<const double> values) {
  const size_t n = values.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t i, size_t j) { return values[i] < values[j]; });
  std::vector<double> ranks(n, 0.0);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    double avg = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("spearman: length mismatch");
  std::vector<double> rx = average_ranks(x);
  std::vector<double> ry = average_ranks(y);
  return pearson(rx, ry);
}

std::pair<double, double> bootstrap_ci(const PairSample& pairs, const PairStatistic& statistic,
                                       size_t resamples, double level, uint64_t seed) {
  if (pairs.size() < 2) throw ValidationError("bootstrap_ci: need at least 2 pairs");
  if (resamples == 0) throw ValidationError("bootstrap_ci: need at least 1 resample");
  if (level <= 0.0 || level >= 1.0) throw ValidationError("bootstrap_ci: level must be in (0,1)");

  constexpr size_t kMaxAttempts = 64;
  const size_t n = pairs.size();
  std::vector<double> values;
  values.reserve(resamples);
  PairSample resample(n);
  for (size_t r = 0; r < resamples; ++r) {
    std::optional<double> v;
    for (size_t attempt = 0; attempt < kMaxAttempts && !v; ++attempt) {
      auto gen = rng::derive(seed, "bootstrap",
                             std::to_string(r) + ":" + std::to_string(attempt));
      for (size_t i = 0; i < n; ++i) resample[i] = pairs[gen.bounded(n)];
      v = statistic(resample);
    }
    if (!v) {
      throw RuntimeError("bootstrap_ci: statistic undefined after " +
                         std::to_string(kMaxAttempts) + " redraws of resample " +
                         std::to_string(r));
    }
    values.push_back(*v);
  }
  std::sort(values.begin(), values.end());
  double alpha_half = (1.0 - level) / 2.0;
  auto clamp_idx = [&](double idx) {
    if (idx < 0) return size_t{0};
    if (idx >= static_cast<double>(values.size())) return values.size() - 1;
    return static_cast<size_t>(idx);
  };
  size_t lo = clamp_idx(std::floor(alpha_half * static_cast<double>(resamples)));
  size_t hi = clamp_idx(std::ceil((1.0 - alpha_half) * static_cast<double>(resamples)) - 1.0);
  return {values[lo], values[hi]};
}

namespace {

std::vector<char32_t> chrf_prepare(std::string_view text) {
  std::vector<char32_t> cps = uni::decode_utf8(text);
  std::vector<char32_t> out;
  out.reserve(cps.size());
  bool pending_space = false;
  for (char32_t cp : cps) {
    bool ws = cp == U' ' || (cp >= U'\t' && cp <= U'\r');
    if (ws) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(U' ');
      pending_space = false;
    }
    out.push_back(cp);
  }
  return out;
}

using NgramCounts = std::map<std::u32string, size_t>;

NgramCounts count_ngrams(const std::vector<char32_t>& cps, size_t n) {
  NgramCounts counts;
  if (cps.size() < n) return counts;
  for (size_t i = 0; i + n <= cps.size(); ++i) {
    counts[std::u32string(cps.begin() + static_cast<long>(i),
                          cps.begin() + static_cast<long>(i + n))]++;
  }
  return counts;
}

}  // namespace

double chrf(std::string_view hypothesis, std::string_view reference, int max_order, double beta) {
  std::vector<char32_t> ref = chrf_prepare(reference);
  if (ref.empty()) throw ValidationError("chrf: empty reference");
  std::vector<char32_t> hyp = chrf_prepare(hypothesis);

  const double beta2 = beta * beta;
  double f_sum = 0.0;
  int effective_orders = 0;
  for (int n = 1; n <= max_order; ++n) {
    NgramCounts hyp_counts = count_ngrams(hyp, static_cast<size_t>(n));
    NgramCounts ref_counts = count_ngrams(ref, static_cast<size_t>(n));
    size_t hyp_total = 0, ref_total = 0, overlap = 0;
    for (const auto& [g, c] : hyp_counts) {
      hyp_total += c;
      auto it = ref_counts.find(g);
      if (it != ref_counts.end()) overlap += std::min(c, it->second);
    }
    for (const auto& [g, c] : ref_counts) ref_total += c;
    if (hyp_total == 0 && ref_total == 0) continue;  // both too short for this order
    ++effective_orders;
    if (overlap == 0) continue;  // F contribution is 0
    double precision = static_cast<double>(overlap) / static_cast<double>(hyp_total);
    double recall = static_cast<double>(overlap) / static_cast<double>(ref_total);
    f_sum += (1.0 + beta2) * precision * recall / (beta2 * precision + recall);
  }
  if (effective_orders == 0) return 0.0;
  return 100.0 * f_sum / static_cast<double>(effective_orders);
}

}  // namespace atox::stats
