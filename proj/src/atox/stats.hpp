#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace atox::stats {

struct StatResult {
  double statistic = 0.0;
  double p_value = 1.0;
  size_t n1 = 0;
  size_t n2 = 0;
};

// Upper tail of the chi-square distribution with one degree of freedom.
double chi2_1_sf(double x);

// Upper tail of the standard normal distribution.
double normal_sf(double z);

// Mood's median test: pooled grand median, 2x2 table of (> median) vs
// (<= median) counts per sample, Pearson chi-square with 1 dof and no
// continuity correction. Throws RuntimeError when the table degenerates
// (a zero column, e.g. all values equal).
StatResult moods_median_test(std::span<const double> a, std::span<const double> b);

// One-sided two-proportion z-test with pooled variance; H1: p1 > p2.
// Throws RuntimeError when the pooled proportion is 0 or 1.
StatResult two_prop_z_one_sided(uint64_t x1, uint64_t n1, uint64_t x2, uint64_t n2);

// Product-moment correlation. Throws RuntimeError on zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

// Pearson on ranks, ties receiving average ranks.
double spearman(std::span<const double> x, std::span<const double> y);

// Average ranks (1-based) with ties averaged.
std::vector<double> average_ranks(std::span<const double> values);

using PairSample = std::vector<std::pair<double, double>>;
using PairStatistic = std::function<std::optional<double>(const PairSample&)>;

// Percentile bootstrap interval over seeded resamples with replacement.
// A resample on which the statistic is undefined is redrawn (bounded
// retries, then RuntimeError). Endpoints are order statistics of the
// resample distribution; deterministic for a fixed seed, independent of
// thread count.
std::pair<double, double> bootstrap_ci(const PairSample& pairs, const PairStatistic& statistic,
                                       size_t resamples, double level, uint64_t seed);

// Character n-gram F-score in [0,100]: orders 1..max_order, per-order F with
// beta weighting recall, averaged over orders where either side has n-grams.
// Whitespace runs collapse to single spaces. Empty reference throws
// ValidationError; empty hypothesis scores 0.
double chrf(std::string_view hypothesis, std::string_view reference, int max_order = 6,
            double beta = 2.0);

}  // namespace atox::stats
