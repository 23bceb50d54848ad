#include <algorithm>
#include <numeric>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pmfspoof/error.hpp"
#include "pmfspoof/pmf.hpp"

using namespace pmfspoof;

namespace {

std::vector<double> uniform_samples(std::size_t n, std::uint64_t seed, double lo = -1, double hi = 1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> x(n);
  for (auto& v : x) v = u(rng);
  return x;
}

double sum(const PmfHistogram& p) { return std::accumulate(p.probabilities.begin(), p.probabilities.end(), 0.0); }

}  // namespace

TEST(BinIndex, BoundaryMapping) {
  EXPECT_EQ(bin_index(-1.0, 4), 0u);
  EXPECT_EQ(bin_index(-0.5, 4), 1u);
  EXPECT_EQ(bin_index(-1e-12, 4), 1u);
  EXPECT_EQ(bin_index(0.0, 4), 2u);
  EXPECT_EQ(bin_index(0.5, 4), 3u);
  EXPECT_EQ(bin_index(1.0, 4), 3u);
  EXPECT_EQ(bin_index(2.5, 4), 3u);
  EXPECT_EQ(bin_index(-3.0, 4), 0u);
  EXPECT_EQ(bin_index(0.0, kRawBins), 32768u);
  EXPECT_EQ(bin_index(32767.0 / 32768.0, kRawBins), kRawBins - 1);
  EXPECT_EQ(bin_index(-1.0 + 2.0 / 65536.0, kRawBins), 1u);
}

TEST(EstimatePmf, AllZeroSamples) {
  const auto p = estimate_pmf(std::vector<double>(1000, 0.0), kRawBins);
  ASSERT_EQ(p.bin_count(), kRawBins);
  EXPECT_EQ(p.probabilities[32768], 1.0);
  EXPECT_EQ(sum(p), 1.0);
  EXPECT_EQ(p.total_samples, 1000u);
}

TEST(EstimatePmf, EndpointsOnFourBins) {
  const auto p = estimate_pmf(std::vector<double>{-1.0, 1.0}, 4);
  EXPECT_EQ(p.probabilities, (std::vector<double>{0.5, 0.0, 0.0, 0.5}));
}

TEST(EstimatePmf, UniformLawOfLargeNumbers) {
  const auto p = estimate_pmf(uniform_samples(1'000'000, 42), 256);
  double worst = 0;
  for (double v : p.probabilities) worst = std::max(worst, std::abs(v - 1.0 / 256));
  EXPECT_LT(worst, 5e-4);
}

TEST(EstimatePmf, ClipsOutOfRangeToBoundaryBins) {
  const auto x = uniform_samples(20000, 5, -3, 3);
  const auto h = estimate_counts(x, 64);
  std::uint64_t below = 0, above = 0, inside_first = 0, inside_last = 0;
  for (double v : x) {
    if (v < -1) ++below;
    else if (v >= 1) ++above;
    else if (v < -1 + 2.0 / 64) ++inside_first;
    else if (v >= 1 - 2.0 / 64) ++inside_last;
  }
  EXPECT_EQ(h.total(), x.size());
  EXPECT_EQ(h.counts.front(), below + inside_first);
  EXPECT_EQ(h.counts.back(), above + inside_last);
}

TEST(EstimatePmf, Rejections) {
  EXPECT_THROW(estimate_pmf(std::vector<double>{}, 16), DataError);
  EXPECT_THROW(estimate_pmf(std::vector<double>{0.1, std::nan("")}, 16), DataError);
  EXPECT_THROW(estimate_pmf(std::vector<double>{0.1}, 1), ConfigError);
  EXPECT_THROW(estimate_pmf(std::vector<double>{0.1}, 12), ConfigError);
}

TEST(EstimatePmf, PermutationInvarianceIsExact) {
  auto x = uniform_samples(5000, 9, -1.2, 1.2);
  const auto p = estimate_pmf(x, 1024);
  std::mt19937_64 rng(1);
  std::shuffle(x.begin(), x.end(), rng);
  EXPECT_EQ(estimate_pmf(x, 1024).probabilities, p.probabilities);
}

TEST(Accumulate, SingleHistogramUnchanged) {
  const auto x = uniform_samples(999, 3);
  const auto h = estimate_counts(x, 512);
  EXPECT_EQ(accumulate(std::vector<CountHistogram>{h}).probabilities, estimate_pmf(x, 512).probabilities);
}

TEST(Accumulate, EqualLengthsGiveTheMean) {
  const auto a = uniform_samples(4000, 1), b = uniform_samples(4000, 2, -0.5, 0.2);
  const auto pa = estimate_pmf(a, 256), pb = estimate_pmf(b, 256);
  const auto acc = accumulate(std::vector<CountHistogram>{estimate_counts(a, 256), estimate_counts(b, 256)});
  for (std::size_t i = 0; i < 256; ++i)
    EXPECT_NEAR(acc.probabilities[i], 0.5 * (pa.probabilities[i] + pb.probabilities[i]), 1e-15);
}

TEST(Accumulate, LengthWeightedAverage) {
  const auto a = uniform_samples(1234, 1), b = uniform_samples(5678, 2, -0.3, 0.9);
  const auto pa = estimate_pmf(a, 256), pb = estimate_pmf(b, 256);
  const auto acc = accumulate(std::vector<CountHistogram>{estimate_counts(a, 256), estimate_counts(b, 256)});
  const double n1 = 1234, n2 = 5678;
  for (std::size_t i = 0; i < 256; ++i)
    EXPECT_NEAR(acc.probabilities[i], (n1 * pa.probabilities[i] + n2 * pb.probabilities[i]) / (n1 + n2), 1e-12);
  EXPECT_NEAR(sum(acc), 1.0, 1e-12);
}

TEST(Accumulate, EqualsConcatenationBinExact) {
  std::vector<double> all;
  std::vector<CountHistogram> parts;
  for (int i = 0; i < 5; ++i) {
    auto x = uniform_samples(100 + 37 * i, 10 + i, -1.5, 1.5);
    parts.push_back(estimate_counts(x, kRawBins));
    all.insert(all.end(), x.begin(), x.end());
  }
  EXPECT_EQ(accumulate(parts).probabilities, estimate_pmf(all, kRawBins).probabilities);
}

TEST(Accumulate, RejectsMismatchedGrids) {
  const auto x = uniform_samples(10, 1);
  EXPECT_THROW(accumulate(std::vector<CountHistogram>{estimate_counts(x, 8), estimate_counts(x, 16)}), DataError);
  EXPECT_THROW(accumulate(std::vector<CountHistogram>{}), DataError);
}

TEST(MergeBins, MatchesDirectEstimationOnCoarseGrid) {
  const auto x = uniform_samples(20000, 77, -1.1, 1.1);
  const auto merged = merge_bins(estimate_counts(x, kRawBins), kDistanceBins);
  EXPECT_EQ(merged.counts, estimate_counts(x, kDistanceBins).counts);
  EXPECT_THROW(merge_bins(merged, 8192), ConfigError);
  EXPECT_THROW(merge_bins(merged, 1000), ConfigError);
}

TEST(AddCounts, IncrementalEqualsBatch) {
  const auto a = uniform_samples(300, 1), b = uniform_samples(700, 2);
  auto h = estimate_counts(a, 128);
  add_counts(h, b);
  std::vector<double> ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  EXPECT_EQ(h.counts, estimate_counts(ab, 128).counts);
}

TEST(Normalize, SumsToOne) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = estimate_pmf(uniform_samples(1 + seed * 131, seed), 4096);
    EXPECT_NEAR(sum(p), 1.0, 1e-12);
    for (double v : p.probabilities) EXPECT_GE(v, 0.0);
  }
}
