#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pmfspoof {

inline constexpr std::size_t kRawBins = std::size_t{1} << 16;
inline constexpr std::size_t kDistanceBins = std::size_t{1} << 12;

/// Raw amplitude counts on a uniform grid over [-1, 1].
struct CountHistogram {
  std::vector<std::uint64_t> counts;

  std::size_t bin_count() const { return counts.size(); }
  std::uint64_t total() const;
};

/// Normalized amplitude histogram on a uniform grid over [-1, 1].
struct PmfHistogram {
  std::vector<double> probabilities;
  std::uint64_t total_samples = 0;

  std::size_t bin_count() const { return probabilities.size(); }
};

/// Bin of x for `bin_count` uniform bins over [-1, 1]: floor((x + 1) / delta),
/// with x >= 1 in the last bin and x < -1 in the first.
std::size_t bin_index(double x, std::size_t bin_count);

/// Counts on a power-of-two grid; out-of-range values are clipped to the
/// boundary bins. Rejects empty input, NaN, and bin counts that are not a
/// power of two >= 2.
CountHistogram estimate_counts(std::span<const double> samples, std::size_t bin_count);

/// Adds the samples' counts into `h` in place (grid fixed by `h`).
void add_counts(CountHistogram& h, std::span<const double> samples);

PmfHistogram estimate_pmf(std::span<const double> samples, std::size_t bin_count);

PmfHistogram normalize(const CountHistogram& h);

/// Merges groups of adjacent bins so the grid has `bin_count` bins. The new
/// count must be a power of two not larger than the current one.
CountHistogram merge_bins(const CountHistogram& h, std::size_t bin_count);

/// Bin-wise count sum, renormalized: the PMF of the pooled sample streams.
PmfHistogram accumulate(std::span<const CountHistogram> histograms);

bool is_power_of_two(std::size_t n);

}  // namespace pmfspoof
