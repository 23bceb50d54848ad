#include "pmfspoof/pmf.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "pmfspoof/error.hpp"

namespace pmfspoof {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::uint64_t CountHistogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

std::size_t bin_index(double x, std::size_t bin_count) {
  // (x + 1) * B / 2 is exact for PCM16 amplitudes on power-of-two grids.
  const double pos = (x + 1.0) * (static_cast<double>(bin_count) / 2.0);
  if (!(pos > 0.0)) return 0;
  if (pos >= static_cast<double>(bin_count)) return bin_count - 1;
  return static_cast<std::size_t>(pos);
}

void add_counts(CountHistogram& h, std::span<const double> samples) {
  const std::size_t B = h.bin_count();
  for (double x : samples) {
    if (std::isnan(x)) throw DataError("PMF estimation: NaN sample");
    ++h.counts[bin_index(x, B)];
  }
}

CountHistogram estimate_counts(std::span<const double> samples, std::size_t bin_count) {
  if (samples.empty()) throw DataError("PMF estimation: empty sample sequence");
  if (bin_count < 2 || !is_power_of_two(bin_count))
    throw ConfigError(fmt::format("PMF bin count must be a power of two >= 2, got {}", bin_count));
  CountHistogram h{std::vector<std::uint64_t>(bin_count, 0)};
  add_counts(h, samples);
  return h;
}

PmfHistogram normalize(const CountHistogram& h) {
  const std::uint64_t total = h.total();
  if (total == 0) throw DataError("PMF normalization: histogram has no samples");
  PmfHistogram p;
  p.total_samples = total;
  p.probabilities.resize(h.bin_count());
  const double inv = static_cast<double>(total);
  for (std::size_t i = 0; i < h.bin_count(); ++i) p.probabilities[i] = static_cast<double>(h.counts[i]) / inv;
  return p;
}

PmfHistogram estimate_pmf(std::span<const double> samples, std::size_t bin_count) {
  return normalize(estimate_counts(samples, bin_count));
}

CountHistogram merge_bins(const CountHistogram& h, std::size_t bin_count) {
  if (bin_count < 2 || !is_power_of_two(bin_count) || bin_count > h.bin_count())
    throw ConfigError(fmt::format("cannot merge {} bins into {}", h.bin_count(), bin_count));
  const std::size_t group = h.bin_count() / bin_count;
  CountHistogram out{std::vector<std::uint64_t>(bin_count, 0)};
  for (std::size_t i = 0; i < h.bin_count(); ++i) out.counts[i / group] += h.counts[i];
  return out;
}

PmfHistogram accumulate(std::span<const CountHistogram> histograms) {
  if (histograms.empty()) throw DataError("accumulate: no histograms");
  const std::size_t B = histograms.front().bin_count();
  CountHistogram sum{std::vector<std::uint64_t>(B, 0)};
  for (const auto& h : histograms) {
    if (h.bin_count() != B) throw DataError(fmt::format("accumulate: bin count mismatch ({} vs {})", h.bin_count(), B));
    for (std::size_t i = 0; i < B; ++i) sum.counts[i] += h.counts[i];
  }
  return normalize(sum);
}

}  // namespace pmfspoof
