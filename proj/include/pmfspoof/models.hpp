#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pmfspoof/audio_io.hpp"
#include "pmfspoof/filterbank.hpp"
#include "pmfspoof/pmf.hpp"

namespace pmfspoof {

/// Which model pair a trial is scored against: per gender, or a single pooled
/// bucket when gender split is off.
enum class GenderBucket : std::uint8_t { female, male, all };

std::string_view to_string(GenderBucket b);
GenderBucket parse_bucket(std::string_view text);
GenderBucket bucket_for(Gender g, bool gender_split);

struct ModelKey {
  GenderBucket bucket = GenderBucket::all;
  Label label = Label::genuine;
  BankKind bank = BankKind::gammatone;
  int channel = 1;  // 1-based

  auto operator<=>(const ModelKey&) const = default;
};

std::string describe(const ModelKey& k);

/// Global genuine/spoofed PMFs per (gender bucket, class, bank, channel).
struct SpeakerModelSet {
  std::vector<FilterBankSpec> banks;
  std::size_t raw_bin_count = kRawBins;
  std::size_t bin_count = kDistanceBins;
  bool gender_split = true;
  std::map<ModelKey, PmfHistogram> entries;
  std::uint64_t config_hash = 0;

  const PmfHistogram& at(const ModelKey& k) const;
  std::vector<GenderBucket> buckets() const;
  const FilterBankSpec* find_bank(BankKind kind) const;

  /// Throws DataError naming the first missing (bucket, class, bank, channel)
  /// or malformed PMF.
  void validate() const;
};

struct PmfGrid {
  std::size_t raw_bins = kRawBins;  // estimation grid
  std::size_t bins = kDistanceBins;  // grid after bin merging
};

/// Per-channel counts of one waveform after filtering, merged to `grid.bins`.
std::vector<CountHistogram> channel_histograms(const FilterBank& bank, const Waveform& w, const PmfGrid& grid);

using WaveformLoader = std::function<Waveform(const UtteranceRecord&)>;

/// Pools channel counts of all training files per (bucket, class, bank,
/// channel). Files contribute in proportion to their length.
SpeakerModelSet build_models(std::span<const UtteranceRecord> train, std::span<const FilterBankSpec> banks,
                             bool gender_split, const PmfGrid& grid, const WaveformLoader& load);

void save_models(const SpeakerModelSet& ms, const std::filesystem::path& path);
SpeakerModelSet load_models(const std::filesystem::path& path);

}  // namespace pmfspoof
