#include "pmfspoof/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "pmfspoof/binary_io.hpp"
#include "pmfspoof/error.hpp"

namespace pmfspoof {

std::string_view to_string(GenderBucket b) {
  switch (b) {
    case GenderBucket::female: return "female";
    case GenderBucket::male: return "male";
    case GenderBucket::all: return "all";
  }
  return "all";
}

GenderBucket parse_bucket(std::string_view text) {
  if (text == "female") return GenderBucket::female;
  if (text == "male") return GenderBucket::male;
  if (text == "all") return GenderBucket::all;
  throw DataError(fmt::format("unknown gender bucket '{}'", text));
}

GenderBucket bucket_for(Gender g, bool gender_split) {
  if (!gender_split) return GenderBucket::all;
  return g == Gender::female ? GenderBucket::female : GenderBucket::male;
}

std::string describe(const ModelKey& k) {
  return fmt::format("({}, {}, {}, channel {})", to_string(k.bucket), to_string(k.label), to_string(k.bank), k.channel);
}

const PmfHistogram& SpeakerModelSet::at(const ModelKey& k) const {
  auto it = entries.find(k);
  if (it == entries.end()) throw DataError(fmt::format("speaker model set has no model {}", describe(k)));
  return it->second;
}

std::vector<GenderBucket> SpeakerModelSet::buckets() const {
  std::set<GenderBucket> seen;
  for (const auto& [k, _] : entries) seen.insert(k.bucket);
  return {seen.begin(), seen.end()};
}

const FilterBankSpec* SpeakerModelSet::find_bank(BankKind kind) const {
  for (const auto& b : banks)
    if (b.kind == kind) return &b;
  return nullptr;
}

void SpeakerModelSet::validate() const {
  if (entries.empty()) throw DataError("speaker model set is empty");
  const std::vector<GenderBucket> expected =
      gender_split ? std::vector{GenderBucket::female, GenderBucket::male} : std::vector{GenderBucket::all};
  for (const auto& [k, _] : entries)
    if (std::find(expected.begin(), expected.end(), k.bucket) == expected.end())
      throw DataError(fmt::format("model {} does not match the gender-split setting", describe(k)));
  for (GenderBucket g : expected) {
    for (const auto& bank : banks) {
      for (int c = 1; c <= bank.n_channels; ++c) {
        for (Label l : {Label::genuine, Label::spoofed}) {
          const ModelKey k{g, l, bank.kind, c};
          auto it = entries.find(k);
          if (it == entries.end()) throw DataError(fmt::format("missing model bucket {}", describe(k)));
          const auto& p = it->second.probabilities;
          if (p.size() != bin_count)
            throw DataError(fmt::format("model {} has {} bins, expected {}", describe(k), p.size(), bin_count));
          double sum = 0;
          for (double v : p) {
            if (!(v >= 0)) throw DataError(fmt::format("model {} has a negative or NaN probability", describe(k)));
            sum += v;
          }
          if (std::abs(sum - 1.0) > 1e-9) throw DataError(fmt::format("model {} sums to {}", describe(k), sum));
        }
      }
    }
  }
  for (const auto& [k, _] : entries)
    if (find_bank(k.bank) == nullptr) throw DataError(fmt::format("model {} refers to an unconfigured bank", describe(k)));
}

std::vector<CountHistogram> channel_histograms(const FilterBank& bank, const Waveform& w, const PmfGrid& grid) {
  if (w.sample_rate_hz != bank.sample_rate_hz())
    throw DataError(fmt::format("{}: sample rate {} Hz does not match the {} bank's {} Hz", w.file_id, w.sample_rate_hz,
                                to_string(bank.kind()), bank.sample_rate_hz()));
  if (w.samples.empty()) throw DataError(fmt::format("{}: empty waveform", w.file_id));
  std::vector<CountHistogram> out;
  out.reserve(bank.size());
  std::vector<double> filtered;
  CountHistogram raw{std::vector<std::uint64_t>(grid.raw_bins, 0)};
  for (std::size_t i = 0; i < bank.size(); ++i) {
    apply_channel(bank, i, w.samples, filtered);
    std::fill(raw.counts.begin(), raw.counts.end(), 0);
    add_counts(raw, filtered);
    out.push_back(grid.bins == grid.raw_bins ? raw : merge_bins(raw, grid.bins));
  }
  return out;
}

SpeakerModelSet build_models(std::span<const UtteranceRecord> train, std::span<const FilterBankSpec> banks,
                             bool gender_split, const PmfGrid& grid, const WaveformLoader& load) {
  if (banks.empty()) throw ConfigError("build_models: no filter-banks configured");
  if (!is_power_of_two(grid.raw_bins) || !is_power_of_two(grid.bins) || grid.bins > grid.raw_bins || grid.bins < 2)
    throw ConfigError(fmt::format("invalid PMF grid ({} raw bins, {} bins)", grid.raw_bins, grid.bins));

  std::vector<FilterBank> designed;
  for (const auto& s : banks) {
    for (const auto& d : designed)
      if (d.kind() == s.kind) throw ConfigError(fmt::format("filter-bank '{}' configured twice", to_string(s.kind)));
    designed.push_back(design(s));
  }

  std::map<std::pair<GenderBucket, Label>, int> files_per_class;
  for (const auto& r : train) {
    if (r.split != Split::train)
      throw ConfigError(fmt::format("build_models: record '{}' is not in the train split", r.file_id));
    ++files_per_class[{bucket_for(r.gender, gender_split), r.label}];
  }
  if (train.empty()) throw DataError("build_models: no training records");
  const std::vector<GenderBucket> expected =
      gender_split ? std::vector{GenderBucket::female, GenderBucket::male} : std::vector{GenderBucket::all};
  for (GenderBucket g : expected)
    for (Label l : {Label::genuine, Label::spoofed})
      if (!files_per_class.contains({g, l}))
        throw DataError(fmt::format("build_models: empty class bucket ({}, {})", to_string(g), to_string(l)));

  // Exact integer pooling; the result does not depend on file order.
  std::map<ModelKey, CountHistogram> pooled;
  for (const auto& r : train) {
    const GenderBucket g = bucket_for(r.gender, gender_split);
    const Waveform w = load(r);
    for (const auto& bank : designed) {
      auto hists = channel_histograms(bank, w, grid);
      for (std::size_t c = 0; c < hists.size(); ++c) {
        const ModelKey k{g, r.label, bank.kind(), static_cast<int>(c + 1)};
        auto [it, fresh] = pooled.try_emplace(k, std::move(hists[c]));
        if (!fresh)
          for (std::size_t b = 0; b < grid.bins; ++b) it->second.counts[b] += hists[c].counts[b];
      }
    }
  }

  SpeakerModelSet ms;
  ms.banks.assign(banks.begin(), banks.end());
  ms.raw_bin_count = grid.raw_bins;
  ms.bin_count = grid.bins;
  ms.gender_split = gender_split;
  for (const auto& [k, counts] : pooled) ms.entries.emplace(k, normalize(counts));
  return ms;
}

namespace {
constexpr std::string_view kKind = "SPKM";
}

void save_models(const SpeakerModelSet& ms, const std::filesystem::path& path) {
  binio::Writer w(kKind, ms.config_hash);
  w.u64(ms.raw_bin_count);
  w.u64(ms.bin_count);
  w.u8(ms.gender_split ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(ms.banks.size()));
  for (const auto& b : ms.banks) {
    w.str(to_string(b.kind));
    w.i32(b.n_channels);
    w.f64(b.f_low_hz);
    w.f64(b.f_high_hz);
    w.i32(b.sample_rate_hz);
  }
  w.u64(ms.entries.size());
  for (const auto& [k, p] : ms.entries) {
    w.str(to_string(k.bucket));
    w.str(to_string(k.label));
    w.str(to_string(k.bank));
    w.i32(k.channel);
    w.u64(p.total_samples);
    w.f64s(p.probabilities);
  }
  w.save(path);
}

SpeakerModelSet load_models(const std::filesystem::path& path) {
  binio::Reader r(path, kKind);
  SpeakerModelSet ms;
  ms.config_hash = r.config_hash();
  ms.raw_bin_count = r.u64();
  ms.bin_count = r.u64();
  ms.gender_split = r.u8() != 0;
  const auto n_banks = r.u32();
  try {
    for (std::uint32_t i = 0; i < n_banks; ++i) {
      FilterBankSpec b;
      b.kind = parse_bank_kind(r.str());
      b.n_channels = r.i32();
      b.f_low_hz = r.f64();
      b.f_high_hz = r.f64();
      b.sample_rate_hz = r.i32();
      ms.banks.push_back(b);
    }
    const auto n_entries = r.u64();
    for (std::uint64_t i = 0; i < n_entries; ++i) {
      ModelKey k;
      k.bucket = parse_bucket(r.str());
      k.label = parse_label(r.str());
      k.bank = parse_bank_kind(r.str());
      k.channel = r.i32();
      PmfHistogram p;
      p.total_samples = r.u64();
      p.probabilities = r.f64s();
      ms.entries.emplace(k, std::move(p));
    }
  } catch (const ConfigError& e) {
    throw DataError(fmt::format("{}: {}", path.string(), e.what()));
  }
  r.finish();
  ms.validate();
  return ms;
}

}  // namespace pmfspoof
