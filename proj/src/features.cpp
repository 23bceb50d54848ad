#include "pmfspoof/features.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "pmfspoof/error.hpp"

namespace pmfspoof {

namespace {

std::vector<int> range(int lo, int hi) {
  std::vector<int> v;
  for (int i = lo; i <= hi; ++i) v.push_back(i);
  return v;
}

std::vector<Measure> measures(std::initializer_list<int> idx) {
  std::vector<Measure> v;
  for (int i : idx) v.push_back(measure_from_index(i));
  return v;
}

}  // namespace

std::size_t FeatureConfig::dimension() const {
  std::size_t d = 0;
  for (const auto& b : banks) d += b.channels.size() * b.measures.size();
  return d;
}

void FeatureConfig::validate() const {
  if (banks.empty()) throw ConfigError("feature configuration selects no filter-bank");
  std::set<BankKind> seen;
  for (const auto& b : banks) {
    const auto name = to_string(b.kind);
    if (!seen.insert(b.kind).second) throw ConfigError(fmt::format("bank '{}' selected twice", name));
    if (b.channels.empty()) throw ConfigError(fmt::format("bank '{}': empty channel subset", name));
    if (b.measures.empty()) throw ConfigError(fmt::format("bank '{}': empty measure subset", name));
    for (std::size_t i = 0; i < b.channels.size(); ++i) {
      if (b.channels[i] < 1) throw ConfigError(fmt::format("bank '{}': channel indices are 1-based", name));
      if (i > 0 && b.channels[i] <= b.channels[i - 1])
        throw ConfigError(fmt::format("bank '{}': channels must be strictly increasing", name));
    }
    for (std::size_t i = 1; i < b.measures.size(); ++i)
      if (index_of(b.measures[i]) <= index_of(b.measures[i - 1]))
        throw ConfigError(fmt::format("bank '{}': measures must be strictly increasing", name));
  }
}

FeatureConfig full_preset(int n_channels) {
  FeatureConfig cfg;
  const std::vector<Measure> all(kAllMeasures.begin(), kAllMeasures.end());
  cfg.banks.push_back({BankKind::gammatone, range(1, n_channels), all});
  cfg.banks.push_back({BankKind::inverse_gammatone, range(1, n_channels), all});
  return cfg;
}

FeatureConfig reduced_2019_preset() {
  FeatureConfig cfg;
  cfg.banks.push_back({BankKind::gammatone, range(1, 5), measures({1, 2, 3, 4, 5})});
  cfg.banks.push_back({BankKind::inverse_gammatone, range(1, 5), measures({1, 2, 3, 5, 6})});
  return cfg;
}

FeatureConfig preset(std::string_view name, int n_channels) {
  if (name == "full") return full_preset(n_channels);
  if (name == "reduced-2019") return reduced_2019_preset();
  throw ConfigError(fmt::format("unknown feature preset '{}' (expected full, reduced-2019 or custom)", name));
}

std::vector<FeatureSlot> layout(const FeatureConfig& cfg) {
  std::vector<FeatureSlot> out;
  for (const auto& b : cfg.banks)
    for (int c : b.channels)
      for (Measure m : b.measures) out.push_back({b.kind, c, m});
  return out;
}

FeatureExtractor::FeatureExtractor(const SpeakerModelSet& models, FeatureConfig cfg)
    : models_(models), cfg_(std::move(cfg)), grid_{models.raw_bin_count, models.bin_count} {
  cfg_.validate();
  if (cfg_.gender_split != models_.gender_split)
    throw ConfigError(fmt::format("feature config gender split ({}) differs from the model set's ({})",
                                  cfg_.gender_split, models_.gender_split));
  for (const auto& sel : cfg_.banks) {
    const FilterBankSpec* spec = models_.find_bank(sel.kind);
    if (spec == nullptr)
      throw ConfigError(fmt::format("model set has no '{}' filter-bank", to_string(sel.kind)));
    if (sel.channels.back() > spec->n_channels)
      throw ConfigError(fmt::format("bank '{}' has {} channels; channel {} requested", to_string(sel.kind),
                                    spec->n_channels, sel.channels.back()));
    banks_.push_back(design(*spec));
  }
  layout_ = layout(cfg_);
}

FeatureVector FeatureExtractor::extract(const UtteranceRecord& record, const Waveform& w) const {
  const GenderBucket g = bucket_for(record.gender, cfg_.gender_split);
  FeatureVector fv;
  fv.layout = layout_;
  fv.meta = RowMeta::from(record);
  fv.values.reserve(layout_.size());

  CountHistogram raw{std::vector<std::uint64_t>(grid_.raw_bins, 0)};
  std::vector<double> filtered;
  for (std::size_t b = 0; b < cfg_.banks.size(); ++b) {
    const auto& sel = cfg_.banks[b];
    const auto& bank = banks_[b];
    if (w.sample_rate_hz != bank.sample_rate_hz())
      throw DataError(fmt::format("{}: sample rate {} Hz does not match the model's {} Hz", record.file_id,
                                  w.sample_rate_hz, bank.sample_rate_hz()));
    for (int c : sel.channels) {
      const auto& genuine = models_.at({g, Label::genuine, sel.kind, c});
      const auto& spoofed = models_.at({g, Label::spoofed, sel.kind, c});

      apply_channel(bank, static_cast<std::size_t>(c - 1), w.samples, filtered);
      std::fill(raw.counts.begin(), raw.counts.end(), 0);
      add_counts(raw, filtered);
      const PmfHistogram input =
          normalize(grid_.bins == grid_.raw_bins ? raw : merge_bins(raw, grid_.bins));

      for (Measure m : sel.measures) {
        const double to_spoofed = similarity(m, input, spoofed, cfg_.measure_options);
        const double to_genuine = similarity(m, input, genuine, cfg_.measure_options);
        fv.values.push_back(to_spoofed - to_genuine);
      }
    }
  }
  return fv;
}

FeatureVector extract(const UtteranceRecord& record, const Waveform& w, const SpeakerModelSet& models,
                      const FeatureConfig& cfg) {
  return FeatureExtractor(models, cfg).extract(record, w);
}

BatchResult extract_batch(std::span<const UtteranceRecord> records, const WaveformLoader& load,
                          const SpeakerModelSet& models, const FeatureConfig& cfg, bool lenient) {
  const FeatureExtractor extractor(models, cfg);
  const auto dim = static_cast<Eigen::Index>(extractor.slots().size());

  BatchResult out;
  std::vector<std::vector<double>> rows;
  for (const auto& r : records) {
    try {
      auto fv = extractor.extract(r, load(r));
      out.features.rows.push_back(std::move(fv.meta));
      rows.push_back(std::move(fv.values));
    } catch (const DataError& e) {
      out.failures.push_back(fmt::format("{}: {}", r.file_id, e.what()));
      if (lenient) spdlog::warn("skipping {}: {}", r.file_id, e.what());
    }
  }
  if (!lenient && !out.failures.empty()) {
    std::string msg = fmt::format("feature extraction failed for {} file(s):", out.failures.size());
    for (const auto& f : out.failures) msg += "\n  " + f;
    throw DataError(msg);
  }
  out.features.values.resize(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.features.values.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::RowVectorXd>(rows[i].data(), dim);
  return out;
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& x) {
  if (x.rows() < 1) throw DataError("standardizer: no rows");
  Standardizer s;
  s.mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - s.mean;
  s.scale = (centered.array().square().colwise().sum() / static_cast<double>(x.rows())).sqrt().matrix();
  for (Eigen::Index j = 0; j < s.scale.size(); ++j)
    if (!(s.scale(j) > 0)) s.scale(j) = 1.0;
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& x) const {
  if (x.cols() != mean.size()) throw DataError("standardizer: column count mismatch");
  return ((x.rowwise() - mean).array().rowwise() / scale.array()).matrix();
}

}  // namespace pmfspoof
