#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "pmfspoof/audio_io.hpp"
#include "pmfspoof/distances.hpp"
#include "pmfspoof/filterbank.hpp"
#include "pmfspoof/models.hpp"
#include "pmfspoof/table.hpp"

namespace pmfspoof {

/// Channels and measures taken from one filter-bank.
struct BankSelection {
  BankKind kind = BankKind::gammatone;
  std::vector<int> channels;      // 1-based, strictly increasing
  std::vector<Measure> measures;  // strictly increasing by index

  bool operator==(const BankSelection&) const = default;
};

struct FeatureConfig {
  std::vector<BankSelection> banks;
  bool gender_split = true;
  MeasureOptions measure_options;

  std::size_t dimension() const;
  /// Throws ConfigError on empty or unordered subsets or repeated banks.
  void validate() const;
};

/// Gammatone and inverse gammatone, every channel, all eight measures.
FeatureConfig full_preset(int n_channels = 10);
/// Channels 1-5 of each bank; measures 1-5 on gammatone and 1,2,3,5,6 on
/// inverse gammatone.
FeatureConfig reduced_2019_preset();
FeatureConfig preset(std::string_view name, int n_channels = 10);

struct FeatureSlot {
  BankKind bank;
  int channel;
  Measure measure;

  bool operator==(const FeatureSlot&) const = default;
};

std::vector<FeatureSlot> layout(const FeatureConfig& cfg);

struct FeatureVector {
  std::vector<double> values;
  std::vector<FeatureSlot> layout;
  RowMeta meta;
};

/// Binds a loaded model set to a feature configuration. Filter-banks are
/// designed once; extraction is const and can run concurrently.
class FeatureExtractor {
 public:
  FeatureExtractor(const SpeakerModelSet& models, FeatureConfig cfg);

  /// For every (bank, channel, measure) in layout order:
  ///   d(p_input, model_spoofed) - d(p_input, model_genuine)
  /// with the model pair selected by the record's gender bucket.
  FeatureVector extract(const UtteranceRecord& record, const Waveform& w) const;

  const FeatureConfig& config() const { return cfg_; }
  const std::vector<FeatureSlot>& slots() const { return layout_; }

 private:
  const SpeakerModelSet& models_;
  FeatureConfig cfg_;
  std::vector<FilterBank> banks_;  // parallel to cfg_.banks
  std::vector<FeatureSlot> layout_;
  PmfGrid grid_;
};

FeatureVector extract(const UtteranceRecord& record, const Waveform& w, const SpeakerModelSet& models,
                      const FeatureConfig& cfg);

struct BatchResult {
  LabeledMatrix features;
  std::vector<std::string> failures;  // "<file_id>: <reason>", lenient mode only
};

/// Row i is extract(records[i]). In strict mode any failure throws a
/// DataError listing every failed file; in lenient mode failed files are
/// skipped and reported.
BatchResult extract_batch(std::span<const UtteranceRecord> records, const WaveformLoader& load,
                          const SpeakerModelSet& models, const FeatureConfig& cfg, bool lenient = false);

/// Per-column z-scoring fitted on a training matrix.
struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& x);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
  bool empty() const { return mean.size() == 0; }
};

}  // namespace pmfspoof
