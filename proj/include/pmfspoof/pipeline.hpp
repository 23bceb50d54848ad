#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pmfspoof/audio_io.hpp"
#include "pmfspoof/classifier.hpp"
#include "pmfspoof/features.hpp"
#include "pmfspoof/filterbank.hpp"
#include "pmfspoof/metrics.hpp"
#include "pmfspoof/models.hpp"
#include "pmfspoof/synth.hpp"

namespace pmfspoof {

struct SplitPaths {
  std::filesystem::path manifest;
  std::filesystem::path audio_dir;
};

struct SynthCorpusConfig {
  SynthSpec spec;  // spec.n_per_class is ignored; the per-split counts apply
  int n_train = 200;
  int n_dev = 100;
  int n_eval = 0;
};

struct DiffusionParams {
  std::optional<double> epsilon;  // median heuristic when absent
  std::map<GenderBucket, int> k{{GenderBucket::female, 5}, {GenderBucket::male, 4}, {GenderBucket::all, 5}};
  int t = 1;
  std::size_t per_attack = 1000;
  std::size_t genuine = 1000;
  std::uint64_t seed = 1;
};

struct PipelineConfig {
  std::filesystem::path data_root;
  std::filesystem::path work_dir;
  std::filesystem::path gender_map;
  std::map<Split, SplitPaths> splits;
  std::optional<SynthCorpusConfig> synth;

  int sample_rate_hz = 16000;
  std::vector<FilterBankSpec> banks;
  PmfGrid grid;
  std::string feature_preset = "reduced-2019";
  FeatureConfig features;
  bool standardize = false;
  bool gender_split = true;
  DiffusionParams diffusion;
  TrainOptions classifier;
  std::vector<Split> eval_splits{Split::train, Split::dev};
  bool lenient = false;

  /// Each stage's hash covers its own parameters and the upstream hash.
  std::uint64_t models_hash() const;
  std::uint64_t features_hash() const;
  std::uint64_t diffusion_hash() const;
  std::uint64_t classifier_hash() const;

  int k_for(GenderBucket b) const;
  void validate() const;
};

/// JSON text; relative paths resolve against `base_dir`. Unknown keys are
/// rejected.
PipelineConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

/// Command-line overrides applied after loading.
struct Overrides {
  std::optional<std::uint64_t> seed;
  bool no_gender_split = false;
  bool lenient = false;
};
void apply_overrides(PipelineConfig& cfg, const Overrides& o);

enum class Stage { synth_gen, build_models, extract, dm_fit, dm_extend, train, evaluate, export_plots, run_all };

std::string_view to_string(Stage s);
Stage parse_stage(std::string_view text);

/// Artifact file names inside the work dir.
struct Artifacts {
  std::filesystem::path dir;

  std::filesystem::path models() const;
  std::filesystem::path features(Split s, GenderBucket b) const;
  std::filesystem::path diffusion(GenderBucket b) const;
  std::filesystem::path embedding(Split s, GenderBucket b) const;
  std::filesystem::path classifier(GenderBucket b) const;
  std::filesystem::path scores(Split s, GenderBucket b) const;
  std::filesystem::path det(Split s, GenderBucket b) const;
  std::filesystem::path report(GenderBucket b) const;
  std::filesystem::path report_eval(GenderBucket b) const;
  std::filesystem::path report_json() const;
  std::filesystem::path plots_dir() const;
  /// Sidecar holding the config hash of a CSV artifact.
  static std::filesystem::path meta_of(const std::filesystem::path& csv);
};

void run_synth_gen(const PipelineConfig& cfg);
void run_build_models(const PipelineConfig& cfg);
void run_extract(const PipelineConfig& cfg);
void run_dm_fit(const PipelineConfig& cfg);
void run_dm_extend(const PipelineConfig& cfg);
void run_train(const PipelineConfig& cfg);
std::vector<EvalReport> run_evaluate(const PipelineConfig& cfg);
void run_export_plots(const PipelineConfig& cfg);
/// Every stage in order; synth-gen only when the config has a synth section.
std::vector<EvalReport> run_all(const PipelineConfig& cfg);

void run_stage(const PipelineConfig& cfg, Stage s);

/// Fixed-point percent with two decimals, as in the report tables.
std::string percent2(double v);

}  // namespace pmfspoof
