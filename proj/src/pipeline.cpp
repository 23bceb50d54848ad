#include "pmfspoof/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "json.hpp"
#include "pmfspoof/binary_io.hpp"
#include "pmfspoof/diffusion.hpp"
#include "pmfspoof/error.hpp"
#include "pmfspoof/table.hpp"

namespace pmfspoof {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr std::string_view kDiffusionKind = "DMAP";
constexpr std::string_view kClassifierKind = "LOGR";

// ---- config parsing ----

void check_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError(fmt::format("config: '{}' must be an object", where));
  for (const auto& [key, _] : obj.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError(fmt::format("config: unknown key '{}' in '{}'", key, where));
}

template <typename T>
T get_or(const json& obj, std::string_view key, T fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(fmt::format("config: key '{}' has the wrong type", key));
  }
}

fs::path resolve(const fs::path& base, const fs::path& p) { return p.is_absolute() ? p : base / p; }

std::vector<int> int_list(const json& j, std::string_view what) {
  if (!j.is_array()) throw ConfigError(fmt::format("config: '{}' must be an array", what));
  std::vector<int> out;
  for (const auto& v : j) {
    if (!v.is_number_integer()) throw ConfigError(fmt::format("config: '{}' must contain integers", what));
    out.push_back(v.get<int>());
  }
  return out;
}

FeatureConfig parse_custom(const json& j) {
  if (!j.is_array()) throw ConfigError("config: features.custom must be an array");
  FeatureConfig f;
  for (const auto& b : j) {
    check_keys(b, "features.custom[]", {"bank", "channels", "measures"});
    BankSelection sel;
    sel.kind = parse_bank_kind(get_or<std::string>(b, "bank", ""));
    if (!b.contains("channels") || !b.contains("measures"))
      throw ConfigError("config: features.custom entries need 'channels' and 'measures'");
    sel.channels = int_list(b["channels"], "channels");
    for (int m : int_list(b["measures"], "measures")) sel.measures.push_back(measure_from_index(m));
    f.banks.push_back(std::move(sel));
  }
  return f;
}

SynthCorpusConfig parse_synth(const json& j) {
  check_keys(j, "synth",
             {"n_train", "n_dev", "n_eval", "duration_s", "sample_rate_hz", "seed", "speakers_per_gender", "classes"});
  SynthCorpusConfig s;
  s.n_train = get_or(j, "n_train", s.n_train);
  s.n_dev = get_or(j, "n_dev", s.n_dev);
  s.n_eval = get_or(j, "n_eval", s.n_eval);
  s.spec.duration_s = get_or(j, "duration_s", s.spec.duration_s);
  s.spec.sample_rate_hz = get_or(j, "sample_rate_hz", s.spec.sample_rate_hz);
  s.spec.seed = get_or<std::uint64_t>(j, "seed", s.spec.seed);
  s.spec.speakers_per_gender = get_or(j, "speakers_per_gender", s.spec.speakers_per_gender);
  if (!j.contains("classes") || !j["classes"].is_array()) throw ConfigError("config: synth.classes must be an array");
  for (const auto& c : j["classes"]) {
    check_keys(c, "synth.classes[]", {"id", "law", "tilt_db_per_oct", "scale"});
    SynthClass sc;
    sc.class_id = get_or<std::string>(c, "id", "");
    sc.law = parse_amplitude_law(get_or<std::string>(c, "law", ""));
    sc.tilt_db_per_oct = get_or(c, "tilt_db_per_oct", 0.0);
    sc.scale = get_or(c, "scale", sc.scale);
    s.spec.classes.push_back(std::move(sc));
  }
  if (s.n_train < 0 || s.n_dev < 0 || s.n_eval < 0) throw ConfigError("config: synth split sizes must be >= 0");
  s.spec.validate();
  return s;
}

// ---- hashing ----

std::string hex(std::uint64_t h) { return fmt::format("{:016x}", h); }

json banks_json(const std::vector<FilterBankSpec>& banks) {
  json out = json::array();
  for (const auto& b : banks)
    out.push_back({{"kind", to_string(b.kind)},
                   {"n_channels", b.n_channels},
                   {"f_low_hz", b.f_low_hz},
                   {"f_high_hz", b.f_high_hz},
                   {"sample_rate_hz", b.sample_rate_hz}});
  return out;
}

json features_json(const FeatureConfig& f) {
  json out = json::array();
  for (const auto& b : f.banks) {
    json m = json::array();
    for (auto x : b.measures) m.push_back(index_of(x));
    out.push_back({{"bank", to_string(b.kind)}, {"channels", b.channels}, {"measures", m}});
  }
  return out;
}

// ---- artifacts ----

void write_sidecar(const fs::path& csv, std::uint64_t hash, json extra) {
  extra["config_hash"] = hex(hash);
  std::ofstream out(Artifacts::meta_of(csv), std::ios::binary | std::ios::trunc);
  out << extra.dump(2) << '\n';
  if (!out.flush()) throw DataError(fmt::format("write failed: {}", Artifacts::meta_of(csv).string()));
}

void require(const fs::path& p, std::string_view stage) {
  if (!fs::exists(p))
    throw ConfigError(fmt::format("missing artifact {}; run stage '{}' first", p.string(), stage));
}

void check_hash(std::uint64_t found, std::uint64_t expected, const fs::path& p, std::string_view stage) {
  if (found != expected)
    throw ConfigError(fmt::format("{} was produced with a different configuration (hash {} vs {}); rerun stage '{}'",
                                  p.string(), hex(found), hex(expected), stage));
}

LabeledMatrix read_checked_csv(const fs::path& csv, std::uint64_t expected, std::string_view stage) {
  require(csv, stage);
  const auto meta_path = Artifacts::meta_of(csv);
  require(meta_path, stage);
  std::ifstream in(meta_path, std::ios::binary);
  json meta;
  try {
    meta = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(fmt::format("{}: {}", meta_path.string(), e.what()));
  }
  const auto found = meta.value("config_hash", std::string());
  if (found != hex(expected))
    throw ConfigError(fmt::format("{} was produced with a different configuration (hash {} vs {}); rerun stage '{}'",
                                  csv.string(), found, hex(expected), stage));
  return read_table_csv(csv);
}

std::vector<GenderBucket> buckets_of(const PipelineConfig& cfg) {
  if (cfg.gender_split) return {GenderBucket::female, GenderBucket::male};
  return {GenderBucket::all};
}

std::vector<Split> configured_splits(const PipelineConfig& cfg) {
  std::vector<Split> out;
  for (const auto& [s, _] : cfg.splits) out.push_back(s);
  return out;
}

const SplitPaths& split_paths(const PipelineConfig& cfg, Split s) {
  const auto it = cfg.splits.find(s);
  if (it == cfg.splits.end())
    throw ConfigError(fmt::format("config: no paths for split '{}'", to_string(s)));
  return it->second;
}

std::vector<UtteranceRecord> load_records(const PipelineConfig& cfg, Split s) {
  const auto& p = split_paths(cfg, s);
  for (const auto& f : {p.manifest, cfg.gender_map}) {
    if (fs::exists(f)) continue;
    // A synthetic corpus is one more stage; external data that is absent is a data error.
    if (cfg.synth) require(f, "synth-gen");
    throw DataError(fmt::format("input file {} does not exist", f.string()));
  }
  return parse_manifest(p.manifest, parse_gender_map(cfg.gender_map), s);
}

WaveformLoader loader_for(const PipelineConfig& cfg, Split s) {
  const fs::path dir = split_paths(cfg, s).audio_dir;
  const int rate = cfg.sample_rate_hz;
  return [dir, rate](const UtteranceRecord& r) { return read_wav(dir / (r.file_id + ".wav"), rate); };
}

void ensure_work_dir(const PipelineConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.work_dir, ec);
  if (ec) throw DataError(fmt::format("cannot create work dir {}: {}", cfg.work_dir.string(), ec.message()));
}

struct StageTimer {
  std::string_view name;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  explicit StageTimer(std::string_view n) : name(n) { spdlog::info("stage {}: start", name); }
  ~StageTimer() {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    spdlog::info("stage {}: {:.2f} s", name, dt.count());
  }
};

struct DiffusionArtifact {
  Standardizer standardizer;
  DiffusionModel model;
};

DiffusionArtifact load_diffusion(const PipelineConfig& cfg, GenderBucket b) {
  const auto path = Artifacts{cfg.work_dir}.diffusion(b);
  require(path, "dm-fit");
  binio::Reader r(path, kDiffusionKind);
  check_hash(r.config_hash(), cfg.diffusion_hash(), path, "dm-fit");
  DiffusionArtifact a;
  if (r.u8() != 0) {
    const auto mean = r.f64s();
    const auto scale = r.f64s();
    a.standardizer.mean = Eigen::Map<const Eigen::RowVectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    a.standardizer.scale = Eigen::Map<const Eigen::RowVectorXd>(scale.data(), static_cast<Eigen::Index>(scale.size()));
  }
  a.model = read_diffusion(r);
  const auto n_subset = r.u64();
  for (std::uint64_t i = 0; i < n_subset; ++i) r.u64();
  r.finish();
  return a;
}

void write_embedding(const fs::path& path, const std::vector<RowMeta>& rows, const Eigen::MatrixXd& coords,
                     std::uint64_t hash, GenderBucket b, Split s) {
  LabeledMatrix m{rows, coords};
  write_table_csv(path, m, embedding_columns(static_cast<std::size_t>(coords.cols())));
  write_sidecar(path, hash, {{"artifact", "embedding"}, {"bucket", to_string(b)}, {"split", to_string(s)}});
}

std::vector<Label> labels_of(const std::vector<RowMeta>& rows) {
  std::vector<Label> out;
  for (const auto& r : rows) out.push_back(r.label);
  return out;
}

std::vector<std::string> attacks_of(const std::vector<RowMeta>& rows) {
  std::vector<std::string> out;
  for (const auto& r : rows) out.push_back(r.attack);
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out.flush()) throw DataError(fmt::format("write failed: {}", path.string()));
}

// Table 1 layout: one row per attack ("None" first), one column per split,
// followed by the split EERs.
std::string report_table(const std::vector<const EvalReport*>& cols) {
  std::set<std::string> attacks;
  for (const auto* r : cols)
    for (const auto& [a, _] : r->per_attack_errors) attacks.insert(a);
  std::vector<std::string> order;
  if (attacks.erase("None")) order.push_back("None");
  order.insert(order.end(), attacks.begin(), attacks.end());

  std::string out = "attack";
  for (const auto* r : cols) out += ",error_" + r->split;
  out += '\n';
  for (const auto& a : order) {
    out += a;
    for (const auto* r : cols) {
      const auto it = r->per_attack_errors.find(a);
      out += ',' + (it == r->per_attack_errors.end() ? std::string("-") : percent2(it->second));
    }
    out += '\n';
  }
  out += "EER";
  for (const auto* r : cols) out += ',' + percent2(r->eer_percent);
  out += '\n';
  return out;
}

}  // namespace

// ---- PipelineConfig ----

std::uint64_t PipelineConfig::models_hash() const {
  const json j{{"stage", "models"},
               {"sample_rate_hz", sample_rate_hz},
               {"banks", banks_json(banks)},
               {"raw_bins", grid.raw_bins},
               {"bins", grid.bins},
               {"gender_split", gender_split}};
  return binio::fnv1a(j.dump());
}

std::uint64_t PipelineConfig::features_hash() const {
  const json j{{"stage", "features"},
               {"selection", features_json(features)},
               {"smoothing", features.measure_options.smoothing}};
  return binio::fnv1a(j.dump(), models_hash());
}

std::uint64_t PipelineConfig::diffusion_hash() const {
  json k = json::object();
  for (const auto& [b, v] : diffusion.k) k[std::string(to_string(b))] = v;
  const json j{{"stage", "diffusion"},
               {"epsilon", diffusion.epsilon ? json(*diffusion.epsilon) : json("auto")},
               {"k", k},
               {"t", diffusion.t},
               {"per_attack", diffusion.per_attack},
               {"genuine", diffusion.genuine},
               {"seed", diffusion.seed},
               {"standardize", standardize}};
  return binio::fnv1a(j.dump(), features_hash());
}

std::uint64_t PipelineConfig::classifier_hash() const {
  const json j{{"stage", "classifier"},
               {"l2", classifier.l2},
               {"max_iterations", classifier.max_iterations},
               {"tolerance", classifier.gradient_tolerance},
               {"balance_classes", classifier.balance_classes}};
  return binio::fnv1a(j.dump(), diffusion_hash());
}

int PipelineConfig::k_for(GenderBucket b) const {
  const auto it = diffusion.k.find(b);
  if (it == diffusion.k.end()) throw ConfigError(fmt::format("config: no K for bucket '{}'", to_string(b)));
  return it->second;
}

void PipelineConfig::validate() const {
  if (work_dir.empty()) throw ConfigError("config: paths.work_dir is required");
  if (sample_rate_hz <= 0) throw ConfigError("config: sample_rate_hz must be positive");
  if (banks.empty()) throw ConfigError("config: no filter-banks");
  for (const auto& b : banks) design(b);  // band checks
  if (!is_power_of_two(grid.raw_bins) || !is_power_of_two(grid.bins) || grid.bins > grid.raw_bins)
    throw ConfigError("config: pmf bin counts must be powers of two with distance_bins <= raw_bins");
  features.validate();
  for (const auto& sel : features.banks) {
    const auto it = std::find_if(banks.begin(), banks.end(), [&](const auto& b) { return b.kind == sel.kind; });
    if (it == banks.end())
      throw ConfigError(fmt::format("config: features use bank '{}' which is not configured", to_string(sel.kind)));
    if (sel.channels.back() > it->n_channels)
      throw ConfigError(fmt::format("config: features use channel {} of bank '{}' which has {}", sel.channels.back(),
                                    to_string(sel.kind), it->n_channels));
  }
  for (const auto& [b, k] : diffusion.k)
    if (k < 1) throw ConfigError(fmt::format("config: K for '{}' must be >= 1", to_string(b)));
  for (auto b : buckets_of(*this)) k_for(b);
  if (diffusion.t < 1) throw ConfigError("config: diffusion t must be >= 1");
  if (diffusion.epsilon && !(*diffusion.epsilon > 0)) throw ConfigError("config: diffusion epsilon must be positive");
  if (diffusion.per_attack < 1 || diffusion.genuine < 1) throw ConfigError("config: subsample counts must be >= 1");
  if (!(classifier.l2 >= 0) || classifier.max_iterations < 1 || !(classifier.gradient_tolerance > 0))
    throw ConfigError("config: invalid classifier parameters");
  if (!splits.contains(Split::train)) throw ConfigError("config: paths for the train split are required");
  for (auto s : eval_splits)
    if (!splits.contains(s))
      throw ConfigError(fmt::format("config: evaluation split '{}' has no paths", to_string(s)));
  if (eval_splits.empty()) throw ConfigError("config: evaluation.splits is empty");
}

PipelineConfig parse_config(std::string_view json_text, const fs::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("config: {}", e.what()));
  }
  check_keys(root, "(root)",
             {"paths", "synth", "sample_rate_hz", "filterbanks", "pmf", "features", "gender_split", "diffusion",
              "classifier", "evaluation"});

  PipelineConfig cfg;
  cfg.sample_rate_hz = get_or(root, "sample_rate_hz", cfg.sample_rate_hz);
  cfg.gender_split = get_or(root, "gender_split", cfg.gender_split);

  if (root.contains("synth")) {
    cfg.synth = parse_synth(root["synth"]);
    if (cfg.synth->spec.sample_rate_hz != cfg.sample_rate_hz)
      throw ConfigError("config: synth.sample_rate_hz differs from sample_rate_hz");
  }

  const json paths = root.value("paths", json::object());
  check_keys(paths, "paths", {"data_root", "work_dir", "gender_map", "train", "dev", "eval"});
  cfg.data_root = resolve(base_dir, get_or<std::string>(paths, "data_root", "data"));
  cfg.work_dir = resolve(base_dir, get_or<std::string>(paths, "work_dir", "work"));
  cfg.gender_map = paths.contains("gender_map") ? resolve(cfg.data_root, paths["gender_map"].get<std::string>())
                                                : cfg.data_root / "genders.txt";
  for (auto s : {Split::train, Split::dev, Split::eval}) {
    const std::string name(to_string(s));
    const bool synth_split = cfg.synth && (s == Split::train   ? cfg.synth->n_train > 0
                                           : s == Split::dev ? cfg.synth->n_dev > 0
                                                             : cfg.synth->n_eval > 0);
    if (paths.contains(name)) {
      const auto& p = paths[name];
      check_keys(p, "paths." + name, {"manifest", "audio_dir"});
      if (!p.contains("manifest") || !p.contains("audio_dir"))
        throw ConfigError(fmt::format("config: paths.{} needs 'manifest' and 'audio_dir'", name));
      cfg.splits[s] = {resolve(cfg.data_root, p["manifest"].get<std::string>()),
                       resolve(cfg.data_root, p["audio_dir"].get<std::string>())};
    } else if (synth_split) {
      cfg.splits[s] = {cfg.data_root / fmt::format("protocol_{}.txt", name), cfg.data_root / name};
    }
  }

  const json fb = root.value("filterbanks", json::object());
  check_keys(fb, "filterbanks", {"kinds", "n_channels", "f_low_hz", "f_high_hz"});
  const auto kinds = get_or<std::vector<std::string>>(fb, "kinds", {"gammatone", "inverse_gammatone"});
  for (const auto& k : kinds)
    cfg.banks.push_back({parse_bank_kind(k), get_or(fb, "n_channels", 10), get_or(fb, "f_low_hz", 0.0),
                         get_or(fb, "f_high_hz", cfg.sample_rate_hz / 2.0), cfg.sample_rate_hz});

  const json pmf = root.value("pmf", json::object());
  check_keys(pmf, "pmf", {"raw_bins", "distance_bins"});
  cfg.grid.raw_bins = get_or<std::size_t>(pmf, "raw_bins", kRawBins);
  cfg.grid.bins = get_or<std::size_t>(pmf, "distance_bins", kDistanceBins);

  const json feat = root.value("features", json::object());
  check_keys(feat, "features", {"preset", "custom", "standardize", "smoothing"});
  cfg.feature_preset = get_or<std::string>(feat, "preset", cfg.feature_preset);
  if (cfg.feature_preset == "custom") {
    if (!feat.contains("custom")) throw ConfigError("config: preset 'custom' needs features.custom");
    cfg.features = parse_custom(feat["custom"]);
  } else {
    if (feat.contains("custom")) throw ConfigError("config: features.custom is only read with preset 'custom'");
    cfg.features = preset(cfg.feature_preset, cfg.banks.empty() ? 10 : cfg.banks.front().n_channels);
  }
  cfg.features.gender_split = cfg.gender_split;
  cfg.features.measure_options.smoothing = get_or(feat, "smoothing", kDefaultSmoothing);
  cfg.standardize = get_or(feat, "standardize", false);

  const json dm = root.value("diffusion", json::object());
  check_keys(dm, "diffusion", {"epsilon", "k", "t", "per_attack", "genuine", "seed"});
  if (dm.contains("epsilon") && !(dm["epsilon"].is_string() && dm["epsilon"] == "auto")) {
    if (!dm["epsilon"].is_number()) throw ConfigError("config: diffusion.epsilon must be a number or \"auto\"");
    cfg.diffusion.epsilon = dm["epsilon"].get<double>();
  }
  if (dm.contains("k")) {
    if (dm["k"].is_number_integer()) {
      for (auto& [_, v] : cfg.diffusion.k) v = dm["k"].get<int>();
    } else {
      check_keys(dm["k"], "diffusion.k", {"female", "male", "all"});
      for (const auto& [name, v] : dm["k"].items()) {
        if (!v.is_number_integer()) throw ConfigError("config: diffusion.k values must be integers");
        cfg.diffusion.k[parse_bucket(name)] = v.get<int>();
      }
    }
  }
  cfg.diffusion.t = get_or(dm, "t", cfg.diffusion.t);
  cfg.diffusion.per_attack = get_or(dm, "per_attack", cfg.diffusion.per_attack);
  cfg.diffusion.genuine = get_or(dm, "genuine", cfg.diffusion.genuine);
  cfg.diffusion.seed = get_or<std::uint64_t>(dm, "seed", cfg.diffusion.seed);

  const json cl = root.value("classifier", json::object());
  check_keys(cl, "classifier", {"l2", "max_iterations", "tolerance", "balance_classes"});
  cfg.classifier.l2 = get_or(cl, "l2", cfg.classifier.l2);
  cfg.classifier.max_iterations = get_or(cl, "max_iterations", cfg.classifier.max_iterations);
  cfg.classifier.gradient_tolerance = get_or(cl, "tolerance", cfg.classifier.gradient_tolerance);
  cfg.classifier.balance_classes = get_or(cl, "balance_classes", cfg.classifier.balance_classes);

  const json ev = root.value("evaluation", json::object());
  check_keys(ev, "evaluation", {"splits"});
  if (ev.contains("splits")) {
    cfg.eval_splits.clear();
    for (const auto& s : get_or<std::vector<std::string>>(ev, "splits", {})) cfg.eval_splits.push_back(parse_split(s));
  } else {
    cfg.eval_splits = configured_splits(cfg);
  }

  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot read config {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), fs::absolute(path).parent_path());
}

void apply_overrides(PipelineConfig& cfg, const Overrides& o) {
  if (o.seed) {
    cfg.diffusion.seed = *o.seed;
    if (cfg.synth) cfg.synth->spec.seed = *o.seed;
  }
  if (o.no_gender_split) {
    cfg.gender_split = false;
    cfg.features.gender_split = false;
  }
  if (o.lenient) cfg.lenient = true;
  cfg.validate();
}

// ---- stages ----

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::synth_gen: return "synth-gen";
    case Stage::build_models: return "build-models";
    case Stage::extract: return "extract";
    case Stage::dm_fit: return "dm-fit";
    case Stage::dm_extend: return "dm-extend";
    case Stage::train: return "train";
    case Stage::evaluate: return "evaluate";
    case Stage::export_plots: return "export-plots";
    case Stage::run_all: return "run-all";
  }
  return "?";
}

Stage parse_stage(std::string_view text) {
  for (auto s : {Stage::synth_gen, Stage::build_models, Stage::extract, Stage::dm_fit, Stage::dm_extend, Stage::train,
                 Stage::evaluate, Stage::export_plots, Stage::run_all})
    if (to_string(s) == text) return s;
  throw ConfigError(fmt::format("unknown stage '{}'", text));
}

fs::path Artifacts::models() const { return dir / "models.bin"; }
fs::path Artifacts::features(Split s, GenderBucket b) const {
  return dir / fmt::format("features_{}_{}.csv", to_string(s), to_string(b));
}
fs::path Artifacts::diffusion(GenderBucket b) const { return dir / fmt::format("dm_{}.bin", to_string(b)); }
fs::path Artifacts::embedding(Split s, GenderBucket b) const {
  return dir / fmt::format("embedding_{}_{}.csv", to_string(s), to_string(b));
}
fs::path Artifacts::classifier(GenderBucket b) const { return dir / fmt::format("classifier_{}.bin", to_string(b)); }
fs::path Artifacts::scores(Split s, GenderBucket b) const {
  return dir / fmt::format("scores_{}_{}.csv", to_string(s), to_string(b));
}
fs::path Artifacts::det(Split s, GenderBucket b) const {
  return dir / fmt::format("det_{}_{}.csv", to_string(s), to_string(b));
}
fs::path Artifacts::report(GenderBucket b) const { return dir / fmt::format("report_{}.csv", to_string(b)); }
fs::path Artifacts::report_eval(GenderBucket b) const { return dir / fmt::format("report_eval_{}.csv", to_string(b)); }
fs::path Artifacts::report_json() const { return dir / "report.json"; }
fs::path Artifacts::plots_dir() const { return dir / "plots"; }
fs::path Artifacts::meta_of(const fs::path& csv) {
  fs::path p = csv;
  p.replace_extension(".meta.json");
  return p;
}

std::string percent2(double v) { return fmt::format("{:.2f}", v); }

void run_synth_gen(const PipelineConfig& cfg) {
  if (!cfg.synth) throw ConfigError("config has no 'synth' section; synth-gen has nothing to do");
  StageTimer timer("synth-gen");
  const std::pair<Split, int> parts[] = {
      {Split::train, cfg.synth->n_train}, {Split::dev, cfg.synth->n_dev}, {Split::eval, cfg.synth->n_eval}};
  for (const auto& [split, n] : parts) {
    if (n == 0) continue;
    SynthSpec spec = cfg.synth->spec;
    spec.n_per_class = n;
    const auto out = generate(spec, cfg.data_root, split);
    spdlog::info("synth-gen: {} x {} files -> {}", spec.classes.size(), n, out.manifest.string());
  }
}

void run_build_models(const PipelineConfig& cfg) {
  StageTimer timer("build-models");
  ensure_work_dir(cfg);
  const auto records = load_records(cfg, Split::train);
  auto ms = build_models(records, cfg.banks, cfg.gender_split, cfg.grid, loader_for(cfg, Split::train));
  ms.config_hash = cfg.models_hash();
  save_models(ms, Artifacts{cfg.work_dir}.models());
  spdlog::info("build-models: {} training files, {} model PMFs", records.size(), ms.entries.size());
}

void run_extract(const PipelineConfig& cfg) {
  StageTimer timer("extract");
  const Artifacts art{cfg.work_dir};
  require(art.models(), "build-models");
  const auto models = load_models(art.models());
  check_hash(models.config_hash, cfg.models_hash(), art.models(), "build-models");

  std::vector<std::string> columns;
  for (const auto& slot : layout(cfg.features))
    columns.push_back(fmt::format("{}:{}:{}", to_string(slot.bank), slot.channel, index_of(slot.measure)));

  for (auto split : configured_splits(cfg)) {
    const auto records = load_records(cfg, split);
    auto batch = extract_batch(records, loader_for(cfg, split), models, cfg.features, cfg.lenient);
    for (const auto& f : batch.failures) spdlog::warn("extract: skipped {}", f);
    for (auto b : buckets_of(cfg)) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < batch.features.size(); ++i)
        if (bucket_for(batch.features.rows[i].gender, cfg.gender_split) == b) idx.push_back(i);
      const auto part = batch.features.select(idx);
      const auto path = art.features(split, b);
      write_table_csv(path, part, feature_columns(cfg.features.dimension()));
      write_sidecar(path, cfg.features_hash(),
                    {{"artifact", "features"}, {"bucket", to_string(b)}, {"split", to_string(split)},
                     {"slots", columns}});
      spdlog::info("extract: {} {} -> {} rows", to_string(split), to_string(b), part.size());
    }
  }
}

void run_dm_fit(const PipelineConfig& cfg) {
  StageTimer timer("dm-fit");
  const Artifacts art{cfg.work_dir};
  for (auto b : buckets_of(cfg)) {
    const auto path = art.features(Split::train, b);
    const auto train = read_checked_csv(path, cfg.features_hash(), "extract");
    if (train.size() == 0) throw DataError(fmt::format("{}: no training rows", path.string()));

    Standardizer st;
    Eigen::MatrixXd x = train.values;
    if (cfg.standardize) {
      st = Standardizer::fit(x);
      x = st.apply(x);
    }
    const std::uint64_t seed = binio::fnv1a(to_string(b), cfg.diffusion.seed);
    const auto subset = subsample_training(train.rows, cfg.diffusion.per_attack, cfg.diffusion.genuine, seed);
    Eigen::MatrixXd xs(static_cast<Eigen::Index>(subset.size()), x.cols());
    for (std::size_t i = 0; i < subset.size(); ++i) xs.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(subset[i]));

    const double eps = cfg.diffusion.epsilon ? *cfg.diffusion.epsilon : select_epsilon(xs, 2000, seed);
    const int k = cfg.k_for(b);
    const auto model = fit(xs, k, eps, cfg.diffusion.t);
    spdlog::info("dm-fit: {} N={} D={} epsilon={:.6g} lambda_1..{}: {}", to_string(b), xs.rows(), xs.cols(), eps, k,
                 fmt::join(model.eigenvalues.tail(k), ", "));

    binio::Writer w(kDiffusionKind, cfg.diffusion_hash());
    w.u8(st.empty() ? 0 : 1);
    if (!st.empty()) {
      w.f64s(std::span<const double>(st.mean.data(), static_cast<std::size_t>(st.mean.size())));
      w.f64s(std::span<const double>(st.scale.data(), static_cast<std::size_t>(st.scale.size())));
    }
    write_diffusion(w, model);
    w.u64(subset.size());
    for (auto i : subset) w.u64(i);
    w.save(art.diffusion(b));

    // Training embedding: in-sample coordinates for the fitted subset,
    // Nystrom extension for the remaining training rows.
    Eigen::MatrixXd coords = extend(model, x);
    const auto in_sample = embed(model).coordinates;
    for (std::size_t i = 0; i < subset.size(); ++i)
      coords.row(static_cast<Eigen::Index>(subset[i])) = in_sample.row(static_cast<Eigen::Index>(i));
    write_embedding(art.embedding(Split::train, b), train.rows, coords, cfg.diffusion_hash(), b, Split::train);
  }
}

void run_dm_extend(const PipelineConfig& cfg) {
  StageTimer timer("dm-extend");
  const Artifacts art{cfg.work_dir};
  for (auto b : buckets_of(cfg)) {
    const auto dm = load_diffusion(cfg, b);
    for (auto split : configured_splits(cfg)) {
      if (split == Split::train) continue;
      const auto feats = read_checked_csv(art.features(split, b), cfg.features_hash(), "extract");
      if (feats.size() == 0) {
        spdlog::warn("dm-extend: {} {} has no rows", to_string(split), to_string(b));
        write_embedding(art.embedding(split, b), feats.rows, Eigen::MatrixXd(0, dm.model.k), cfg.diffusion_hash(), b,
                        split);
        continue;
      }
      const Eigen::MatrixXd x = dm.standardizer.empty() ? feats.values : dm.standardizer.apply(feats.values);
      write_embedding(art.embedding(split, b), feats.rows, extend(dm.model, x), cfg.diffusion_hash(), b, split);
    }
  }
}

void run_train(const PipelineConfig& cfg) {
  StageTimer timer("train");
  const Artifacts art{cfg.work_dir};
  for (auto b : buckets_of(cfg)) {
    const auto emb = read_checked_csv(art.embedding(Split::train, b), cfg.diffusion_hash(), "dm-fit");
    const auto model = train(emb.values, emb.targets(), cfg.classifier);
    spdlog::info("train: {} iterations={} loss={:.6g} |grad|={:.3g}", to_string(b), model.meta.iterations,
                 model.meta.final_loss, model.meta.gradient_norm);
    binio::Writer w(kClassifierKind, cfg.classifier_hash());
    write_logistic(w, model);
    w.save(art.classifier(b));
  }
}

std::vector<EvalReport> run_evaluate(const PipelineConfig& cfg) {
  StageTimer timer("evaluate");
  const Artifacts art{cfg.work_dir};
  std::vector<EvalReport> reports;
  nlohmann::ordered_json summary;
  summary["gender_split"] = cfg.gender_split;
  summary["feature_preset"] = cfg.feature_preset;
  summary["feature_dimension"] = cfg.features.dimension();
  for (auto b : buckets_of(cfg)) {
    const auto path = art.classifier(b);
    require(path, "train");
    binio::Reader r(path, kClassifierKind);
    check_hash(r.config_hash(), cfg.classifier_hash(), path, "train");
    const auto model = read_logistic(r);
    r.finish();

    std::vector<const EvalReport*> table, table_eval;
    const std::size_t first = reports.size();
    for (auto split : cfg.eval_splits) {
      const auto emb = read_checked_csv(art.embedding(split, b), cfg.diffusion_hash(),
                                        split == Split::train ? "dm-fit" : "dm-extend");
      const Eigen::VectorXd s = score(model, emb.values);
      const std::vector<double> scores(s.data(), s.data() + s.size());
      const auto labels = labels_of(emb.rows);
      const auto attacks = attacks_of(emb.rows);
      try {
        reports.push_back(evaluate(scores, labels, attacks, std::string(to_string(b)), std::string(to_string(split))));
      } catch (const DataError& e) {
        throw DataError(fmt::format("evaluate {} {}: {}", to_string(split), to_string(b), e.what()));
      }
      const auto& rep = reports.back();

      std::string text = "file_id,label,attack,score\n";
      for (std::size_t i = 0; i < scores.size(); ++i)
        text += fmt::format("{},{},{},{}\n", emb.rows[i].file_id, to_string(labels[i]), attacks[i],
                            format_double(scores[i]));
      write_text(art.scores(split, b), text);
      text = "threshold,FPR,FNR\n";
      for (const auto& p : rep.det)
        text += fmt::format("{},{},{}\n", format_double(p.threshold), format_double(p.fpr), format_double(p.fnr));
      write_text(art.det(split, b), text);

      if (rep.worse_than_chance())
        spdlog::warn("evaluate: {} {} EER {:.2f}% is worse than chance", to_string(split), to_string(b),
                     rep.eer_percent);
      spdlog::info("evaluate: {} {} EER = {:.2f}% at threshold {:.6g}", to_string(split), to_string(b), rep.eer_percent,
                   rep.threshold_at_eer);
    }
    for (std::size_t i = first; i < reports.size(); ++i)
      (reports[i].split == "eval" ? table_eval : table).push_back(&reports[i]);
    if (!table.empty()) write_text(art.report(b), report_table(table));
    if (!table_eval.empty()) write_text(art.report_eval(b), report_table(table_eval));

    auto& node = summary["buckets"][std::string(to_string(b))];
    node["k"] = model.weights.size();
    for (std::size_t i = first; i < reports.size(); ++i) {
      const auto& rep = reports[i];
      nlohmann::ordered_json e;
      e["eer_percent"] = rep.eer_percent;
      e["threshold_at_eer"] = rep.threshold_at_eer;
      e["n_genuine"] = rep.n_genuine;
      e["n_spoofed"] = rep.n_spoofed;
      e["worse_than_chance"] = rep.worse_than_chance();
      for (const auto& [a, v] : rep.per_attack_errors) e["per_attack_errors"][a] = v;
      node["splits"][rep.split] = e;
    }
  }
  write_text(art.report_json(), summary.dump(2) + "\n");
  return reports;
}

void run_export_plots(const PipelineConfig& cfg) {
  StageTimer timer("export-plots");
  const Artifacts art{cfg.work_dir};
  std::error_code ec;
  fs::create_directories(art.plots_dir(), ec);
  if (ec) throw DataError(fmt::format("cannot create {}: {}", art.plots_dir().string(), ec.message()));
  nlohmann::ordered_json index;
  index["embeddings"] = json::array();
  index["det"] = json::array();
  for (auto b : buckets_of(cfg)) {
    for (auto split : configured_splits(cfg)) {
      const auto emb = art.embedding(split, b);
      require(emb, split == Split::train ? "dm-fit" : "dm-extend");
      fs::copy_file(emb, art.plots_dir() / emb.filename(), fs::copy_options::overwrite_existing);
      index["embeddings"].push_back(emb.filename().string());
    }
    for (auto split : cfg.eval_splits) {
      const auto det = art.det(split, b);
      require(det, "evaluate");
      fs::copy_file(det, art.plots_dir() / det.filename(), fs::copy_options::overwrite_existing);
      index["det"].push_back(det.filename().string());
    }
  }
  write_text(art.plots_dir() / "index.json", index.dump(2) + "\n");
}

std::vector<EvalReport> run_all(const PipelineConfig& cfg) {
  if (cfg.synth) run_synth_gen(cfg);
  run_build_models(cfg);
  run_extract(cfg);
  run_dm_fit(cfg);
  run_dm_extend(cfg);
  run_train(cfg);
  auto reports = run_evaluate(cfg);
  run_export_plots(cfg);
  return reports;
}

void run_stage(const PipelineConfig& cfg, Stage s) {
  switch (s) {
    case Stage::synth_gen: run_synth_gen(cfg); return;
    case Stage::build_models: run_build_models(cfg); return;
    case Stage::extract: run_extract(cfg); return;
    case Stage::dm_fit: run_dm_fit(cfg); return;
    case Stage::dm_extend: run_dm_extend(cfg); return;
    case Stage::train: run_train(cfg); return;
    case Stage::evaluate: run_evaluate(cfg); return;
    case Stage::export_plots: run_export_plots(cfg); return;
    case Stage::run_all: run_all(cfg); return;
  }
}

}  // namespace pmfspoof
