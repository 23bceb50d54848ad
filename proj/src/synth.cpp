#include "pmfspoof/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include <fmt/format.h>

#include "pmfspoof/binary_io.hpp"
#include "pmfspoof/error.hpp"

namespace pmfspoof {

namespace {

// splitmix64; used instead of <random> distributions so output does not
// depend on the standard library implementation.
std::uint64_t next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform on the open interval (0, 1).
double open_unit(std::uint64_t& state) { return (static_cast<double>(next(state) >> 11) + 0.5) * 0x1.0p-53; }

double gaussian(std::uint64_t& state) {
  const double u1 = open_unit(state);
  const double u2 = open_unit(state);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double tilt_db(double a) {
  // |1 - a e^{-jw}|^2 = 1 + a^2 - 2a cos w, at w = pi/2 and w = pi/4.
  const double hi = 1.0 + a * a;
  const double lo = 1.0 + a * a - 2.0 * a * std::cos(std::numbers::pi / 4);
  return 10.0 * std::log10(hi / lo);
}

constexpr double kMaxCoefficient = 0.999;

char split_letter(Split s) {
  switch (s) {
    case Split::train: return 'T';
    case Split::dev: return 'D';
    case Split::eval: return 'E';
  }
  return 'T';
}

}  // namespace

std::string_view to_string(AmplitudeLaw a) {
  switch (a) {
    case AmplitudeLaw::laplacian: return "laplacian";
    case AmplitudeLaw::gaussian: return "gaussian";
    case AmplitudeLaw::uniform: return "uniform";
    case AmplitudeLaw::clipped_gaussian: return "clipped_gaussian";
    case AmplitudeLaw::quantized_gaussian: return "quantized_gaussian";
  }
  return "?";
}

AmplitudeLaw parse_amplitude_law(std::string_view text) {
  for (auto a : {AmplitudeLaw::laplacian, AmplitudeLaw::gaussian, AmplitudeLaw::uniform, AmplitudeLaw::clipped_gaussian,
                 AmplitudeLaw::quantized_gaussian})
    if (to_string(a) == text) return a;
  throw ConfigError(fmt::format("unknown amplitude law '{}'", text));
}

void SynthSpec::validate() const {
  if (n_per_class < 0) throw ConfigError("synth: n_per_class must be >= 0");
  if (!(duration_s > 0)) throw ConfigError("synth: duration_s must be positive");
  if (sample_rate_hz <= 0) throw ConfigError("synth: sample_rate_hz must be positive");
  if (speakers_per_gender < 1) throw ConfigError("synth: speakers_per_gender must be >= 1");
  if (classes.empty()) throw ConfigError("synth: no classes");
  std::set<std::string> seen;
  for (const auto& c : classes) {
    if (c.class_id.empty() || c.class_id.find_first_of(" \t,") != std::string::npos)
      throw ConfigError(fmt::format("synth: bad class id '{}'", c.class_id));
    if (!seen.insert(c.class_id).second) throw ConfigError(fmt::format("synth: duplicate class id '{}'", c.class_id));
    if (!(c.scale > 0) || c.scale > 0.5)
      throw ConfigError(fmt::format("synth: class '{}' scale must be in (0, 0.5]", c.class_id));
    tilt_coefficient(c.tilt_db_per_oct);
  }
  if (!seen.contains("genuine")) throw ConfigError("synth: a 'genuine' class is required");
}

double draw(AmplitudeLaw law, std::uint64_t& state) {
  switch (law) {
    case AmplitudeLaw::laplacian: {
      const double u = open_unit(state) - 0.5;
      return -std::copysign(std::numbers::sqrt2 / 2, u) * std::log(1.0 - 2.0 * std::abs(u));
    }
    case AmplitudeLaw::gaussian: return gaussian(state);
    case AmplitudeLaw::uniform: return std::numbers::sqrt3 * (2.0 * open_unit(state) - 1.0);
    case AmplitudeLaw::clipped_gaussian: return std::clamp(gaussian(state), -1.5, 1.5);
    case AmplitudeLaw::quantized_gaussian: return std::round(gaussian(state) * 4.0) / 4.0;
  }
  return 0;
}

double tilt_coefficient(double tilt) {
  if (!std::isfinite(tilt)) throw ConfigError("synth: tilt must be finite");
  double lo = -kMaxCoefficient, hi = kMaxCoefficient;
  if (tilt < tilt_db(lo) || tilt > tilt_db(hi))
    throw ConfigError(fmt::format("synth: tilt {} dB/oct outside the achievable range [{:.2f}, {:.2f}]", tilt,
                                  tilt_db(lo), tilt_db(hi)));
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (tilt_db(mid) < tilt ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> synthesize(const SynthClass& c, std::size_t n_samples, std::uint64_t seed) {
  const double a = tilt_coefficient(c.tilt_db_per_oct);
  const double gain = c.scale / std::sqrt(1.0 + a * a);
  std::uint64_t state = seed;
  std::vector<double> out(n_samples);
  double prev = draw(c.law, state);
  for (auto& y : out) {
    const double x = draw(c.law, state);
    y = std::clamp(gain * (x - a * prev), -1.0, 32767.0 / 32768.0);
    prev = x;
  }
  return out;
}

SynthOutput generate(const SynthSpec& spec, const std::filesystem::path& out_dir, Split split) {
  spec.validate();
  SynthOutput out;
  out.audio_dir = out_dir / std::string(to_string(split));
  out.manifest = out_dir / fmt::format("protocol_{}.txt", to_string(split));
  out.gender_map = out_dir / "genders.txt";
  std::error_code ec;
  std::filesystem::create_directories(out.audio_dir, ec);
  if (ec) throw DataError(fmt::format("cannot create {}: {}", out.audio_dir.string(), ec.message()));

  auto speaker = [&](bool male, int j) { return fmt::format("SYN_{}{:03}", male ? 'M' : 'F', j + 1); };

  std::ofstream manifest(out.manifest, std::ios::binary | std::ios::trunc);
  if (!manifest) throw DataError(fmt::format("cannot write {}", out.manifest.string()));
  const auto n_samples = static_cast<std::size_t>(std::llround(spec.duration_s * spec.sample_rate_hz));
  const std::uint64_t split_seed = binio::fnv1a(to_string(split), spec.seed);
  int counter = 0;
  for (const auto& c : spec.classes) {
    for (int j = 0; j < spec.n_per_class; ++j) {
      const bool male = j % 2 == 1;
      const std::string spk = speaker(male, (j / 2) % spec.speakers_per_gender);
      const std::string file_id = fmt::format("SYN_{}_{:07}", split_letter(split), ++counter);
      Waveform w;
      w.sample_rate_hz = spec.sample_rate_hz;
      w.file_id = file_id;
      w.samples = synthesize(c, n_samples, binio::fnv1a(file_id, split_seed));
      write_wav(out.audio_dir / (file_id + ".wav"), w);
      if (c.class_id == "genuine")
        manifest << spk << ' ' << file_id << " - - bonafide\n";
      else
        manifest << spk << ' ' << file_id << " - " << c.class_id << " spoof\n";
    }
  }
  if (!manifest.flush()) throw DataError(fmt::format("write failed: {}", out.manifest.string()));

  std::ofstream genders(out.gender_map, std::ios::binary | std::ios::trunc);
  for (int j = 0; j < spec.speakers_per_gender; ++j) genders << speaker(false, j) << " F\n";
  for (int j = 0; j < spec.speakers_per_gender; ++j) genders << speaker(true, j) << " M\n";
  if (!genders.flush()) throw DataError(fmt::format("write failed: {}", out.gender_map.string()));
  return out;
}

}  // namespace pmfspoof
