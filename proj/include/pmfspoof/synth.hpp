#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pmfspoof/audio_io.hpp"

namespace pmfspoof {

enum class AmplitudeLaw { laplacian, gaussian, uniform, clipped_gaussian, quantized_gaussian };

std::string_view to_string(AmplitudeLaw a);
AmplitudeLaw parse_amplitude_law(std::string_view text);

struct SynthClass {
  std::string class_id;  // "genuine" or an attack id
  AmplitudeLaw law = AmplitudeLaw::gaussian;
  double tilt_db_per_oct = 0;  // level change from fs/8 to fs/4
  double scale = 0.1;          // output standard deviation before clipping
};

struct SynthSpec {
  int n_per_class = 10;
  double duration_s = 1.0;
  int sample_rate_hz = 16000;
  std::uint64_t seed = 1;
  int speakers_per_gender = 4;
  std::vector<SynthClass> classes;

  /// Throws ConfigError on duplicate ids, missing genuine class, bad scales.
  void validate() const;
};

/// Unit-variance draws (clipped and quantized laws are derived from a unit
/// Gaussian and are only approximately unit variance).
double draw(AmplitudeLaw law, std::uint64_t& state);

/// Coefficient `a` of the shaping filter 1 - a z^-1 whose gain at fs/4 is
/// `tilt_db` above its gain at fs/8. Achievable range is about -2.3 dB to
/// +5.3 dB; outside it throws ConfigError.
double tilt_coefficient(double tilt_db);

/// One file's samples, before PCM quantization.
std::vector<double> synthesize(const SynthClass& c, std::size_t n_samples, std::uint64_t seed);

struct SynthOutput {
  std::filesystem::path manifest;
  std::filesystem::path audio_dir;
  std::filesystem::path gender_map;
};

/// Writes `<out_dir>/<split>/<file_id>.wav`, `<out_dir>/protocol_<split>.txt`
/// and `<out_dir>/genders.txt`. Byte-identical for identical specs.
SynthOutput generate(const SynthSpec& spec, const std::filesystem::path& out_dir, Split split = Split::train);

}  // namespace pmfspoof
