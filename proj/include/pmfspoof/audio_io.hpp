#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pmfspoof {

/// Mono audio normalized to [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate_hz = 16000;
  std::string file_id;
};

enum class Gender { female, male };
enum class Label { genuine, spoofed };
enum class Split { train, dev, eval };

std::string_view to_string(Gender g);
std::string_view to_string(Label l);
std::string_view to_string(Split s);
Gender parse_gender(std::string_view text);
Label parse_label(std::string_view text);
Split parse_split(std::string_view text);

struct UtteranceRecord {
  std::string file_id;
  std::string speaker_id;
  Gender gender = Gender::female;
  Label label = Label::genuine;
  std::optional<std::string> attack_id;  // set iff label == spoofed
  Split split = Split::train;

  /// Attack id, or "None" for genuine trials.
  std::string attack_name() const { return attack_id.value_or("None"); }
};

using GenderMap = std::map<std::string, Gender, std::less<>>;

/// Decodes a RIFF/WAVE PCM16 mono file. Integer sample v maps to v / 32768.
Waveform read_wav(const std::filesystem::path& path);

/// Same as read_wav, additionally rejecting files whose rate differs.
Waveform read_wav(const std::filesystem::path& path, int expected_rate_hz);

/// Decodes an in-memory WAV image; `name` is used in error messages.
Waveform decode_wav(std::string_view bytes, std::string_view name);

/// Writes PCM16 mono. Samples are rounded to the nearest step of 1/32768
/// and clamped to the representable range.
void write_wav(const std::filesystem::path& path, const Waveform& w);

/// Two fields per line: speaker id and F/M (or female/male).
GenderMap parse_gender_map(const std::filesystem::path& path);

/// ASVspoof-style protocol: `speaker_id file_id - attack_or_dash key` with
/// key in {bonafide, spoof}. Every record receives `split`.
std::vector<UtteranceRecord> parse_manifest(const std::filesystem::path& path,
                                            const GenderMap& genders,
                                            Split split);

}  // namespace pmfspoof
