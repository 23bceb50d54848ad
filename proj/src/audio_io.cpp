#include "pmfspoof/audio_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <sstream>

#include <fmt/format.h>

#include "pmfspoof/error.hpp"

namespace pmfspoof {

namespace {

constexpr double kPcm16Scale = 32768.0;
constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t le32(std::string_view b, std::size_t at) {
  auto u = [&](std::size_t i) { return static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + i])); };
  return u(0) | (u(1) << 8) | (u(2) << 16) | (u(3) << 24);
}

std::uint16_t le16(std::string_view b, std::size_t at) {
  auto u = [&](std::size_t i) { return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at + i])); };
  return static_cast<std::uint16_t>(u(0) | (u(1) << 8));
}

void put32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string file_stem(std::string_view name) {
  return std::filesystem::path(std::string(name)).stem().string();
}

}  // namespace

std::string_view to_string(Gender g) { return g == Gender::female ? "female" : "male"; }
std::string_view to_string(Label l) { return l == Label::genuine ? "genuine" : "spoofed"; }
std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::dev: return "dev";
    case Split::eval: return "eval";
  }
  return "train";
}

Gender parse_gender(std::string_view text) {
  auto t = lower(text);
  if (t == "f" || t == "female") return Gender::female;
  if (t == "m" || t == "male") return Gender::male;
  throw DataError(fmt::format("unknown gender '{}'", text));
}

Label parse_label(std::string_view text) {
  auto t = lower(text);
  if (t == "genuine" || t == "bonafide") return Label::genuine;
  if (t == "spoofed" || t == "spoof") return Label::spoofed;
  throw DataError(fmt::format("unknown label '{}'", text));
}

Split parse_split(std::string_view text) {
  auto t = lower(text);
  if (t == "train") return Split::train;
  if (t == "dev") return Split::dev;
  if (t == "eval") return Split::eval;
  throw ConfigError(fmt::format("unknown split '{}'", text));
}

Waveform decode_wav(std::string_view b, std::string_view name) {
  if (b.size() < 12 || b.substr(0, 4) != "RIFF" || b.substr(8, 4) != "WAVE")
    throw DataError(fmt::format("{}: not a RIFF/WAVE file", name));

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= b.size()) {
    const auto id = b.substr(pos, 4);
    const std::size_t size = le32(b, pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      if (size < 16 || body + size > b.size()) throw DataError(fmt::format("{}: truncated fmt chunk", name));
      format = le16(b, body);
      channels = le16(b, body + 2);
      rate = le32(b, body + 4);
      bits = le16(b, body + 14);
      if (format == kFormatExtensible) {
        if (size < 40) throw DataError(fmt::format("{}: truncated extensible fmt chunk", name));
        format = le16(b, body + 24);  // first two bytes of the sub-format GUID
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw DataError(fmt::format("{}: data chunk precedes fmt chunk", name));
      if (format != kFormatPcm || bits != 16 || channels != 1)
        throw DataError(fmt::format("{}: unsupported encoding (format {}, {} bits, {} channels); expected PCM 16-bit mono",
                                    name, format, bits, channels));
      if (body + size > b.size()) throw DataError(fmt::format("{}: truncated data chunk ({} of {} bytes)", name, b.size() - body, size));
      if (size % 2 != 0) throw DataError(fmt::format("{}: odd data chunk length {}", name, size));
      if (size == 0) throw DataError(fmt::format("{}: no samples", name));
      Waveform w;
      w.sample_rate_hz = static_cast<int>(rate);
      w.file_id = file_stem(name);
      w.samples.resize(size / 2);
      for (std::size_t i = 0; i < w.samples.size(); ++i) {
        const auto v = static_cast<std::int16_t>(le16(b, body + 2 * i));
        w.samples[i] = static_cast<double>(v) / kPcm16Scale;
      }
      return w;
    }
    pos = body + size + (size & 1);  // chunks are word aligned
  }
  throw DataError(fmt::format("{}: missing {} chunk", name, have_fmt ? "data" : "fmt"));
}

Waveform read_wav(const std::filesystem::path& path) {
  return decode_wav(read_file(path), path.string());
}

Waveform read_wav(const std::filesystem::path& path, int expected_rate_hz) {
  auto w = read_wav(path);
  if (w.sample_rate_hz != expected_rate_hz)
    throw DataError(fmt::format("{}: sample rate {} Hz, expected {} Hz (no resampling is performed)", path.string(),
                                w.sample_rate_hz, expected_rate_hz));
  return w;
}

void write_wav(const std::filesystem::path& path, const Waveform& w) {
  if (w.samples.empty()) throw DataError("write_wav: empty waveform");
  const auto data_bytes = static_cast<std::uint32_t>(w.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  put32(out, 16);
  put16(out, kFormatPcm);
  put16(out, 1);
  put32(out, static_cast<std::uint32_t>(w.sample_rate_hz));
  put32(out, static_cast<std::uint32_t>(w.sample_rate_hz) * 2);
  put16(out, 2);
  put16(out, 16);
  out += "data";
  put32(out, data_bytes);
  for (double x : w.samples) {
    const double q = std::clamp(std::nearbyint(x * kPcm16Scale), -32768.0, 32767.0);
    put16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError(fmt::format("cannot write '{}'", path.string()));
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw DataError(fmt::format("write failed for '{}'", path.string()));
}

GenderMap parse_gender_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open gender map '{}'", path.string()));
  GenderMap out;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    std::istringstream ss(line);
    std::vector<std::string> fields{std::istream_iterator<std::string>(ss), {}};
    if (fields.empty()) continue;
    if (fields.size() != 2)
      throw DataError(fmt::format("{}:{}: expected 2 fields, got {}", path.string(), lineno, fields.size()));
    try {
      out[fields[0]] = parse_gender(fields[1]);
    } catch (const DataError& e) {
      throw DataError(fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
    }
  }
  return out;
}

std::vector<UtteranceRecord> parse_manifest(const std::filesystem::path& path, const GenderMap& genders, Split split) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open manifest '{}'", path.string()));
  std::vector<UtteranceRecord> out;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    std::istringstream ss(line);
    std::vector<std::string> f{std::istream_iterator<std::string>(ss), {}};
    if (f.empty()) continue;
    const auto where = fmt::format("{}:{}", path.string(), lineno);
    if (f.size() != 5) throw DataError(fmt::format("{}: expected 5 fields, got {}", where, f.size()));

    UtteranceRecord r;
    r.speaker_id = f[0];
    r.file_id = f[1];
    r.split = split;
    if (f[4] == "bonafide") {
      r.label = Label::genuine;
    } else if (f[4] == "spoof") {
      r.label = Label::spoofed;
      if (f[3] == "-") throw DataError(fmt::format("{}: spoof line without attack id", where));
      r.attack_id = f[3];
    } else {
      throw DataError(fmt::format("{}: key must be 'bonafide' or 'spoof', got '{}'", where, f[4]));
    }
    auto g = genders.find(r.speaker_id);
    if (g == genders.end()) throw DataError(fmt::format("{}: speaker '{}' missing from gender map", where, r.speaker_id));
    r.gender = g->second;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace pmfspoof
