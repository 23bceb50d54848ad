#include "pmfspoof/binary_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <fmt/format.h>

#include "pmfspoof/error.hpp"

namespace pmfspoof::binio {

namespace {

constexpr std::string_view kMagic = "PMFS";

}  // namespace

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Writer::Writer(std::string_view kind, std::uint64_t config_hash) {
  buf_ += kMagic;
  buf_ += kind.substr(0, 4);
  u32(kFormatVersion);
  u64(config_hash);
}

void Writer::u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }

void Writer::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void Writer::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void Writer::i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }

void Writer::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void Writer::str(std::string_view s) {
  u32(static_cast<std::uint32_t>(s.size()));
  buf_ += s;
}

void Writer::f64s(std::span<const double> v) {
  u64(v.size());
  for (double x : v) f64(x);
}

void Writer::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
  if (!out) throw DataError(fmt::format("write failed for '{}'", path.string()));
}

Reader::Reader(const std::filesystem::path& path, std::string_view kind) : name_(path.string()) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open '{}'", name_));
  buf_.assign(std::istreambuf_iterator<char>(in), {});
  parse_header(kind);
}

Reader::Reader(std::string bytes, std::string_view kind, std::string name)
    : buf_(std::move(bytes)), name_(std::move(name)) {
  parse_header(kind);
}

void Reader::parse_header(std::string_view kind) {
  if (buf_.size() < 8 || std::string_view(buf_).substr(0, 4) != kMagic)
    throw DataError(fmt::format("{}: not a model container (bad magic)", name_));
  const auto found = std::string_view(buf_).substr(4, 4);
  if (found != kind) throw DataError(fmt::format("{}: expected a '{}' container, found '{}'", name_, kind, found));
  pos_ = 8;
  const auto version = u32();
  if (version != kFormatVersion)
    throw DataError(fmt::format("{}: unsupported container version {} (expected {})", name_, version, kFormatVersion));
  hash_ = u64();
}

void Reader::need(std::size_t n) const {
  if (pos_ + n > buf_.size()) throw DataError(fmt::format("{}: truncated file", name_));
}

std::uint8_t Reader::u8() {
  need(1);
  return static_cast<std::uint8_t>(buf_[pos_++]);
}

std::uint32_t Reader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf_[pos_++])) << (8 * i);
  return v;
}

std::uint64_t Reader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_++])) << (8 * i);
  return v;
}

std::int32_t Reader::i32() { return static_cast<std::int32_t>(u32()); }

double Reader::f64() { return std::bit_cast<double>(u64()); }

std::string Reader::str() {
  const auto n = u32();
  need(n);
  std::string s = buf_.substr(pos_, n);
  pos_ += n;
  return s;
}

std::vector<double> Reader::f64s() {
  const auto n = u64();
  if (n > (buf_.size() - pos_) / 8) throw DataError(fmt::format("{}: truncated file", name_));
  std::vector<double> v(n);
  for (auto& x : v) x = f64();
  return v;
}

void Reader::finish() const {
  if (pos_ != buf_.size()) throw DataError(fmt::format("{}: {} trailing bytes", name_, buf_.size() - pos_));
}

}  // namespace pmfspoof::binio
