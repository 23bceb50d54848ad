#pragma once

// Little-endian binary container used by every model artifact:
//
//   magic "PMFS" | kind (4 bytes) | u32 version | u64 config hash | payload
//
// Integers are little-endian, doubles are IEEE-754 binary64 little-endian,
// strings are u32 length + bytes.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pmfspoof::binio {

inline constexpr std::uint32_t kFormatVersion = 1;

class Writer {
 public:
  Writer(std::string_view kind, std::uint64_t config_hash);

  void u8(std::uint8_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void i32(std::int32_t v);
  void f64(double v);
  void str(std::string_view s);
  void f64s(std::span<const double> v);

  void save(const std::filesystem::path& path) const;
  const std::string& bytes() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  /// Reads the whole file and validates magic, kind, and version.
  Reader(const std::filesystem::path& path, std::string_view kind);
  Reader(std::string bytes, std::string_view kind, std::string name);

  std::uint64_t config_hash() const { return hash_; }

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  std::int32_t i32();
  double f64();
  std::string str();
  std::vector<double> f64s();

  /// Throws unless the whole payload was consumed.
  void finish() const;
  const std::string& name() const { return name_; }

 private:
  void need(std::size_t n) const;
  void parse_header(std::string_view kind);

  std::string buf_;
  std::string name_;
  std::size_t pos_ = 0;
  std::uint64_t hash_ = 0;
};

/// FNV-1a, 64-bit.
std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace pmfspoof::binio
