#include "pmfspoof/table.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "pmfspoof/error.hpp"

namespace pmfspoof {

RowMeta RowMeta::from(const UtteranceRecord& r) { return {r.file_id, r.gender, r.label, r.attack_name()}; }

Eigen::VectorXd LabeledMatrix::targets() const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) y(static_cast<Eigen::Index>(i)) = rows[i].label == Label::spoofed ? 1.0 : 0.0;
  return y;
}

LabeledMatrix LabeledMatrix::select(const std::vector<std::size_t>& indices) const {
  LabeledMatrix out;
  out.values.resize(static_cast<Eigen::Index>(indices.size()), values.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.rows.push_back(rows.at(indices[i]));
    out.values.row(static_cast<Eigen::Index>(i)) = values.row(static_cast<Eigen::Index>(indices[i]));
  }
  return out;
}

std::vector<std::string> feature_columns(std::size_t n) {
  const std::size_t width = std::max<std::size_t>(3, fmt::format("{}", n == 0 ? 0 : n - 1).size());
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(fmt::format("f_{:0{}}", i, width));
  return out;
}

std::vector<std::string> embedding_columns(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i <= n; ++i) out.push_back(fmt::format("dm_{}", i));
  return out;
}

std::string format_double(double v) { return fmt::format("{}", v); }

double parse_double(std::string_view text) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw DataError(fmt::format("cannot parse number '{}'", text));
  return v;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void write_table_csv(const std::filesystem::path& path, const LabeledMatrix& m, const std::vector<std::string>& columns) {
  if (static_cast<std::size_t>(m.values.cols()) != columns.size() || static_cast<std::size_t>(m.values.rows()) != m.rows.size())
    throw DataError(fmt::format("{}: table shape does not match its header", path.string()));
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  out << "file_id,gender,label,attack";
  for (const auto& c : columns) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    const auto& r = m.rows[i];
    if (r.file_id.find(',') != std::string::npos) throw DataError(fmt::format("file id '{}' contains a comma", r.file_id));
    out << r.file_id << ',' << to_string(r.gender) << ',' << to_string(r.label) << ',' << r.attack;
    for (Eigen::Index j = 0; j < m.values.cols(); ++j) out << ',' << format_double(m.values(static_cast<Eigen::Index>(i), j));
    out << '\n';
  }
  if (!out) throw DataError(fmt::format("write failed for '{}'", path.string()));
}

LabeledMatrix read_table_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  std::string line;
  if (!std::getline(in, line)) throw DataError(fmt::format("{}: empty table", path.string()));
  const auto header = split_csv_line(line);
  if (header.size() < 4 || header[0] != "file_id" || header[1] != "gender" || header[2] != "label" || header[3] != "attack")
    throw DataError(fmt::format("{}: unexpected header", path.string()));
  const std::size_t cols = header.size() - 4;

  LabeledMatrix m;
  std::vector<double> flat;
  for (int lineno = 2; std::getline(in, line); ++lineno) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size())
      throw DataError(fmt::format("{}:{}: expected {} fields, got {}", path.string(), lineno, header.size(), f.size()));
    try {
      m.rows.push_back({f[0], parse_gender(f[1]), parse_label(f[2]), f[3]});
      for (std::size_t j = 0; j < cols; ++j) flat.push_back(parse_double(f[4 + j]));
    } catch (const DataError& e) {
      throw DataError(fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
    }
  }
  m.values.resize(static_cast<Eigen::Index>(m.rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < m.rows.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j)
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = flat[i * cols + j];
  return m;
}

}  // namespace pmfspoof
