#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "pmfspoof/audio_io.hpp"

namespace pmfspoof {

/// Identity columns shared by the feature, embedding, and score CSVs.
struct RowMeta {
  std::string file_id;
  Gender gender = Gender::female;
  Label label = Label::genuine;
  std::string attack = "None";  // "None" for genuine rows

  static RowMeta from(const UtteranceRecord& r);
};

/// Rows of real-valued columns plus identity columns.
struct LabeledMatrix {
  std::vector<RowMeta> rows;
  Eigen::MatrixXd values;

  std::size_t size() const { return rows.size(); }
  /// 1 for spoofed, 0 for genuine.
  Eigen::VectorXd targets() const;
  LabeledMatrix select(const std::vector<std::size_t>& indices) const;
};

/// Column names `f_000`, `f_001`, ... (zero-padded to at least 3 digits).
std::vector<std::string> feature_columns(std::size_t n);
/// Column names `dm_1` ... `dm_n`.
std::vector<std::string> embedding_columns(std::size_t n);

/// Header `file_id,gender,label,attack,<columns>`; values in shortest
/// round-trip decimal form.
void write_table_csv(const std::filesystem::path& path, const LabeledMatrix& m, const std::vector<std::string>& columns);
LabeledMatrix read_table_csv(const std::filesystem::path& path);

/// Splits on commas; no quoting.
std::vector<std::string> split_csv_line(std::string_view line);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);

}  // namespace pmfspoof
