#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "revdetect/corpus.hpp"

namespace revdetect {

/// Row-major feature table with a named column schema.
struct FeatureMatrix {
  std::vector<std::string> schema;
  std::vector<std::string> ids;
  std::vector<double> values;
  std::vector<int> labels;                  // empty when unlabeled
  std::vector<std::optional<Split>> splits;  // empty when unknown

  std::size_t rows() const { return ids.size(); }
  std::size_t cols() const { return schema.size(); }
  bool has_labels() const { return !labels.empty(); }

  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols(), cols()}; }
  std::span<double> row(std::size_t r) { return {values.data() + r * cols(), cols()}; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }

  void add_row(std::string id, std::span<const double> row, std::optional<int> label = {},
               std::optional<Split> split = {});

  /// Throws if sizes are inconsistent, values are not finite, or labels not in {0,1}.
  void validate() const;

  /// Rows whose split equals `s` (requires splits).
  FeatureMatrix subset(Split s) const;
  FeatureMatrix subset_rows(std::span<const std::size_t> rows) const;
  /// Keeps the named columns in the given order; throws on unknown names.
  FeatureMatrix select_columns(std::span<const std::string> names) const;
};

struct FeatureCsv {
  std::vector<std::string> comments;  // reproducibility header lines, without '#'
  FeatureMatrix matrix;
};

/// Columns: id, <schema...>, [label], [split]. Comment lines are written first.
void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& m,
                       std::span<const std::string> comments = {});
FeatureCsv read_feature_csv(const std::filesystem::path& path);

}  // namespace revdetect
