#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace revdetect {

enum class Split { Train, Val, Test };

std::string_view to_string(Split s);
std::optional<Split> parse_split(std::string_view s);

/// One row of the review/image manifest. label 0 = authentic, 1 = generated.
struct ReviewRecord {
  std::string id;
  std::string text;
  std::string image_path;  // relative to the manifest's image root
  int label = 0;
  std::optional<int> rating;
  std::optional<Split> split;
};

struct RowDiagnostic {
  std::size_t line = 0;  // physical line in the CSV
  std::string id;
  std::string message;
};

struct Manifest {
  std::filesystem::path image_root;
  std::vector<ReviewRecord> records;
  std::vector<RowDiagnostic> diagnostics;

  std::filesystem::path image_file(const ReviewRecord& r) const {
    return image_root / r.image_path;
  }
};

/// Maps canonical column names (id, text, image_path, label, rating, split)
/// to the names used in a particular CSV. Missing entries map to themselves.
using ColumnMapping = std::map<std::string, std::string>;

ColumnMapping load_column_mapping(const std::filesystem::path& json_file);

/// Reads and validates a manifest. Invalid rows are skipped and reported in
/// Manifest::diagnostics; a missing file or required column throws.
/// Images are not touched.
Manifest load_manifest(const std::filesystem::path& manifest_path,
                       const std::filesystem::path& image_root,
                       const ColumnMapping& mapping = {});

struct SplitFractions {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
};

struct SplitOptions {
  std::uint64_t seed = 0;
  SplitFractions fractions;
  bool stratify = false;             // apportion each label separately
  bool respect_preassigned = false;  // keep ReviewRecord::split when set
};

struct SplitAssignment {
  std::uint64_t seed = 0;
  SplitFractions fractions;
  // in input record order
  std::vector<std::pair<std::string, Split>> assignment;

  std::array<std::size_t, 3> sizes() const;
  std::map<std::string, Split> as_map() const;
};

/// Largest-remainder apportionment of n items over three fractions.
/// Ties in the remainders go to the earlier slot.
std::array<std::size_t, 3> apportion(std::size_t n, const SplitFractions& f);

SplitAssignment make_splits(std::span<const ReviewRecord> records,
                            const SplitOptions& opts);

void write_split_csv(const std::filesystem::path& path, const SplitAssignment& a);
std::map<std::string, Split> read_split_csv(const std::filesystem::path& path);

}  // namespace revdetect
