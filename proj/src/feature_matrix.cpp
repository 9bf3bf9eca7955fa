#include "revdetect/feature_matrix.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "revdetect/csv.hpp"
#include "revdetect/error.hpp"

namespace revdetect {

void FeatureMatrix::add_row(std::string id, std::span<const double> r, std::optional<int> label,
                            std::optional<Split> split) {
  if (r.size() != cols()) throw Error("add_row: row width does not match schema");
  if (rows() > 0 && label.has_value() != has_labels())
    throw Error("add_row: mixing labeled and unlabeled rows");
  ids.push_back(std::move(id));
  values.insert(values.end(), r.begin(), r.end());
  if (label) labels.push_back(*label);
  splits.push_back(split);
}

void FeatureMatrix::validate() const {
  if (values.size() != rows() * cols()) throw Error("feature matrix: value count mismatch");
  if (!labels.empty() && labels.size() != rows()) throw Error("feature matrix: label count mismatch");
  if (!splits.empty() && splits.size() != rows()) throw Error("feature matrix: split count mismatch");
  for (std::size_t r = 0; r < rows(); ++r)
    for (std::size_t c = 0; c < cols(); ++c)
      if (!std::isfinite(at(r, c)))
        throw Error("feature matrix: non-finite value in row '" + ids[r] + "', column '" +
                    schema[c] + "'");
  for (int l : labels)
    if (l != 0 && l != 1) throw Error("feature matrix: labels must be 0 or 1");
}

FeatureMatrix FeatureMatrix::subset_rows(std::span<const std::size_t> rs) const {
  FeatureMatrix out;
  out.schema = schema;
  for (std::size_t r : rs) {
    out.ids.push_back(ids[r]);
    auto src = row(r);
    out.values.insert(out.values.end(), src.begin(), src.end());
    if (has_labels()) out.labels.push_back(labels[r]);
    if (!splits.empty()) out.splits.push_back(splits[r]);
  }
  return out;
}

FeatureMatrix FeatureMatrix::subset(Split s) const {
  if (splits.size() != rows()) throw Error("feature matrix has no split assignment");
  std::vector<std::size_t> rs;
  for (std::size_t r = 0; r < rows(); ++r)
    if (splits[r] == s) rs.push_back(r);
  return subset_rows(rs);
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::string> names) const {
  std::vector<std::size_t> idx;
  for (auto& n : names) {
    std::size_t c = 0;
    while (c < schema.size() && schema[c] != n) ++c;
    if (c == schema.size()) throw Error("feature column '" + n + "' not present");
    idx.push_back(c);
  }
  FeatureMatrix out;
  out.schema.assign(names.begin(), names.end());
  out.ids = ids;
  out.labels = labels;
  out.splits = splits;
  out.values.reserve(rows() * idx.size());
  for (std::size_t r = 0; r < rows(); ++r)
    for (std::size_t c : idx) out.values.push_back(at(r, c));
  return out;
}

void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& m,
                       std::span<const std::string> comments) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (auto& c : comments) out << '#' << c << '\n';
  std::vector<std::string> header{"id"};
  header.insert(header.end(), m.schema.begin(), m.schema.end());
  const bool with_split = !m.splits.empty() && std::any_of(m.splits.begin(), m.splits.end(),
                                                          [](auto& s) { return s.has_value(); });
  if (m.has_labels()) header.push_back("label");
  if (with_split) header.push_back("split");
  csv::write_row(out, header);
  std::vector<std::string> fields;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    fields.clear();
    fields.push_back(m.ids[r]);
    for (double v : m.row(r)) fields.push_back(csv::format_double(v));
    if (m.has_labels()) fields.push_back(std::to_string(m.labels[r]));
    if (with_split) fields.push_back(m.splits[r] ? std::string(to_string(*m.splits[r])) : "");
    csv::write_row(out, fields);
  }
  if (!out) throw Error("write failed: " + path.string());
}

FeatureCsv read_feature_csv(const std::filesystem::path& path) {
  auto t = csv::read_file(path.string());
  if (t.header.empty() || t.header[0] != "id") throw Error(path.string() + ": first column must be 'id'");
  const int c_label = t.column("label");
  const int c_split = t.column("split");

  FeatureCsv out;
  for (auto& c : t.comments) out.comments.push_back(c.substr(1));
  std::vector<std::size_t> feat_cols;
  for (std::size_t c = 1; c < t.header.size(); ++c) {
    if (static_cast<int>(c) == c_label || static_cast<int>(c) == c_split) continue;
    feat_cols.push_back(c);
    out.matrix.schema.push_back(t.header[c]);
  }
  auto& m = out.matrix;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    auto& row = t.rows[r];
    auto where = path.string() + ":" + std::to_string(t.row_lines[r]);
    if (row.size() != t.header.size()) throw Error(where + ": expected " + std::to_string(t.header.size()) + " fields");
    m.ids.push_back(row[0]);
    for (std::size_t c : feat_cols) {
      double v = 0;
      auto& s = row[c];
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size())
        throw Error(where + ": bad number '" + s + "' in column " + t.header[c]);
      m.values.push_back(v);
    }
    if (c_label >= 0) {
      auto& s = row[c_label];
      if (s != "0" && s != "1") throw Error(where + ": label must be 0 or 1");
      m.labels.push_back(s == "1");
    }
    if (c_split >= 0) {
      auto& s = row[c_split];
      if (s.empty()) {
        m.splits.push_back(std::nullopt);
      } else {
        auto sp = parse_split(s);
        if (!sp) throw Error(where + ": bad split '" + s + "'");
        m.splits.push_back(sp);
      }
    }
  }
  m.validate();
  return out;
}

}  // namespace revdetect
