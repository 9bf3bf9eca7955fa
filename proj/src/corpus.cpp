#include "revdetect/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include <json.hpp>

#include "revdetect/csv.hpp"
#include "revdetect/error.hpp"
#include "revdetect/rng.hpp"
#include "revdetect/text_util.hpp"

namespace revdetect {

std::string_view to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

std::optional<Split> parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "val" || s == "validation") return Split::Val;
  if (s == "test") return Split::Test;
  return std::nullopt;
}

ColumnMapping load_column_mapping(const std::filesystem::path& json_file) {
  std::ifstream in(json_file);
  if (!in) throw Error("cannot open column mapping: " + json_file.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("column mapping " + json_file.string() + ": " + e.what());
  }
  if (!j.is_object()) throw Error("column mapping must be a JSON object");
  ColumnMapping m;
  for (auto& [k, v] : j.items()) {
    if (!v.is_string()) throw Error("column mapping value for '" + k + "' must be a string");
    m[k] = v.get<std::string>();
  }
  return m;
}

namespace {

std::optional<int> parse_int(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    // accept "1.0" style labels exported by dataframe tools
    double d = 0;
    auto [p2, ec2] = std::from_chars(s.data(), s.data() + s.size(), d);
    if (ec2 != std::errc() || p2 != s.data() + s.size() || d != std::floor(d))
      return std::nullopt;
    return static_cast<int>(d);
  }
  return v;
}

}  // namespace

Manifest load_manifest(const std::filesystem::path& manifest_path,
                       const std::filesystem::path& image_root,
                       const ColumnMapping& mapping) {
  if (!std::filesystem::exists(manifest_path))
    throw Error("manifest not found: " + manifest_path.string());
  csv::Table table = csv::read_file(manifest_path.string());

  auto col = [&](const std::string& canonical) {
    auto it = mapping.find(canonical);
    const std::string& name = it == mapping.end() ? canonical : it->second;
    return table.column(name);
  };
  auto required = [&](const std::string& canonical) {
    int c = col(canonical);
    if (c < 0) {
      auto it = mapping.find(canonical);
      std::string name = it == mapping.end() ? canonical : it->second;
      throw Error("manifest " + manifest_path.string() + ": missing required column '" +
                  name + "'");
    }
    return static_cast<std::size_t>(c);
  };

  const std::size_t c_id = required("id");
  const std::size_t c_text = required("text");
  const std::size_t c_img = required("image_path");
  const std::size_t c_label = required("label");
  const int c_rating = col("rating");
  const int c_split = col("split");

  Manifest m;
  m.image_root = image_root;
  std::set<std::string> seen;

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.row_lines[r];
    auto field = [&](std::size_t c) -> std::string_view {
      return c < row.size() ? std::string_view(row[c]) : std::string_view();
    };
    auto reject = [&](std::string msg) {
      m.diagnostics.push_back({line, std::string(field(c_id)), std::move(msg)});
    };

    ReviewRecord rec;
    rec.id = std::string(trim(field(c_id)));
    if (rec.id.empty()) { reject("empty id"); continue; }
    if (!seen.insert(rec.id).second) { reject("duplicate id"); continue; }

    rec.text = std::string(field(c_text));
    if (trim(rec.text).empty()) { reject("empty text"); continue; }

    rec.image_path = std::string(trim(field(c_img)));

    auto label = parse_int(field(c_label));
    if (!label) { reject("unparsable label"); continue; }
    if (*label != 0 && *label != 1) { reject("label out of {0,1}"); continue; }
    rec.label = *label;

    if (c_rating >= 0 && !trim(field(c_rating)).empty()) {
      auto rating = parse_int(field(c_rating));
      if (!rating || *rating < 1 || *rating > 5) { reject("rating out of 1..5"); continue; }
      rec.rating = rating;
    }
    if (c_split >= 0 && !trim(field(c_split)).empty()) {
      auto s = parse_split(trim(field(c_split)));
      if (!s) { reject("unknown split value"); continue; }
      rec.split = s;
    }
    m.records.push_back(std::move(rec));
  }
  return m;
}

std::array<std::size_t, 3> SplitAssignment::sizes() const {
  std::array<std::size_t, 3> s{0, 0, 0};
  for (auto& [id, sp] : assignment) ++s[static_cast<int>(sp)];
  return s;
}

std::map<std::string, Split> SplitAssignment::as_map() const {
  return {assignment.begin(), assignment.end()};
}

std::array<std::size_t, 3> apportion(std::size_t n, const SplitFractions& f) {
  const std::array<double, 3> frac{f.train, f.val, f.test};
  std::array<std::size_t, 3> out{};
  std::array<double, 3> rem{};
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    double quota = static_cast<double>(n) * frac[i];
    double fl = std::floor(quota + 1e-9);
    out[i] = static_cast<std::size_t>(fl);
    rem[i] = quota - fl;
    assigned += out[i];
  }
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return rem[a] > rem[b] + 1e-12; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++out[order[k % 3]];
  return out;
}

namespace {

void validate(const SplitFractions& f) {
  for (double v : {f.train, f.val, f.test})
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error("split fractions must be non-negative");
  if (std::abs(f.train + f.val + f.test - 1.0) > 1e-9)
    throw Error("split fractions must sum to 1");
}

// Shuffle `idx` and hand out consecutive runs of the given sizes.
void deal(std::vector<std::size_t> idx, std::array<std::size_t, 3> sizes,
          std::mt19937_64& g, std::vector<Split>& out) {
  fisher_yates(idx.begin(), idx.end(), g);
  std::size_t k = 0;
  for (int s = 0; s < 3; ++s)
    for (std::size_t j = 0; j < sizes[s]; ++j) out[idx[k++]] = static_cast<Split>(s);
}

}  // namespace

SplitAssignment make_splits(std::span<const ReviewRecord> records, const SplitOptions& opts) {
  if (records.empty()) throw Error("make_splits: empty record list");
  validate(opts.fractions);

  std::mt19937_64 g(opts.seed);
  std::vector<Split> split(records.size(), Split::Train);

  std::vector<std::size_t> free_idx;
  std::array<std::size_t, 3> pre{0, 0, 0};
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (opts.respect_preassigned && records[i].split) {
      split[i] = *records[i].split;
      ++pre[static_cast<int>(*records[i].split)];
    } else {
      free_idx.push_back(i);
    }
  }

  auto sizes_for = [&](std::size_t n_free, std::size_t n_total, std::array<std::size_t, 3> taken) {
    auto target = apportion(n_total, opts.fractions);
    std::array<std::size_t, 3> deficit{};
    std::size_t sum = 0;
    for (int s = 0; s < 3; ++s) {
      deficit[s] = target[s] > taken[s] ? target[s] - taken[s] : 0;
      sum += deficit[s];
    }
    if (sum == n_free) return deficit;
    return apportion(n_free, opts.fractions);
  };

  if (!opts.stratify) {
    deal(free_idx, sizes_for(free_idx.size(), records.size(), pre), g, split);
  } else {
    for (int label = 0; label <= 1; ++label) {
      std::vector<std::size_t> idx;
      std::array<std::size_t, 3> taken{0, 0, 0};
      std::size_t total = 0;
      for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].label != label) continue;
        ++total;
        if (opts.respect_preassigned && records[i].split)
          ++taken[static_cast<int>(*records[i].split)];
      }
      for (std::size_t i : free_idx)
        if (records[i].label == label) idx.push_back(i);
      if (idx.empty()) continue;
      auto sizes = sizes_for(idx.size(), total, taken);
      deal(std::move(idx), sizes, g, split);
    }
  }

  SplitAssignment a;
  a.seed = opts.seed;
  a.fractions = opts.fractions;
  a.assignment.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) a.assignment.emplace_back(records[i].id, split[i]);
  return a;
}

void write_split_csv(const std::filesystem::path& path, const SplitAssignment& a) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "# seed=" << a.seed << " fractions=" << csv::format_double(a.fractions.train) << ','
      << csv::format_double(a.fractions.val) << ',' << csv::format_double(a.fractions.test)
      << '\n';
  out << "id,split\n";
  for (auto& [id, s] : a.assignment) csv::write_row(out, {id, std::string(to_string(s))});
}

std::map<std::string, Split> read_split_csv(const std::filesystem::path& path) {
  auto t = csv::read_file(path.string());
  int c_id = t.column("id"), c_split = t.column("split");
  if (c_id < 0 || c_split < 0) throw Error(path.string() + ": expected columns id,split");
  std::map<std::string, Split> m;
  for (auto& row : t.rows) {
    if (row.size() <= static_cast<std::size_t>(std::max(c_id, c_split)))
      throw Error(path.string() + ": short row");
    auto s = parse_split(row[c_split]);
    if (!s) throw Error(path.string() + ": bad split '" + row[c_split] + "'");
    m[row[c_id]] = *s;
  }
  return m;
}

}  // namespace revdetect
