#include <cmath>
#include <fstream>

#include "revdetect/error.hpp"
#include "revdetect/log.hpp"
#include "revdetect/ml.hpp"

namespace revdetect {

void Standardizer::apply(std::span<const double> in, std::span<double> out) const {
  for (std::size_t j = 0; j < mean.size(); ++j) out[j] = (in[j] - mean[j]) / stddev[j];
}

FeatureMatrix Standardizer::apply(const FeatureMatrix& m) const {
  if (m.cols() != mean.size()) throw Error("standardizer: column count mismatch");
  FeatureMatrix out = m;
  for (std::size_t r = 0; r < m.rows(); ++r) apply(m.row(r), out.row(r));
  return out;
}

Standardizer fit_standardizer(const FeatureMatrix& train) {
  if (train.rows() < 2) throw Error("fit_standardizer: need at least 2 rows");
  const std::size_t n = train.rows(), d = train.cols();
  Standardizer s;
  s.mean.assign(d, 0.0);
  s.stddev.assign(d, 0.0);
  s.constant.assign(d, false);
  for (std::size_t j = 0; j < d; ++j) {
    double sum = 0;
    for (std::size_t r = 0; r < n; ++r) sum += train.at(r, j);
    const double mu = sum / n;
    double ss = 0;
    for (std::size_t r = 0; r < n; ++r) ss += (train.at(r, j) - mu) * (train.at(r, j) - mu);
    const double sd = std::sqrt(ss / n);
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mu)))) {
      s.constant[j] = true;
      s.mean[j] = 0.0;
      s.stddev[j] = 1.0;
      log::warn("fit_standardizer: column '" + train.schema[j] +
                "' has zero variance; passed through unscaled");
    } else {
      s.mean[j] = mu;
      s.stddev[j] = sd;
    }
  }
  return s;
}

ModelType Model::type() const {
  return std::holds_alternative<LogisticModel>(params) ? ModelType::Logistic : ModelType::Forest;
}

double Model::probability(std::span<const double> raw) const {
  if (auto* lr = std::get_if<LogisticModel>(&params)) {
    if (!standardizer) return lr->probability(raw);
    std::vector<double> z(raw.size());
    standardizer->apply(raw, z);
    return lr->probability(z);
  }
  return std::get<ForestModel>(params).probability(raw);
}

Model fit_logistic_model(const FeatureMatrix& train, const LogisticOptions& opts, const FeatureMatrix* val) {
  train.validate();
  Model m;
  m.schema = train.schema;
  m.standardizer = fit_standardizer(train);
  FeatureMatrix z = m.standardizer->apply(train);
  std::optional<FeatureMatrix> zval;
  if (val) {
    check_schema(train.schema, val->schema);
    zval = m.standardizer->apply(*val);
  }
  m.params = train_logistic(z, opts, zval ? &*zval : nullptr);
  m.seed = opts.seed;
  return m;
}

Model fit_forest_model(const FeatureMatrix& train, const ForestOptions& opts) {
  train.validate();
  Model m;
  m.schema = train.schema;
  m.params = train_forest(train, opts);
  m.seed = opts.seed;
  return m;
}

void check_schema(const std::vector<std::string>& expected, const std::vector<std::string>& actual) {
  const std::size_t n = std::max(expected.size(), actual.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= expected.size())
      throw Error("schema mismatch at column " + std::to_string(i) + ": unexpected '" + actual[i] + "'");
    if (i >= actual.size())
      throw Error("schema mismatch at column " + std::to_string(i) + ": missing '" + expected[i] + "'");
    if (expected[i] != actual[i])
      throw Error("schema mismatch at column " + std::to_string(i) + ": expected '" + expected[i] +
                  "', got '" + actual[i] + "'");
  }
}

Predictions predict(const Model& model, const FeatureMatrix& rows) {
  check_schema(model.schema, rows.schema);
  Predictions p;
  p.probability.reserve(rows.rows());
  p.label.reserve(rows.rows());
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    double prob = model.probability(rows.row(r));
    p.probability.push_back(prob);
    p.label.push_back(prob >= 0.5 ? 1 : 0);
  }
  return p;
}

EvalReport evaluate(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size())
    throw Error("evaluate: " + std::to_string(predicted.size()) + " predictions for " +
                std::to_string(truth.size()) + " labels");
  EvalReport r;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool p = predicted[i] == 1, t = truth[i] == 1;
    if (p && t) ++r.tp;
    else if (p) ++r.fp;
    else if (t) ++r.fn;
    else ++r.tn;
  }
  const double n = static_cast<double>(r.total());
  r.accuracy = n > 0 ? static_cast<double>(r.tp + r.tn) / n : 0.0;
  if (r.tp + r.fp > 0) r.precision = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp);
  else r.precision_undefined = true;
  if (r.tp + r.fn > 0) r.recall = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn);
  else r.recall_undefined = true;
  if (r.precision + r.recall > 0) r.f1 = 2 * r.precision * r.recall / (r.precision + r.recall);
  else r.f1_undefined = true;
  return r;
}

nlohmann::json to_json(const EvalReport& r) {
  return {{"accuracy", r.accuracy},
          {"precision", r.precision},
          {"recall", r.recall},
          {"f1", r.f1},
          {"tp", r.tp},
          {"fp", r.fp},
          {"tn", r.tn},
          {"fn", r.fn},
          {"n", r.total()},
          {"precision_undefined", r.precision_undefined},
          {"recall_undefined", r.recall_undefined},
          {"f1_undefined", r.f1_undefined}};
}

namespace {

std::string_view to_string(MaxFeatures m) {
  switch (m) {
    case MaxFeatures::Sqrt: return "sqrt";
    case MaxFeatures::Log2: return "log2";
    case MaxFeatures::All: return "all";
  }
  return "sqrt";
}

MaxFeatures parse_max_features(const std::string& s) {
  if (s == "sqrt") return MaxFeatures::Sqrt;
  if (s == "log2") return MaxFeatures::Log2;
  if (s == "all") return MaxFeatures::All;
  throw Error("model file: unknown max_features rule '" + s + "'");
}

nlohmann::json tree_to_json(const DecisionTree& t) {
  nlohmann::json feature = nlohmann::json::array(), threshold = nlohmann::json::array(),
                 left = nlohmann::json::array(), right = nlohmann::json::array(),
                 prob = nlohmann::json::array();
  for (auto& n : t.nodes) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    prob.push_back(n.prob1);
  }
  return {{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"prob1", prob}};
}

DecisionTree tree_from_json(const nlohmann::json& j, std::size_t n_features) {
  auto feature = j.at("feature").get<std::vector<int>>();
  auto threshold = j.at("threshold").get<std::vector<double>>();
  auto left = j.at("left").get<std::vector<int>>();
  auto right = j.at("right").get<std::vector<int>>();
  auto prob = j.at("prob1").get<std::vector<double>>();
  const std::size_t n = feature.size();
  if (n == 0 || threshold.size() != n || left.size() != n || right.size() != n || prob.size() != n)
    throw Error("model file: malformed tree arrays");
  DecisionTree t;
  t.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& node = t.nodes[i];
    node.feature = feature[i];
    node.threshold = threshold[i];
    node.left = left[i];
    node.right = right[i];
    node.prob1 = prob[i];
    if (node.feature >= 0) {
      if (static_cast<std::size_t>(node.feature) >= n_features)
        throw Error("model file: split feature outside schema");
      auto valid_child = [&](int c) { return c > static_cast<int>(i) && c < static_cast<int>(n); };
      if (!valid_child(node.left) || !valid_child(node.right))
        throw Error("model file: invalid child index");
    } else if (!(node.prob1 >= 0.0 && node.prob1 <= 1.0)) {
      throw Error("model file: leaf probability outside [0,1]");
    }
  }
  return t;
}

}  // namespace

nlohmann::json model_to_json(const Model& m) {
  nlohmann::json j;
  j["format_version"] = kModelFormatVersion;
  j["model_type"] = m.type() == ModelType::Logistic ? "logistic" : "forest";
  j["schema"] = m.schema;
  if (m.standardizer) {
    std::vector<int> constant(m.standardizer->constant.begin(), m.standardizer->constant.end());
    j["standardizer"] = {{"mean", m.standardizer->mean},
                         {"std", m.standardizer->stddev},
                         {"constant", constant}};
  } else {
    j["standardizer"] = nullptr;
  }
  if (auto* lr = std::get_if<LogisticModel>(&m.params)) {
    j["params"] = {{"weights", lr->weights},
                   {"bias", lr->bias},
                   {"l2", lr->l2},
                   {"epochs_run", lr->epochs_run},
                   {"final_loss", lr->final_loss}};
  } else {
    auto& rf = std::get<ForestModel>(m.params);
    nlohmann::json trees = nlohmann::json::array();
    for (auto& t : rf.trees) trees.push_back(tree_to_json(t));
    j["params"] = {{"n_trees", rf.trees.size()},
                   {"max_features", to_string(rf.max_features)},
                   {"bootstrap", rf.bootstrap},
                   {"tree_seeds", rf.tree_seeds},
                   {"trees", trees}};
  }
  j["seed"] = m.seed;
  j["provenance"] = m.provenance;
  return j;
}

Model model_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw Error("model file: not a JSON object");
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion)
      throw Error("model file: unsupported format_version " + std::to_string(version));
    Model m;
    m.schema = j.at("schema").get<std::vector<std::string>>();
    if (m.schema.empty()) throw Error("model file: empty schema");
    const std::size_t d = m.schema.size();
    m.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("provenance")) m.provenance = j.at("provenance");

    const auto& st = j.at("standardizer");
    if (!st.is_null()) {
      Standardizer s;
      s.mean = st.at("mean").get<std::vector<double>>();
      s.stddev = st.at("std").get<std::vector<double>>();
      auto constant = st.at("constant").get<std::vector<int>>();
      s.constant.assign(constant.begin(), constant.end());
      if (s.mean.size() != d || s.stddev.size() != d || s.constant.size() != d)
        throw Error("model file: standardizer does not match schema");
      for (double v : s.stddev)
        if (!(v > 0)) throw Error("model file: standardizer std must be > 0");
      m.standardizer = std::move(s);
    }

    const auto type = j.at("model_type").get<std::string>();
    const auto& p = j.at("params");
    if (type == "logistic") {
      LogisticModel lr;
      lr.weights = p.at("weights").get<std::vector<double>>();
      lr.bias = p.at("bias").get<double>();
      lr.l2 = p.at("l2").get<double>();
      lr.epochs_run = p.at("epochs_run").get<int>();
      lr.final_loss = p.at("final_loss").get<double>();
      lr.seed = m.seed;
      if (lr.weights.size() != d) throw Error("model file: weight vector does not match schema");
      m.params = std::move(lr);
    } else if (type == "forest") {
      ForestModel rf;
      rf.max_features = parse_max_features(p.at("max_features").get<std::string>());
      rf.bootstrap = p.at("bootstrap").get<bool>();
      rf.tree_seeds = p.at("tree_seeds").get<std::vector<std::uint64_t>>();
      rf.seed = m.seed;
      for (auto& t : p.at("trees")) rf.trees.push_back(tree_from_json(t, d));
      if (rf.trees.empty() || rf.trees.size() != p.at("n_trees").get<std::size_t>() ||
          rf.tree_seeds.size() != rf.trees.size())
        throw Error("model file: tree count mismatch");
      m.params = std::move(rf);
    } else {
      throw Error("model file: unknown model_type '" + type + "'");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("model file: ") + e.what());
  }
}

void save_model(const Model& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model file " + path.string());
  out << model_to_json(m).dump(1) << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("model file " + path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace revdetect
