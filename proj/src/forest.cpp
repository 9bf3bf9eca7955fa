#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include "revdetect/error.hpp"
#include "revdetect/ml.hpp"
#include "revdetect/rng.hpp"

namespace revdetect {

double DecisionTree::probability(std::span<const double> x) const {
  int i = 0;
  while (nodes[i].feature >= 0) i = x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
  return nodes[i].prob1;
}

int DecisionTree::depth() const {
  std::vector<int> d(nodes.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, d[i]);
    if (nodes[i].feature >= 0) d[nodes[i].left] = d[nodes[i].right] = d[i] + 1;
  }
  return best;
}

double ForestModel::probability(std::span<const double> x) const {
  double sum = 0;
  for (auto& t : trees) sum += t.probability(x);
  return sum / static_cast<double>(trees.size());
}

std::size_t max_features_count(MaxFeatures rule, std::size_t n_cols) {
  std::size_t k = n_cols;
  switch (rule) {
    case MaxFeatures::Sqrt: k = static_cast<std::size_t>(std::sqrt(static_cast<double>(n_cols))); break;
    case MaxFeatures::Log2: k = static_cast<std::size_t>(std::log2(static_cast<double>(n_cols))); break;
    case MaxFeatures::All: break;
  }
  return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(n_cols, 1));
}

namespace {

struct Sample {
  std::size_t row;
  double weight;  // bootstrap multiplicity
};

struct SplitChoice {
  int feature = -1;
  double threshold = 0;
  double impurity = 0;  // weighted child Gini
};

double gini(double w0, double w1) {
  const double t = w0 + w1;
  if (t <= 0) return 0;
  const double p = w1 / t;
  return 2.0 * p * (1.0 - p);
}

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& data, std::size_t mtry, std::uint64_t seed)
      : data_(data), mtry_(mtry), rng_(seed), features_(data.cols()) {
    std::iota(features_.begin(), features_.end(), 0);
  }

  DecisionTree build(std::vector<Sample> samples) {
    DecisionTree tree;
    struct Job {
      int node;
      std::vector<Sample> samples;
    };
    std::vector<Job> stack;
    tree.nodes.emplace_back();
    stack.push_back({0, std::move(samples)});
    while (!stack.empty()) {
      Job job = std::move(stack.back());
      stack.pop_back();

      double w0 = 0, w1 = 0;
      for (auto& s : job.samples) (data_.labels[s.row] ? w1 : w0) += s.weight;
      tree.nodes[job.node].prob1 = w1 / (w0 + w1);
      if (w0 == 0 || w1 == 0 || w0 + w1 < 2.0) continue;

      SplitChoice split = find_split(job.samples, w0, w1);
      if (split.feature < 0) continue;

      std::vector<Sample> left, right;
      for (auto& s : job.samples)
        (data_.at(s.row, split.feature) <= split.threshold ? left : right).push_back(s);

      const int l = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      auto& node = tree.nodes[job.node];
      node.feature = split.feature;
      node.threshold = split.threshold;
      node.left = l;
      node.right = l + 1;
      stack.push_back({l + 1, std::move(right)});
      stack.push_back({l, std::move(left)});
    }
    return tree;
  }

 private:
  // Samples features without replacement; keeps drawing past mtry until a
  // feature with a valid split has been seen.
  SplitChoice find_split(std::vector<Sample>& samples, double w0, double w1) {
    SplitChoice best;
    const double parent = gini(w0, w1) * (w0 + w1);
    best.impurity = parent;
    bool found = false;
    const std::size_t d = features_.size();
    for (std::size_t k = 0; k < d; ++k) {
      std::size_t j = k + static_cast<std::size_t>(uniform_below(rng_, d - k));
      std::swap(features_[k], features_[j]);
      if (k >= mtry_ && found) break;
      const int f = static_cast<int>(features_[k]);

      std::sort(samples.begin(), samples.end(), [&](const Sample& a, const Sample& b) {
        double va = data_.at(a.row, f), vb = data_.at(b.row, f);
        return va < vb || (va == vb && a.row < b.row);
      });
      double l0 = 0, l1 = 0;
      for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        (data_.labels[samples[i].row] ? l1 : l0) += samples[i].weight;
        const double v = data_.at(samples[i].row, f);
        const double vn = data_.at(samples[i + 1].row, f);
        if (!(vn > v)) continue;
        found = true;
        const double imp = gini(l0, l1) * (l0 + l1) + gini(w0 - l0, w1 - l1) * (w0 - l0 + w1 - l1);
        if (imp < best.impurity - 1e-12 || (best.feature < 0 && imp <= best.impurity)) {
          best.impurity = imp;
          best.feature = f;
          double mid = 0.5 * (v + vn);
          best.threshold = (mid >= vn) ? v : mid;
        }
      }
    }
    return best;
  }

  const FeatureMatrix& data_;
  std::size_t mtry_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> features_;
};

}  // namespace

ForestModel train_forest(const FeatureMatrix& train, const ForestOptions& opts) {
  if (train.rows() == 0) throw Error("train_forest: empty training set");
  if (!train.has_labels()) throw Error("train_forest: training rows have no labels");
  for (int l : train.labels)
    if (l != 0 && l != 1) throw Error("train_forest: labels must be binary (0/1)");
  if (opts.n_trees < 1) throw Error("train_forest: n_trees must be >= 1");
  if (train.cols() == 0) throw Error("train_forest: no feature columns");

  ForestModel model;
  model.max_features = opts.max_features;
  model.bootstrap = opts.bootstrap;
  model.seed = opts.seed;
  model.trees.resize(opts.n_trees);
  model.tree_seeds.resize(opts.n_trees);
  for (int t = 0; t < opts.n_trees; ++t)
    model.tree_seeds[t] = splitmix64(opts.seed ^ splitmix64(static_cast<std::uint64_t>(t)));

  const std::size_t mtry = max_features_count(opts.max_features, train.cols());
  const std::size_t n = train.rows();

  auto grow = [&](int t) {
    std::mt19937_64 g(model.tree_seeds[t]);
    std::vector<double> counts(n, opts.bootstrap ? 0.0 : 1.0);
    if (opts.bootstrap)
      for (std::size_t i = 0; i < n; ++i) counts[uniform_below(g, n)] += 1.0;
    std::vector<Sample> samples;
    for (std::size_t i = 0; i < n; ++i)
      if (counts[i] > 0) samples.push_back({i, counts[i]});
    TreeBuilder builder(train, mtry, g());
    model.trees[t] = builder.build(std::move(samples));
  };

  const int threads = std::max(1, std::min(opts.threads, opts.n_trees));
  if (threads == 1) {
    for (int t = 0; t < opts.n_trees; ++t) grow(t);
  } else {
    std::atomic<int> next{0};
    std::vector<std::jthread> pool;
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&] {
        for (int t; (t = next.fetch_add(1)) < opts.n_trees;) grow(t);
      });
  }
  return model;
}

}  // namespace revdetect
