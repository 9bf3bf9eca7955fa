#include <cmath>
#include <sstream>

#include "revdetect/error.hpp"
#include "revdetect/log.hpp"
#include "revdetect/ml.hpp"

namespace revdetect {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double LogisticModel::decision(std::span<const double> x) const {
  double z = bias;
  for (std::size_t j = 0; j < weights.size(); ++j) z += weights[j] * x[j];
  return z;
}

double LogisticModel::probability(std::span<const double> x) const { return sigmoid(decision(x)); }

namespace {

// log(1 + exp(-z)) without overflow
double softplus_neg(double z) { return z > 0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z)); }

double mean_log_loss(const FeatureMatrix& m, const std::vector<double>& w, double b) {
  double sum = 0;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double z = b;
    auto x = m.row(r);
    for (std::size_t j = 0; j < w.size(); ++j) z += w[j] * x[j];
    sum += m.labels[r] ? softplus_neg(z) : softplus_neg(-z);
  }
  return sum / static_cast<double>(m.rows());
}

double objective(const FeatureMatrix& m, const std::vector<double>& w, double b, double l2) {
  double sq = 0;
  for (double v : w) sq += v * v;
  return mean_log_loss(m, w, b) + l2 * sq / (2.0 * static_cast<double>(m.rows()));
}

}  // namespace

LogisticModel train_logistic(const FeatureMatrix& train, const LogisticOptions& opts,
                             const FeatureMatrix* val) {
  if (!train.has_labels()) throw Error("train_logistic: training rows have no labels");
  if (train.rows() == 0) throw Error("train_logistic: empty training set");
  for (int l : train.labels)
    if (l != 0 && l != 1) throw Error("train_logistic: labels must be binary (0/1)");
  if (val && (val->cols() != train.cols() || !val->has_labels()))
    throw Error("train_logistic: validation matrix must match the training schema and carry labels");
  if (opts.epochs < 0 || !(opts.step > 0) || !std::isfinite(opts.step) || !(opts.l2 >= 0))
    throw Error("train_logistic: invalid options");

  std::size_t positives = 0;
  for (int l : train.labels) positives += l;
  if (positives == 0 || positives == train.rows())
    log::warn("train_logistic: training set contains a single class");

  const std::size_t n = train.rows(), d = train.cols();
  LogisticModel m;
  m.weights.assign(d, 0.0);
  m.l2 = opts.l2;
  m.seed = opts.seed;

  double step = opts.step;
  double loss = objective(train, m.weights, m.bias, opts.l2);
  m.loss_history.push_back(loss);

  std::vector<double> best_w = m.weights;
  double best_b = m.bias;
  double best_val = val && val->rows() ? mean_log_loss(*val, m.weights, m.bias) : 0.0;
  int since_best = 0;

  std::vector<double> grad(d), cand(d);
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_b = 0;
    for (std::size_t r = 0; r < n; ++r) {
      auto x = train.row(r);
      double err = m.probability(x) - train.labels[r];
      for (std::size_t j = 0; j < d; ++j) grad[j] += err * x[j];
      grad_b += err;
    }
    for (std::size_t j = 0; j < d; ++j) grad[j] = grad[j] / n + opts.l2 * m.weights[j] / n;
    grad_b /= n;

    double new_loss = 0;
    double cand_b = 0;
    for (;;) {
      for (std::size_t j = 0; j < d; ++j) cand[j] = m.weights[j] - step * grad[j];
      cand_b = m.bias - step * grad_b;
      new_loss = objective(train, cand, cand_b, opts.l2);
      if (std::isnan(new_loss))
        throw Error("train_logistic: loss diverged (NaN); use a smaller step");
      if (new_loss <= loss) break;
      step *= 0.5;
      if (step < 1e-14) break;
    }
    m.epochs_run = epoch + 1;
    if (new_loss > loss) break;  // no descent step found
    m.weights = cand;
    m.bias = cand_b;
    const double delta = loss - new_loss;
    loss = new_loss;
    m.loss_history.push_back(loss);

    if (val && val->rows()) {
      double vl = mean_log_loss(*val, m.weights, m.bias);
      if (vl < best_val) {
        best_val = vl;
        best_w = m.weights;
        best_b = m.bias;
        since_best = 0;
      } else if (++since_best >= opts.patience) {
        break;
      }
    }
    if (delta <= opts.tolerance * std::max(1.0, loss)) break;
  }
  if (val && val->rows()) {
    m.weights = best_w;
    m.bias = best_b;
  }
  m.final_loss = objective(train, m.weights, m.bias, opts.l2);
  return m;
}

}  // namespace revdetect
