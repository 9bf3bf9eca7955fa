#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "revdetect/feature_matrix.hpp"
#include "revdetect/ml.hpp"

namespace revdetect {

/// Regularized incomplete beta I_x(a, b) via Lentz's continued fraction.
double incomplete_beta(double a, double b, double x);

/// Upper tail P(F > f) of the F distribution with (d1, d2) degrees of freedom.
double f_survival(double f, double d1, double d2);

struct AnovaResult {
  double f_statistic = 0;
  double p_value = 1;
  bool f_infinite = false;   // no within-group variance but unequal means
  bool p_underflow = false;  // p < 1e-300, reported as 0
  double df_between = 0;
  double df_within = 0;
  std::vector<std::size_t> sizes;
  std::vector<double> means;
};

AnovaResult anova_oneway(std::span<const std::vector<double>> groups);

struct ClassStats {
  double mean = 0;
  double stddev = 0;  // sample (n-1) standard deviation
  std::size_t n = 0;
};

struct FeatureSummary {
  std::string feature;
  ClassStats authentic;  // label 0
  ClassStats generated;  // label 1
  AnovaResult anova;
};

std::vector<FeatureSummary> class_summary(const FeatureMatrix& features);

/// "***" for p < .001, "**" for p < .01, "*" for p < .05.
std::string significance_stars(double p);

void write_summary_csv(std::ostream& out, std::span<const FeatureSummary> rows);
/// Table with "mean (std)" cells and starred F-statistics.
void write_summary_text(std::ostream& out, std::span<const FeatureSummary> rows);

using Predictor = std::function<double(std::span<const double>)>;

struct ShapleyOptions {
  int samples_per_feature = 200;  // permutations per explained row
  std::uint64_t seed = 0;
  int threads = 1;
};

struct FeatureAttribution {
  std::vector<std::string> schema;
  std::vector<double> values;         // rows x features, signed
  std::vector<double> std_errors;     // rows x features, Monte-Carlo standard error
  std::vector<double> prediction;     // f(x) per explained row
  std::vector<double> efficiency_se;  // std. error of sum_j phi_j per row
  double baseline = 0;                // mean f over the background
  std::vector<double> mean_abs;       // per feature
  std::vector<int> direction;         // sign of corr(feature value, Shapley value)

  std::size_t rows() const { return prediction.size(); }
  double value(std::size_t r, std::size_t j) const { return values[r * schema.size() + j]; }
  /// Feature indices ordered by decreasing mean |value|.
  std::vector<std::size_t> ranking() const;
};

/// Permutation-sampling Shapley values of `f` with absent features imputed
/// from random background rows. Each row gets its own random stream keyed by
/// (seed, row id), so results do not depend on thread count.
FeatureAttribution shapley_values(const Predictor& f, const FeatureMatrix& background,
                                  const FeatureMatrix& explain, const ShapleyOptions& opts);

/// Explains the model's class-1 probability.
FeatureAttribution shapley_importance(const Model& model, const FeatureMatrix& background,
                                      const FeatureMatrix& explain, const ShapleyOptions& opts);

void write_attribution_csv(std::ostream& out, const FeatureAttribution& a);
void write_attribution_summary(std::ostream& out, const FeatureAttribution& a, std::size_t top_k = 5);

}  // namespace revdetect
