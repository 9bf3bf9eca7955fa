#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

#include "revdetect/analysis.hpp"
#include "revdetect/csv.hpp"
#include "revdetect/error.hpp"
#include "revdetect/rng.hpp"

namespace revdetect {

std::vector<std::size_t> FeatureAttribution::ranking() const {
  std::vector<std::size_t> idx(schema.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return mean_abs[a] > mean_abs[b]; });
  return idx;
}

FeatureAttribution shapley_values(const Predictor& f, const FeatureMatrix& background,
                                  const FeatureMatrix& explain, const ShapleyOptions& opts) {
  if (opts.samples_per_feature < 10)
    throw Error("shapley: samples_per_feature must be >= 10");
  if (background.rows() == 0) throw Error("shapley: background set is empty");
  check_schema(background.schema, explain.schema);

  const std::size_t d = explain.cols(), n = explain.rows();
  const std::size_t m = static_cast<std::size_t>(opts.samples_per_feature);

  FeatureAttribution a;
  a.schema = explain.schema;
  a.values.assign(n * d, 0.0);
  a.std_errors.assign(n * d, 0.0);
  a.prediction.assign(n, 0.0);
  a.efficiency_se.assign(n, 0.0);

  double base = 0;
  for (std::size_t r = 0; r < background.rows(); ++r) base += f(background.row(r));
  a.baseline = base / static_cast<double>(background.rows());

  auto explain_row = [&](std::size_t r) {
    std::mt19937_64 g(splitmix64(opts.seed ^ fnv1a(explain.ids[r])));
    auto x = explain.row(r);
    const double fx = f(x);
    a.prediction[r] = fx;

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> sum(d, 0.0), sum_sq(d, 0.0), z(d);
    double tot = 0, tot_sq = 0;
    for (std::size_t s = 0; s < m; ++s) {
      fisher_yates(order.begin(), order.end(), g);
      auto bg = background.row(uniform_below(g, background.rows()));
      std::copy(bg.begin(), bg.end(), z.begin());
      double prev = f(z);
      tot += fx - prev;
      tot_sq += (fx - prev) * (fx - prev);
      for (std::size_t k = 0; k < d; ++k) {
        const std::size_t j = order[k];
        z[j] = x[j];
        const double cur = k + 1 == d ? fx : f(z);
        const double contrib = cur - prev;
        sum[j] += contrib;
        sum_sq[j] += contrib * contrib;
        prev = cur;
      }
    }
    const double dm = static_cast<double>(m);
    for (std::size_t j = 0; j < d; ++j) {
      const double mean = sum[j] / dm;
      const double var = std::max(0.0, sum_sq[j] / dm - mean * mean) * dm / std::max(1.0, dm - 1);
      a.values[r * d + j] = mean;
      a.std_errors[r * d + j] = std::sqrt(var / dm);
    }
    const double tmean = tot / dm;
    const double tvar = std::max(0.0, tot_sq / dm - tmean * tmean) * dm / std::max(1.0, dm - 1);
    a.efficiency_se[r] = std::sqrt(tvar / dm);
  };

  const int threads = std::max(1, std::min<int>(opts.threads, static_cast<int>(n)));
  if (threads <= 1) {
    for (std::size_t r = 0; r < n; ++r) explain_row(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t r; (r = next.fetch_add(1)) < n;) explain_row(r);
      });
  }

  a.mean_abs.assign(d, 0.0);
  a.direction.assign(d, 0);
  for (std::size_t j = 0; j < d; ++j) {
    double sa = 0, mx = 0, my = 0;
    for (std::size_t r = 0; r < n; ++r) {
      sa += std::abs(a.value(r, j));
      mx += explain.at(r, j);
      my += a.value(r, j);
    }
    if (n == 0) continue;
    a.mean_abs[j] = sa / static_cast<double>(n);
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double cov = 0, vx = 0, vy = 0;
    for (std::size_t r = 0; r < n; ++r) {
      const double dx = explain.at(r, j) - mx, dy = a.value(r, j) - my;
      cov += dx * dy;
      vx += dx * dx;
      vy += dy * dy;
    }
    if (vx > 0 && vy > 0 && cov != 0) a.direction[j] = cov > 0 ? 1 : -1;
  }
  return a;
}

FeatureAttribution shapley_importance(const Model& model, const FeatureMatrix& background,
                                      const FeatureMatrix& explain, const ShapleyOptions& opts) {
  check_schema(model.schema, explain.schema);
  return shapley_values([&](std::span<const double> x) { return model.probability(x); }, background,
                        explain, opts);
}

void write_attribution_csv(std::ostream& out, const FeatureAttribution& a) {
  out << "feature,mean_abs_shap,direction_sign\n";
  for (std::size_t j : a.ranking())
    csv::write_row(out, {a.schema[j], csv::format_double(a.mean_abs[j]), std::to_string(a.direction[j])});
}

void write_attribution_summary(std::ostream& out, const FeatureAttribution& a, std::size_t top_k) {
  auto rank = a.ranking();
  out << "Top " << std::min(top_k, rank.size()) << " features by mean |Shapley value| ("
      << a.rows() << " rows explained, baseline " << std::setprecision(4) << a.baseline << "):\n";
  for (std::size_t i = 0; i < rank.size() && i < top_k; ++i) {
    const std::size_t j = rank[i];
    const char* dir = a.direction[j] > 0 ? "positive" : a.direction[j] < 0 ? "negative" : "none";
    out << "  " << i + 1 << ". " << a.schema[j] << "  mean|phi|=" << std::setprecision(6) << a.mean_abs[j]
        << "  direction=" << dir << '\n';
  }
}

}  // namespace revdetect
