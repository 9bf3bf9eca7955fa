#include <cmath>
#include <cstdio>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "revdetect/analysis.hpp"
#include "revdetect/csv.hpp"
#include "revdetect/error.hpp"

namespace revdetect {

namespace {

// Continued fraction for I_x(a,b), modified Lentz.
double beta_cf(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-15;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  return h;
}

double log_beta_front(double a, double b, double x) {
  return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0) || !(b > 0)) throw Error("incomplete_beta: a and b must be positive");
  if (x <= 0) return 0.0;
  if (x >= 1) return 1.0;
  const double front = std::exp(log_beta_front(a, b, x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double f_survival(double f, double d1, double d2) {
  if (!(f > 0)) return 1.0;
  if (std::isinf(f)) return 0.0;
  // P(F > f) = I_{d2/(d2 + d1 f)}(d2/2, d1/2); evaluated directly in the small tail
  const double x = d2 / (d2 + d1 * f);
  return incomplete_beta(d2 / 2.0, d1 / 2.0, x);
}

AnovaResult anova_oneway(std::span<const std::vector<double>> groups) {
  if (groups.size() < 2) throw Error("anova_oneway: need at least 2 groups");
  AnovaResult r;
  double grand = 0;
  std::size_t n = 0;
  for (auto& g : groups) {
    if (g.size() < 2) throw Error("anova_oneway: every group needs at least 2 samples");
    double s = 0;
    for (double v : g) s += v;
    r.sizes.push_back(g.size());
    r.means.push_back(s / static_cast<double>(g.size()));
    grand += s;
    n += g.size();
  }
  grand /= static_cast<double>(n);

  double ss_between = 0, ss_within = 0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const double dm = r.means[i] - grand;
    ss_between += static_cast<double>(r.sizes[i]) * dm * dm;
    for (double v : groups[i]) ss_within += (v - r.means[i]) * (v - r.means[i]);
  }
  r.df_between = static_cast<double>(groups.size() - 1);
  r.df_within = static_cast<double>(n - groups.size());

  const double ms_between = ss_between / r.df_between;
  const double ms_within = ss_within / r.df_within;
  const double scale = std::max(1.0, grand * grand);
  if (ms_within <= 1e-300 * scale) {
    if (ms_between > 1e-24 * scale) {
      r.f_infinite = true;
      r.f_statistic = std::numeric_limits<double>::infinity();
      r.p_value = 0.0;
    } else {
      r.f_statistic = 0.0;
      r.p_value = 1.0;
    }
    return r;
  }
  r.f_statistic = ms_between / ms_within;
  r.p_value = f_survival(r.f_statistic, r.df_between, r.df_within);
  if (r.p_value < 1e-300) {
    r.p_value = 0.0;
    r.p_underflow = true;
  }
  return r;
}

namespace {

ClassStats stats_of(const std::vector<double>& v) {
  ClassStats s;
  s.n = v.size();
  if (v.empty()) return s;
  double sum = 0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string thousands(double v) {
  if (std::isinf(v)) return "inf";
  int digits = v >= 100 ? 0 : 2;
  std::string s = fixed(v, digits);
  auto dot = s.find('.');
  std::size_t int_end = dot == std::string::npos ? s.size() : dot;
  for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(int_end) - 3; i > 0; i -= 3) s.insert(i, ",");
  return s;
}

}  // namespace

std::vector<FeatureSummary> class_summary(const FeatureMatrix& m) {
  if (!m.has_labels()) throw Error("class_summary: features carry no labels");
  std::size_t n1 = 0;
  for (int l : m.labels) n1 += l;
  if (n1 == 0 || n1 == m.rows()) throw Error("class_summary: both classes must be present");

  std::vector<FeatureSummary> out;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    std::vector<std::vector<double>> groups(2);
    for (std::size_t r = 0; r < m.rows(); ++r) groups[m.labels[r]].push_back(m.at(r, j));
    FeatureSummary s;
    s.feature = m.schema[j];
    s.authentic = stats_of(groups[0]);
    s.generated = stats_of(groups[1]);
    s.anova = anova_oneway(groups);
    out.push_back(std::move(s));
  }
  return out;
}

std::string significance_stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

void write_summary_csv(std::ostream& out, std::span<const FeatureSummary> rows) {
  out << "feature,authentic_mean,authentic_std,authentic_n,generated_mean,generated_std,generated_n,"
         "f_statistic,p_value,significance\n";
  for (auto& r : rows) {
    csv::write_row(out, {r.feature, csv::format_double(r.authentic.mean),
                         csv::format_double(r.authentic.stddev), std::to_string(r.authentic.n),
                         csv::format_double(r.generated.mean), csv::format_double(r.generated.stddev),
                         std::to_string(r.generated.n),
                         r.anova.f_infinite ? "inf" : csv::format_double(r.anova.f_statistic),
                         r.anova.p_underflow ? "<1e-300" : csv::format_double(r.anova.p_value),
                         significance_stars(r.anova.p_value)});
  }
}

void write_summary_text(std::ostream& out, std::span<const FeatureSummary> rows) {
  auto cell = [](const ClassStats& s) { return fixed(s.mean, 2) + " (" + fixed(s.stddev, 2) + ")"; };
  out << std::left << std::setw(8) << "Metric" << std::setw(20) << "Authentic" << std::setw(20)
      << "Generated" << "F-statistic\n";
  for (auto& r : rows) {
    out << std::setw(8) << r.feature << std::setw(20) << cell(r.authentic) << std::setw(20)
        << cell(r.generated) << thousands(r.anova.f_statistic) << significance_stars(r.anova.p_value)
        << '\n';
  }
  out << "*p<.05, **p<.01, ***p<.001\n";
}

}  // namespace revdetect
