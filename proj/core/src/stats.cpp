#include "covertime/stats.hpp"

#include <algorithm>
#include <cmath>

namespace covertime {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) fail(Errc::ConfigInvalid, "need at least two paired points");
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / double(n), my = sy / double(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 0.0) fail(Errc::ConfigInvalid, "abscissae are constant");
  LineFit out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  out.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return out;
}

LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0)) fail(Errc::ConfigInvalid, "log-log fit needs positive abscissae");
    lx[i] = std::log(x[i]);
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0.0)) fail(Errc::ConfigInvalid, "log-log fit needs positive ordinates");
    ly[i] = std::log(y[i]);
  }
  return fit_line(lx, ly);
}

double gumbel_cdf(double z) { return std::exp(-std::exp(-z)); }

double ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf) {
  const std::size_t n = sample.size();
  if (n == 0) fail(Errc::ConfigInvalid, "empty sample");
  std::sort(sample.begin(), sample.end());
  double stat = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = cdf(sample[i]);
    if (!(f >= 0.0 && f <= 1.0)) fail(Errc::ConfigInvalid, "cdf value outside [0,1]");
    stat = std::max(stat, std::fabs(f - double(i) / double(n)));
    stat = std::max(stat, std::fabs(double(i + 1) / double(n) - f));
  }
  return stat;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) fail(Errc::ConfigInvalid, "empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double stat = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    stat = std::max(stat, std::fabs(double(i) / double(a.size()) - double(j) / double(b.size())));
  }
  return stat;
}

double ks_asymptotic_pvalue(double stat, double n) {
  if (!(n > 0.0) || stat < 0.0) fail(Errc::ConfigInvalid, "bad ks arguments");
  const double lam = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * stat;
  if (lam < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = 2.0 * ((k & 1) ? 1.0 : -1.0) * std::exp(-2.0 * double(k) * k * lam * lam);
    sum += term;
    if (std::fabs(term) < 1e-12) break;
  }
  return std::min(std::max(sum, 0.0), 1.0);
}

double chi_square_stat(const std::vector<i64>& counts, const std::vector<double>& expected) {
  if (counts.size() != expected.size() || counts.empty())
    fail(Errc::ConfigInvalid, "counts and expectations must pair up");
  double stat = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (!(expected[i] > 0.0)) fail(Errc::ConfigInvalid, "expected counts must be positive");
    const double d = double(counts[i]) - expected[i];
    stat += d * d / expected[i];
  }
  return stat;
}

}  // namespace covertime
