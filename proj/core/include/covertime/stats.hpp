#pragma once

#include <functional>
#include <vector>

#include "covertime/common.hpp"

namespace covertime {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;  // coefficient of determination
};

// Least squares y ~ slope*x + intercept. Needs >= 2 points and nonconstant x.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// fit_line on (log x, log y); every entry must be positive.
LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

// Standard Gumbel distribution function exp(-exp(-z)).
double gumbel_cdf(double z);

// One-sample Kolmogorov-Smirnov statistic sup_x |F_n(x) - cdf(x)|.
double ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf);

// Two-sample Kolmogorov-Smirnov statistic.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// Asymptotic Kolmogorov tail Q(sqrt(n)*stat); for two samples pass the
// effective size n1*n2/(n1+n2).
double ks_asymptotic_pvalue(double stat, double n);

// Pearson chi-square statistic against expected counts (all positive).
double chi_square_stat(const std::vector<i64>& counts, const std::vector<double>& expected);

}  // namespace covertime
