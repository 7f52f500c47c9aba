#include "covertime/rng.hpp"

#include <cmath>

namespace covertime {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::BadWeights: return "BadWeights";
    case Errc::BadOrientation: return "BadOrientation";
    case Errc::NotGenerating: return "NotGenerating";
    case Errc::StepBudgetExceeded: return "StepBudgetExceeded";
    case Errc::NotAbsorbing: return "NotAbsorbing";
    case Errc::CapExceeded: return "CapExceeded";
    case Errc::ToleranceUnreachable: return "ToleranceUnreachable";
    case Errc::SolveFailed: return "SolveFailed";
    case Errc::KNotInA: return "KNotInA";
    case Errc::KEqualsA: return "KEqualsA";
    case Errc::CapacityUnavailable: return "CapacityUnavailable";
    case Errc::Disconnected: return "Disconnected";
    case Errc::DegenerateScale: return "DegenerateScale";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::SeparationViolated: return "SeparationViolated";
    case Errc::SeparationTooSmall: return "SeparationTooSmall";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::IoError: return "IoError";
  }
  return "UnknownError";
}

double RngStream::normal() {
  if (have_spare_normal_) {
    have_spare_normal_ = false;
    return spare_normal_;
  }
  // polar Box-Muller
  while (true) {
    const double u = 2.0 * next_double() - 1.0;
    const double v = 2.0 * next_double() - 1.0;
    const double s = u * u + v * v;
    if (s >= 1.0 || s == 0.0) continue;
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_normal_ = v * m;
    have_spare_normal_ = true;
    return u * m;
  }
}

double RngStream::gamma(double shape) {
  if (shape == 0.0) return 0.0;
  if (shape < 1.0) fail(Errc::SolveFailed, "gamma sampler requires shape >= 1");
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = next_double();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

i64 RngStream::poisson(double lambda) {
  if (lambda < 0.0) fail(Errc::SolveFailed, "poisson sampler requires lambda >= 0");
  if (lambda == 0.0) return 0;
  if (lambda < 10.0) {
    // inversion by product of uniforms
    const double L = std::exp(-lambda);
    i64 k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= next_double();
    } while (p > L);
    return k - 1;
  }
  // Hormann's PTRS transformed rejection
  const double b = 0.931 + 2.53 * std::sqrt(lambda);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  while (true) {
    const double U = next_double() - 0.5;
    const double V = next_double();
    const double us = 0.5 - std::fabs(U);
    const double kd = std::floor((2.0 * a / us + b) * U + lambda + 0.43);
    if (us >= 0.07 && V <= v_r) return i64(kd);
    if (kd < 0.0 || (us < 0.013 && V > us)) continue;
    if (std::log(V) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        kd * std::log(lambda) - lambda - std::lgamma(kd + 1.0)) {
      return i64(kd);
    }
  }
}

AliasTable::AliasTable(const std::vector<double>& weights) {
  n_ = int(weights.size());
  if (n_ == 0) fail(Errc::BadWeights, "alias table needs at least one weight");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) fail(Errc::BadWeights, "alias weights must be finite and nonnegative");
    total += w;
  }
  if (total <= 0.0) fail(Errc::BadWeights, "alias weights must have positive sum");
  prob_.assign(n_, 0.0);
  alias_.assign(n_, 0);
  std::vector<double> scaled(n_);
  for (int i = 0; i < n_; ++i) scaled[i] = weights[i] * double(n_) / total;
  std::vector<int> small, large;
  small.reserve(n_);
  large.reserve(n_);
  for (int i = 0; i < n_; ++i) (scaled[i] < 1.0 ? small : large).push_back(i);
  while (!small.empty() && !large.empty()) {
    const int s = small.back();
    small.pop_back();
    const int l = large.back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (int i : large) prob_[i] = 1.0;
  for (int i : small) prob_[i] = 1.0;
}

}  // namespace covertime
