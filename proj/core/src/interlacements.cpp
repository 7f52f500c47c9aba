#include "covertime/interlacements.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace covertime {

namespace {

// largest eigenvalue of the d x d SPD covariance, by power iteration
double max_eigenvalue(const std::vector<double>& m, int d) {
  std::vector<double> v(std::size_t(d), 1.0), w(std::size_t(d), 0.0);
  double lam = 0.0;
  for (int it = 0; it < 200; ++it) {
    for (int i = 0; i < d; ++i) {
      double s = 0.0;
      for (int j = 0; j < d; ++j) s += m[std::size_t(i * d + j)] * v[std::size_t(j)];
      w[std::size_t(i)] = s;
    }
    double norm = 0.0;
    for (int i = 0; i < d; ++i) norm += w[std::size_t(i)] * w[std::size_t(i)];
    norm = std::sqrt(norm);
    if (norm <= 0.0) break;
    for (int i = 0; i < d; ++i) v[std::size_t(i)] = w[std::size_t(i)] / norm;
    lam = norm;
  }
  return lam;
}

}  // namespace

InterlacementSampler::InterlacementSampler(const MovingMode& mode, const std::vector<Pt>& K)
    : mode_(mode), walker_(mode) {
  const int d = mode.d;
  if (K.empty()) fail(Errc::ConfigInvalid, "window must be nonempty");
  k_ = K;
  std::sort(k_.begin(), k_.end());
  k_.erase(std::unique(k_.begin(), k_.end()), k_.end());
  for (const Pt& p : k_)
    for (int i = d; i < kMaxDim; ++i)
      if (p[std::size_t(i)] != 0) fail(Errc::ConfigInvalid, "window site has entries beyond dimension d");

  // center the window so the escape box and the capacity ladder are canonical;
  // floor division keeps the shift exactly translation-covariant
  for (int i = 0; i < d; ++i) {
    i64 s = 0;
    for (const Pt& p : k_) s += p[std::size_t(i)];
    const i64 n = i64(k_.size());
    i64 q = s / n;
    if (s % n != 0 && s < 0) --q;
    shift_[std::size_t(i)] = i32(q);
  }
  kc_.reserve(k_.size());
  i32 rK = 0;
  for (const Pt& p : k_) {
    Pt q{};
    for (int i = 0; i < d; ++i) q[std::size_t(i)] = p[std::size_t(i)] - shift_[std::size_t(i)];
    for (int i = 0; i < d; ++i) rK = std::max(rK, std::abs(q[std::size_t(i)]));
    kc_.push_back(q);
  }

  if (2 * (rK + 1) > kCapacityLadderMaxRadius)
    fail(Errc::CapacityUnavailable, "window too large for the capacity ladder");
  CapacityEstimate est;
  try {
    const EquilibriumResult pilot = equilibrium(mode_, kc_, std::max<i32>(rK + 1, 4));
    est = capacity_extrapolated(mode_, kc_, std::max(0.008 * pilot.capacity, 1e-6));
  } catch (const Error& e) {
    fail(Errc::CapacityUnavailable, std::string("equilibrium measure unavailable: ") + e.what());
  }
  capacity_ = est.extrapolated;

  // start distribution: the deepest relative measure, normalized
  startProb_.reserve(kc_.size());
  for (const Pt& q : kc_) startProb_.push_back(est.last.measure.at(q) / est.last.capacity);
  startAlias_ = AliasTable(startProb_);
  win_.build(d, kc_);

  // escape radius: drop returns once cap * max far-field over the sphere is
  // below kReturnBias, using q(y) >= |y|^2 / lambda_max(Sigma)
  const FarFieldGreen ff = far_field_green(mode_);
  const double lamMax = max_eigenvalue(mode_.covariance(), d);
  const double target = capacity_ * ff.amplitude / kReturnBias;
  const double r = std::sqrt(lamMax) * std::pow(target, 1.0 / double(d - 2));
  rEsc_ = std::max<i32>(i32(std::ceil(r)), 2 * rK + 4);
  budget_ = i64(400) * rEsc_ * rEsc_ + 1000000;
}

double InterlacementSampler::startMass(const Pt& site) const {
  const auto it = std::lower_bound(k_.begin(), k_.end(), site);
  if (it == k_.end() || *it != site) fail(Errc::ConfigInvalid, "site not in the window");
  return startProb_[std::size_t(it - k_.begin())];
}

InterlacementSample InterlacementSampler::sample(double u, RngStream& rng) const {
  if (!(u >= 0.0) || !std::isfinite(u)) fail(Errc::ConfigInvalid, "level u must be finite and nonnegative");
  const int d = mode_.d;

  InterlacementSample out;
  out.K = k_;
  out.u = u;
  out.trajectoryCount = rng.poisson(u * capacity_);
  if (out.trajectoryCount == 0) return out;

  out.labels.reserve(std::size_t(out.trajectoryCount));
  for (i64 t = 0; t < out.trajectoryCount; ++t) out.labels.push_back(u * rng.next_double());
  std::sort(out.labels.begin(), out.labels.end());

  const Pt center{};
  std::vector<u32> epochs(std::size_t(win_.size), 0);
  out.trajectorySites.resize(std::size_t(out.trajectoryCount));
  for (i64 t = 0; t < out.trajectoryCount; ++t) {
    const int start = startAlias_.pick(rng);
    const u32 epoch = u32(t) + 1;
    const ZdWalkResult res = walker_.run_escape(kc_[std::size_t(start)], center, rEsc_, &win_,
                                                false, budget_, rng, &epochs, epoch);
    if (res.reason != ZdStopReason::Exited)
      fail(Errc::StepBudgetExceeded, "interlacement trajectory exceeded its step budget");
    std::vector<Pt>& sites = out.trajectorySites[std::size_t(t)];
    for (std::size_t i = 0; i < kc_.size(); ++i)
      if (epochs[i] == epoch) {
        Pt p{};
        for (int c = 0; c < d; ++c) p[std::size_t(c)] = kc_[i][std::size_t(c)] + shift_[std::size_t(c)];
        sites.push_back(p);
      }
  }

  for (const std::vector<Pt>& sites : out.trajectorySites)
    out.trace.insert(out.trace.end(), sites.begin(), sites.end());
  std::sort(out.trace.begin(), out.trace.end());
  out.trace.erase(std::unique(out.trace.begin(), out.trace.end()), out.trace.end());
  return out;
}

InterlacementSample sample_window(const MovingMode& mode, const std::vector<Pt>& K, double u,
                                  RngStream& rng) {
  return InterlacementSampler(mode, K).sample(u, rng);
}

InterlacementSample nested_levels(const InterlacementSample& sample, double v) {
  if (!(v >= 0.0) || v > sample.u) fail(Errc::ConfigInvalid, "level v must lie in [0, u]");
  InterlacementSample out;
  out.K = sample.K;
  out.u = v;
  const auto cut = std::upper_bound(sample.labels.begin(), sample.labels.end(), v);
  const std::size_t keep = std::size_t(cut - sample.labels.begin());
  out.trajectoryCount = i64(keep);
  out.labels.assign(sample.labels.begin(), cut);
  out.trajectorySites.assign(sample.trajectorySites.begin(), sample.trajectorySites.begin() + long(keep));
  for (const std::vector<Pt>& sites : out.trajectorySites)
    out.trace.insert(out.trace.end(), sites.begin(), sites.end());
  std::sort(out.trace.begin(), out.trace.end());
  out.trace.erase(std::unique(out.trace.begin(), out.trace.end()), out.trace.end());
  return out;
}

TwoPointSum two_point_sum(const PotentialTable& table, const std::vector<Pt>& K, double u) {
  if (K.empty()) fail(Errc::ConfigInvalid, "K must be nonempty");
  if (!(u >= 0.0) || !std::isfinite(u)) fail(Errc::ConfigInvalid, "level u must be finite and nonnegative");
  const Pt origin{};
  double g0 = 0.0;
  try {
    g0 = table.at(origin).value;
  } catch (const Error&) {
    fail(Errc::CapacityUnavailable, "origin potential missing from the table");
  }
  TwoPointSum out;
  for (const Pt& v : K) {
    if (v == origin) fail(Errc::ConfigInvalid, "K must not contain the origin");
    double gv = 0.0;
    try {
      gv = table.at(v).value;
    } catch (const Error&) {
      fail(Errc::CapacityUnavailable, "site potential missing from the table");
    }
    out.lhs += std::exp(-2.0 * u / (g0 + gv));
  }
  out.base = double(K.size()) * std::exp(-2.0 * u / g0);
  out.ratio = out.lhs / out.base;
  return out;
}

}  // namespace covertime
