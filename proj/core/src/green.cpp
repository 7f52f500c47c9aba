#include "covertime/green.hpp"

#include <cmath>

namespace covertime {

double one_minus_phi(const MovingMode& mode, const double* theta) {
  double s = 0.0;
  for (int k = 0; k < mode.l(); ++k) {
    double vt = 0.0;
    for (int i = 0; i < mode.d; ++i) vt += double(mode.vectors[std::size_t(k)][std::size_t(i)]) * theta[i];
    const double si = std::sin(0.5 * vt);
    s += mode.weights[std::size_t(k)] * 2.0 * si * si;
  }
  return s;
}

double quadratic_form(const MovingMode& mode, const double* theta) {
  double s = 0.0;
  for (int k = 0; k < mode.l(); ++k) {
    double vt = 0.0;
    for (int i = 0; i < mode.d; ++i) vt += double(mode.vectors[std::size_t(k)][std::size_t(i)]) * theta[i];
    s += mode.weights[std::size_t(k)] * vt * vt;
  }
  return 0.5 * s;
}

namespace {

// t^2/2 - (1 - cos t), series below the cancellation threshold
double quartic_defect(double t) {
  const double t2 = t * t;
  if (std::fabs(t) < 0.25) {
    return t2 * t2 * (1.0 / 24.0 + t2 * (-1.0 / 720.0 + t2 * (1.0 / 40320.0 - t2 / 3628800.0)));
  }
  const double si = std::sin(0.5 * t);
  return 0.5 * t2 - 2.0 * si * si;
}

// Regularized integrand cos(x.theta)/(1-phi) - 1/Q, written over the common
// denominator so both O(theta^2) poles cancel analytically:
//   [ sum_v kappa (t_v^2/2 - (1-cos t_v)) - Q * (1 - cos(x.theta)) ] / ((1-phi) Q)
struct Regularized {
  const MovingMode& mode;
  Pt x;

  double operator()(const double* theta) const {
    double q = 0.0, omp = 0.0, defect = 0.0;
    for (int k = 0; k < mode.l(); ++k) {
      double vt = 0.0;
      for (int i = 0; i < mode.d; ++i) vt += double(mode.vectors[std::size_t(k)][std::size_t(i)]) * theta[i];
      const double w = mode.weights[std::size_t(k)];
      q += 0.5 * w * vt * vt;
      const double si = std::sin(0.5 * vt);
      omp += w * 2.0 * si * si;
      defect += w * quartic_defect(vt);
    }
    double xt = 0.0;
    for (int i = 0; i < mode.d; ++i) xt += double(x[std::size_t(i)]) * theta[i];
    const double sx = std::sin(0.5 * xt);
    return (defect - q * 2.0 * sx * sx) / (omp * q);
  }
};

struct InverseQ {
  const MovingMode& mode;
  double operator()(const double* theta) const { return 1.0 / quadratic_form(mode, theta); }
};

struct QuadBudget {
  i64 evals = 0;
  i64 cap = 0;
};

// tensor-product midpoint rule with m points per axis
template <class FN>
double midpoint_box(const FN& f, const double* lo, const double* hi, int d, int m, QuadBudget& budget) {
  double h[kMaxDim], theta[kMaxDim];
  i64 cells = 1;
  for (int i = 0; i < d; ++i) {
    h[i] = (hi[i] - lo[i]) / m;
    cells *= m;
  }
  budget.evals += cells;
  if (budget.evals > budget.cap) fail(Errc::ToleranceUnreachable, "quadrature budget exhausted");
  int idx[kMaxDim] = {0};
  double vol = 1.0;
  for (int i = 0; i < d; ++i) vol *= h[i];
  double acc = 0.0;
  while (true) {
    for (int i = 0; i < d; ++i) theta[i] = lo[i] + (idx[i] + 0.5) * h[i];
    acc += f(theta);
    int i = d - 1;
    while (i >= 0 && ++idx[i] == m) idx[i--] = 0;
    if (i < 0) break;
  }
  return acc * vol;
}

// midpoint + Richardson until the extrapolated increment is below eps; if the
// level cap runs out the best value with its achieved increment is returned
// and the caller decides whether the accumulated error is acceptable
template <class FN>
void romberg_box(const FN& f, const double* lo, const double* hi, int d, double eps, QuadBudget& budget,
                 double& value, double& error) {
  constexpr int kLevels = 8;  // m = 2, 4, ..., 256
  double table[kLevels][kLevels];
  double prev = 0.0;
  for (int k = 0; k < kLevels; ++k) {
    table[k][0] = midpoint_box(f, lo, hi, d, 2 << k, budget);
    for (int j = 1; j <= k; ++j) {
      const double pow4 = std::ldexp(1.0, 2 * j);  // 4^j
      table[k][j] = (pow4 * table[k][j - 1] - table[k - 1][j - 1]) / (pow4 - 1.0);
    }
    if (k > 0) {
      const double cur = table[k][k];
      const double delta = std::fabs(cur - prev);
      value = cur;
      error = delta;
      if (delta <= eps || (k >= 3 && delta <= 1e-15 * (1.0 + std::fabs(cur)))) return;
    }
    prev = table[k][k];
  }
}

// The 3^d - 1 subboxes of the shell [-s,s]^d \ [-s/2,s/2]^d. Both integrands
// are even under theta -> -theta, which pairs subbox c with subbox
// (3^d - 1) - c, so only the codes below the center are integrated and the
// result is doubled.
template <class FN>
void integrate_shell(const FN& f, int d, double s, double eps, QuadBudget& budget, double& value,
                     double& error) {
  i64 ncodes = 1;
  for (int i = 0; i < d; ++i) ncodes *= 3;
  const i64 center = (ncodes - 1) / 2;
  const double box_eps = eps / double(ncodes - 1);
  value = 0.0;
  error = 0.0;
  int code[kMaxDim];
  for (i64 c = 0; c < center; ++c) {
    i64 t = c;
    for (int i = 0; i < d; ++i) {
      code[i] = int(t % 3);
      t /= 3;
    }
    double lo[kMaxDim], hi[kMaxDim];
    for (int i = 0; i < d; ++i) {
      if (code[i] == 0) {
        lo[i] = -s;
        hi[i] = -0.5 * s;
      } else if (code[i] == 1) {
        lo[i] = -0.5 * s;
        hi[i] = 0.5 * s;
      } else {
        lo[i] = 0.5 * s;
        hi[i] = s;
      }
    }
    double v = 0.0, e = 0.0;
    romberg_box(f, lo, hi, d, box_eps, budget, v, e);
    value += 2.0 * v;
    error += 2.0 * e;
  }
}

}  // namespace

GreenValue green(const MovingMode& mode, const Pt& x, double tol) {
  if (!(tol > 0.0)) fail(Errc::ConfigInvalid, "green tolerance must be positive");
  const int d = mode.d;
  double scale = 1.0;
  for (int i = 0; i < d; ++i) scale *= 2.0 * M_PI;

  QuadBudget budget;
  budget.cap = 2000000000;

  const double geo = 1.0 - std::ldexp(1.0, 2 - d);  // 1 - 2^{2-d}
  const double target_q = 0.45 * tol * scale * geo;
  const double target_f = 0.45 * tol * scale;

  // exact reduction of Int 1/Q to the outermost shell
  double j0 = 0.0, j0_err = 0.0;
  integrate_shell(InverseQ{mode}, d, M_PI, target_q, budget, j0, j0_err);
  const double iq = j0 / geo;
  const double iq_err = j0_err / geo;

  // regularized part over shells shrinking into the origin
  const Regularized f{mode, x};
  double acc = 0.0, acc_err = 0.0;
  bool closed = false;
  for (int j = 0; j < 45 && !closed; ++j) {
    const double s = M_PI * std::ldexp(1.0, -j);
    const double eps_j = target_f * std::ldexp(1.0, -j - 1);
    double v = 0.0, e = 0.0;
    integrate_shell(f, d, s, eps_j, budget, v, e);
    acc += v;
    acc_err += e;

    // tail bound: |f| is bounded near 0, so the remaining inner box
    // contributes at most vol * max|f| (sampled with a safety factor)
    if (j >= 4) {
      const double s2 = 0.5 * s;
      double fmax = 0.0;
      double theta[kMaxDim];
      const int probe = 5;
      int idx[kMaxDim] = {0};
      while (true) {
        for (int i = 0; i < d; ++i) theta[i] = -s2 + (idx[i] + 0.5) * (2.0 * s2 / probe);
        fmax = std::max(fmax, std::fabs(f(theta)));
        int i = d - 1;
        while (i >= 0 && ++idx[i] == probe) idx[i--] = 0;
        if (i < 0) break;
      }
      double vol = 1.0;
      for (int i = 0; i < d; ++i) vol *= 2.0 * s2;
      const double tail = 2.0 * vol * fmax;
      if (tail <= target_f * std::ldexp(1.0, -j - 1)) {
        acc_err += tail;
        closed = true;
      }
    }
  }
  if (!closed) fail(Errc::ToleranceUnreachable, "shell recursion did not close the tail bound");

  GreenValue out;
  out.value = (acc + iq) / scale;
  out.error = (acc_err + iq_err) / scale;
  if (out.error > tol)
    fail(Errc::ToleranceUnreachable, "achieved error " + std::to_string(out.error) + " above tol");
  return out;
}

void PotentialTable::insert(const Pt& x, double value, double error) {
  if (!(value > 0.0)) fail(Errc::SolveFailed, "green value must be positive");
  if (!(error >= 0.0)) fail(Errc::SolveFailed, "error bound must be nonnegative");
  values_[key(x)] = GreenValue{value, error};
}

bool PotentialTable::contains(const Pt& x) const { return values_.count(key(x)) > 0; }

GreenValue PotentialTable::at(const Pt& x) const {
  const auto it = values_.find(key(x));
  if (it == values_.end()) fail(Errc::ConfigInvalid, "point not tabulated");
  return it->second;
}

Pt PotentialTable::key(const Pt& x) const {
  Pt neg{};
  for (int i = 0; i < mode_.d; ++i) neg[std::size_t(i)] = -x[std::size_t(i)];
  return std::max(x, neg);
}

PotentialTable tabulate_green(const MovingMode& mode, const std::vector<Pt>& points, double tol) {
  PotentialTable table(mode, PotentialMethod::Quadrature);
  for (const Pt& p : points) {
    if (table.contains(p)) continue;
    const GreenValue gv = green(mode, p, tol);
    table.insert(p, gv.value, gv.error);
  }
  Pt zero{};
  if (table.contains(zero)) {
    const double g0 = table.at(zero).value;
    for (const auto& [k, v] : table.entries())
      if (v.value > g0 + 1e-12) fail(Errc::SolveFailed, "g exceeds g(0) at a tabulated point");
  }
  return table;
}

double FarFieldGreen::at(const Pt& x) const {
  double q = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      q += double(x[std::size_t(i)]) * sigma_inv[std::size_t(i) * d + j] * double(x[std::size_t(j)]);
  if (q <= 0.0) fail(Errc::ConfigInvalid, "far field undefined at the origin");
  return amplitude * std::pow(q, -0.5 * double(d - 2));
}

FarFieldGreen far_field_green(const MovingMode& mode) {
  const int d = mode.d;
  std::vector<double> a = mode.covariance();
  std::vector<double> inv(std::size_t(d) * d, 0.0);
  for (int i = 0; i < d; ++i) inv[std::size_t(i) * d + i] = 1.0;
  double det = 1.0;
  // gauss-jordan with partial pivoting
  for (int col = 0; col < d; ++col) {
    int piv = col;
    for (int r = col + 1; r < d; ++r)
      if (std::fabs(a[std::size_t(r) * d + col]) > std::fabs(a[std::size_t(piv) * d + col])) piv = r;
    if (std::fabs(a[std::size_t(piv) * d + col]) < 1e-14)
      fail(Errc::SolveFailed, "degenerate covariance");
    if (piv != col) {
      for (int c = 0; c < d; ++c) {
        std::swap(a[std::size_t(piv) * d + c], a[std::size_t(col) * d + c]);
        std::swap(inv[std::size_t(piv) * d + c], inv[std::size_t(col) * d + c]);
      }
      det = -det;
    }
    const double p = a[std::size_t(col) * d + col];
    det *= p;
    for (int c = 0; c < d; ++c) {
      a[std::size_t(col) * d + c] /= p;
      inv[std::size_t(col) * d + c] /= p;
    }
    for (int r = 0; r < d; ++r) {
      if (r == col) continue;
      const double f = a[std::size_t(r) * d + col];
      if (f == 0.0) continue;
      for (int c = 0; c < d; ++c) {
        a[std::size_t(r) * d + c] -= f * a[std::size_t(col) * d + c];
        inv[std::size_t(r) * d + c] -= f * inv[std::size_t(col) * d + c];
      }
    }
  }
  if (det <= 0.0) fail(Errc::SolveFailed, "covariance not positive definite");

  FarFieldGreen out;
  out.d = d;
  out.sigma_inv = std::move(inv);
  out.amplitude = std::tgamma(0.5 * d - 1.0) / (2.0 * std::pow(M_PI, 0.5 * d) * std::sqrt(det));
  return out;
}

}  // namespace covertime
