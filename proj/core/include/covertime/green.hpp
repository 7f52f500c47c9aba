#pragma once

#include <map>
#include <vector>

#include "covertime/mode.hpp"
#include "covertime/torus.hpp"

namespace covertime {

// Walk symbol phi(theta) = sum_v kappa(v) cos(v . theta), evaluated as
// 1 - phi = sum_v kappa(v) 2 sin^2(v . theta / 2) so small-theta values keep
// full relative precision.
double one_minus_phi(const MovingMode& mode, const double* theta);

// Quadratic form (1/2) sum_v kappa(v) (v . theta)^2 matching 1 - phi to
// fourth order at the origin.
double quadratic_form(const MovingMode& mode, const double* theta);

struct GreenValue {
  double value = 0.0;
  double error = 0.0;  // quadrature error estimate
};

// Green's function of the walk on Z^d (continuous-time and jump-chain values
// coincide: unit holding rate) through its Fourier representation
//   g(x) = (2 pi)^{-d} Int_{[-pi,pi]^d} cos(x.theta) / (1 - phi(theta)) dtheta.
// The integrand is split as [cos(x.theta)/(1-phi) - 1/Q](theta) + 1/Q(theta)
// with Q the quadratic form: the first part is bounded and integrated with a
// tensor-product midpoint rule, Richardson-accelerated, over dyadic shells
// shrinking into the singularity; the 1/Q part reduces exactly to the
// outermost shell because Q(theta/2) = Q(theta)/4 makes shell integrals a
// geometric series. Deterministic for fixed (mode, x, tol).
GreenValue green(const MovingMode& mode, const Pt& x, double tol);

enum class PotentialMethod { Quadrature, Solve, MonteCarlo };

// Immutable g(.) table; lookups use g(x) = g(-x).
class PotentialTable {
 public:
  PotentialTable(const MovingMode& mode, PotentialMethod method) : mode_(mode), method_(method) {}

  void insert(const Pt& x, double value, double error);
  bool contains(const Pt& x) const;
  GreenValue at(const Pt& x) const;  // throws ConfigInvalid when absent
  PotentialMethod method() const { return method_; }
  const MovingMode& mode() const { return mode_; }
  std::size_t size() const { return values_.size(); }
  const std::map<Pt, GreenValue>& entries() const { return values_; }

 private:
  Pt key(const Pt& x) const;  // canonical representative of {x, -x}
  MovingMode mode_;
  PotentialMethod method_;
  std::map<Pt, GreenValue> values_;
};

// Quadrature table for the given points; enforces 0 < g(x) <= g(0) when 0 is
// among the points.
PotentialTable tabulate_green(const MovingMode& mode, const std::vector<Pt>& points, double tol);

// Leading-order far-field amplitude: g(x) ~ amp * (x^T Sigma^{-1} x)^{-(d-2)/2}
// with Sigma the mode covariance. Used for truncation corrections and escape
// radius policies, never as a substitute for quadrature values.
struct FarFieldGreen {
  int d = 0;
  double amplitude = 0.0;
  std::vector<double> sigma_inv;  // row-major d x d

  double at(const Pt& x) const;
};

FarFieldGreen far_field_green(const MovingMode& mode);

}  // namespace covertime
