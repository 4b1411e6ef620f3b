#include "privdet/chi2.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "privdet/errors.hpp"

namespace privdet {

namespace {

// Regularized lower incomplete gamma P(s, x) by power series; valid and
// fast for x < s + 1.
double gamma_p_series(double s, double x) {
  double term = 1.0 / s;
  double sum = term;
  for (int n = 1; n < 10000; ++n) {
    term *= x / (s + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-17) {
      return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
    }
  }
  throw NumericalError("gamma_p_series: no convergence");
}

// Regularized upper incomplete gamma Q(s, x) by Lentz continued fraction;
// valid and fast for x >= s + 1.
double gamma_q_cf(double s, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) {
      return h * std::exp(-x + s * std::log(x) - std::lgamma(s));
    }
  }
  throw NumericalError("gamma_q_cf: no convergence");
}

double regularized_gamma_q(double s, double x) {
  if (x <= 0.0) return 1.0;
  if (x < s + 1.0) return 1.0 - gamma_p_series(s, x);
  return gamma_q_cf(s, x);
}

void check_dof(int q) {
  if (q < 1) throw std::invalid_argument("chi2: degrees of freedom must be >= 1");
}

}  // namespace

double chi2_tail(int q, double x) {
  check_dof(q);
  if (!(x >= 0.0)) throw std::invalid_argument("chi2_tail: x must be >= 0");
  return regularized_gamma_q(0.5 * q, 0.5 * x);
}

double chi2_quantile(int q, double p) {
  check_dof(q);
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("chi2_quantile: p must lie in (0, 1)");
  }
  double lo = 0.0;
  // Initial bracket: mean + 10 sd + margin covers any p of practical size;
  // doubling guards the extreme-tail cases.
  double hi = q + 10.0 * std::sqrt(2.0 * q) + 50.0;
  int guard = 0;
  while (chi2_tail(q, hi) > p) {
    hi *= 2.0;
    if (++guard > 200) throw NumericalError("chi2_quantile: bracket failed");
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (chi2_tail(q, mid) > p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double noncentral_chi2_tail(int q, double lambda, double x, double tail_tol) {
  check_dof(q);
  if (!(lambda >= 0.0)) {
    throw std::invalid_argument("noncentral_chi2_tail: lambda must be >= 0");
  }
  if (!(x >= 0.0)) {
    throw std::invalid_argument("noncentral_chi2_tail: x must be >= 0");
  }
  if (x == 0.0) return 1.0;
  if (lambda == 0.0) return chi2_tail(q, x);

  const double half = 0.5 * lambda;
  const double y = 0.5 * x;
  const double s0 = 0.5 * q;
  const long j0 = static_cast<long>(half);  // Poisson mode (floor)

  // Anchor terms at the mode, in log space to dodge under/overflow.
  const double w0 = std::exp(-half + j0 * std::log(half) - std::lgamma(j0 + 1.0));
  const double q0 = regularized_gamma_q(s0 + j0, y);
  // t(a) = y^a e^{-y} / Gamma(a+1) satisfies Q(a+1, y) = Q(a, y) + t(a).
  const double t0 =
      std::exp((s0 + j0) * std::log(y) - y - std::lgamma(s0 + j0 + 1.0));

  double total = w0 * q0;
  double mass = w0;

  // Forward from the mode: stop once the missing Poisson mass (which
  // multiplies tail probabilities <= 1) cannot move the result by tail_tol.
  {
    double w = w0, qq = q0, t = t0;
    for (long j = j0 + 1; j < j0 + 4000000; ++j) {
      w *= half / static_cast<double>(j);
      qq += t;
      if (qq > 1.0) qq = 1.0;
      t *= y / (s0 + static_cast<double>(j));
      total += w * qq;
      mass += w;
      if (1.0 - mass < tail_tol || w < 1e-305) break;
    }
  }
  // Backward from the mode down to j = 0.
  {
    double w = w0, qq = q0, t = t0;
    for (long j = j0; j >= 1; --j) {
      w *= static_cast<double>(j) / half;
      const double s = s0 + static_cast<double>(j);
      t *= s / y;                 // t(a-1) = t(a) * a / y
      qq -= t;                    // Q(a-1) = Q(a) - t(a-1)
      if (qq < 0.0) qq = 0.0;
      total += w * qq;
      mass += w;
      if (w < 1e-305) break;
    }
  }
  (void)mass;
  if (total < 0.0) total = 0.0;
  if (total > 1.0) total = 1.0;
  return total;
}

DetectionPoint detection_probability(int q, double lambda,
                                     double p_false_alarm) {
  DetectionPoint p;
  p.q = q;
  p.lambda = lambda;
  p.p_false_alarm = p_false_alarm;
  p.threshold = chi2_quantile(q, p_false_alarm);
  p.p_detect = noncentral_chi2_tail(q, lambda, p.threshold);
  return p;
}

}  // namespace privdet
