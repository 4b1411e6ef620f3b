#pragma once

namespace privdet {

// Upper tail P[X > x] of a central chi-squared variable with q degrees of
// freedom, via the regularized incomplete gamma function (series /
// continued-fraction split at x = s + 1).  Absolute error < 1e-12.
double chi2_tail(int q, double x);

// Inverse of chi2_tail in x: the threshold tau with P[X > tau] == p,
// p in (0, 1).  Bracketed bisection; round-trip accurate to ~1e-12.
double chi2_quantile(int q, double p);

// Upper tail of a noncentral chi-squared variable (q dof, noncentrality
// lambda >= 0) by the Poisson mixture
//   sum_j e^{-l/2} (l/2)^j / j! * chi2_tail(q + 2j, x),
// summed outward from the Poisson mode until the unaccounted mixture mass
// is below tail_tol.
double noncentral_chi2_tail(int q, double lambda, double x,
                            double tail_tol = 1e-14);

// One operating point of the chi-squared GLRT:
// threshold = chi2_quantile(q, p_false_alarm),
// p_detect  = noncentral_chi2_tail(q, lambda, threshold).
struct DetectionPoint {
  int q;
  double lambda;
  double p_false_alarm;
  double threshold;
  double p_detect;
};
DetectionPoint detection_probability(int q, double lambda,
                                     double p_false_alarm);

}  // namespace privdet
