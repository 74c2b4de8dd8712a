#pragma once

#include <span>

namespace nuqml {

double mean(std::span<const double> xs);

/// Sample standard deviation with Bessel's correction (divisor n - 1).
/// Throws InsufficientSamples when n < 2.
double sample_std(std::span<const double> xs);

/// I_x(a, b) by Lentz's continued fraction, using the symmetry
/// I_x(a, b) = 1 - I_{1-x}(b, a) on the slowly converging side.
double regularized_incomplete_beta(double a, double b, double x);

/// P(|T| >= |t|) for Student's t with `df` degrees of freedom.
double student_t_two_tailed_p(double t, double df);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

/// t = (mean_a - mean_b) / sqrt(s_a^2/n_a + s_b^2/n_b), Welch-Satterthwaite
/// df, two-tailed p. When both groups have zero variance the test is
/// degenerate: t = 0 and p = 1 for equal means, t = +/-inf and p = 0 otherwise,
/// with df = n_a + n_b - 2.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

/// 1 - s_treatment / s_baseline.
double variance_reduction(double std_treatment, double std_baseline);

}  // namespace nuqml
