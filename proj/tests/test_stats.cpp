#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "nuqml/errors.hpp"
#include "nuqml/stats.hpp"
#include "stats_oracle.hpp"

using namespace nuqml;

namespace {

double rel(double x, const oracle::Big& ref) {
  const double r = static_cast<double>(ref);
  return std::abs(x - r) / std::max(std::abs(r), 1e-300);
}

}  // namespace

TEST_CASE("Bessel-corrected standard deviation") {
  CHECK(sample_std(std::vector{3.7, 3.7}) == 0.0);
  CHECK(sample_std(std::vector{0.0, 2.0}) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  const std::vector<double> xs{2.0, 4.0};
  CHECK(mean(xs) == 3.0);
  CHECK(sample_std(xs) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(sample_std(std::vector{1.0}), InsufficientSamples);
}

TEST_CASE("variance reduction worked example") {
  CHECK(std::abs(variance_reduction(0.43, 0.63) - 0.317) < 1e-3);
  CHECK(variance_reduction(0.5, 0.5) == 0.0);
  CHECK_THROWS_AS(variance_reduction(0.1, 0.0), ParameterError);
}

TEST_CASE("incomplete beta special values") {
  CHECK(regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0);
  // I_x(1, 1) = x and I_x(a, 1) = x^a.
  for (double x : {0.1, 0.5, 0.93}) {
    CHECK(regularized_incomplete_beta(1.0, 1.0, x) == doctest::Approx(x).epsilon(1e-14));
    CHECK(regularized_incomplete_beta(3.5, 1.0, x) == doctest::Approx(std::pow(x, 3.5)).epsilon(1e-13));
  }
  CHECK(student_t_two_tailed_p(0.0, 7.0) == doctest::Approx(1.0).epsilon(1e-15));
  // Cauchy (df = 1): p = 1 - 2 atan(|t|) / pi.
  CHECK(student_t_two_tailed_p(2.5, 1.0) ==
        doctest::Approx(1.0 - 2.0 * std::atan(2.5) / M_PI).epsilon(1e-13));
}

TEST_CASE("Welch t-test edge cases") {
  const std::vector<double> a{1.0, 2.0, 3.0, 4.5};
  const auto same = welch_t_test(a, a);
  CHECK(same.t == 0.0);
  CHECK(same.p == doctest::Approx(1.0).epsilon(1e-15));

  const std::vector<double> narrow{4.0, 5.0, 6.0}, wide{-5.0, 5.0, 15.0};
  const auto eq = welch_t_test(narrow, wide);
  CHECK(eq.t == 0.0);
  CHECK(eq.p == doctest::Approx(1.0));

  const auto flat = welch_t_test(std::vector{2.0, 2.0}, std::vector{2.0, 2.0, 2.0});
  CHECK(flat.t == 0.0);
  CHECK(flat.p == 1.0);
  CHECK(flat.df == 3.0);
  const auto apart = welch_t_test(std::vector{1.0, 1.0}, std::vector{2.0, 2.0});
  CHECK(std::isinf(apart.t));
  CHECK(apart.p == 0.0);

  CHECK_THROWS_AS(welch_t_test(std::vector{1.0}, a), InsufficientSamples);
  CHECK_THROWS_AS(welch_t_test(a, std::vector<double>{}), InsufficientSamples);
}

TEST_CASE("shifted groups against the quadrature oracle") {
  const std::vector<double> a{1.0, 2.0, 3.0}, b{11.0, 12.0, 13.0};
  const auto w = welch_t_test(a, b);
  CHECK(w.t == doctest::Approx(-10.0 / std::sqrt(2.0 / 3.0)).epsilon(1e-14));
  CHECK(w.df == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(w.p < 0.01);
  const long double ref = oracle::two_tailed_p_by_quadrature(w.t, w.df);
  CHECK(std::abs(w.p - static_cast<double>(ref)) / static_cast<double>(ref) < 1e-9);
}

TEST_CASE("Welch t, df and p match the 50-digit oracle on 100 random pairs") {
  std::mt19937_64 rng(31337);
  std::uniform_int_distribution<int> size(2, 15);
  std::uniform_real_distribution<double> loc(-3.0, 3.0), scale(0.05, 4.0);
  double worst_t = 0, worst_df = 0, worst_p = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::normal_distribution<double> ga(loc(rng), scale(rng)), gb(loc(rng), scale(rng));
    std::vector<double> a(size(rng)), b(size(rng));
    for (auto& x : a) x = ga(rng);
    for (auto& x : b) x = gb(rng);
    const auto w = welch_t_test(a, b);
    const auto ref = oracle::welch_high_precision(a, b);
    worst_t = std::max(worst_t, rel(w.t, ref.t));
    worst_df = std::max(worst_df, rel(w.df, ref.df));
    worst_p = std::max(worst_p, rel(w.p, ref.p));
  }
  CHECK(worst_t < 1e-9);
  CHECK(worst_df < 1e-9);
  CHECK(worst_p < 1e-9);
}
