#pragma once

#include <cstddef>
#include <span>

namespace fairbook {

struct Correlation {
  double r = 0.0;
  double p = 1.0;  // two-sided
  std::size_t n = 0;
};

// Pearson's r with a two-sided p-value from Student's t on n-2 degrees of
// freedom. Needs n >= 3 and two non-constant series; a constant series
// throws UndefinedCorrelation, a length mismatch throws ContractError.
Correlation pearson_correlation(std::span<const double> x, std::span<const double> y);

// Two-sided tail probability P(|T| >= |t|) for Student's t.
double student_t_two_sided_p(double t, double dof);

struct TTest {
  double t = 0.0;
  double dof = 0.0;
  double p = 1.0;
  double mean_a = 0.0;
  double mean_b = 0.0;
};

// Welch's unequal-variance two-sample test, two-tailed. Both samples need at
// least two values. Zero variance in both samples yields p = 1 when the
// means agree and p = 0 otherwise.
TTest welch_t_test(std::span<const double> a, std::span<const double> b);

double mean(std::span<const double> x);
// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double stddev(std::span<const double> x);

}  // namespace fairbook
