#include "fairbook/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "fairbook/error.hpp"

namespace fairbook {

double mean(std::span<const double> x) {
  if (x.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double stddev(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double student_t_two_sided_p(double t, double dof) {
  if (!(dof > 0.0)) throw ContractError("student_t_two_sided_p: dof must be positive");
  if (std::isinf(t)) return 0.0;
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  boost::math::students_t dist(dof);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
}

Correlation pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ContractError("pearson_correlation: series lengths differ");
  if (x.size() < 3) throw ContractError("pearson_correlation: need at least 3 points");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = x[k] - mx, dy = y[k] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedCorrelation("pearson_correlation: constant series");

  Correlation c;
  c.n = x.size();
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double dof = static_cast<double>(c.n - 2);
  if (std::fabs(c.r) >= 1.0) {
    c.p = 0.0;
  } else {
    const double t = c.r * std::sqrt(dof / (1.0 - c.r * c.r));
    c.p = student_t_two_sided_p(t, dof);
  }
  return c;
}

TTest welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw ContractError("welch_t_test: need two values per sample");
  TTest out;
  out.mean_a = mean(a);
  out.mean_b = mean(b);
  const double va = std::pow(stddev(a), 2) / static_cast<double>(a.size());
  const double vb = std::pow(stddev(b), 2) / static_cast<double>(b.size());
  const double se2 = va + vb;
  if (se2 == 0.0) {
    const bool same = out.mean_a == out.mean_b;
    out.t = same ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), out.mean_a - out.mean_b);
    out.dof = static_cast<double>(a.size() + b.size() - 2);
    out.p = same ? 1.0 : 0.0;
    return out;
  }
  out.t = (out.mean_a - out.mean_b) / std::sqrt(se2);
  out.dof = se2 * se2 /
            (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
  out.p = student_t_two_sided_p(out.t, out.dof);
  return out;
}

}  // namespace fairbook
