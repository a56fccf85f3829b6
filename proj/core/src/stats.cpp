#include "lifted/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace lifted {

namespace {

// Continued fraction for I_x(a, b), evaluated with Lentz's method.
double beta_cf(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-15;
  const double qab = a + b;
  const double qap = a + 1;
  const double qam = a - 1;
  double c = 1;
  double d = 1 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (a <= 0 || b <= 0)
    throw std::invalid_argument("beta parameters must be positive");
  if (x <= 0) return 0;
  if (x >= 1) return 1;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) -
                           std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  if (x < (a + 1) / (a + b + 2))
    return std::exp(log_front) * beta_cf(a, b, x) / a;
  return 1 - std::exp(log_front) * beta_cf(b, a, 1 - x) / b;
}

double f_cdf(double x, int d1, int d2) {
  if (d1 < 1 || d2 < 1)
    throw std::invalid_argument("degrees of freedom must be positive");
  if (x <= 0) return 0;
  const double a = d1, b = d2;
  return regularized_incomplete_beta(a / 2, b / 2, a * x / (a * x + b));
}

double f_critical(double alpha, int d1, int d2) {
  if (!(alpha > 0 && alpha < 1))
    throw std::invalid_argument("alpha must lie in (0, 1)");
  if (d1 < 1 || d2 < 1)
    throw std::invalid_argument("degrees of freedom must be positive");
  const double target = 1 - alpha;
  double lo = 0;
  double hi = 1;
  while (f_cdf(hi, d1, d2) < target) {
    hi *= 2;
    if (hi > 1e12)
      throw std::runtime_error("F quantile bracket failed to converge");
  }
  for (int i = 0; i < 200 && hi - lo > 1e-9; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f_cdf(mid, d1, d2) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace lifted
