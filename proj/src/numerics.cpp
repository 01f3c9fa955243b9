#include "gpmix/numerics.hpp"

#include <algorithm>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "gpmix/errors.hpp"

namespace gpmix {

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

double log_sum_exp(std::span<const double> xs) {
  double mx = kNegInf;
  for (double x : xs) mx = std::max(mx, x);
  if (mx == kNegInf) return kNegInf;
  if (mx == kInf) return kInf;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - mx);
  return mx + std::log(acc);
}

double log_rising(double x, int m, double d) {
  if (m < 0) throw DomainError("log_rising: negative length " + std::to_string(m));
  if (m == 0) return 0.0;
  if (x > 0.0 && d > 0.0) {
    return m * std::log(d) + std::lgamma(x / d + m) - std::lgamma(x / d);
  }
  if (d == 0.0 && x > 0.0) return m * std::log(x);
  double acc = 0.0;
  bool negative = false;
  for (int i = 0; i < m; ++i) {
    const double f = x + i * d;
    if (f == 0.0) return kNegInf;
    if (f < 0.0) negative = !negative;
    acc += std::log(std::fabs(f));
  }
  if (negative) {
    throw DomainError("log_rising: product of factors is negative (x=" + std::to_string(x) +
                      ", d=" + std::to_string(d) + ")");
  }
  return acc;
}

double log_factorial(std::int64_t n) {
  if (n < 0) throw DomainError("log_factorial: negative argument");
  return std::lgamma(static_cast<double>(n) + 1.0);
}

double ratio_from_logs(double log_num, double log_den) {
  if (log_num == kNegInf) return 0.0;
  if (log_den == kNegInf) return kInf;
  return std::exp(log_num - log_den);
}

double gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return boost::math::gamma_p(a, x);
}

}  // namespace gpmix
