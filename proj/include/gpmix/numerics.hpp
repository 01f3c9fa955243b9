#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>

namespace gpmix {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kLog2Pi = 1.8378770664093454836;

/// log(exp(a) + exp(b)) without overflow; -inf is the additive identity.
double log_add(double a, double b);

/// log(sum_i exp(x_i)); returns -inf for an empty span or all -inf.
double log_sum_exp(std::span<const double> xs);

/// log of the rising factorial x (x+d) (x+2d) ... (x+(m-1)d), with m = 0 giving 0.
/// Uses log-gamma when every factor is positive and d >= 0; otherwise an
/// explicit product. Returns -inf when a factor is zero and throws
/// DomainError when the product is negative.
double log_rising(double x, int m, double d);

/// log(n!) for n >= 0.
double log_factorial(std::int64_t n);

/// Ratio y/z with the conventions 0/0 = 0 and y/0 = +inf for y > 0,
/// taking both arguments as logarithms.
double ratio_from_logs(double log_num, double log_den);

/// Regularized lower incomplete gamma P(a, x): the chi-square CDF with 2a
/// degrees of freedom at 2x.
double gamma_p(double a, double x);

}  // namespace gpmix
