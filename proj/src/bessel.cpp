#include <cmath>
#include <limits>
#include <numbers>

#include "s2vntm/errors.hpp"
#include "s2vntm/vmf.hpp"

namespace s2vntm {

namespace {

double log_bessel_series(double nu, double x) {
  // I_nu(x) = (x/2)^nu / Gamma(nu+1) * sum_k (x^2/4)^k / (k! (nu+1)_k)
  const double q = 0.25 * x * x;
  constexpr double kRescale = 1e250;
  const double log_rescale = std::log(kRescale);
  double term = 1.0;
  double sum = 1.0;
  double log_offset = 0.0;
  for (int k = 0; k < 100000; ++k) {
    term *= q / ((k + 1.0) * (k + 1.0 + nu));
    sum += term;
    if (sum > kRescale) {
      sum /= kRescale;
      term /= kRescale;
      log_offset += log_rescale;
    }
    const bool past_peak = (k + 1.0) * (k + 1.0 + nu) > q;
    if (past_peak && term < sum * 1e-17) break;
  }
  return nu * std::log(0.5 * x) - std::lgamma(nu + 1.0) + std::log(sum) + log_offset;
}

double log_bessel_hankel(double nu, double x) {
  // I_nu(x) ~ e^x / sqrt(2 pi x) * sum_k (-1)^k a_k(nu) / x^k
  const double mu = 4.0 * nu * nu;
  double term = 1.0;
  double sum = 1.0;
  double previous = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 500; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = -term * (mu - odd * odd) / (8.0 * k * x);
    if (next == 0.0) break;  // half-integer orders terminate
    if (std::abs(next) >= previous) break;  // asymptotic: stop at the smallest term
    previous = std::abs(next);
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return x - 0.5 * std::log(2.0 * std::numbers::pi * x) + std::log(sum);
}

}  // namespace

double log_bessel_iv(double order, double x) {
  if (std::isnan(order) || std::isnan(x) || order < 0.0 || x < 0.0)
    throw DomainError("log_bessel_iv needs order >= 0 and x >= 0");
  if (x == 0.0) return order == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  if (std::isinf(x)) return x;
  if (x >= std::max(50.0, 2.0 * order * order)) return log_bessel_hankel(order, x);
  return log_bessel_series(order, x);
}

double bessel_ratio(double order, double x) {
  if (x == 0.0) return 0.0;
  return std::exp(log_bessel_iv(order + 1.0, x) - log_bessel_iv(order, x));
}

}  // namespace s2vntm
