/* Copyright 2026 The certsmooth Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "certsmooth/numeric.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace certsmooth {

namespace {

constexpr double kSqrt2Pi = 2.50662827463100050242;
constexpr double kInvSqrt2 = 0.70710678118654752440;

// Rational approximation of the lower-half quantile (Acklam), relative error
// about 1.15e-9 before refinement.
double quantile_lower_half(double p) {
  static constexpr std::array<double, 6> a = {
      -3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b = {
      -5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01};
  static constexpr std::array<double, 6> c = {
      -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d = {
      7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00};
  constexpr double kLowBreak = 0.02425;

  double x;
  if (p < kLowBreak) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }

  // Halley step; x <= 0 here so the CDF is evaluated in its accurate tail.
  const double e = std_normal_cdf(x) - p;
  const double u = e * kSqrt2Pi * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

double log_binom_pmf(std::uint64_t j, std::uint64_t n, double log_p, double log_q) {
  const double nd = static_cast<double>(n);
  const double jd = static_cast<double>(j);
  return std::lgamma(nd + 1.0) - std::lgamma(jd + 1.0) - std::lgamma(nd - jd + 1.0) +
         jd * log_p + (nd - jd) * log_q;
}

void check_probability_open(double p, const char* what) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error(std::string(what) + " must lie strictly inside (0, 1), got " +
                            std::to_string(p));
  }
}

}  // namespace

double std_normal_pdf(double z) { return std::exp(-0.5 * z * z) / kSqrt2Pi; }

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

double std_normal_quantile(double p) {
  check_probability_open(p, "quantile argument");
  if (p == 0.5) return 0.0;
  if (p < 0.5) return quantile_lower_half(p);
  // 1 - p is exact for p >= 0.5.
  return -quantile_lower_half(1.0 - p);
}

double clamp_probability(double p, double clamp) {
  return std::clamp(p, clamp, 1.0 - clamp);
}

double log_binom_upper_tail(std::uint64_t k, std::uint64_t n, double p) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (k == 0) return 0.0;
  if (k > n) return kNegInf;
  if (p <= 0.0) return kNegInf;
  if (p >= 1.0) return 0.0;

  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  const double log_ratio = log_p - log_q;
  const double nd = static_cast<double>(n);

  // Terms are unimodal in j; start at the largest term inside [k, n] and walk
  // outwards until the contributions fall below double resolution.
  const auto mode = static_cast<std::uint64_t>(std::min(nd, std::floor((nd + 1.0) * p)));
  const std::uint64_t start = std::max(k, mode);
  const double log_start = log_binom_pmf(start, n, log_p, log_q);
  constexpr double kCutoff = 45.0;

  double sum = 1.0;
  double log_term = log_start;
  for (std::uint64_t j = start; j < n; ++j) {
    log_term += std::log(static_cast<double>(n - j)) - std::log(static_cast<double>(j + 1)) +
                log_ratio;
    if (log_term < log_start - kCutoff) break;
    sum += std::exp(log_term - log_start);
  }
  log_term = log_start;
  for (std::uint64_t j = start; j > k; --j) {
    // t_{j-1} = t_j * j / (n - j + 1) * q / p
    log_term += std::log(static_cast<double>(j)) -
                std::log(static_cast<double>(n - j + 1)) - log_ratio;
    if (log_term < log_start - kCutoff) break;
    sum += std::exp(log_term - log_start);
  }
  return std::min(0.0, log_start + std::log(sum));
}

double binom_lower_confidence(std::uint64_t k, std::uint64_t n, double alpha) {
  if (n == 0) throw std::domain_error("binom_lower_confidence: n must be >= 1");
  if (k > n) throw std::domain_error("binom_lower_confidence: k exceeds n");
  check_probability_open(alpha, "alpha");
  if (k == 0) return 0.0;

  const double log_alpha = std::log(alpha);
  double lo = 0.0;
  double hi = 1.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (log_binom_upper_tail(k, n, mid) > log_alpha) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return lo;
}

double binom_two_sided_pvalue(std::uint64_t k, std::uint64_t n, double p0) {
  if (n == 0) throw std::domain_error("binom_two_sided_pvalue: n must be >= 1");
  if (k > n) throw std::domain_error("binom_two_sided_pvalue: k exceeds n");
  check_probability_open(p0, "p0");

  const double log_p = std::log(p0);
  const double log_q = std::log1p(-p0);
  const double log_observed = log_binom_pmf(k, n, log_p, log_q);
  const double threshold = log_observed + std::log1p(1e-7);
  double total = 0.0;
  for (std::uint64_t j = 0; j <= n; ++j) {
    const double lp = log_binom_pmf(j, n, log_p, log_q);
    if (lp <= threshold) total += std::exp(lp);
  }
  return std::min(1.0, total);
}

}  // namespace certsmooth
