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

#ifndef CERTSMOOTH_NUMERIC_HPP_
#define CERTSMOOTH_NUMERIC_HPP_

#include <cstdint>

namespace certsmooth {

/// Default clamp applied to any probability before it is fed to the normal
/// quantile: values are confined to [kPClamp, 1 - kPClamp].
inline constexpr double kPClamp = 1e-4;

/// Standard normal density.
double std_normal_pdf(double z);

/// Standard normal CDF, accurate to ~1e-16 absolute.
double std_normal_cdf(double z);

/// Inverse of the standard normal CDF.
///
/// Rational approximation followed by one Halley refinement against
/// std_normal_cdf. The upper half is evaluated through the complement so that
/// tail quantiles keep their relative accuracy.
///
/// Throws std::domain_error unless 0 < p < 1.
double std_normal_quantile(double p);

/// Clamps p into [clamp, 1 - clamp].
double clamp_probability(double p, double clamp = kPClamp);

/// log P(X >= k) for X ~ Bin(n, p). Returns -inf when the tail is empty.
double log_binom_upper_tail(std::uint64_t k, std::uint64_t n, double p);

/// One-sided Clopper-Pearson lower confidence bound on a binomial proportion:
/// the p at which P(X >= k | Bin(n, p)) equals alpha, found by bisection on
/// the exact tail sum. Returns 0 for k = 0.
///
/// Throws std::domain_error for k > n, n = 0 or alpha outside (0, 1).
double binom_lower_confidence(std::uint64_t k, std::uint64_t n, double alpha);

/// Exact two-sided binomial test p-value for H0: success probability = p0.
/// Uses the "sum of outcomes no more likely than the observed one" rule, with
/// a 1e-7 relative slack on the likelihood comparison.
double binom_two_sided_pvalue(std::uint64_t k, std::uint64_t n, double p0);

}  // namespace certsmooth

#endif  // CERTSMOOTH_NUMERIC_HPP_
