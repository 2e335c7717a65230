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

#ifndef CERTSMOOTH_SMOOTHING_HPP_
#define CERTSMOOTH_SMOOTHING_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "certsmooth/classifiers.hpp"
#include "certsmooth/numeric.hpp"

namespace certsmooth {

enum class Norm { kL1, kL2 };

std::string to_string(Norm norm);
Norm norm_from_string(const std::string& text);

/// Monte Carlo certification parameters. For the l1 path `sigma` is unused
/// and the uniform half-width is passed separately.
struct GaussianCertConfig {
  double sigma = 0.25;
  std::size_t n0 = 100;
  std::size_t n_cert = 100000;
  double alpha_fail = 0.001;
  std::uint64_t seed = 0;
  double p_clamp = kPClamp;

  /// Throws std::invalid_argument on a broken configuration.
  void validate() const;
};

/// Per-input certification result. An empty prediction means ABSTAIN, in
/// which case the radius is 0.
struct CertificationOutcome {
  std::optional<std::size_t> prediction;
  double radius = 0.0;
  double p_lower = 0.0;
  double sigma_used = 0.0;
  Norm norm = Norm::kL2;
  std::size_t samples_used = 0;

  bool abstained() const { return !prediction.has_value(); }
};

enum class NoiseKind { kGaussian, kUniform };

/// n standard draws in R^d: N(0, I) or U[-1, 1]^d. The scale (sigma or
/// lambda) is applied at evaluation time so one batch can be reused across
/// scales.
class NoiseBatch {
 public:
  static NoiseBatch gaussian(std::size_t n, std::size_t dim, std::mt19937_64& engine);
  static NoiseBatch uniform(std::size_t n, std::size_t dim, std::mt19937_64& engine);

  NoiseKind kind() const { return kind_; }
  std::size_t size() const { return n_; }
  std::size_t dim() const { return dim_; }
  std::span<const double> sample(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * dim_, dim_);
  }

 private:
  NoiseBatch(NoiseKind kind, std::size_t n, std::size_t dim, std::vector<double> data)
      : kind_(kind), n_(n), dim_(dim), data_(std::move(data)) {}

  NoiseKind kind_;
  std::size_t n_;
  std::size_t dim_;
  std::vector<double> data_;
};

/// Hard-vote histogram of argmax f(x + scale * eps) over n fresh draws.
std::vector<std::uint64_t> sample_votes(const Classifier& c, std::span<const double> x,
                                        double scale, NoiseKind kind, std::size_t n,
                                        std::mt19937_64& engine);

/// Monte Carlo prediction with the binomial abstention test on n0 draws.
std::optional<std::size_t> smooth_predict(const Classifier& c, std::span<const double> x,
                                          const GaussianCertConfig& cfg);

/// sigma * Phi^-1(p_lower) when p_lower > 1/2, else 0.
double l2_radius_from_lower_bound(double p_lower, double sigma, double p_clamp = kPClamp);

/// lambda * (2 p_lower - 1) when p_lower > 1/2, else 0.
double l1_radius_from_lower_bound(double p_lower, double lambda, double p_clamp = kPClamp);

/// Sound l2 certificate under Gaussian noise at cfg.sigma.
CertificationOutcome certify_l2(const Classifier& c, std::span<const double> x,
                                const GaussianCertConfig& cfg);

/// Sound l1 certificate under uniform noise on [-lambda, lambda]^d.
CertificationOutcome certify_l1(const Classifier& c, std::span<const double> x, double lambda,
                                const GaussianCertConfig& cfg);

/// Plug-in objective value at one scale.
struct ProxyEvaluation {
  double radius = 0.0;
  std::size_t top_class = 0;
  std::size_t runner_up = 0;
  double e_top = 0.0;
  double e_runner_up = 0.0;
};

/// sigma/2 (Phi^-1(E_A) - Phi^-1(E_B)) from a mean soft output psi, with both
/// probabilities clamped before the quantile.
ProxyEvaluation plug_in_radius_l2(std::span<const double> psi, double sigma,
                                  double p_clamp = kPClamp);

/// lambda (E_A - E_B).
ProxyEvaluation plug_in_radius_l1(std::span<const double> psi, double lambda);

/// psi(scale) = 1/n sum_i f(x + scale * eps_i).
std::vector<double> smoothed_mean(const Classifier& c, std::span<const double> x, double scale,
                                  const NoiseBatch& noise);

/// Non-sound radius estimate used inside the scale optimizer. Gaussian
/// batches give the l2 objective, uniform batches the l1 objective.
ProxyEvaluation proxy_radius(const Classifier& c, std::span<const double> x, double scale,
                             const NoiseBatch& noise, double p_clamp = kPClamp);

}  // namespace certsmooth

#endif  // CERTSMOOTH_SMOOTHING_HPP_
