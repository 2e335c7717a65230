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

#ifndef CERTSMOOTH_SIGMA_OPT_HPP_
#define CERTSMOOTH_SIGMA_OPT_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "certsmooth/classifiers.hpp"
#include "certsmooth/smoothing.hpp"

namespace certsmooth {

enum class GradMode {
  kAnalytic,  // pathwise gradient through the classifier's input derivative
  kScalarFd,  // central difference of the proxy radius with shared noise
  kAuto,      // analytic when the classifier provides derivatives
};

enum class ReturnMode { kFaithful, kBestIterate };

std::string to_string(GradMode mode);
GradMode grad_mode_from_string(const std::string& text);
std::string to_string(ReturnMode mode);
ReturnMode return_mode_from_string(const std::string& text);

/// Settings of the per-input scale ascent. The same structure drives the l1
/// variant (uniform noise, scale = lambda) when `noise` is kUniform.
struct SigmaOptConfig {
  double sigma0 = 0.25;
  double step_alpha = 1e-4;
  std::size_t iters_k = 100;
  std::size_t n_samples = 1;
  double sigma_min = 1e-3;
  double sigma_max = 2.0;
  GradMode grad_mode = GradMode::kAuto;
  ReturnMode return_mode = ReturnMode::kFaithful;
  NoiseKind noise = NoiseKind::kGaussian;
  double fd_rel_step = 1e-3;
  double p_clamp = kPClamp;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TraceEntry {
  std::size_t iteration = 0;
  double sigma = 0.0;
  double proxy_radius = 0.0;
  std::size_t top_class = 0;
};

/// sigma^0 ... sigma^K with the proxy radius evaluated at each iterate.
struct SigmaTrace {
  std::vector<TraceEntry> entries;

  /// Number of iterations whose top class differs from the previous one.
  std::size_t class_flips() const;
  /// Index of the first entry with the largest proxy radius.
  std::size_t best_index() const;
};

struct SigmaOptResult {
  double sigma_star = 0.0;
  SigmaTrace trace;
};

/// Draws the noise batch for one optimisation from cfg.seed.
NoiseBatch draw_optimization_noise(const SigmaOptConfig& cfg, std::size_t dim);

/// dR/dsigma at `sigma` for the fixed batch `noise`.
double grad_sigma(const Classifier& c, std::span<const double> x, double sigma,
                  const NoiseBatch& noise, GradMode mode, double fd_rel_step = 1e-3,
                  double p_clamp = kPClamp);

/// K projected ascent steps sigma <- clip(sigma + alpha dR/dsigma) on one
/// noise batch drawn up front. The top class is recomputed at every iterate.
SigmaOptResult optimize_sigma(const Classifier& c, std::span<const double> x,
                              const SigmaOptConfig& cfg);

struct GridSearchConfig {
  std::size_t n_samples = 1;
  std::size_t budget = 200;
  double grid_max = 1.0;
  double sigma_min = 1e-3;
  double p_clamp = kPClamp;
  std::uint64_t seed = 0;
};

struct GridSearchResult {
  double sigma_hat = 0.0;
  double proxy_radius = 0.0;
  std::vector<double> grid;
};

/// Evaluates the proxy radius on budget / n_samples equally spaced scales
/// delta, 2 delta, ..., grid_max (each floored at sigma_min) with one shared
/// batch of n_samples draws and returns the first maximiser.
GridSearchResult grid_search_sigma(const Classifier& c, std::span<const double> x,
                                   const GridSearchConfig& cfg);

}  // namespace certsmooth

#endif  // CERTSMOOTH_SIGMA_OPT_HPP_
