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

#include "certsmooth/sigma_opt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "certsmooth/numeric.hpp"
#include "certsmooth/rng.hpp"

namespace certsmooth {

namespace {

struct MeanAndSlope {
  std::vector<double> psi;
  std::vector<double> dpsi;  // d psi / d sigma along the reparameterised path
};

MeanAndSlope mean_and_slope(const Classifier& c, std::span<const double> x, double sigma,
                            const NoiseBatch& noise) {
  const std::size_t k = c.num_classes();
  MeanAndSlope out{std::vector<double>(k, 0.0), std::vector<double>(k, 0.0)};
  std::vector<double> noisy(x.size());
  std::vector<double> probs(k);
  std::vector<double> slopes(k);
  for (std::size_t i = 0; i < noise.size(); ++i) {
    const auto eps = noise.sample(i);
    for (std::size_t j = 0; j < x.size(); ++j) noisy[j] = x[j] + sigma * eps[j];
    c.probs(noisy, probs);
    c.directional_derivatives(noisy, eps, slopes);
    for (std::size_t m = 0; m < k; ++m) {
      out.psi[m] += probs[m];
      out.dpsi[m] += slopes[m];
    }
  }
  const auto n = static_cast<double>(noise.size());
  for (std::size_t m = 0; m < k; ++m) {
    out.psi[m] /= n;
    out.dpsi[m] /= n;
  }
  return out;
}

// d/dE Phi^-1(clamp(E)); zero on the clamped plateau.
double quantile_slope(double e, double p_clamp) {
  if (e <= p_clamp || e >= 1.0 - p_clamp) return 0.0;
  return 1.0 / std_normal_pdf(std_normal_quantile(e));
}

double analytic_gradient(const Classifier& c, std::span<const double> x, double sigma,
                         const NoiseBatch& noise, double p_clamp) {
  if (!c.has_gradient()) {
    throw UnsupportedDerivative("analytic sigma gradient requested for value-only classifier '" +
                                c.kind() + "'");
  }
  const auto ms = mean_and_slope(c, x, sigma, noise);
  const std::size_t k = ms.psi.size();

  ProxyEvaluation eval = noise.kind() == NoiseKind::kGaussian
                             ? plug_in_radius_l2(ms.psi, sigma, p_clamp)
                             : plug_in_radius_l1(ms.psi, sigma);
  const double slope_top = ms.dpsi[eval.top_class];
  const double slope_runner = k == 2 ? -slope_top : ms.dpsi[eval.runner_up];

  if (noise.kind() == NoiseKind::kUniform) {
    return (eval.e_top - eval.e_runner_up) + sigma * (slope_top - slope_runner);
  }
  const double gap = eval.radius / (0.5 * sigma);
  return 0.5 * gap + 0.5 * sigma *
                         (slope_top * quantile_slope(eval.e_top, p_clamp) -
                          slope_runner * quantile_slope(eval.e_runner_up, p_clamp));
}

}  // namespace

std::string to_string(GradMode mode) {
  switch (mode) {
    case GradMode::kAnalytic:
      return "analytic";
    case GradMode::kScalarFd:
      return "fd";
    case GradMode::kAuto:
      return "auto";
  }
  return "auto";
}

GradMode grad_mode_from_string(const std::string& text) {
  if (text == "analytic") return GradMode::kAnalytic;
  if (text == "fd") return GradMode::kScalarFd;
  if (text == "auto") return GradMode::kAuto;
  throw std::invalid_argument("unknown gradient mode '" + text + "'");
}

std::string to_string(ReturnMode mode) {
  return mode == ReturnMode::kFaithful ? "faithful" : "best";
}

ReturnMode return_mode_from_string(const std::string& text) {
  if (text == "faithful") return ReturnMode::kFaithful;
  if (text == "best") return ReturnMode::kBestIterate;
  throw std::invalid_argument("unknown return mode '" + text + "'");
}

void SigmaOptConfig::validate() const {
  if (!(sigma_min > 0.0 && sigma_min <= sigma0 && sigma0 <= sigma_max)) {
    throw std::invalid_argument("sigma bounds must satisfy 0 < sigma_min <= sigma0 <= sigma_max");
  }
  if (!(step_alpha > 0.0)) throw std::invalid_argument("step_alpha must be positive");
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  if (!(fd_rel_step > 0.0 && fd_rel_step < 0.5)) {
    throw std::invalid_argument("fd_rel_step must lie in (0, 0.5)");
  }
}

std::size_t SigmaTrace::class_flips() const {
  std::size_t flips = 0;
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].top_class != entries[i - 1].top_class) ++flips;
  }
  return flips;
}

std::size_t SigmaTrace::best_index() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].proxy_radius > entries[best].proxy_radius) best = i;
  }
  return best;
}

NoiseBatch draw_optimization_noise(const SigmaOptConfig& cfg, std::size_t dim) {
  auto engine = make_engine(cfg.seed, Stream::kOptimize);
  return cfg.noise == NoiseKind::kGaussian ? NoiseBatch::gaussian(cfg.n_samples, dim, engine)
                                           : NoiseBatch::uniform(cfg.n_samples, dim, engine);
}

double grad_sigma(const Classifier& c, std::span<const double> x, double sigma,
                  const NoiseBatch& noise, GradMode mode, double fd_rel_step, double p_clamp) {
  if (!(sigma > 0.0)) throw std::invalid_argument("grad_sigma: sigma must be positive");
  if (mode == GradMode::kAuto) {
    mode = c.has_gradient() ? GradMode::kAnalytic : GradMode::kScalarFd;
  }
  if (mode == GradMode::kAnalytic) return analytic_gradient(c, x, sigma, noise, p_clamp);

  const double h = fd_rel_step * sigma;
  const double up = proxy_radius(c, x, sigma + h, noise, p_clamp).radius;
  const double down = proxy_radius(c, x, sigma - h, noise, p_clamp).radius;
  return (up - down) / (2.0 * h);
}

SigmaOptResult optimize_sigma(const Classifier& c, std::span<const double> x,
                              const SigmaOptConfig& cfg) {
  cfg.validate();
  if (x.size() != c.dim()) throw std::invalid_argument("optimize_sigma: dimension mismatch");
  const NoiseBatch noise = draw_optimization_noise(cfg, x.size());

  SigmaOptResult result;
  result.trace.entries.reserve(cfg.iters_k + 1);
  double sigma = cfg.sigma0;
  for (std::size_t k = 0;; ++k) {
    const auto eval = proxy_radius(c, x, sigma, noise, cfg.p_clamp);
    result.trace.entries.push_back({k, sigma, eval.radius, eval.top_class});
    if (k == cfg.iters_k) break;
    const double g = grad_sigma(c, x, sigma, noise, cfg.grad_mode, cfg.fd_rel_step, cfg.p_clamp);
    sigma = std::clamp(sigma + cfg.step_alpha * g, cfg.sigma_min, cfg.sigma_max);
  }

  result.sigma_star = cfg.return_mode == ReturnMode::kFaithful
                          ? result.trace.entries.back().sigma
                          : result.trace.entries[result.trace.best_index()].sigma;
  return result;
}

GridSearchResult grid_search_sigma(const Classifier& c, std::span<const double> x,
                                   const GridSearchConfig& cfg) {
  if (cfg.n_samples < 1) throw std::invalid_argument("grid search: n_samples must be >= 1");
  if (cfg.budget % cfg.n_samples != 0) {
    throw std::invalid_argument("grid search: budget must be divisible by n_samples");
  }
  const std::size_t points = cfg.budget / cfg.n_samples;
  if (points == 0) throw std::invalid_argument("grid search: empty grid");
  if (!(cfg.grid_max > 0.0 && cfg.sigma_min > 0.0)) {
    throw std::invalid_argument("grid search: grid_max and sigma_min must be positive");
  }

  auto engine = make_engine(cfg.seed, Stream::kOptimize);
  const NoiseBatch noise = NoiseBatch::gaussian(cfg.n_samples, x.size(), engine);
  const double delta = cfg.grid_max / static_cast<double>(points);

  GridSearchResult result;
  result.grid.reserve(points);
  bool first = true;
  for (std::size_t i = 1; i <= points; ++i) {
    const double sigma = std::max(delta * static_cast<double>(i), cfg.sigma_min);
    result.grid.push_back(sigma);
    const double radius = proxy_radius(c, x, sigma, noise, cfg.p_clamp).radius;
    if (first || radius > result.proxy_radius) {
      result.sigma_hat = sigma;
      result.proxy_radius = radius;
      first = false;
    }
  }
  return result;
}

}  // namespace certsmooth
