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

#include "certsmooth/smoothing.hpp"

#include <algorithm>
#include <stdexcept>

#include "certsmooth/rng.hpp"

namespace certsmooth {

namespace {

void check_dim(const Classifier& c, std::span<const double> x) {
  if (x.size() != c.dim()) {
    throw std::invalid_argument("dimension mismatch: classifier expects " +
                                std::to_string(c.dim()) + ", got " + std::to_string(x.size()));
  }
}

std::size_t argmax_count(std::span<const std::uint64_t> counts) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < counts.size(); ++i) {
    if (counts[i] > counts[best]) best = i;
  }
  return best;
}

// Top-1 and top-2 entries of psi, ties to the lowest index.
std::pair<std::size_t, std::size_t> top_two(std::span<const double> psi) {
  if (psi.size() < 2) throw std::invalid_argument("need at least two classes");
  const std::size_t top = argmax_lowest(psi);
  std::size_t runner = top == 0 ? 1 : 0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    if (i != top && psi[i] > psi[runner]) runner = i;
  }
  return {top, runner};
}

CertificationOutcome certify_impl(const Classifier& c, std::span<const double> x, double scale,
                                  NoiseKind kind, const GaussianCertConfig& cfg) {
  check_dim(c, x);
  auto select_engine = make_engine(cfg.seed, Stream::kPredict);
  auto estimate_engine = make_engine(cfg.seed, Stream::kCertify);

  const auto selection = sample_votes(c, x, scale, kind, cfg.n0, select_engine);
  const std::size_t candidate = argmax_count(selection);
  const auto estimation = sample_votes(c, x, scale, kind, cfg.n_cert, estimate_engine);

  CertificationOutcome out;
  out.norm = kind == NoiseKind::kGaussian ? Norm::kL2 : Norm::kL1;
  out.sigma_used = scale;
  out.samples_used = cfg.n0 + cfg.n_cert;
  out.p_lower = binom_lower_confidence(estimation[candidate], cfg.n_cert, cfg.alpha_fail);
  if (out.p_lower <= 0.5) return out;

  out.prediction = candidate;
  out.radius = kind == NoiseKind::kGaussian
                   ? l2_radius_from_lower_bound(out.p_lower, scale, cfg.p_clamp)
                   : l1_radius_from_lower_bound(out.p_lower, scale, cfg.p_clamp);
  return out;
}

}  // namespace

std::string to_string(Norm norm) { return norm == Norm::kL1 ? "l1" : "l2"; }

Norm norm_from_string(const std::string& text) {
  if (text == "l1") return Norm::kL1;
  if (text == "l2") return Norm::kL2;
  throw std::invalid_argument("unknown norm '" + text + "'");
}

void GaussianCertConfig::validate() const {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (n0 < 1) throw std::invalid_argument("n0 must be >= 1");
  if (n_cert < n0) throw std::invalid_argument("n_cert must be >= n0");
  if (!(alpha_fail > 0.0 && alpha_fail < 1.0)) {
    throw std::invalid_argument("alpha_fail must lie in (0, 1)");
  }
  if (!(p_clamp > 0.0 && p_clamp < 0.5)) throw std::invalid_argument("p_clamp must lie in (0, 0.5)");
}

NoiseBatch NoiseBatch::gaussian(std::size_t n, std::size_t dim, std::mt19937_64& engine) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> data(n * dim);
  for (double& v : data) v = dist(engine);
  return NoiseBatch(NoiseKind::kGaussian, n, dim, std::move(data));
}

NoiseBatch NoiseBatch::uniform(std::size_t n, std::size_t dim, std::mt19937_64& engine) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> data(n * dim);
  for (double& v : data) v = dist(engine);
  return NoiseBatch(NoiseKind::kUniform, n, dim, std::move(data));
}

std::vector<std::uint64_t> sample_votes(const Classifier& c, std::span<const double> x,
                                        double scale, NoiseKind kind, std::size_t n,
                                        std::mt19937_64& engine) {
  check_dim(c, x);
  std::vector<std::uint64_t> counts(c.num_classes(), 0);
  std::vector<double> noisy(x.size());
  std::vector<double> probs(c.num_classes());
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double eps = kind == NoiseKind::kGaussian ? normal(engine) : uniform(engine);
      noisy[j] = x[j] + scale * eps;
    }
    c.probs(noisy, probs);
    ++counts[argmax_lowest(probs)];
  }
  return counts;
}

std::optional<std::size_t> smooth_predict(const Classifier& c, std::span<const double> x,
                                          const GaussianCertConfig& cfg) {
  cfg.validate();
  auto engine = make_engine(cfg.seed, Stream::kPredict);
  const auto counts = sample_votes(c, x, cfg.sigma, NoiseKind::kGaussian, cfg.n0, engine);
  const std::size_t top = argmax_count(counts);
  std::uint64_t runner_count = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (i != top) runner_count = std::max(runner_count, counts[i]);
  }
  const double pvalue = binom_two_sided_pvalue(counts[top], counts[top] + runner_count, 0.5);
  if (pvalue <= cfg.alpha_fail) return top;
  return std::nullopt;
}

double l2_radius_from_lower_bound(double p_lower, double sigma, double p_clamp) {
  if (p_lower <= 0.5) return 0.0;
  return sigma * std_normal_quantile(clamp_probability(p_lower, p_clamp));
}

double l1_radius_from_lower_bound(double p_lower, double lambda, double p_clamp) {
  if (p_lower <= 0.5) return 0.0;
  return lambda * (2.0 * clamp_probability(p_lower, p_clamp) - 1.0);
}

CertificationOutcome certify_l2(const Classifier& c, std::span<const double> x,
                                const GaussianCertConfig& cfg) {
  cfg.validate();
  return certify_impl(c, x, cfg.sigma, NoiseKind::kGaussian, cfg);
}

CertificationOutcome certify_l1(const Classifier& c, std::span<const double> x, double lambda,
                                const GaussianCertConfig& cfg) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  GaussianCertConfig checked = cfg;
  checked.sigma = lambda;
  checked.validate();
  return certify_impl(c, x, lambda, NoiseKind::kUniform, checked);
}

ProxyEvaluation plug_in_radius_l2(std::span<const double> psi, double sigma, double p_clamp) {
  const auto [top, runner] = top_two(psi);
  ProxyEvaluation out;
  out.top_class = top;
  out.runner_up = runner;
  out.e_top = psi[top];
  out.e_runner_up = psi.size() == 2 ? 1.0 - psi[top] : psi[runner];
  out.radius = 0.5 * sigma *
               (std_normal_quantile(clamp_probability(out.e_top, p_clamp)) -
                std_normal_quantile(clamp_probability(out.e_runner_up, p_clamp)));
  return out;
}

ProxyEvaluation plug_in_radius_l1(std::span<const double> psi, double lambda) {
  const auto [top, runner] = top_two(psi);
  ProxyEvaluation out;
  out.top_class = top;
  out.runner_up = runner;
  out.e_top = psi[top];
  out.e_runner_up = psi.size() == 2 ? 1.0 - psi[top] : psi[runner];
  out.radius = lambda * (out.e_top - out.e_runner_up);
  return out;
}

std::vector<double> smoothed_mean(const Classifier& c, std::span<const double> x, double scale,
                                  const NoiseBatch& noise) {
  check_dim(c, x);
  if (noise.dim() != x.size()) throw std::invalid_argument("noise batch dimension mismatch");
  if (noise.size() == 0) throw std::invalid_argument("empty noise batch");
  std::vector<double> psi(c.num_classes(), 0.0);
  std::vector<double> probs(c.num_classes());
  std::vector<double> noisy(x.size());
  for (std::size_t i = 0; i < noise.size(); ++i) {
    const auto eps = noise.sample(i);
    for (std::size_t j = 0; j < x.size(); ++j) noisy[j] = x[j] + scale * eps[j];
    c.probs(noisy, probs);
    for (std::size_t k = 0; k < psi.size(); ++k) psi[k] += probs[k];
  }
  for (double& v : psi) v /= static_cast<double>(noise.size());
  return psi;
}

ProxyEvaluation proxy_radius(const Classifier& c, std::span<const double> x, double scale,
                             const NoiseBatch& noise, double p_clamp) {
  if (!(scale > 0.0)) throw std::invalid_argument("proxy_radius: scale must be positive");
  const auto psi = smoothed_mean(c, x, scale, noise);
  return noise.kind() == NoiseKind::kGaussian ? plug_in_radius_l2(psi, scale, p_clamp)
                                              : plug_in_radius_l1(psi, scale);
}

}  // namespace certsmooth
