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

#include "certsmooth/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "certsmooth/rng.hpp"

namespace certsmooth {

std::string to_string(CampaignMode mode) {
  switch (mode) {
    case CampaignMode::kFixedSigma:
      return "fixed";
    case CampaignMode::kDs:
      return "ds";
    case CampaignMode::kDsL1:
      return "ds-l1";
  }
  return "ds";
}

CampaignMode campaign_mode_from_string(const std::string& text) {
  if (text == "fixed") return CampaignMode::kFixedSigma;
  if (text == "ds") return CampaignMode::kDs;
  if (text == "ds-l1") return CampaignMode::kDsL1;
  throw std::invalid_argument("unknown campaign mode '" + text + "'");
}

void CampaignConfig::validate() const {
  GaussianCertConfig cert_check = cert;
  cert_check.sigma = opt.sigma0;
  cert_check.validate();
  opt.validate();
  validate_radii_grid(radii);
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
}

nlohmann::json CampaignConfig::to_json() const {
  return {{"mode", to_string(mode)},
          {"seed", seed},
          {"n0", cert.n0},
          {"n_cert", cert.n_cert},
          {"alpha_fail", cert.alpha_fail},
          {"p_clamp", cert.p_clamp},
          {"sigma0", opt.sigma0},
          {"step_alpha", opt.step_alpha},
          {"iters", opt.iters_k},
          {"n_samples", opt.n_samples},
          {"sigma_min", opt.sigma_min},
          {"sigma_max", opt.sigma_max},
          {"grad_mode", to_string(opt.grad_mode)},
          {"return_mode", to_string(opt.return_mode)},
          {"radii", radii}};
}

std::vector<CertificationOutcome> CampaignResult::outcomes() const {
  std::vector<CertificationOutcome> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row.outcome);
  return out;
}

std::vector<std::size_t> CampaignResult::labels() const {
  std::vector<std::size_t> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row.label);
  return out;
}

void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < n && !failed; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
            failed = true;
          }
        }
      });
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

CampaignResult run_campaign(const Classifier& classifier, const LabeledDataset& data,
                            const CampaignConfig& cfg, MemoryStore memory) {
  cfg.validate();
  if (!data.empty() && data.dim() != classifier.dim()) {
    throw std::invalid_argument("dataset dimension " + std::to_string(data.dim()) +
                                " does not match classifier dimension " +
                                std::to_string(classifier.dim()));
  }
  for (std::size_t label : data.labels) {
    if (label >= classifier.num_classes()) {
      throw std::invalid_argument("dataset label " + std::to_string(label) +
                                  " exceeds the classifier's class count");
    }
  }

  CampaignResult result;
  result.rows.resize(data.size());

  parallel_for(data.size(), cfg.threads, [&](std::size_t i) {
    const std::uint64_t input_seed = mix_seed(cfg.seed, i);
    const Point& x = data.points[i];
    CampaignRow& row = result.rows[i];
    row.idx = i;
    row.label = data.labels[i];

    GaussianCertConfig cert = cfg.cert;
    cert.seed = input_seed;
    double scale = cfg.opt.sigma0;
    if (cfg.mode != CampaignMode::kFixedSigma) {
      SigmaOptConfig opt = cfg.opt;
      opt.seed = input_seed;
      opt.noise = cfg.mode == CampaignMode::kDsL1 ? NoiseKind::kUniform : NoiseKind::kGaussian;
      const auto optimized = optimize_sigma(classifier, x, opt);
      scale = optimized.sigma_star;
      row.class_flips = optimized.trace.class_flips();
    }
    row.sigma_star = scale;
    if (cfg.mode == CampaignMode::kDsL1) {
      row.outcome = certify_l1(classifier, x, scale, cert);
    } else {
      cert.sigma = scale;
      row.outcome = certify_l2(classifier, x, cert);
    }
  });

  if (cfg.mode != CampaignMode::kFixedSigma) {
    for (auto& row : result.rows) {
      if (row.outcome.abstained()) continue;
      CertifiedRegion region{data.points[row.idx], row.outcome.radius, row.outcome.norm,
                             *row.outcome.prediction, row.sigma_star};
      const auto inserted = memory.insert(std::move(region));
      row.adjusted_by_memory = inserted.adjusted;
      row.outcome.prediction = inserted.final_prediction;
      row.outcome.radius = inserted.final_region.radius;
    }
  }

  const auto outcomes = result.outcomes();
  const auto labels = result.labels();
  result.metrics = summarize(outcomes, labels, cfg.radii);
  result.audit = audit(memory, static_cast<double>(cfg.cert.n0 + cfg.cert.n_cert));
  result.metrics.overlap_events = result.audit.overlap_events;
  result.metrics.adjusted_by_memory = result.audit.adjusted_insertions;
  result.memory = std::move(memory);
  return result;
}

}  // namespace certsmooth
