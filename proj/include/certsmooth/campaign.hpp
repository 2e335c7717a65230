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

#ifndef CERTSMOOTH_CAMPAIGN_HPP_
#define CERTSMOOTH_CAMPAIGN_HPP_

#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "certsmooth/classifiers.hpp"
#include "certsmooth/dataset.hpp"
#include "certsmooth/memory.hpp"
#include "certsmooth/metrics.hpp"
#include "certsmooth/sigma_opt.hpp"
#include "certsmooth/smoothing.hpp"

namespace certsmooth {

enum class CampaignMode {
  kFixedSigma,  // Gaussian certificate at opt.sigma0 for every input
  kDs,          // per-input sigma, l2 certificate, memory insertion
  kDsL1,        // per-input lambda, l1 certificate, memory insertion
};

std::string to_string(CampaignMode mode);
CampaignMode campaign_mode_from_string(const std::string& text);

struct CampaignConfig {
  CampaignMode mode = CampaignMode::kDs;
  /// cert.sigma and cert.seed are overwritten per input.
  GaussianCertConfig cert;
  /// opt.sigma0 is the fixed scale in kFixedSigma mode and the starting
  /// scale otherwise; opt.seed and opt.noise are overwritten per input.
  SigmaOptConfig opt;
  std::vector<double> radii = default_radii_grid();
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  IndexKind index = IndexKind::kLinearScan;

  void validate() const;
  nlohmann::json to_json() const;
};

struct CampaignRow {
  std::size_t idx = 0;
  std::size_t label = 0;
  CertificationOutcome outcome;
  double sigma_star = 0.0;
  std::size_t class_flips = 0;
  bool adjusted_by_memory = false;
};

struct CampaignResult {
  std::vector<CampaignRow> rows;
  MemoryStore memory;
  MetricsSummary metrics;
  AuditReport audit;

  std::vector<CertificationOutcome> outcomes() const;
  std::vector<std::size_t> labels() const;
};

/// Runs fn(i) for i in [0, n) on up to `threads` workers. The first
/// exception thrown by any call is rethrown after all workers stop.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

/// Certifies every dataset row. Per-input work (scale optimisation and the
/// Monte Carlo certificate) runs in parallel with per-input seeds; memory
/// insertion then runs sequentially in dataset order. `memory` seeds the
/// store for the data-dependent modes.
CampaignResult run_campaign(const Classifier& classifier, const LabeledDataset& data,
                            const CampaignConfig& cfg, MemoryStore memory = MemoryStore());

}  // namespace certsmooth

#endif  // CERTSMOOTH_CAMPAIGN_HPP_
