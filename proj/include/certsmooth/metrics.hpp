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

#ifndef CERTSMOOTH_METRICS_HPP_
#define CERTSMOOTH_METRICS_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "json.hpp"

#include "certsmooth/smoothing.hpp"

namespace certsmooth {

/// Fraction of inputs predicted correctly with certified radius >= r, for
/// each r in `radii`. Abstentions count as failures at every radius.
std::vector<double> certified_accuracy_curve(std::span<const CertificationOutcome> results,
                                             std::span<const std::size_t> labels,
                                             std::span<const double> radii);

struct AcrValue {
  double value = 0.0;
  bool empty = false;  // no inputs; value reported as 0
};

/// Mean over all inputs of radius * 1{prediction == label}.
AcrValue average_certified_radius(std::span<const CertificationOutcome> results,
                                  std::span<const std::size_t> labels);

/// Radii grid used when none is supplied: 0, 0.25, ..., 3.0.
std::vector<double> default_radii_grid();

/// Throws std::invalid_argument unless the grid starts at 0 and increases.
void validate_radii_grid(std::span<const double> radii);

struct MetricsSummary {
  std::vector<double> radii;
  std::vector<double> certified_accuracy;
  double acr = 0.0;
  bool acr_empty = false;
  double abstain_rate = 0.0;
  std::size_t overlap_events = 0;
  std::size_t adjusted_by_memory = 0;
  std::size_t num_inputs = 0;

  nlohmann::json to_json() const;
};

/// Curve, ACR and abstain rate of one campaign. Memory counters are left for
/// the caller to fill in.
MetricsSummary summarize(std::span<const CertificationOutcome> results,
                         std::span<const std::size_t> labels, std::span<const double> radii);

}  // namespace certsmooth

#endif  // CERTSMOOTH_METRICS_HPP_
