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

#include "certsmooth/metrics.hpp"

#include <stdexcept>

namespace certsmooth {

namespace {

void check_aligned(std::span<const CertificationOutcome> results,
                   std::span<const std::size_t> labels) {
  if (results.size() != labels.size()) {
    throw std::invalid_argument("results and labels are not aligned (" +
                                std::to_string(results.size()) + " vs " +
                                std::to_string(labels.size()) + ")");
  }
}

bool correct(const CertificationOutcome& out, std::size_t label) {
  return out.prediction.has_value() && *out.prediction == label;
}

}  // namespace

std::vector<double> certified_accuracy_curve(std::span<const CertificationOutcome> results,
                                             std::span<const std::size_t> labels,
                                             std::span<const double> radii) {
  check_aligned(results, labels);
  std::vector<double> curve(radii.size(), 0.0);
  if (results.empty()) return curve;
  for (std::size_t r = 0; r < radii.size(); ++r) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
      if (correct(results[i], labels[i]) && results[i].radius >= radii[r]) ++hits;
    }
    curve[r] = static_cast<double>(hits) / static_cast<double>(results.size());
  }
  return curve;
}

AcrValue average_certified_radius(std::span<const CertificationOutcome> results,
                                  std::span<const std::size_t> labels) {
  check_aligned(results, labels);
  if (results.empty()) return {0.0, true};
  double total = 0.0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (correct(results[i], labels[i])) total += results[i].radius;
  }
  return {total / static_cast<double>(results.size()), false};
}

std::vector<double> default_radii_grid() {
  std::vector<double> radii;
  for (int i = 0; i <= 12; ++i) radii.push_back(0.25 * i);
  return radii;
}

void validate_radii_grid(std::span<const double> radii) {
  if (radii.empty() || radii.front() != 0.0) {
    throw std::invalid_argument("radii grid must start at 0");
  }
  for (std::size_t i = 1; i < radii.size(); ++i) {
    if (!(radii[i] > radii[i - 1])) throw std::invalid_argument("radii grid must increase strictly");
  }
}

nlohmann::json MetricsSummary::to_json() const {
  nlohmann::json curve = nlohmann::json::array();
  for (std::size_t i = 0; i < radii.size(); ++i) {
    curve.push_back({{"radius", radii[i]}, {"accuracy", certified_accuracy[i]}});
  }
  return {{"num_inputs", num_inputs},
          {"certified_accuracy", curve},
          {"acr", acr},
          {"acr_empty_warning", acr_empty},
          {"abstain_rate", abstain_rate},
          {"overlap_events", overlap_events},
          {"adjusted_by_memory", adjusted_by_memory}};
}

MetricsSummary summarize(std::span<const CertificationOutcome> results,
                         std::span<const std::size_t> labels, std::span<const double> radii) {
  validate_radii_grid(radii);
  MetricsSummary summary;
  summary.radii.assign(radii.begin(), radii.end());
  summary.certified_accuracy = certified_accuracy_curve(results, labels, radii);
  const auto acr = average_certified_radius(results, labels);
  summary.acr = acr.value;
  summary.acr_empty = acr.empty;
  summary.num_inputs = results.size();
  std::size_t abstained = 0;
  for (const auto& out : results) abstained += out.abstained() ? 1 : 0;
  if (!results.empty()) {
    summary.abstain_rate = static_cast<double>(abstained) / static_cast<double>(results.size());
  }
  return summary;
}

}  // namespace certsmooth
