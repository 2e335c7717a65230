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

#include "certsmooth/memory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace certsmooth {

namespace {

// Largest r <= candidate with obstacle_r + r <= d in floating point.
double fit_outside(double d, double obstacle_r, double candidate) {
  if (!(obstacle_r < d)) return 0.0;
  double r = std::max(0.0, candidate);
  while (r > 0.0 && obstacle_r + r > d) r = std::nextafter(r, 0.0);
  return r;
}

// Largest r <= candidate with d + r <= outer_r in floating point.
double fit_inside(double d, double outer_r, double candidate) {
  if (!(d < outer_r)) return 0.0;
  double r = std::max(0.0, candidate);
  while (r > 0.0 && d + r > outer_r) r = std::nextafter(r, 0.0);
  return r;
}

double shrink_tolerance(double radius) { return 1e-9 * (1.0 + radius); }

void check_region(const CertifiedRegion& region) {
  if (region.center.empty()) throw std::invalid_argument("region has an empty center");
  for (double v : region.center) {
    if (!std::isfinite(v)) throw std::invalid_argument("region center is not finite");
  }
  if (!(region.radius >= 0.0) || !std::isfinite(region.radius)) {
    throw std::invalid_argument("region radius must be finite and >= 0");
  }
}

}  // namespace

double center_distance(const CertifiedRegion& a, const CertifiedRegion& b) {
  if (a.norm != b.norm) throw std::invalid_argument("regions use different norms");
  if (a.center.size() != b.center.size()) {
    throw std::invalid_argument("regions have different dimensions");
  }
  double acc = 0.0;
  if (a.norm == Norm::kL2) {
    for (std::size_t i = 0; i < a.center.size(); ++i) {
      const double diff = a.center[i] - b.center[i];
      acc += diff * diff;
    }
    return std::sqrt(acc);
  }
  for (std::size_t i = 0; i < a.center.size(); ++i) acc += std::abs(a.center[i] - b.center[i]);
  return acc;
}

bool intersect(const CertifiedRegion& a, const CertifiedRegion& b) {
  return center_distance(a, b) < a.radius + b.radius;
}

double largest_in_subset(const CertifiedRegion& outer, const CertifiedRegion& cand) {
  const double d = center_distance(outer, cand);
  if (d > outer.radius) {
    throw std::invalid_argument("largest_in_subset: candidate center lies outside the outer region");
  }
  return fit_inside(d, outer.radius, std::min(cand.radius, outer.radius - d));
}

double largest_out_subset(const CertifiedRegion& obstacle, const CertifiedRegion& cand) {
  const double d = center_distance(obstacle, cand);
  if (d <= obstacle.radius) {
    throw std::invalid_argument("largest_out_subset: candidate center lies inside the obstacle");
  }
  return fit_outside(d, obstacle.radius, std::min(cand.radius, d - obstacle.radius));
}

MemoryStore MemoryStore::from_regions(std::vector<CertifiedRegion> regions, IndexKind index) {
  MemoryStore store(index);
  for (auto& region : regions) {
    check_region(region);
    if (!store.regions_.empty()) {
      const auto& first = store.regions_.front();
      if (first.norm != region.norm || first.center.size() != region.center.size()) {
        throw std::invalid_argument("memory entries must share norm and dimension");
      }
    }
    store.sweep_.emplace(region.center.front(), store.regions_.size());
    store.max_radius_ = std::max(store.max_radius_, region.radius);
    store.regions_.push_back(std::move(region));
  }
  store.validate();
  return store;
}

std::vector<std::size_t> MemoryStore::candidates(const CertifiedRegion& region) const {
  std::vector<std::size_t> out;
  if (index_kind_ == IndexKind::kLinearScan) {
    out.resize(regions_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
    return out;
  }
  // |dx_0| <= |dx| in both l1 and l2, so anything that can touch the new
  // region lies in this slab.
  const double x0 = region.center.front();
  const double reach = region.radius + max_radius_;
  const double slack = 1e-9 * (1.0 + std::abs(x0) + reach);
  const auto lo = sweep_.lower_bound(x0 - reach - slack);
  const auto hi = sweep_.upper_bound(x0 + reach + slack);
  for (auto it = lo; it != hi; ++it) out.push_back(it->second);
  std::sort(out.begin(), out.end());
  return out;
}

InsertResult MemoryStore::insert(CertifiedRegion region) {
  check_region(region);
  if (!regions_.empty()) {
    const auto& first = regions_.front();
    if (first.norm != region.norm) throw std::invalid_argument("region norm differs from memory");
    if (first.center.size() != region.center.size()) {
      throw std::invalid_argument("region dimension differs from memory");
    }
  }

  const auto visit = candidates(region);
  InsertionRecord record;
  record.memory_size = regions_.size();
  record.comparisons = visit.size();
  comparisons_ += visit.size();

  const std::size_t original_prediction = region.prediction;
  const double original_radius = region.radius;
  bool overridden = false;

  for (const std::size_t idx : visit) {
    const CertifiedRegion& entry = regions_[idx];
    const bool inside = center_distance(entry, region) <= entry.radius;
    record.center_covered = record.center_covered || inside;
    if (entry.prediction == region.prediction) continue;

    double shrunk;
    if (inside) {
      shrunk = largest_in_subset(entry, region);
      region.prediction = entry.prediction;
    } else if (intersect(region, entry)) {
      shrunk = largest_out_subset(entry, region);
    } else {
      continue;
    }
    // Once the region sits inside a stored entry, the store invariant keeps
    // every other differently-predicted entry away from it.
    if (overridden && shrunk < region.radius - shrink_tolerance(region.radius)) {
      throw std::logic_error("memory insert: region shrank after a prediction override");
    }
    overridden = overridden || inside;
    region.radius = shrunk;
    ++record.overlap_events;
  }

  // Absorb rounding in chained tangencies so the stored invariant holds exactly.
  for (const std::size_t idx : visit) {
    const CertifiedRegion& entry = regions_[idx];
    if (entry.prediction == region.prediction) continue;
    const double d = center_distance(entry, region);
    if (entry.radius + region.radius > d) {
      const double fitted =
          fit_outside(d, entry.radius, std::min(region.radius, d - entry.radius));
      if (fitted < region.radius - shrink_tolerance(region.radius)) {
        throw std::logic_error("memory insert: residual overlap beyond rounding");
      }
      region.radius = fitted;
    }
  }

  InsertResult result;
  result.adjusted =
      region.prediction != original_prediction || region.radius != original_radius;
  record.adjusted = result.adjusted;
  result.final_prediction = region.prediction;
  result.final_region = region;

  sweep_.emplace(region.center.front(), regions_.size());
  max_radius_ = std::max(max_radius_, region.radius);
  regions_.push_back(std::move(region));
  log_.push_back(record);
  return result;
}

void MemoryStore::validate() const {
  for (std::size_t i = 0; i < regions_.size(); ++i) {
    for (std::size_t j = i + 1; j < regions_.size(); ++j) {
      const auto& a = regions_[i];
      const auto& b = regions_[j];
      if (a.prediction == b.prediction) continue;
      const double d = center_distance(a, b);
      if (d < a.radius + b.radius) {
        std::ostringstream msg;
        msg << "memory entries " << i << " and " << j << " predict " << a.prediction << " and "
            << b.prediction << " but overlap: distance " << d << " < " << a.radius << " + "
            << b.radius;
        throw InvariantViolation(msg.str());
      }
    }
  }
}

InsertResult memory_insert(MemoryStore& store, CertifiedRegion region) {
  return store.insert(std::move(region));
}

nlohmann::json region_to_json(const CertifiedRegion& region) {
  return {{"center", region.center},
          {"radius", region.radius},
          {"prediction", region.prediction},
          {"sigma", region.sigma_used},
          {"norm", to_string(region.norm)}};
}

CertifiedRegion region_from_json(const nlohmann::json& doc) {
  try {
    CertifiedRegion region;
    region.center = doc.at("center").get<Point>();
    region.radius = doc.at("radius").get<double>();
    region.prediction = doc.at("prediction").get<std::size_t>();
    region.sigma_used = doc.at("sigma").get<double>();
    region.norm = norm_from_string(doc.at("norm").get<std::string>());
    check_region(region);
    return region;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(e.what());
  }
}

void save_memory(const MemoryStore& store, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (const auto& region : store.regions()) out << region_to_json(region).dump() << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

MemoryStore load_memory(const std::filesystem::path& path, IndexKind index) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open memory file " + path.string());
  std::vector<CertifiedRegion> regions;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      regions.push_back(region_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) + ": " +
                                  e.what());
    }
  }
  return MemoryStore::from_regions(std::move(regions), index);
}

double expected_insert_cost(std::size_t memory_size, double covered_probability,
                            double certificate_cost) {
  const auto n_mem = static_cast<double>(memory_size);
  const double p = covered_probability;
  return n_mem * p + (1.0 - p) * (2.0 * n_mem + certificate_cost);
}

nlohmann::json AuditReport::to_json() const {
  return {{"insertions", insertions},
          {"overlap_events", overlap_events},
          {"adjusted_insertions", adjusted_insertions},
          {"comparisons", comparisons},
          {"covered_frequency", covered_frequency},
          {"predicted_cost", predicted_cost}};
}

AuditReport audit(const MemoryStore& store, double certificate_cost) {
  AuditReport report;
  report.insertions = store.log().size();
  report.comparisons = store.comparisons();
  std::size_t covered = 0;
  for (const auto& record : store.log()) {
    report.overlap_events += record.overlap_events;
    report.adjusted_insertions += record.adjusted ? 1 : 0;
    covered += record.center_covered ? 1 : 0;
  }
  if (report.insertions > 0) {
    report.covered_frequency =
        static_cast<double>(covered) / static_cast<double>(report.insertions);
  }
  for (const auto& record : store.log()) {
    report.predicted_cost +=
        expected_insert_cost(record.memory_size, report.covered_frequency, certificate_cost);
  }
  return report;
}

}  // namespace certsmooth
