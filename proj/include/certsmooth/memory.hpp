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

#ifndef CERTSMOOTH_MEMORY_HPP_
#define CERTSMOOTH_MEMORY_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <vector>

#include "json.hpp"

#include "certsmooth/classifiers.hpp"
#include "certsmooth/smoothing.hpp"

namespace certsmooth {

/// Closed norm ball tagged with the prediction certified on it.
struct CertifiedRegion {
  Point center;
  double radius = 0.0;
  Norm norm = Norm::kL2;
  std::size_t prediction = 0;
  double sigma_used = 0.0;

  bool operator==(const CertifiedRegion&) const = default;
};

/// A store whose differently-predicted regions overlap.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Distance between centers in the regions' norm. Throws std::invalid_argument
/// on a norm or dimension mismatch.
double center_distance(const CertifiedRegion& a, const CertifiedRegion& b);

/// True iff the balls share interior points: |c_a - c_b| < r_a + r_b.
/// Tangent balls do not intersect.
bool intersect(const CertifiedRegion& a, const CertifiedRegion& b);

/// Radius of the largest ball at cand.center inside both `outer` and `cand`.
/// Requires cand.center to lie in `outer`.
double largest_in_subset(const CertifiedRegion& outer, const CertifiedRegion& cand);

/// Radius of the largest ball at cand.center inside `cand` that does not
/// intersect `obstacle`. Requires cand.center to lie outside `obstacle`.
double largest_out_subset(const CertifiedRegion& obstacle, const CertifiedRegion& cand);

struct InsertResult {
  std::size_t final_prediction = 0;
  CertifiedRegion final_region;
  bool adjusted = false;
};

/// Per-insertion bookkeeping kept for the audit.
struct InsertionRecord {
  std::size_t memory_size = 0;      // entries present before the insert
  std::size_t comparisons = 0;      // stored entries examined
  std::size_t overlap_events = 0;   // differently-predicted entries that forced a change
  bool center_covered = false;      // new center fell inside some stored region
  bool adjusted = false;
};

enum class IndexKind {
  kLinearScan,  // visit every stored entry in insertion order
  kSweep,       // visit only entries whose first coordinate can reach the new region
};

/// Ordered memory of certified regions. Differently-predicted regions never
/// overlap. Single writer; const access is safe between insertions.
class MemoryStore {
 public:
  explicit MemoryStore(IndexKind index = IndexKind::kLinearScan) : index_kind_(index) {}

  /// Builds a store from existing regions, validating the invariant.
  static MemoryStore from_regions(std::vector<CertifiedRegion> regions,
                                  IndexKind index = IndexKind::kLinearScan);

  /// Memory-based certification of one new region: scans stored entries in
  /// insertion order, shrinking the region (and overriding its prediction
  /// when its center lies inside a differently-predicted entry), then
  /// appends it.
  InsertResult insert(CertifiedRegion region);

  const std::vector<CertifiedRegion>& regions() const { return regions_; }
  const std::vector<InsertionRecord>& log() const { return log_; }
  std::size_t size() const { return regions_.size(); }
  bool empty() const { return regions_.empty(); }
  std::uint64_t comparisons() const { return comparisons_; }
  IndexKind index_kind() const { return index_kind_; }

  /// Throws InvariantViolation when two differently-predicted regions overlap.
  void validate() const;

 private:
  std::vector<std::size_t> candidates(const CertifiedRegion& region) const;

  IndexKind index_kind_;
  std::vector<CertifiedRegion> regions_;
  std::vector<InsertionRecord> log_;
  std::uint64_t comparisons_ = 0;
  std::multimap<double, std::size_t> sweep_;
  double max_radius_ = 0.0;
};

/// Free-function form of MemoryStore::insert.
InsertResult memory_insert(MemoryStore& store, CertifiedRegion region);

nlohmann::json region_to_json(const CertifiedRegion& region);
CertifiedRegion region_from_json(const nlohmann::json& doc);

/// One JSON object per line; an empty store writes an empty file.
void save_memory(const MemoryStore& store, const std::filesystem::path& path);

/// Parses and re-validates a memory file. Throws std::runtime_error on I/O
/// problems, std::invalid_argument on malformed lines and InvariantViolation
/// on overlapping differently-predicted regions.
MemoryStore load_memory(const std::filesystem::path& path,
                        IndexKind index = IndexKind::kLinearScan);

/// Expected cost of one prediction against a memory of `memory_size`
/// entries: N p + (1 - p)(2N + n), where p is the probability that the new
/// point is already covered and n the cost of a fresh certificate.
double expected_insert_cost(std::size_t memory_size, double covered_probability,
                            double certificate_cost);

struct AuditReport {
  std::size_t insertions = 0;
  std::size_t overlap_events = 0;
  std::size_t adjusted_insertions = 0;
  std::uint64_t comparisons = 0;
  double covered_frequency = 0.0;
  double predicted_cost = 0.0;

  nlohmann::json to_json() const;
};

/// Summarises the insertion log. The cost model is evaluated per insertion
/// at the observed covered frequency and summed.
AuditReport audit(const MemoryStore& store, double certificate_cost);

}  // namespace certsmooth

#endif  // CERTSMOOTH_MEMORY_HPP_
