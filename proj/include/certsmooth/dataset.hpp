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

#ifndef CERTSMOOTH_DATASET_HPP_
#define CERTSMOOTH_DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "certsmooth/classifiers.hpp"

namespace certsmooth {

/// Rows of (point, label) sharing one dimension.
struct LabeledDataset {
  std::vector<Point> points;
  std::vector<std::size_t> labels;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  std::size_t dim() const { return points.empty() ? 0 : points.front().size(); }
  /// 1 + largest label, 0 when empty.
  std::size_t num_classes() const;

  void push_back(Point x, std::size_t label);
};

/// Parses CSV rows "x_1,...,x_d,label". Blank lines are skipped; the
/// dimension is taken from the first row. Errors name the offending line.
LabeledDataset parse_dataset(std::istream& in, const std::string& source = "<stream>");

LabeledDataset load_dataset(const std::filesystem::path& path);

void save_dataset(const LabeledDataset& data, const std::filesystem::path& path);

/// Two isotropic Gaussian blobs centred at (-1.5, 0) and (1.5, 0) with
/// standard deviation 0.5; labels alternate 0, 1, 0, ...
LabeledDataset make_two_clusters(std::size_t n, std::uint64_t seed);

/// Class 0 uniform on the disk |x| <= 1, class 1 uniform on the annulus
/// 1.8 <= |x| <= 2.8; labels alternate 0, 1, 0, ...
LabeledDataset make_concentric_annuli(std::size_t n, std::uint64_t seed);

}  // namespace certsmooth

#endif  // CERTSMOOTH_DATASET_HPP_
