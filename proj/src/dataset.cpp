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

#include "certsmooth/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string_view>

#include "certsmooth/rng.hpp"

namespace certsmooth {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& what) {
  throw std::invalid_argument(source + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

std::size_t LabeledDataset::num_classes() const {
  if (labels.empty()) return 0;
  return *std::max_element(labels.begin(), labels.end()) + 1;
}

void LabeledDataset::push_back(Point x, std::size_t label) {
  if (!points.empty() && x.size() != dim()) {
    throw std::invalid_argument("dataset row has inconsistent dimension");
  }
  points.push_back(std::move(x));
  labels.push_back(label);
}

LabeledDataset parse_dataset(std::istream& in, const std::string& source) {
  LabeledDataset data;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = row.find(',', start);
      fields.push_back(trim(row.substr(start, comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() < 2) fail(source, line_no, "expected at least one feature and a label");

    Point x;
    for (std::size_t i = 0; i + 1 < fields.size(); ++i) {
      double value = 0.0;
      const auto f = fields[i];
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
      if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(value)) {
        fail(source, line_no, "cannot parse feature '" + std::string(f) + "'");
      }
      x.push_back(value);
    }
    std::size_t label = 0;
    const auto f = fields.back();
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), label);
    if (ec != std::errc() || ptr != f.data() + f.size()) {
      fail(source, line_no, "cannot parse label '" + std::string(f) + "'");
    }
    if (!data.empty() && x.size() != data.dim()) {
      fail(source, line_no,
           "expected " + std::to_string(data.dim()) + " features, found " +
               std::to_string(x.size()));
    }
    data.push_back(std::move(x), label);
  }
  if (data.empty()) throw std::invalid_argument(source + ": dataset is empty");
  return data;
}

LabeledDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset " + path.string());
  return parse_dataset(in, path.string());
}

void save_dataset(const LabeledDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  char buf[32];
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.points[i]) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << buf << ',';
    }
    out << data.labels[i] << '\n';
  }
}

LabeledDataset make_two_clusters(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 engine(mix_seed(seed, 0x636c75737465ULL));
  std::normal_distribution<double> noise(0.0, 0.5);
  LabeledDataset data;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t label = i % 2;
    const double cx = label == 0 ? -1.5 : 1.5;
    const double a = noise(engine);
    const double b = noise(engine);
    data.push_back({cx + a, b}, label);
  }
  return data;
}

LabeledDataset make_concentric_annuli(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 engine(mix_seed(seed, 0x616e6e756c69ULL));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double two_pi = 2.0 * std::acos(-1.0);
  LabeledDataset data;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t label = i % 2;
    const double inner = label == 0 ? 0.0 : 1.8;
    const double outer = label == 0 ? 1.0 : 2.8;
    // Area-uniform radius on [inner, outer].
    const double u = unit(engine);
    const double r = std::sqrt(inner * inner + u * (outer * outer - inner * inner));
    const double angle = two_pi * unit(engine);
    data.push_back({r * std::cos(angle), r * std::sin(angle)}, label);
  }
  return data;
}

}  // namespace certsmooth
