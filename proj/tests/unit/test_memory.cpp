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


#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"

#include "certsmooth/memory.hpp"

using namespace certsmooth;
namespace fs = std::filesystem;

namespace {

CertifiedRegion ball(Point c, double r, std::size_t pred, Norm norm = Norm::kL2) {
  return CertifiedRegion{std::move(c), r, norm, pred, 0.25};
}

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::path(CERTSMOOTH_TEST_TMP) / "memory";
  fs::create_directories(dir);
  return dir / name;
}

// Uniform point in the unit l2 or l1 ball of dimension d.
Point unit_ball_sample(std::size_t d, Norm norm, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Point p(d);
  for (;;) {
    double acc = 0.0;
    for (auto& v : p) {
      v = u(rng);
      acc += norm == Norm::kL2 ? v * v : std::abs(v);
    }
    if (acc <= 1.0) return p;
  }
}

double norm_of(const Point& a, const Point& b, Norm norm) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    acc += norm == Norm::kL2 ? diff * diff : std::abs(diff);
  }
  return norm == Norm::kL2 ? std::sqrt(acc) : acc;
}

std::vector<CertifiedRegion> random_sequence(std::size_t n, std::size_t d, std::mt19937_64& rng,
                                             double spread) {
  std::uniform_real_distribution<double> pos(-spread, spread);
  std::uniform_real_distribution<double> rad(0.0, 2.0);
  std::vector<CertifiedRegion> out;
  for (std::size_t i = 0; i < n; ++i) {
    Point c(d);
    for (auto& v : c) v = pos(rng);
    out.push_back(ball(std::move(c), rad(rng), rng() % 3));
  }
  return out;
}

bool invariant_holds(const MemoryStore& store) {
  const auto& r = store.regions();
  for (std::size_t i = 0; i < r.size(); ++i) {
    for (std::size_t j = i + 1; j < r.size(); ++j) {
      if (r[i].prediction != r[j].prediction &&
          center_distance(r[i], r[j]) < r[i].radius + r[j].radius) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace

TEST_CASE("intersect uses strict overlap") {
  CHECK(intersect(ball({0.0, 0.0}, 1.0, 0), ball({1.0, 0.0}, 1.0, 1)));
  CHECK_FALSE(intersect(ball({0.0, 0.0}, 1.0, 0), ball({3.0, 0.0}, 1.5, 1)));
  CHECK_FALSE(intersect(ball({0.0, 0.0}, 1.0, 0), ball({2.5, 0.0}, 1.5, 1)));
  CHECK_THROWS_AS(intersect(ball({0.0}, 1.0, 0), ball({0.0, 1.0}, 1.0, 1)), std::invalid_argument);
  CHECK_THROWS_AS(intersect(ball({0.0}, 1.0, 0), ball({1.0}, 1.0, 1, Norm::kL1)),
                  std::invalid_argument);
}

TEST_CASE("largest_in_subset examples") {
  CHECK(largest_in_subset(ball({0.0, 0.0}, 1.0, 0), ball({0.5, 0.0}, 0.8, 1)) ==
        doctest::Approx(0.5));
  CHECK(largest_in_subset(ball({0.0, 0.0}, 1.0, 0), ball({0.0, 0.0}, 0.3, 1)) == 0.3);
  CHECK(largest_in_subset(ball({0.0, 0.0}, 1.0, 0), ball({0.9, 0.0}, 0.05, 1)) == 0.05);
  CHECK_THROWS_AS(largest_in_subset(ball({0.0, 0.0}, 1.0, 0), ball({1.5, 0.0}, 0.1, 1)),
                  std::invalid_argument);
}

TEST_CASE("largest_out_subset examples") {
  CHECK(largest_out_subset(ball({0.0, 0.0}, 1.0, 0), ball({2.0, 0.0}, 1.5, 1)) ==
        doctest::Approx(1.0));
  CHECK(largest_out_subset(ball({0.0, 0.0}, 1.0, 0), ball({5.0, 0.0}, 0.5, 1)) == 0.5);
  const double eps = 1e-3;
  CHECK(largest_out_subset(ball({0.0}, 1.0, 0), ball({1.0 + eps}, 10.0, 1)) ==
        doctest::Approx(eps).epsilon(1e-9));
  CHECK_THROWS_AS(largest_out_subset(ball({0.0, 0.0}, 1.0, 0), ball({0.5, 0.0}, 0.1, 1)),
                  std::invalid_argument);
}

TEST_CASE("geometry formulas agree with a Monte Carlo containment oracle") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Norm norm : {Norm::kL2, Norm::kL1}) {
    for (int t = 0; t < 100; ++t) {
      const std::size_t d = 1 + rng() % 5;
      const double big = 0.5 + 1.5 * u(rng);
      Point c0(d, 0.0);
      // In-subset: candidate center inside the outer ball.
      Point dir = unit_ball_sample(d, norm, rng);
      Point c1(d);
      for (std::size_t i = 0; i < d; ++i) c1[i] = big * dir[i];
      const auto outer = ball(c0, big, 0, norm);
      const auto cand = ball(c1, 2.0 * u(rng), 1, norm);
      const double r_in = largest_in_subset(outer, cand);
      CHECK(r_in <= cand.radius);
      for (int s = 0; s < 1000; ++s) {
        const Point off = unit_ball_sample(d, norm, rng);
        Point p(d);
        for (std::size_t i = 0; i < d; ++i) p[i] = c1[i] + r_in * off[i];
        REQUIRE(norm_of(p, c0, norm) <= big * (1 + 1e-12));
      }
      // Maximality: growing by 1e-6 leaves the outer ball along the ray away
      // from its center, unless the candidate radius was the binding term.
      if (r_in < cand.radius - 1e-6) {
        const double dist = norm_of(c1, c0, norm);
        CHECK(dist + r_in + 1e-6 > big);
      }

      // Out-subset: candidate center outside the obstacle.
      Point c2(d);
      const Point dir2 = unit_ball_sample(d, norm, rng);
      const double len = norm_of(dir2, Point(d, 0.0), norm);
      for (std::size_t i = 0; i < d; ++i) c2[i] = dir2[i] / len * (big + 0.01 + 2.0 * u(rng));
      const auto obstacle = ball(c0, big, 0, norm);
      const auto cand2 = ball(c2, 3.0 * u(rng), 1, norm);
      const double r_out = largest_out_subset(obstacle, cand2);
      for (int s = 0; s < 1000; ++s) {
        const Point off = unit_ball_sample(d, norm, rng);
        Point p(d);
        for (std::size_t i = 0; i < d; ++i) p[i] = c2[i] + r_out * off[i];
        REQUIRE(norm_of(p, c0, norm) >= big * (1 - 1e-12));
      }
      if (r_out < cand2.radius - 1e-6) {
        CHECK(norm_of(c2, c0, norm) - r_out - 1e-6 < big);
      }
    }
  }
}

TEST_CASE("insert into an empty store") {
  MemoryStore store;
  const auto r = store.insert(ball({1.0, 2.0}, 0.7, 3));
  CHECK_FALSE(r.adjusted);
  CHECK(r.final_prediction == 3);
  CHECK(r.final_region.radius == 0.7);
  CHECK(store.size() == 1);
}

TEST_CASE("same-prediction overlap is added unchanged") {
  MemoryStore store;
  store.insert(ball({0.0, 0.0}, 1.0, 0));
  const auto r = memory_insert(store, ball({0.5, 0.0}, 0.8, 0));
  CHECK_FALSE(r.adjusted);
  CHECK(r.final_region.radius == 0.8);
  CHECK(store.log().back().overlap_events == 0);
}

TEST_CASE("center inside a differently-predicted entry takes its prediction") {
  MemoryStore store;
  store.insert(ball({0.0, 0.0}, 1.0, 0));
  const auto r = store.insert(ball({0.5, 0.0}, 0.8, 1));
  CHECK(r.adjusted);
  CHECK(r.final_prediction == 0);
  CHECK(r.final_region.radius == doctest::Approx(0.5));
  CHECK(store.log().back().center_covered);
}

TEST_CASE("overlap from outside shrinks the region") {
  MemoryStore store;
  store.insert(ball({0.0, 0.0}, 1.0, 0));
  const auto r = store.insert(ball({2.0, 0.0}, 1.5, 1));
  CHECK(r.adjusted);
  CHECK(r.final_prediction == 1);
  CHECK(r.final_region.radius == doctest::Approx(1.0));
  CHECK_FALSE(intersect(store.regions()[0], store.regions()[1]));
}

TEST_CASE("tangent regions are kept") {
  MemoryStore store;
  store.insert(ball({0.0}, 1.0, 0));
  const auto r = store.insert(ball({2.0}, 1.0, 1));
  CHECK_FALSE(r.adjusted);
}

TEST_CASE("inserts reject mismatched regions") {
  MemoryStore store;
  store.insert(ball({0.0, 0.0}, 1.0, 0));
  CHECK_THROWS_AS(store.insert(ball({0.0}, 1.0, 0)), std::invalid_argument);
  CHECK_THROWS_AS(store.insert(ball({0.0, 0.0}, 1.0, 0, Norm::kL1)), std::invalid_argument);
  CHECK_THROWS_AS(store.insert(ball({0.0, 0.0}, -1.0, 0)), std::invalid_argument);
  CHECK_THROWS_AS(store.insert(ball({0.0, std::nan("")}, 1.0, 0)), std::invalid_argument);
}

TEST_CASE("store invariant survives random insertion sequences") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t d = t % 3 == 0 ? 1 : (t % 3 == 1 ? 2 : 5);
    MemoryStore store;
    for (auto& region : random_sequence(1 + rng() % 30, d, rng, 2.0)) {
      store.insert(std::move(region));
    }
    REQUIRE(invariant_holds(store));
    CHECK_NOTHROW(store.validate());
  }
}

TEST_CASE("l1 regions keep the invariant too") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 300; ++t) {
    MemoryStore store;
    auto seq = random_sequence(20, 1 + t % 4, rng, 2.0);
    for (auto& region : seq) {
      region.norm = Norm::kL1;
      store.insert(std::move(region));
    }
    REQUIRE(invariant_holds(store));
  }
}

TEST_CASE("sweep index matches the linear scan") {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 200; ++t) {
    MemoryStore linear(IndexKind::kLinearScan);
    MemoryStore sweep(IndexKind::kSweep);
    for (const auto& region : random_sequence(40, 1 + t % 4, rng, 6.0)) {
      const auto a = linear.insert(region);
      const auto b = sweep.insert(region);
      REQUIRE(a.final_region == b.final_region);
      REQUIRE(a.adjusted == b.adjusted);
    }
    CHECK(sweep.comparisons() <= linear.comparisons());
  }
}

TEST_CASE("order invariance when no overlap occurs") {
  std::mt19937_64 rng(10);
  int tested = 0;
  for (int t = 0; t < 200 && tested < 30; ++t) {
    auto seq = random_sequence(12, 2, rng, 8.0);
    for (auto& r : seq) r.radius *= 0.3;
    MemoryStore store;
    for (const auto& r : seq) store.insert(r);
    if (audit(store, 1.0).overlap_events != 0) continue;
    ++tested;
    auto reference = store.regions();
    std::sort(reference.begin(), reference.end(), [](const auto& a, const auto& b) {
      return a.center < b.center;
    });
    for (int p = 0; p < 5; ++p) {
      std::shuffle(seq.begin(), seq.end(), rng);
      MemoryStore other;
      for (const auto& r : seq) other.insert(r);
      auto regions = other.regions();
      std::sort(regions.begin(), regions.end(), [](const auto& a, const auto& b) {
        return a.center < b.center;
      });
      CHECK(regions == reference);
    }
  }
  CHECK(tested == 30);
}

TEST_CASE("order matters once regions overlap") {
  const auto a = ball({0.0}, 1.0, 0);
  const auto b = ball({0.5}, 1.0, 1);
  MemoryStore ab;
  ab.insert(a);
  ab.insert(b);
  MemoryStore ba;
  ba.insert(b);
  ba.insert(a);
  CHECK(ab.regions()[1].prediction == 0);
  CHECK(ba.regions()[1].prediction == 1);
}

TEST_CASE("save and load round trip") {
  std::mt19937_64 rng(11);
  MemoryStore store;
  for (auto& region : random_sequence(100, 3, rng, 10.0)) store.insert(std::move(region));
  REQUIRE(store.size() == 100);
  const auto path = temp_file("roundtrip.jsonl");
  save_memory(store, path);
  const auto loaded = load_memory(path);
  CHECK(loaded.regions() == store.regions());

  const auto empty_path = temp_file("empty.jsonl");
  save_memory(MemoryStore{}, empty_path);
  CHECK(fs::file_size(empty_path) == 0);
  CHECK(load_memory(empty_path).empty());
}

TEST_CASE("loading rejects overlapping and corrupt files") {
  const auto overlap = temp_file("overlap.jsonl");
  {
    std::ofstream out(overlap);
    out << R"({"center":[0.0,0.0],"radius":1.0,"prediction":0,"sigma":0.25,"norm":"l2"})" << '\n'
        << R"({"center":[1.5,0.0],"radius":0.6,"prediction":1,"sigma":0.25,"norm":"l2"})" << '\n';
  }
  CHECK_THROWS_AS(load_memory(overlap), InvariantViolation);

  const auto corrupt = temp_file("corrupt.jsonl");
  {
    std::ofstream out(corrupt);
    out << R"({"center":[0.0,0.0],"radius":1.0,"prediction":0,"sigma":0.25,"norm":"l2"})" << '\n'
        << R"({"center":[1.5,0.0],"radius":"wide"})" << '\n';
  }
  try {
    load_memory(corrupt);
    FAIL("expected a parse error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
  CHECK_THROWS_AS(load_memory(temp_file("missing.jsonl")), std::runtime_error);
}

TEST_CASE("audit counters") {
  MemoryStore store;
  const std::size_t n = 25;
  for (std::size_t i = 0; i < n; ++i) {
    store.insert(ball({10.0 * static_cast<double>(i), 0.0}, 2.0, i % 2));
  }
  const auto report = audit(store, 1000.0);
  CHECK(report.overlap_events == 0);
  CHECK(report.adjusted_insertions == 0);
  CHECK(report.comparisons == n * (n - 1) / 2);
  CHECK(report.covered_frequency == 0.0);
  double expected = 0.0;
  for (std::size_t i = 0; i < n; ++i) expected += 2.0 * static_cast<double>(i) + 1000.0;
  CHECK(report.predicted_cost == doctest::Approx(expected));
  CHECK(report.to_json().at("comparisons") == n * (n - 1) / 2);
}

TEST_CASE("cost model") {
  CHECK(expected_insert_cost(100, 0.0, 500.0) == 700.0);
  CHECK(expected_insert_cost(100, 1.0, 500.0) == 100.0);
  CHECK(expected_insert_cost(100, 0.5, 500.0) == 50.0 + 0.5 * 700.0);
}

TEST_CASE("region JSON") {
  const auto r = ball({1.0, -2.0}, 0.5, 2, Norm::kL1);
  CHECK(region_from_json(region_to_json(r)) == r);
  CHECK(region_to_json(r).at("norm") == "l1");
  CHECK_THROWS_AS(region_from_json({{"center", {1.0}}}), std::invalid_argument);
}
