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


#include <cmath>
#include <fstream>
#include <random>

#include "doctest.h"

#include "certsmooth/classifiers.hpp"
#include "certsmooth/numeric.hpp"

using namespace certsmooth;

namespace {

double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

bool is_simplex(const std::vector<double>& p) {
  for (double v : p) {
    if (!(v >= 0.0) || v > 1.0) return false;
  }
  return std::abs(sum(p) - 1.0) <= 1e-9;
}

Point random_point(std::size_t d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Point x(d);
  for (auto& v : x) v = n(rng);
  return x;
}

// Central difference of f^cls along v with step h.
double central_difference(const Classifier& c, const Point& x, std::size_t cls, const Point& v,
                          double h) {
  Point plus = x;
  Point minus = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    plus[i] += h * v[i];
    minus[i] -= h * v[i];
  }
  return (predict_probs(c, plus)[cls] - predict_probs(c, minus)[cls]) / (2.0 * h);
}

// Monte Carlo estimate of E[f^cls(x + sigma eps)].
double mc_smoothed(const Classifier& c, const Point& x, std::size_t cls, double sigma,
                   std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Point y(x.size());
  std::vector<double> out(c.num_classes());
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) y[j] = x[j] + sigma * normal(rng);
    c.probs(y, out);
    acc += out[cls];
  }
  return acc / static_cast<double>(n);
}

}  // namespace

TEST_CASE("constant classifier returns its vector") {
  const auto c = ConstantClassifier::uniform(3, 4);
  const auto p = predict_probs(c, Point{1.0, -2.0, 7.0});
  REQUIRE(p.size() == 4);
  for (double v : p) CHECK(v == doctest::Approx(0.25));
  CHECK_THROWS_AS(ConstantClassifier(2, {0.7, 0.7}), std::invalid_argument);
}

TEST_CASE("probit half-space value") {
  const ProbitHalfspaceClassifier c({1.0, 0.0}, 0.0, 0.5);
  const auto p = predict_probs(c, Point{1.0, 0.0});
  CHECK(p[1] == doctest::Approx(0.9772498680518208).epsilon(1e-13));
  CHECK(p[0] + p[1] == doctest::Approx(1.0));
}

TEST_CASE("affine softmax with zero weights is uniform") {
  const AffineSoftmaxClassifier c(2, std::vector<double>(6, 0.0), std::vector<double>(3, 0.0));
  for (double v : predict_probs(c, Point{3.0, -1.0})) CHECK(v == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("dimension mismatch is rejected") {
  const NestedBallClassifier c(2, 1.0);
  CHECK_THROWS_AS(predict_probs(c, Point{1.0}), std::invalid_argument);
  CHECK_THROWS_AS(predict_probs(c, Point{1.0, 2.0, 3.0}), std::invalid_argument);
}

TEST_CASE("argmax ties go to the lowest index") {
  CHECK(argmax_lowest(std::vector<double>{0.4, 0.4, 0.2}) == 0);
  CHECK(argmax_lowest(std::vector<double>{0.1, 0.45, 0.45}) == 1);
}

TEST_CASE("hard classifiers") {
  const HardHalfspaceClassifier h({1.0, 1.0}, 1.0);
  CHECK(predict_probs(h, Point{1.0, 0.5})[1] == 1.0);
  CHECK(predict_probs(h, Point{0.5, 0.5})[1] == 0.0);  // boundary belongs to class 0
  const NestedBallClassifier b(3, 1.0);
  CHECK(predict_probs(b, Point{1.0, 0.0, 0.0})[1] == 1.0);  // closed ball
  CHECK(predict_probs(b, Point{1.0, 0.1, 0.0})[0] == 1.0);
}

TEST_CASE("directional derivative examples") {
  const auto constant = ConstantClassifier::uniform(2, 3);
  CHECK(directional_derivative(constant, Point{0.3, 0.4}, 1, Point{1.0, 2.0}) == 0.0);

  const Point w{0.6, -0.8};
  const double b = 0.1;
  const double s = 0.7;
  const ProbitHalfspaceClassifier probit(w, b, s);
  const Point x{0.4, 0.2};
  const double margin = w[0] * x[0] + w[1] * x[1] - b;
  const double expected = std_normal_pdf(margin / s) * 1.0 / s;  // |w|^2 = 1
  CHECK(directional_derivative(probit, x, 1, w) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(directional_derivative(probit, x, 0, w) == doctest::Approx(-expected).epsilon(1e-12));
  CHECK(directional_derivative(probit, x, 1, Point{0.0, 0.0}) == 0.0);
}

TEST_CASE("value-only classifiers refuse analytic derivatives when the fallback is off") {
  const HardHalfspaceClassifier h({1.0}, 0.0);
  CHECK_FALSE(h.has_gradient());
  CHECK_THROWS_AS(directional_derivative(h, Point{0.5}, 1, Point{1.0},
                                         DerivativeFallback::kDisabled),
                  UnsupportedDerivative);
  // Away from the boundary the finite-difference fallback sees a flat function.
  CHECK(directional_derivative(h, Point{0.5}, 1, Point{1.0}) == 0.0);
  const NestedBallClassifier ball(2, 1.0);
  CHECK(directional_derivative(ball, Point{0.2, 0.1}, 1, Point{1.0, -1.0}) == 0.0);
}

TEST_CASE("analytic derivatives match central differences on all built-ins") {
  std::mt19937_64 rng(11);
  const double h = 1e-4;
  std::vector<ClassifierHandle> models;
  models.push_back(std::make_shared<ConstantClassifier>(3, std::vector<double>{0.2, 0.5, 0.3}));
  models.push_back(std::make_shared<AffineSoftmaxClassifier>(
      3, std::vector<double>{0.5, -1.0, 0.3, 1.2, 0.1, -0.4, -0.7, 0.8, 0.2},
      std::vector<double>{0.1, -0.2, 0.05}));
  models.push_back(std::make_shared<ProbitHalfspaceClassifier>(Point{0.3, -0.5, 0.8}, 0.2, 0.6));
  models.push_back(std::make_shared<MlpClassifier>(MlpClassifier::random(3, 8, 3, 5)));
  models.push_back(std::make_shared<HardHalfspaceClassifier>(Point{1.0, 0.0, 0.0}, 5.0));
  models.push_back(std::make_shared<NestedBallClassifier>(3, 10.0));
  for (const auto& m : models) {
    for (int t = 0; t < 20; ++t) {
      const Point x = random_point(3, rng);
      const Point v = random_point(3, rng);
      for (std::size_t cls = 0; cls < m->num_classes(); ++cls) {
        INFO(m->kind() << " class " << cls);
        CHECK(std::abs(directional_derivative(*m, x, cls, v) -
                       central_difference(*m, x, cls, v, h)) <= 1e-4);
      }
    }
  }
}

TEST_CASE("perceptron outputs a simplex for arbitrary parameters") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    auto m = MlpClassifier::random(4, 1 + rng() % 32, 2 + rng() % 5, rng());
    // Blow the weights up so the softmax saturates.
    MlpParams big = m.params();
    big.scale_add(m.params(), 50.0 * (t % 5));
    const MlpClassifier scaled(4, m.hidden(), m.num_classes(), big);
    for (int i = 0; i < 10; ++i) {
      CHECK(is_simplex(predict_probs(scaled, random_point(4, rng, 10.0))));
    }
  }
  CHECK_THROWS_AS(MlpClassifier::random(2, 33, 2, 0), std::invalid_argument);
}

TEST_CASE("perceptron loss gradient matches finite differences") {
  const auto m = MlpClassifier::random(2, 5, 3, 9);
  const Point x{0.3, -1.1};
  const std::size_t label = 2;
  MlpParams grad = m.zero_like();
  const double loss = m.accumulate_cross_entropy_gradient(x, label, grad);
  CHECK(loss == doctest::Approx(-std::log(predict_probs(m, x)[label])));

  auto loss_at = [&](const MlpParams& p) {
    const MlpClassifier probe(2, 5, 3, p);
    return -std::log(predict_probs(probe, x)[label]);
  };
  const double h = 1e-6;
  auto check_block = [&](std::vector<double> MlpParams::*block) {
    for (std::size_t i = 0; i < (m.params().*block).size(); ++i) {
      MlpParams plus = m.params();
      MlpParams minus = m.params();
      (plus.*block)[i] += h;
      (minus.*block)[i] -= h;
      const double fd = (loss_at(plus) - loss_at(minus)) / (2 * h);
      CHECK((grad.*block)[i] == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
    }
  };
  check_block(&MlpParams::w1);
  check_block(&MlpParams::b1);
  check_block(&MlpParams::w2);
  check_block(&MlpParams::b2);
}

TEST_CASE("half-space oracle examples") {
  const Point w{1.0, 0.0};
  CHECK(halfspace_smoothed_prob(w, 0.0, Point{1.0, 0.0}, 1.0) ==
        doctest::Approx(0.8413447460685429).epsilon(1e-13));
  CHECK(halfspace_smoothed_prob(Point{2.0, 1.0}, 3.0, Point{1.0, 1.0}, 0.7) == 0.5);
  CHECK(halfspace_smoothed_prob(w, 0.0, Point{1.0, 0.0}, 0.01) == doctest::Approx(1.0));
  CHECK_THROWS_AS(halfspace_smoothed_prob(Point{0.0, 0.0}, 0.0, Point{1.0, 0.0}, 1.0),
                  std::invalid_argument);
}

TEST_CASE("probit half-space oracle examples") {
  const Point w{0.0, 1.0};
  const Point x{0.0, 1.0};
  CHECK(probit_halfspace_smoothed_prob(w, 0.0, 0.5, x, 0.0) ==
        doctest::Approx(std_normal_cdf(2.0)).epsilon(1e-14));
  CHECK(probit_halfspace_smoothed_prob(w, 0.0, 0.5, x, 0.25) ==
        doctest::Approx(0.9631808649398487).epsilon(1e-13));
  CHECK(probit_halfspace_smoothed_prob(w, 1.0, 0.5, x, 3.0) == 0.5);
  CHECK_THROWS_AS(probit_halfspace_smoothed_prob(Point{1.0, 1.0}, 0.0, 0.5, x, 0.2),
                  std::invalid_argument);
}

TEST_CASE("probit half-space oracle agrees with a large Monte Carlo run") {
  const ProbitHalfspaceClassifier c({0.0, 1.0}, 0.0, 0.5);
  const Point x{0.0, 1.0};
  const std::size_t n = 1000000;
  const double exact = 0.9631808649398487;
  const double est = mc_smoothed(c, x, 1, 0.25, n, 77);
  // The soft output has smaller variance than a Bernoulli with the same mean.
  CHECK(std::abs(est - exact) <= 3.0 * std::sqrt(exact * (1 - exact) / n));
}

TEST_CASE("nested-ball oracle examples") {
  const Point origin2{0.0, 0.0};
  CHECK(nested_ball_smoothed_prob(1.0, origin2, 1.0) ==
        doctest::Approx(0.3934693402873666).epsilon(1e-13));
  CHECK(nested_ball_smoothed_prob(1000.0, origin2, 1.0) == doctest::Approx(1.0));
  CHECK(nested_ball_smoothed_prob(1.0, Point{20.0, 0.0}, 1.0) < 1e-12);
}

TEST_CASE("nested-ball oracle matches the noncentral chi-squared CDF") {
  // scipy.stats.ncx2.cdf(rho^2 / sigma^2, d, |x|^2 / sigma^2)
  CHECK(nested_ball_smoothed_prob(1.0, Point{0.5, 0.0}, 0.5) ==
        doctest::Approx(0.73098793996409).epsilon(1e-8));
  CHECK(nested_ball_smoothed_prob(1.0, Point{1.2, 0.3}, 0.7) ==
        doctest::Approx(0.24769683293472838).epsilon(1e-8));
  CHECK(nested_ball_smoothed_prob(1.0, Point{0.3, 0.4, 0.2}, 0.6) ==
        doctest::Approx(0.4598469779243695).epsilon(1e-8));
  CHECK(nested_ball_smoothed_prob(1.0, Point{0.4}, 0.5) ==
        doctest::Approx(0.8823751994478638).epsilon(1e-10));
  CHECK(nested_ball_smoothed_prob(1.0, Point{0.0, 0.0}, 0.3) ==
        doctest::Approx(0.9961340798605272).epsilon(1e-12));
  CHECK(nested_ball_smoothed_prob(1.0, Point(5, 0.0), 0.5) ==
        doctest::Approx(0.4505840486472198).epsilon(1e-12));
  CHECK_THROWS(nested_ball_smoothed_prob(1.0, Point{0.1, 0.0, 0.0, 0.0}, 0.5));
}

TEST_CASE("chi-squared CDF") {
  CHECK(chi_squared_cdf(3, 2.5) == doctest::Approx(0.5247089166569795).epsilon(1e-12));
  CHECK(chi_squared_cdf(4, 1.0) == doctest::Approx(0.09020401043104986).epsilon(1e-12));
  CHECK(chi_squared_cdf(2, 0.0) == 0.0);
}

TEST_CASE("Monte Carlo smoothed estimates agree with the oracles") {
  std::mt19937_64 rng(20260101);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const std::size_t n = 100000;
  int failures = 0;
  for (int t = 0; t < 50; ++t) {
    const double sigma = 0.1 + 1.4 * unif(rng);
    // Hard half-space.
    {
      const std::size_t d = 1 + rng() % 5;
      const Point w = random_point(d, rng);
      const double b = unif(rng) - 0.5;
      const Point x = random_point(d, rng, 0.5);
      const HardHalfspaceClassifier c(w, b);
      const double p = halfspace_smoothed_prob(w, b, x, sigma);
      const double est = mc_smoothed(c, x, 1, sigma, n, rng());
      failures += std::abs(est - p) > 3.0 * std::sqrt(p * (1 - p) / n) ? 1 : 0;
    }
    // Nested ball, d = 2.
    {
      const Point x = random_point(2, rng, 0.7);
      const double rho = 0.5 + unif(rng);
      const NestedBallClassifier c(2, rho);
      const double p = nested_ball_smoothed_prob(rho, x, sigma);
      const double est = mc_smoothed(c, x, 1, sigma, n, rng());
      failures += std::abs(est - p) > 3.0 * std::sqrt(p * (1 - p) / n) ? 1 : 0;
    }
    // Probit half-space.
    {
      Point w = random_point(3, rng);
      const double norm = std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
      for (auto& v : w) v /= norm;
      const double s = 0.2 + unif(rng);
      const Point x = random_point(3, rng, 0.5);
      const ProbitHalfspaceClassifier c(w, 0.1, s);
      const double p = probit_halfspace_smoothed_prob(w, 0.1, s, x, sigma);
      const double est = mc_smoothed(c, x, 1, sigma, n, rng());
      failures += std::abs(est - p) > 3.0 * std::sqrt(p * (1 - p) / n) ? 1 : 0;
    }
  }
  CHECK(failures == 0);
}

TEST_CASE("JSON round trip for every kind") {
  std::vector<ClassifierHandle> models;
  models.push_back(std::make_shared<ConstantClassifier>(2, std::vector<double>{0.25, 0.75}));
  models.push_back(std::make_shared<AffineSoftmaxClassifier>(
      2, std::vector<double>{1.0, 2.0, 3.0, 4.0}, std::vector<double>{0.5, -0.5}));
  models.push_back(std::make_shared<ProbitHalfspaceClassifier>(Point{1.0, 0.0}, 0.3, 0.5));
  models.push_back(std::make_shared<HardHalfspaceClassifier>(Point{1.0, -1.0}, 0.2));
  models.push_back(std::make_shared<NestedBallClassifier>(2, 1.5));
  models.push_back(std::make_shared<MlpClassifier>(MlpClassifier::random(2, 4, 3, 1)));
  const Point x{0.37, -0.21};
  for (const auto& m : models) {
    const auto back = classifier_from_json(nlohmann::json::parse(m->to_json().dump()));
    CHECK(back->kind() == m->kind());
    CHECK(back->to_json() == m->to_json());
    CHECK(predict_probs(*back, x) == predict_probs(*m, x));
  }
}

TEST_CASE("malformed classifier documents are rejected") {
  CHECK_THROWS_AS(classifier_from_json({{"kind", "oracle"}}), std::invalid_argument);
  CHECK_THROWS_AS(classifier_from_json({{"kind", "nested_ball"}}), std::invalid_argument);
  CHECK_THROWS_AS(classifier_from_json({{"kind", "probit_halfspace"}, {"w", {1.0}}, {"b", 0.0},
                                        {"s", -1.0}}),
                  std::invalid_argument);
  CHECK_THROWS(load_classifier("/nonexistent/classifier.json"));
}
