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

#ifndef CERTSMOOTH_CLASSIFIERS_HPP_
#define CERTSMOOTH_CLASSIFIERS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace certsmooth {

using Point = std::vector<double>;

/// Raised when an analytic derivative is requested from a value-only
/// classifier and the finite-difference fallback is disabled.
class UnsupportedDerivative : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Base classifier f mapping R^d to the probability simplex over k labels.
///
/// Implementations must be safe for concurrent const use.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual std::string kind() const = 0;
  virtual std::size_t num_classes() const = 0;
  virtual std::size_t dim() const = 0;

  /// Writes f(x) into out. Both spans are pre-sized by the caller; no
  /// dimension checks are performed on this path.
  virtual void probs(std::span<const double> x, std::span<double> out) const = 0;

  virtual bool has_gradient() const { return false; }

  /// Writes v^T grad f^c(x) for every class c into out.
  virtual void directional_derivatives(std::span<const double> x,
                                       std::span<const double> v,
                                       std::span<double> out) const;

  virtual nlohmann::json to_json() const = 0;
};

using ClassifierHandle = std::shared_ptr<const Classifier>;

/// Index of the largest entry; ties go to the lowest index.
std::size_t argmax_lowest(std::span<const double> values);

/// Checked evaluation of f(x).
std::vector<double> predict_probs(const Classifier& c, std::span<const double> x);

enum class DerivativeFallback { kFiniteDifference, kDisabled };

/// v^T grad f^class_idx(x). Value-only classifiers fall back to central
/// differences with step 1e-4 * (1 + |x|_inf) unless the fallback is disabled.
double directional_derivative(const Classifier& c, std::span<const double> x,
                              std::size_t class_idx, std::span<const double> v,
                              DerivativeFallback fallback = DerivativeFallback::kFiniteDifference);

// ---------------------------------------------------------------------------
// Built-in classifiers.

/// Returns the same probability vector everywhere.
class ConstantClassifier final : public Classifier {
 public:
  ConstantClassifier(std::size_t dim, std::vector<double> probs);
  static ConstantClassifier uniform(std::size_t dim, std::size_t num_classes);

  std::string kind() const override { return "constant"; }
  std::size_t num_classes() const override { return probs_.size(); }
  std::size_t dim() const override { return dim_; }
  void probs(std::span<const double> x, std::span<double> out) const override;
  bool has_gradient() const override { return true; }
  void directional_derivatives(std::span<const double> x, std::span<const double> v,
                               std::span<double> out) const override;
  nlohmann::json to_json() const override;

 private:
  std::size_t dim_;
  std::vector<double> probs_;
};

/// softmax(W x + b) with W stored row-major as k x d.
class AffineSoftmaxClassifier final : public Classifier {
 public:
  AffineSoftmaxClassifier(std::size_t dim, std::vector<double> weights,
                          std::vector<double> bias);

  std::string kind() const override { return "affine_softmax"; }
  std::size_t num_classes() const override { return bias_.size(); }
  std::size_t dim() const override { return dim_; }
  void probs(std::span<const double> x, std::span<double> out) const override;
  bool has_gradient() const override { return true; }
  void directional_derivatives(std::span<const double> x, std::span<const double> v,
                               std::span<double> out) const override;
  nlohmann::json to_json() const override;

 private:
  std::size_t dim_;
  std::vector<double> weights_;
  std::vector<double> bias_;
};

/// Binary soft classifier with class-1 probability Phi((w^T x - b) / s).
class ProbitHalfspaceClassifier final : public Classifier {
 public:
  ProbitHalfspaceClassifier(Point w, double b, double s);

  std::string kind() const override { return "probit_halfspace"; }
  std::size_t num_classes() const override { return 2; }
  std::size_t dim() const override { return w_.size(); }
  void probs(std::span<const double> x, std::span<double> out) const override;
  bool has_gradient() const override { return true; }
  void directional_derivatives(std::span<const double> x, std::span<const double> v,
                               std::span<double> out) const override;
  nlohmann::json to_json() const override;

  const Point& w() const { return w_; }
  double b() const { return b_; }
  double s() const { return s_; }

 private:
  Point w_;
  double b_;
  double s_;
};

/// Hard binary classifier predicting class 1 iff w^T x > b. Value-only.
class HardHalfspaceClassifier final : public Classifier {
 public:
  HardHalfspaceClassifier(Point w, double b);

  std::string kind() const override { return "hard_halfspace"; }
  std::size_t num_classes() const override { return 2; }
  std::size_t dim() const override { return w_.size(); }
  void probs(std::span<const double> x, std::span<double> out) const override;
  nlohmann::json to_json() const override;

 private:
  Point w_;
  double b_;
};

/// Hard binary classifier predicting class 1 iff |x|_2 <= rho. Value-only.
class NestedBallClassifier final : public Classifier {
 public:
  NestedBallClassifier(std::size_t dim, double rho);

  std::string kind() const override { return "nested_ball"; }
  std::size_t num_classes() const override { return 2; }
  std::size_t dim() const override { return dim_; }
  void probs(std::span<const double> x, std::span<double> out) const override;
  nlohmann::json to_json() const override;

  double rho() const { return rho_; }

 private:
  std::size_t dim_;
  double rho_;
};

/// Flat parameter block of the two-layer perceptron.
struct MlpParams {
  std::vector<double> w1;  // hidden x dim
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // classes x hidden
  std::vector<double> b2;  // classes

  void scale_add(const MlpParams& other, double factor);
  void set_zero();
};

/// softmax(W2 tanh(W1 x + b1) + b2). The only trainable built-in.
class MlpClassifier final : public Classifier {
 public:
  static constexpr std::size_t kMaxHidden = 32;

  MlpClassifier(std::size_t dim, std::size_t hidden, std::size_t classes, MlpParams params);

  /// Uniform Glorot initialisation from the given seed.
  static MlpClassifier random(std::size_t dim, std::size_t hidden, std::size_t classes,
                              std::uint64_t seed);

  std::string kind() const override { return "mlp"; }
  std::size_t num_classes() const override { return classes_; }
  std::size_t dim() const override { return dim_; }
  std::size_t hidden() const { return hidden_; }
  void probs(std::span<const double> x, std::span<double> out) const override;
  bool has_gradient() const override { return true; }
  void directional_derivatives(std::span<const double> x, std::span<const double> v,
                               std::span<double> out) const override;
  nlohmann::json to_json() const override;

  const MlpParams& params() const { return params_; }
  MlpParams zero_like() const;

  /// Adds the gradient of -log f^label(x) w.r.t. the parameters into grad and
  /// returns the loss.
  double accumulate_cross_entropy_gradient(std::span<const double> x, std::size_t label,
                                           MlpParams& grad) const;

  /// params -= learning_rate * grad
  void apply_gradient(const MlpParams& grad, double learning_rate);

 private:
  void hidden_layer(std::span<const double> x, std::span<double> act) const;
  void output_layer(std::span<const double> act, std::span<double> out) const;

  std::size_t dim_;
  std::size_t hidden_;
  std::size_t classes_;
  MlpParams params_;
};

// ---------------------------------------------------------------------------
// Closed-form smoothed expectations, used as test oracles.

/// E[1{w^T(x + eps) > b}] with eps ~ N(0, sigma^2 I), i.e.
/// Phi((w^T x - b) / (sigma |w|)).
double halfspace_smoothed_prob(std::span<const double> w, double b,
                               std::span<const double> x, double sigma);

/// E[Phi((w^T(x + eps) - b) / s)] = Phi((w^T x - b) / sqrt(s^2 + sigma^2)) for
/// unit w.
double probit_halfspace_smoothed_prob(std::span<const double> w_unit, double b, double s,
                                      std::span<const double> x, double sigma);

/// P(|x + eps|_2 <= rho), eps ~ N(0, sigma^2 I). Exact at the origin for any
/// dimension; off-origin points are supported for d <= 3 by 1-D quadrature.
double nested_ball_smoothed_prob(double rho, std::span<const double> x, double sigma);

/// CDF of the chi-squared distribution with `dof` >= 1 degrees of freedom,
/// i.e. the regularized lower incomplete gamma P(dof/2, value/2).
double chi_squared_cdf(std::size_t dof, double value);

// ---------------------------------------------------------------------------
// JSON configuration.

/// Builds a classifier from {"kind": "...", ...}.
ClassifierHandle classifier_from_json(const nlohmann::json& doc);

ClassifierHandle load_classifier(const std::filesystem::path& path);

}  // namespace certsmooth

#endif  // CERTSMOOTH_CLASSIFIERS_HPP_
