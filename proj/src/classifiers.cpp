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

#include "certsmooth/classifiers.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>

#include "certsmooth/numeric.hpp"

namespace certsmooth {

namespace {

constexpr std::size_t kMaxMlpClasses = 64;

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

// In-place softmax over logits.
void softmax_inplace(std::span<double> z) {
  const double top = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double& v : z) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : z) v /= total;
}

std::vector<double> flatten_rows(const nlohmann::json& rows, std::size_t cols,
                                 const char* name) {
  require(rows.is_array(), std::string(name) + " must be an array of rows");
  std::vector<double> flat;
  for (const auto& row : rows) {
    auto values = row.get<std::vector<double>>();
    require(values.size() == cols, std::string(name) + " row has wrong length");
    flat.insert(flat.end(), values.begin(), values.end());
  }
  return flat;
}

nlohmann::json rows_to_json(const std::vector<double>& flat, std::size_t cols) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < flat.size(); i += cols) {
    rows.push_back(std::vector<double>(flat.begin() + static_cast<std::ptrdiff_t>(i),
                                       flat.begin() + static_cast<std::ptrdiff_t>(i + cols)));
  }
  return rows;
}

// Adaptive Simpson on [a, b].
double simpson_recurse(const std::function<double(double)>& f, double a, double b, double fa,
                       double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// Integrates f over [lo, hi] on a uniform panel grid refined with the given
// breakpoints, so that narrow peaks are never stepped over.
double integrate(const std::function<double(double)>& f, double lo, double hi,
                 std::vector<double> breakpoints) {
  constexpr int kPanels = 64;
  for (int i = 0; i <= kPanels; ++i) breakpoints.push_back(lo + (hi - lo) * i / kPanels);
  std::erase_if(breakpoints, [&](double t) { return !(t >= lo && t <= hi); });
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    const double a = breakpoints[i];
    const double b = breakpoints[i + 1];
    if (b <= a) continue;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    total += simpson_recurse(f, a, b, fa, fm, fb, whole, 1e-14, 40);
  }
  return total;
}

}  // namespace

// ---------------------------------------------------------------------------

void Classifier::directional_derivatives(std::span<const double>, std::span<const double>,
                                         std::span<double>) const {
  throw UnsupportedDerivative("classifier '" + kind() + "' has no analytic derivative");
}

std::size_t argmax_lowest(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::vector<double> predict_probs(const Classifier& c, std::span<const double> x) {
  if (x.size() != c.dim()) {
    throw std::invalid_argument("dimension mismatch: classifier expects " +
                                std::to_string(c.dim()) + ", got " + std::to_string(x.size()));
  }
  std::vector<double> out(c.num_classes());
  c.probs(x, out);
  return out;
}

double directional_derivative(const Classifier& c, std::span<const double> x,
                              std::size_t class_idx, std::span<const double> v,
                              DerivativeFallback fallback) {
  if (x.size() != c.dim() || v.size() != c.dim()) {
    throw std::invalid_argument("dimension mismatch in directional_derivative");
  }
  if (class_idx >= c.num_classes()) throw std::out_of_range("class index out of range");

  if (c.has_gradient()) {
    std::vector<double> out(c.num_classes());
    c.directional_derivatives(x, v, out);
    return out[class_idx];
  }
  if (fallback == DerivativeFallback::kDisabled) {
    throw UnsupportedDerivative("classifier '" + c.kind() +
                                "' is value-only and the finite-difference fallback is disabled");
  }

  double inf_norm = 0.0;
  for (double xi : x) inf_norm = std::max(inf_norm, std::abs(xi));
  const double h = 1e-4 * (1.0 + inf_norm);
  std::vector<double> plus(x.begin(), x.end());
  std::vector<double> minus(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    plus[i] += h * v[i];
    minus[i] -= h * v[i];
  }
  std::vector<double> fp(c.num_classes());
  std::vector<double> fm(c.num_classes());
  c.probs(plus, fp);
  c.probs(minus, fm);
  return (fp[class_idx] - fm[class_idx]) / (2.0 * h);
}

// ---------------------------------------------------------------------------
// ConstantClassifier

ConstantClassifier::ConstantClassifier(std::size_t dim, std::vector<double> probs)
    : dim_(dim), probs_(std::move(probs)) {
  require(dim_ >= 1, "constant classifier: dim must be >= 1");
  require(!probs_.empty(), "constant classifier: empty probability vector");
  double total = 0.0;
  for (double p : probs_) {
    require(p >= 0.0, "constant classifier: negative probability");
    total += p;
  }
  require(std::abs(total - 1.0) <= 1e-9, "constant classifier: probabilities must sum to 1");
}

ConstantClassifier ConstantClassifier::uniform(std::size_t dim, std::size_t num_classes) {
  return ConstantClassifier(dim, std::vector<double>(num_classes, 1.0 / num_classes));
}

void ConstantClassifier::probs(std::span<const double>, std::span<double> out) const {
  std::copy(probs_.begin(), probs_.end(), out.begin());
}

void ConstantClassifier::directional_derivatives(std::span<const double>,
                                                 std::span<const double>,
                                                 std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
}

nlohmann::json ConstantClassifier::to_json() const {
  return {{"kind", kind()}, {"dim", dim_}, {"probs", probs_}};
}

// ---------------------------------------------------------------------------
// AffineSoftmaxClassifier

AffineSoftmaxClassifier::AffineSoftmaxClassifier(std::size_t dim, std::vector<double> weights,
                                                 std::vector<double> bias)
    : dim_(dim), weights_(std::move(weights)), bias_(std::move(bias)) {
  require(dim_ >= 1, "affine_softmax: dim must be >= 1");
  require(!bias_.empty(), "affine_softmax: need at least one class");
  require(weights_.size() == dim_ * bias_.size(), "affine_softmax: weight shape mismatch");
}

void AffineSoftmaxClassifier::probs(std::span<const double> x, std::span<double> out) const {
  const std::span<const double> w(weights_);
  for (std::size_t c = 0; c < bias_.size(); ++c) {
    out[c] = dot(w.subspan(c * dim_, dim_), x) + bias_[c];
  }
  softmax_inplace(out);
}

void AffineSoftmaxClassifier::directional_derivatives(std::span<const double> x,
                                                      std::span<const double> v,
                                                      std::span<double> out) const {
  std::vector<double> p(bias_.size());
  probs(x, p);
  const std::span<const double> w(weights_);
  double mean_slope = 0.0;
  for (std::size_t c = 0; c < bias_.size(); ++c) {
    out[c] = dot(w.subspan(c * dim_, dim_), v);
    mean_slope += p[c] * out[c];
  }
  for (std::size_t c = 0; c < bias_.size(); ++c) out[c] = p[c] * (out[c] - mean_slope);
}

nlohmann::json AffineSoftmaxClassifier::to_json() const {
  return {{"kind", kind()},
          {"dim", dim_},
          {"weights", rows_to_json(weights_, dim_)},
          {"bias", bias_}};
}

// ---------------------------------------------------------------------------
// ProbitHalfspaceClassifier

ProbitHalfspaceClassifier::ProbitHalfspaceClassifier(Point w, double b, double s)
    : w_(std::move(w)), b_(b), s_(s) {
  require(!w_.empty(), "probit_halfspace: empty weight vector");
  require(s_ > 0.0, "probit_halfspace: scale s must be positive");
}

void ProbitHalfspaceClassifier::probs(std::span<const double> x, std::span<double> out) const {
  const double z = (dot(w_, x) - b_) / s_;
  out[1] = std_normal_cdf(z);
  out[0] = std_normal_cdf(-z);
}

void ProbitHalfspaceClassifier::directional_derivatives(std::span<const double> x,
                                                        std::span<const double> v,
                                                        std::span<double> out) const {
  const double z = (dot(w_, x) - b_) / s_;
  const double slope = std_normal_pdf(z) * dot(w_, v) / s_;
  out[1] = slope;
  out[0] = -slope;
}

nlohmann::json ProbitHalfspaceClassifier::to_json() const {
  return {{"kind", kind()}, {"w", w_}, {"b", b_}, {"s", s_}};
}

// ---------------------------------------------------------------------------
// HardHalfspaceClassifier

HardHalfspaceClassifier::HardHalfspaceClassifier(Point w, double b) : w_(std::move(w)), b_(b) {
  require(!w_.empty(), "hard_halfspace: empty weight vector");
  require(norm2(w_) > 0.0, "hard_halfspace: degenerate weight vector");
}

void HardHalfspaceClassifier::probs(std::span<const double> x, std::span<double> out) const {
  const bool positive = dot(w_, x) > b_;
  out[0] = positive ? 0.0 : 1.0;
  out[1] = positive ? 1.0 : 0.0;
}

nlohmann::json HardHalfspaceClassifier::to_json() const {
  return {{"kind", kind()}, {"w", w_}, {"b", b_}};
}

// ---------------------------------------------------------------------------
// NestedBallClassifier

NestedBallClassifier::NestedBallClassifier(std::size_t dim, double rho) : dim_(dim), rho_(rho) {
  require(dim_ >= 1, "nested_ball: dim must be >= 1");
  require(rho_ > 0.0, "nested_ball: rho must be positive");
}

void NestedBallClassifier::probs(std::span<const double> x, std::span<double> out) const {
  const bool inside = dot(x, x) <= rho_ * rho_;
  out[0] = inside ? 0.0 : 1.0;
  out[1] = inside ? 1.0 : 0.0;
}

nlohmann::json NestedBallClassifier::to_json() const {
  return {{"kind", kind()}, {"dim", dim_}, {"rho", rho_}};
}

// ---------------------------------------------------------------------------
// MlpClassifier

void MlpParams::scale_add(const MlpParams& other, double factor) {
  auto axpy = [factor](std::vector<double>& dst, const std::vector<double>& src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += factor * src[i];
  };
  axpy(w1, other.w1);
  axpy(b1, other.b1);
  axpy(w2, other.w2);
  axpy(b2, other.b2);
}

void MlpParams::set_zero() {
  for (auto* v : {&w1, &b1, &w2, &b2}) std::fill(v->begin(), v->end(), 0.0);
}

MlpClassifier::MlpClassifier(std::size_t dim, std::size_t hidden, std::size_t classes,
                             MlpParams params)
    : dim_(dim), hidden_(hidden), classes_(classes), params_(std::move(params)) {
  require(dim_ >= 1, "mlp: dim must be >= 1");
  require(hidden_ >= 1 && hidden_ <= kMaxHidden, "mlp: hidden units must be in [1, 32]");
  require(classes_ >= 2 && classes_ <= kMaxMlpClasses, "mlp: classes must be in [2, 64]");
  require(params_.w1.size() == hidden_ * dim_ && params_.b1.size() == hidden_ &&
              params_.w2.size() == classes_ * hidden_ && params_.b2.size() == classes_,
          "mlp: parameter shapes do not match the architecture");
}

MlpClassifier MlpClassifier::random(std::size_t dim, std::size_t hidden, std::size_t classes,
                                    std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  auto glorot = [&engine](std::size_t fan_in, std::size_t fan_out, std::size_t count) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    std::vector<double> values(count);
    for (double& v : values) v = dist(engine);
    return values;
  };
  MlpParams params;
  params.w1 = glorot(dim, hidden, hidden * dim);
  params.b1.assign(hidden, 0.0);
  params.w2 = glorot(hidden, classes, classes * hidden);
  params.b2.assign(classes, 0.0);
  return MlpClassifier(dim, hidden, classes, std::move(params));
}

void MlpClassifier::hidden_layer(std::span<const double> x, std::span<double> act) const {
  const std::span<const double> w1(params_.w1);
  for (std::size_t j = 0; j < hidden_; ++j) {
    act[j] = std::tanh(dot(w1.subspan(j * dim_, dim_), x) + params_.b1[j]);
  }
}

void MlpClassifier::output_layer(std::span<const double> act, std::span<double> out) const {
  const std::span<const double> w2(params_.w2);
  for (std::size_t c = 0; c < classes_; ++c) {
    out[c] = dot(w2.subspan(c * hidden_, hidden_), act) + params_.b2[c];
  }
  softmax_inplace(out.first(classes_));
}

void MlpClassifier::probs(std::span<const double> x, std::span<double> out) const {
  std::array<double, kMaxHidden> act{};
  hidden_layer(x, std::span(act).first(hidden_));
  output_layer(std::span<const double>(act).first(hidden_), out);
}

void MlpClassifier::directional_derivatives(std::span<const double> x,
                                            std::span<const double> v,
                                            std::span<double> out) const {
  std::array<double, kMaxHidden> act{};
  std::array<double, kMaxHidden> dact{};
  std::array<double, kMaxMlpClasses> p{};
  const auto act_view = std::span(act).first(hidden_);
  hidden_layer(x, act_view);
  output_layer(act_view, std::span(p).first(classes_));

  const std::span<const double> w1(params_.w1);
  const std::span<const double> w2(params_.w2);
  for (std::size_t j = 0; j < hidden_; ++j) {
    dact[j] = (1.0 - act[j] * act[j]) * dot(w1.subspan(j * dim_, dim_), v);
  }
  double mean_slope = 0.0;
  for (std::size_t c = 0; c < classes_; ++c) {
    out[c] = dot(w2.subspan(c * hidden_, hidden_), std::span<const double>(dact).first(hidden_));
    mean_slope += p[c] * out[c];
  }
  for (std::size_t c = 0; c < classes_; ++c) out[c] = p[c] * (out[c] - mean_slope);
}

MlpParams MlpClassifier::zero_like() const {
  MlpParams zero = params_;
  zero.set_zero();
  return zero;
}

double MlpClassifier::accumulate_cross_entropy_gradient(std::span<const double> x,
                                                        std::size_t label,
                                                        MlpParams& grad) const {
  std::array<double, kMaxHidden> act{};
  std::array<double, kMaxHidden> dact{};
  std::array<double, kMaxMlpClasses> p{};
  const auto act_view = std::span(act).first(hidden_);
  hidden_layer(x, act_view);
  output_layer(act_view, std::span(p).first(classes_));
  const double loss = -std::log(std::max(p[label], 1e-300));

  // dL/dz2 = p - onehot(label)
  p[label] -= 1.0;
  for (std::size_t c = 0; c < classes_; ++c) {
    grad.b2[c] += p[c];
    for (std::size_t j = 0; j < hidden_; ++j) {
      grad.w2[c * hidden_ + j] += p[c] * act[j];
      dact[j] += p[c] * params_.w2[c * hidden_ + j];
    }
  }
  for (std::size_t j = 0; j < hidden_; ++j) {
    const double dz = dact[j] * (1.0 - act[j] * act[j]);
    grad.b1[j] += dz;
    for (std::size_t i = 0; i < dim_; ++i) grad.w1[j * dim_ + i] += dz * x[i];
  }
  return loss;
}

void MlpClassifier::apply_gradient(const MlpParams& grad, double learning_rate) {
  params_.scale_add(grad, -learning_rate);
}

nlohmann::json MlpClassifier::to_json() const {
  return {{"kind", kind()},
          {"dim", dim_},
          {"hidden", hidden_},
          {"classes", classes_},
          {"w1", rows_to_json(params_.w1, dim_)},
          {"b1", params_.b1},
          {"w2", rows_to_json(params_.w2, hidden_)},
          {"b2", params_.b2}};
}

// ---------------------------------------------------------------------------
// Oracles

double halfspace_smoothed_prob(std::span<const double> w, double b, std::span<const double> x,
                               double sigma) {
  require(w.size() == x.size(), "halfspace_smoothed_prob: dimension mismatch");
  const double wn = norm2(w);
  require(wn > 0.0, "halfspace_smoothed_prob: degenerate w");
  require(sigma > 0.0, "halfspace_smoothed_prob: sigma must be positive");
  return std_normal_cdf((dot(w, x) - b) / (sigma * wn));
}

double probit_halfspace_smoothed_prob(std::span<const double> w_unit, double b, double s,
                                      std::span<const double> x, double sigma) {
  require(w_unit.size() == x.size(), "probit_halfspace_smoothed_prob: dimension mismatch");
  require(std::abs(norm2(w_unit) - 1.0) <= 1e-9, "probit_halfspace_smoothed_prob: w must be unit");
  require(s > 0.0 && sigma >= 0.0, "probit_halfspace_smoothed_prob: need s > 0, sigma >= 0");
  return std_normal_cdf((dot(w_unit, x) - b) / std::sqrt(s * s + sigma * sigma));
}

double chi_squared_cdf(std::size_t dof, double value) {
  require(dof >= 1, "chi_squared_cdf: dof must be >= 1");
  if (value <= 0.0) return 0.0;
  const double t = 0.5 * value;
  // P(a + 1, t) = P(a, t) - t^a e^-t / Gamma(a + 1), seeded at a = 1/2 or 1.
  double a;
  double p;
  if (dof % 2 == 1) {
    a = 0.5;
    p = std::erf(std::sqrt(t));
  } else {
    a = 1.0;
    p = -std::expm1(-t);
  }
  while (2.0 * a < static_cast<double>(dof)) {
    p -= std::exp(a * std::log(t) - t - std::lgamma(a + 1.0));
    a += 1.0;
  }
  return std::clamp(p, 0.0, 1.0);
}

double nested_ball_smoothed_prob(double rho, std::span<const double> x, double sigma) {
  require(rho > 0.0 && sigma > 0.0, "nested_ball_smoothed_prob: need rho > 0, sigma > 0");
  require(!x.empty(), "nested_ball_smoothed_prob: empty point");
  const std::size_t d = x.size();
  const double a = norm2(x);
  if (a == 0.0) return chi_squared_cdf(d, (rho / sigma) * (rho / sigma));

  // Rotate so that x lies on the first axis; u is the coordinate along it.
  switch (d) {
    case 1:
      return std_normal_cdf((rho - a) / sigma) - std_normal_cdf((-rho - a) / sigma);
    case 2: {
      // u = rho sin(theta) removes the square-root endpoint singularity.
      auto integrand = [&](double theta) {
        const double u = rho * std::sin(theta);
        const double half_chord = rho * std::cos(theta);
        const double along = std_normal_pdf((u - a) / sigma) / sigma;
        const double across = std::erf(half_chord / (sigma * std::sqrt(2.0)));
        return along * across * half_chord;
      };
      const double half_pi = 0.5 * std::acos(-1.0);
      std::vector<double> breaks;
      if (a < rho + 10.0 * sigma) {
        const double peak = std::asin(std::min(1.0, a / rho));
        for (int k = -10; k <= 10; ++k) breaks.push_back(peak + k * sigma / rho);
      }
      return std::clamp(integrate(integrand, -half_pi, half_pi, breaks), 0.0, 1.0);
    }
    case 3: {
      auto integrand = [&](double u) {
        const double r2 = rho * rho - u * u;
        const double along = std_normal_pdf((u - a) / sigma) / sigma;
        return along * (-std::expm1(-r2 / (2.0 * sigma * sigma)));
      };
      std::vector<double> breaks;
      for (int k = -10; k <= 10; ++k) breaks.push_back(a + k * sigma);
      return std::clamp(integrate(integrand, -rho, rho, breaks), 0.0, 1.0);
    }
    default:
      throw std::invalid_argument(
          "nested_ball_smoothed_prob: off-origin points only supported for d <= 3");
  }
}

// ---------------------------------------------------------------------------
// JSON

ClassifierHandle classifier_from_json(const nlohmann::json& doc) {
  try {
    const auto kind = doc.at("kind").get<std::string>();
    if (kind == "constant") {
      return std::make_shared<ConstantClassifier>(doc.at("dim").get<std::size_t>(),
                                                  doc.at("probs").get<std::vector<double>>());
    }
    if (kind == "affine_softmax") {
      const auto dim = doc.at("dim").get<std::size_t>();
      return std::make_shared<AffineSoftmaxClassifier>(
          dim, flatten_rows(doc.at("weights"), dim, "weights"),
          doc.at("bias").get<std::vector<double>>());
    }
    if (kind == "probit_halfspace") {
      return std::make_shared<ProbitHalfspaceClassifier>(doc.at("w").get<Point>(),
                                                         doc.at("b").get<double>(),
                                                         doc.at("s").get<double>());
    }
    if (kind == "hard_halfspace") {
      return std::make_shared<HardHalfspaceClassifier>(doc.at("w").get<Point>(),
                                                       doc.at("b").get<double>());
    }
    if (kind == "nested_ball") {
      return std::make_shared<NestedBallClassifier>(doc.at("dim").get<std::size_t>(),
                                                    doc.at("rho").get<double>());
    }
    if (kind == "mlp") {
      const auto dim = doc.at("dim").get<std::size_t>();
      const auto hidden = doc.at("hidden").get<std::size_t>();
      const auto classes = doc.at("classes").get<std::size_t>();
      MlpParams params;
      params.w1 = flatten_rows(doc.at("w1"), dim, "w1");
      params.b1 = doc.at("b1").get<std::vector<double>>();
      params.w2 = flatten_rows(doc.at("w2"), hidden, "w2");
      params.b2 = doc.at("b2").get<std::vector<double>>();
      return std::make_shared<MlpClassifier>(dim, hidden, classes, std::move(params));
    }
    throw std::invalid_argument("unknown classifier kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed classifier document: ") + e.what());
  }
}

ClassifierHandle load_classifier(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open classifier file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("cannot parse " + path.string() + ": " + e.what());
  }
  return classifier_from_json(doc);
}

}  // namespace certsmooth
