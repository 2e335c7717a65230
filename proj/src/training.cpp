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

#include "certsmooth/training.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

#include "certsmooth/rng.hpp"

namespace certsmooth {

TrainFunction gaussian_augmentation_trainer(TrainerConfig cfg) {
  if (!(cfg.learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (cfg.noise_draws < 1) throw std::invalid_argument("noise_draws must be >= 1");
  return [cfg](MlpClassifier& model, std::span<const Point> points,
               std::span<const std::size_t> labels, std::span<const double> sigmas,
               std::uint64_t seed) {
    auto engine = make_engine(seed, Stream::kTrain);
    std::normal_distribution<double> normal(0.0, 1.0);
    MlpParams grad = model.zero_like();
    double loss = 0.0;
    std::vector<double> noisy;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const Point& x = points[i];
      noisy.resize(x.size());
      for (std::size_t draw = 0; draw < cfg.noise_draws; ++draw) {
        for (std::size_t j = 0; j < x.size(); ++j) noisy[j] = x[j] + sigmas[i] * normal(engine);
        loss += model.accumulate_cross_entropy_gradient(noisy, labels[i], grad);
      }
    }
    const double count = static_cast<double>(points.size() * cfg.noise_draws);
    if (count > 0.0) model.apply_gradient(grad, cfg.learning_rate / count);
    return count > 0.0 ? loss / count : 0.0;
  };
}

TrainBatchResult train_batch(Classifier& model, std::span<const Point> points,
                             std::span<const std::size_t> labels, std::span<const double> sigmas,
                             const SigmaOptConfig& opt, const TrainFunction& trainer,
                             std::uint64_t seed) {
  auto* trainable = dynamic_cast<MlpClassifier*>(&model);
  if (trainable == nullptr) {
    throw std::invalid_argument("classifier '" + model.kind() + "' is not trainable");
  }
  if (points.size() != labels.size() || points.size() != sigmas.size()) {
    throw std::invalid_argument("train_batch: points, labels and sigmas are not aligned");
  }

  TrainBatchResult result;
  result.sigmas.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (sigmas[i] < opt.sigma_min || sigmas[i] > opt.sigma_max) {
      throw std::invalid_argument("carried sigma outside [sigma_min, sigma_max]");
    }
    SigmaOptConfig per_input = opt;
    per_input.sigma0 = sigmas[i];
    per_input.noise = NoiseKind::kGaussian;
    per_input.seed = mix_seed(seed, i);
    result.sigmas.push_back(optimize_sigma(*trainable, points[i], per_input).sigma_star);
    ++result.optimize_calls;
  }
  result.loss = trainer(*trainable, points, labels, result.sigmas, seed);
  return result;
}

TrainingHistory train_model(MlpClassifier& model, const LabeledDataset& data,
                            const TrainingConfig& cfg) {
  if (cfg.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  cfg.opt.validate();
  const auto trainer = gaussian_augmentation_trainer(cfg.trainer);

  TrainingHistory history;
  std::vector<double> carried(data.size(), cfg.opt.sigma0);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<Point> points;
  std::vector<std::size_t> labels;
  std::vector<double> sigmas;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::uint64_t epoch_seed = mix_seed(cfg.seed, epoch);
    std::mt19937_64 shuffle_engine(epoch_seed);
    std::shuffle(order.begin(), order.end(), shuffle_engine);

    double loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      points.clear();
      labels.clear();
      sigmas.clear();
      for (std::size_t k = start; k < stop; ++k) {
        points.push_back(data.points[order[k]]);
        labels.push_back(data.labels[order[k]]);
        sigmas.push_back(carried[order[k]]);
      }
      const auto batch = train_batch(model, points, labels, sigmas, cfg.opt, trainer,
                                     mix_seed(epoch_seed, batches));
      for (std::size_t k = start; k < stop; ++k) carried[order[k]] = batch.sigmas[k - start];
      loss += batch.loss;
      ++batches;
    }
    history.epoch_loss.push_back(batches > 0 ? loss / static_cast<double>(batches) : 0.0);
    history.sigmas.push_back(carried);
  }
  return history;
}

SyntheticKind synthetic_kind_from_string(const std::string& text) {
  if (text == "annuli") return SyntheticKind::kConcentricAnnuli;
  if (text == "clusters") return SyntheticKind::kTwoClusters;
  throw std::invalid_argument("unknown synthetic dataset '" + text + "'");
}

DemoConfig default_demo_config() {
  DemoConfig cfg;
  cfg.train.epochs = 60;
  cfg.train.batch_size = 32;
  cfg.train.trainer.learning_rate = 0.3;
  cfg.train.trainer.noise_draws = 4;
  cfg.train.opt.sigma0 = 0.25;
  cfg.train.opt.sigma_min = 0.05;
  cfg.train.opt.sigma_max = 1.0;
  cfg.train.opt.step_alpha = 0.05;
  cfg.train.opt.iters_k = 5;
  cfg.train.opt.n_samples = 32;

  cfg.certify.cert.n0 = 100;
  cfg.certify.cert.n_cert = 10000;
  cfg.certify.cert.alpha_fail = 0.001;
  cfg.certify.opt.sigma0 = 0.25;
  cfg.certify.opt.sigma_min = 0.05;
  cfg.certify.opt.sigma_max = 1.0;
  cfg.certify.opt.step_alpha = 0.05;
  cfg.certify.opt.iters_k = 50;
  cfg.certify.opt.n_samples = 128;
  return cfg;
}

std::vector<DemoSeedResult> run_train_demo(const DemoConfig& cfg) {
  std::vector<DemoSeedResult> results;
  for (std::size_t s = 0; s < cfg.num_seeds; ++s) {
    const std::uint64_t seed = cfg.base_seed + s;
    const auto make = [&](std::size_t n, std::uint64_t data_seed) {
      return cfg.dataset == SyntheticKind::kConcentricAnnuli ? make_concentric_annuli(n, data_seed)
                                                             : make_two_clusters(n, data_seed);
    };
    const LabeledDataset train = make(cfg.n_train, seed);
    const LabeledDataset test = make(cfg.n_test, mix_seed(seed, 0x74657374ULL));

    const MlpClassifier init = MlpClassifier::random(train.dim(), cfg.hidden, 2, seed);

    TrainingConfig ds_train = cfg.train;
    ds_train.seed = seed;
    MlpClassifier ds_model = init;
    train_model(ds_model, train, ds_train);

    TrainingConfig fixed_train = ds_train;
    fixed_train.opt.iters_k = 0;
    MlpClassifier fixed_model = init;
    train_model(fixed_model, train, fixed_train);

    CampaignConfig ds_cert = cfg.certify;
    ds_cert.mode = CampaignMode::kDs;
    ds_cert.seed = seed;
    CampaignConfig fixed_cert = ds_cert;
    fixed_cert.mode = CampaignMode::kFixedSigma;

    DemoSeedResult row;
    row.seed = seed;
    row.data_dependent = run_campaign(ds_model, test, ds_cert).metrics;
    row.fixed = run_campaign(fixed_model, test, fixed_cert).metrics;
    results.push_back(std::move(row));
  }
  return results;
}

}  // namespace certsmooth
