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

#ifndef CERTSMOOTH_TRAINING_HPP_
#define CERTSMOOTH_TRAINING_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "certsmooth/campaign.hpp"
#include "certsmooth/classifiers.hpp"
#include "certsmooth/dataset.hpp"
#include "certsmooth/sigma_opt.hpp"

namespace certsmooth {

/// One optimisation step of the model on a batch, given a noise scale per
/// input. Returns the mean training loss.
using TrainFunction = std::function<double(MlpClassifier& model, std::span<const Point> points,
                                           std::span<const std::size_t> labels,
                                           std::span<const double> sigmas, std::uint64_t seed)>;

struct TrainerConfig {
  double learning_rate = 0.1;
  std::size_t noise_draws = 1;  // Gaussian draws per input and step
};

/// Gaussian data augmentation: cross-entropy on f(x_i + sigma_i eps), one SGD
/// step on the batch mean gradient.
TrainFunction gaussian_augmentation_trainer(TrainerConfig cfg);

struct TrainBatchResult {
  std::vector<double> sigmas;  // sigma*_i, carried to the next epoch
  std::size_t optimize_calls = 0;
  double loss = 0.0;
};

/// Optimises sigma for every batch input (starting from the carried sigma_i)
/// and then hands the batch with those scales to the trainer once. Throws
/// std::invalid_argument when `model` is not the trainable perceptron.
TrainBatchResult train_batch(Classifier& model, std::span<const Point> points,
                             std::span<const std::size_t> labels, std::span<const double> sigmas,
                             const SigmaOptConfig& opt, const TrainFunction& trainer,
                             std::uint64_t seed);

struct TrainingConfig {
  std::size_t epochs = 60;
  std::size_t batch_size = 32;
  TrainerConfig trainer;
  /// iters_k = 0 reduces to fixed-sigma Gaussian augmentation at sigma0.
  SigmaOptConfig opt;
  std::uint64_t seed = 0;
};

struct TrainingHistory {
  std::vector<double> epoch_loss;
  /// Carried per-input sigmas after each epoch.
  std::vector<std::vector<double>> sigmas;
};

/// Shuffled mini-batch training with per-input sigma carried across epochs.
TrainingHistory train_model(MlpClassifier& model, const LabeledDataset& data,
                            const TrainingConfig& cfg);

enum class SyntheticKind { kConcentricAnnuli, kTwoClusters };

SyntheticKind synthetic_kind_from_string(const std::string& text);

struct DemoConfig {
  SyntheticKind dataset = SyntheticKind::kConcentricAnnuli;
  std::size_t num_seeds = 10;
  std::uint64_t base_seed = 0;
  std::size_t n_train = 400;
  std::size_t n_test = 100;
  std::size_t hidden = 16;
  TrainingConfig train;
  /// Certification settings shared by both arms; `mode` is set per arm.
  CampaignConfig certify;
};

/// Default demo settings used by the CLI and the acceptance suite.
DemoConfig default_demo_config();

struct DemoSeedResult {
  std::uint64_t seed = 0;
  MetricsSummary data_dependent;  // trained with per-input sigma, certified with memory
  MetricsSummary fixed;           // trained and certified at sigma0
};

/// For each seed: trains one perceptron with per-input sigma and a copy of
/// the same initialisation at fixed sigma0, then certifies the first with the
/// data-dependent pipeline and the second at sigma0 on a held-out sample.
std::vector<DemoSeedResult> run_train_demo(const DemoConfig& cfg);

}  // namespace certsmooth

#endif  // CERTSMOOTH_TRAINING_HPP_
