#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "adq/dataset.hpp"
#include "adq/logistic_model.hpp"
#include "adq/qds_format.hpp"

namespace adq {

struct TrainConfig {
  std::uint32_t epochs = 30;
  std::uint32_t batch_size = 64;
  double learning_rate = 0.1;
  double momentum = 0.9;
  double weight_decay = 2e-4;
  std::uint64_t seed = 42;
  /// Standardize inputs with per-feature statistics of the training set.
  bool normalize = true;
};

void validate(const TrainConfig& config);

struct TrainResult {
  LogisticModel model;
  std::vector<double> loss_curve;      // mean training loss per epoch
  std::vector<double> train_accuracy;  // training-set accuracy after each epoch
};

/// Mini-batch SGD with momentum on mean softmax cross-entropy. Weight decay
/// applies to weights, not biases. The initial model comes from the seed
/// alone, so two runs with the same seed start from the same parameters.
TrainResult train_with_history(const Dataset& dataset, const TrainConfig& config);

LogisticModel train(const Dataset& dataset, const TrainConfig& config);

/// Parameters every run with this config starts from.
LogisticModel initial_model(std::size_t input_dim, std::uint32_t num_classes, const TrainConfig& config);

/// Fraction of samples whose argmax prediction equals the label.
double evaluate(const LogisticModel& model, const Dataset& dataset);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Per-class seeded shuffle; round(test_fraction * class_count) samples of
/// each class go to test. Both index lists are returned ascending.
Split stratified_split(const Dataset& dataset, double test_fraction, std::uint64_t seed);

struct EvalReport {
  // Arm trained on the dequantized data.
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  std::vector<double> loss_curve;
  std::vector<double> train_accuracy_curve;
  // Arm trained on the original data.
  double baseline_train_accuracy = 0.0;
  double baseline_test_accuracy = 0.0;
  std::vector<double> baseline_loss_curve;

  double accuracy_delta = 0.0;  // test_accuracy - baseline_test_accuracy
  std::size_t train_size = 0;
  std::size_t quantized_train_size = 0;
  std::size_t test_size = 0;
};

/// Trains the same initial model on the original training samples and on
/// their dequantized counterparts (tombstones excluded), then evaluates both
/// on full-precision test data. Without `test_set` a stratified 80/20 split
/// of `original` seeded by config.seed is used and the file must be aligned
/// with `original`.
EvalReport compare(const Dataset& original, const QdsContents& quantized, const TrainConfig& config,
                   const std::optional<Dataset>& test_set = std::nullopt);

EvalReport compare(const Dataset& original, const std::filesystem::path& quantized_path,
                   const TrainConfig& config, const std::optional<Dataset>& test_set = std::nullopt);

std::string format_eval_porcelain(const EvalReport& report);
/// `epoch,loss,train_acc` rows for the dequantized arm.
std::string format_eval_csv(const EvalReport& report);

}  // namespace adq
