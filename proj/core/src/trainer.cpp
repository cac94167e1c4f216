#include "adq/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "adq/error.hpp"
#include "adq/rng.hpp"

namespace adq {

namespace {

constexpr std::uint64_t kShuffleStream = 0x9E3779B97F4A7C15ull;
constexpr std::uint64_t kSplitStream = 0xD1B54A32D192ED03ull;

// Adds the cross-entropy gradient of one prepared sample into `grad` and
// returns its loss.
double accumulate(const LogisticModel& model, std::span<const double> x, std::uint32_t label,
                  std::span<double> probs, std::span<double> grad) {
  model.logits(x, probs);
  const double peak = *std::max_element(probs.begin(), probs.end());
  double total = 0.0;
  for (double v : probs) total += std::exp(v - peak);
  const double loss = peak + std::log(total) - probs[label];
  softmax_inplace(probs);
  probs[label] -= 1.0;

  const std::size_t dim = model.input_dim();
  const std::size_t weights = model.weight_count();
  for (std::uint32_t c = 0; c < model.num_classes(); ++c) {
    const double p = probs[c];
    double* row = grad.data() + c * dim;
    for (std::size_t j = 0; j < dim; ++j) row[j] += p * x[j];
    grad[weights + c] += p;
  }
  return loss;
}

}  // namespace

void validate(const TrainConfig& config) {
  if (config.batch_size == 0) throw_validation("batch size must be positive");
  if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
    throw_validation("learning rate must be positive");
  }
  if (!(config.momentum >= 0.0 && config.momentum < 1.0)) throw_validation("momentum must lie in [0, 1)");
  if (!(config.weight_decay >= 0.0) || !std::isfinite(config.weight_decay)) {
    throw_validation("weight decay must be non-negative");
  }
}

LogisticModel initial_model(std::size_t input_dim, std::uint32_t num_classes, const TrainConfig& config) {
  return LogisticModel::random_init(input_dim, num_classes, config.seed);
}

TrainResult train_with_history(const Dataset& dataset, const TrainConfig& config) {
  validate(config);
  if (dataset.empty()) throw_validation("cannot train on an empty dataset");

  TrainResult result{initial_model(dataset.element_count(), dataset.num_classes(), config), {}, {}};
  LogisticModel& model = result.model;
  if (config.normalize) model.set_normalizer(InputNormalizer::fit(dataset));

  const std::size_t n = dataset.size();
  const std::size_t weights = model.weight_count();
  auto params = model.parameters();
  std::vector<double> velocity(params.size(), 0.0);
  std::vector<double> grad(params.size());
  std::vector<double> probs(model.num_classes());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng shuffler(config.seed ^ kShuffleStream);

  for (std::uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffler.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t end = std::min(n, start + config.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t k = start; k < end; ++k) {
        const Sample& s = dataset[order[k]];
        const auto x = model.prepare(s.values);
        epoch_loss += accumulate(model, x, s.label, probs, grad);
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      for (std::size_t p = 0; p < params.size(); ++p) {
        double g = grad[p] * inv;
        if (p < weights) g += config.weight_decay * params[p];
        velocity[p] = config.momentum * velocity[p] + g;
        params[p] -= config.learning_rate * velocity[p];
      }
    }
    epoch_loss /= static_cast<double>(n);
    if (!std::isfinite(epoch_loss)) {
      throw DivergenceError("training diverged: non-finite loss in epoch " + std::to_string(epoch + 1));
    }
    result.loss_curve.push_back(epoch_loss);
    result.train_accuracy.push_back(evaluate(model, dataset));
  }
  return result;
}

LogisticModel train(const Dataset& dataset, const TrainConfig& config) {
  return train_with_history(dataset, config).model;
}

double evaluate(const LogisticModel& model, const Dataset& dataset) {
  if (dataset.element_count() != model.input_dim()) {
    throw_validation("model expects " + std::to_string(model.input_dim()) + " inputs, dataset has " +
                     std::to_string(dataset.element_count()));
  }
  if (dataset.empty()) throw_validation("cannot evaluate on an empty dataset");
  std::size_t correct = 0;
  for (const Sample& s : dataset.samples()) {
    if (model.predict(s.values) == s.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

Split stratified_split(const Dataset& dataset, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) throw_validation("test fraction must lie in [0, 1)");
  std::vector<std::vector<std::size_t>> by_class(dataset.num_classes());
  for (std::size_t i = 0; i < dataset.size(); ++i) by_class[dataset[i].label].push_back(i);
  Rng rng(seed ^ kSplitStream);
  Split split;
  for (auto& members : by_class) {
    rng.shuffle(members);
    const auto test_count = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(members.size())));
    split.test.insert(split.test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(test_count));
    split.train.insert(split.train.end(), members.begin() + static_cast<std::ptrdiff_t>(test_count), members.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

EvalReport compare(const Dataset& original, const QdsContents& quantized, const TrainConfig& config,
                   const std::optional<Dataset>& test_set) {
  const QdsHeader& h = quantized.header;
  if (h.sample_count != original.size() || quantized.entries.size() != original.size()) {
    throw_validation("quantized file holds " + std::to_string(quantized.entries.size()) +
                     " records but the original dataset has " + std::to_string(original.size()));
  }
  if (!(h.shape == original.shape()) || h.num_classes != original.num_classes()) {
    throw_validation("quantized file shape or class count differs from the original dataset");
  }
  for (std::size_t i = 0; i < original.size(); ++i) {
    const auto& e = quantized.entries[i];
    const std::uint32_t label = std::holds_alternative<QuantizedSample>(e) ? std::get<QuantizedSample>(e).label
                                                                           : std::get<DroppedSample>(e).label;
    if (h.has_labels() && label != original[i].label) {
      throw_validation("label mismatch at sample " + std::to_string(i));
    }
  }

  std::vector<std::size_t> train_idx;
  std::optional<Dataset> held_out;
  if (test_set) {
    if (!(test_set->shape() == original.shape()) || test_set->num_classes() != original.num_classes()) {
      throw_validation("test set shape or class count differs from the training data");
    }
    train_idx.resize(original.size());
    std::iota(train_idx.begin(), train_idx.end(), std::size_t{0});
  } else {
    Split split = stratified_split(original, 0.2, config.seed);
    train_idx = std::move(split.train);
    held_out = original.subset(split.test);
  }
  const Dataset& test = test_set ? *test_set : *held_out;

  std::vector<Sample> q_samples;
  for (std::size_t i : train_idx) {
    if (const auto* q = std::get_if<QuantizedSample>(&quantized.entries[i])) {
      Sample s = dequantize_sample(*q);
      s.label = original[i].label;
      q_samples.push_back(std::move(s));
    }
  }
  if (q_samples.empty()) throw_validation("every training sample was dropped; nothing to train on");

  const Dataset baseline_train = original.subset(train_idx);
  const Dataset quantized_train(original.shape(), original.num_classes(), std::move(q_samples));

  const TrainResult base = train_with_history(baseline_train, config);
  const TrainResult quant = train_with_history(quantized_train, config);

  EvalReport r;
  r.train_accuracy = evaluate(quant.model, quantized_train);
  r.test_accuracy = evaluate(quant.model, test);
  r.loss_curve = quant.loss_curve;
  r.train_accuracy_curve = quant.train_accuracy;
  r.baseline_train_accuracy = evaluate(base.model, baseline_train);
  r.baseline_test_accuracy = evaluate(base.model, test);
  r.baseline_loss_curve = base.loss_curve;
  r.accuracy_delta = r.test_accuracy - r.baseline_test_accuracy;
  r.train_size = baseline_train.size();
  r.quantized_train_size = quantized_train.size();
  r.test_size = test.size();
  return r;
}

EvalReport compare(const Dataset& original, const std::filesystem::path& quantized_path,
                   const TrainConfig& config, const std::optional<Dataset>& test_set) {
  return compare(original, read_qds(quantized_path), config, test_set);
}

std::string format_eval_porcelain(const EvalReport& r) {
  char buf[768];
  std::snprintf(buf, sizeof buf,
                "train_size=%zu\nquantized_train_size=%zu\ntest_size=%zu\n"
                "baseline_train_accuracy=%.6f\nbaseline_test_accuracy=%.6f\n"
                "train_accuracy=%.6f\ntest_accuracy=%.6f\naccuracy_delta=%.6f\n"
                "final_loss=%.9g\nbaseline_final_loss=%.9g\n",
                r.train_size, r.quantized_train_size, r.test_size, r.baseline_train_accuracy,
                r.baseline_test_accuracy, r.train_accuracy, r.test_accuracy, r.accuracy_delta,
                r.loss_curve.empty() ? 0.0 : r.loss_curve.back(),
                r.baseline_loss_curve.empty() ? 0.0 : r.baseline_loss_curve.back());
  return buf;
}

std::string format_eval_csv(const EvalReport& r) {
  std::string out = "epoch,loss,train_acc\n";
  char line[96];
  for (std::size_t e = 0; e < r.loss_curve.size(); ++e) {
    std::snprintf(line, sizeof line, "%zu,%.9g,%.6f\n", e + 1, r.loss_curve[e], r.train_accuracy_curve[e]);
    out += line;
  }
  return out;
}

}  // namespace adq
