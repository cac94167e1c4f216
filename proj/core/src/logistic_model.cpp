#include "adq/logistic_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "adq/error.hpp"
#include "adq/rng.hpp"

namespace adq {

InputNormalizer InputNormalizer::fit(const Dataset& dataset) {
  if (dataset.empty()) throw_validation("cannot fit a normalizer on an empty dataset");
  const std::size_t n = dataset.element_count();
  InputNormalizer norm;
  norm.mean.assign(n, 0.0);
  norm.inv_std.assign(n, 0.0);
  for (const Sample& s : dataset.samples()) {
    for (std::size_t j = 0; j < n; ++j) norm.mean[j] += s.values[j];
  }
  const double count = static_cast<double>(dataset.size());
  for (double& m : norm.mean) m /= count;
  std::vector<double> var(n, 0.0);
  for (const Sample& s : dataset.samples()) {
    for (std::size_t j = 0; j < n; ++j) {
      const double d = s.values[j] - norm.mean[j];
      var[j] += d * d;
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double sd = std::sqrt(var[j] / count);
    norm.inv_std[j] = sd > 1e-12 ? 1.0 / sd : 1.0;
  }
  return norm;
}

void softmax_inplace(std::span<double> values) {
  if (values.empty()) return;
  const double peak = *std::max_element(values.begin(), values.end());
  double total = 0.0;
  for (double& v : values) {
    v = std::exp(v - peak);
    total += v;
  }
  for (double& v : values) v /= total;
}

LogisticModel::LogisticModel(std::size_t input_dim, std::uint32_t num_classes)
    : input_dim_(input_dim), num_classes_(num_classes) {
  if (input_dim == 0) throw_validation("model input dimension must be positive");
  if (num_classes < 2) throw_validation("model needs at least 2 classes");
  params_.assign(input_dim * num_classes + num_classes, 0.0);
}

LogisticModel LogisticModel::random_init(std::size_t input_dim, std::uint32_t num_classes,
                                         std::uint64_t seed, double init_std) {
  LogisticModel model(input_dim, num_classes);
  Rng rng(seed);
  for (double& w : model.weights()) w = rng.normal(0.0, init_std);
  return model;
}

void LogisticModel::set_normalizer(InputNormalizer normalizer) {
  if (!normalizer.empty() &&
      (normalizer.mean.size() != input_dim_ || normalizer.inv_std.size() != input_dim_)) {
    throw_validation("normalizer dimension does not match the model");
  }
  normalizer_ = std::move(normalizer);
}

void LogisticModel::check_input(std::span<const float> input) const {
  if (input.size() != input_dim_) {
    throw_validation("input has " + std::to_string(input.size()) + " elements, model expects " +
                     std::to_string(input_dim_));
  }
}

std::vector<double> LogisticModel::prepare(std::span<const float> input) const {
  check_input(input);
  std::vector<double> x(input.begin(), input.end());
  if (!normalizer_.empty()) {
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = (x[j] - normalizer_.mean[j]) * normalizer_.inv_std[j];
  }
  return x;
}

void LogisticModel::logits(std::span<const double> x, std::span<double> out) const {
  const double* w = params_.data();
  const double* b = params_.data() + weight_count();
  for (std::uint32_t c = 0; c < num_classes_; ++c) {
    const double* row = w + c * input_dim_;
    double u = b[c];
    for (std::size_t j = 0; j < input_dim_; ++j) u += row[j] * x[j];
    out[c] = u;
  }
}

double LogisticModel::loss(std::span<const float> input, std::uint32_t label) const {
  if (label >= num_classes_) throw_validation("label out of range for model");
  const auto x = prepare(input);
  std::vector<double> u(num_classes_);
  logits(x, u);
  const double peak = *std::max_element(u.begin(), u.end());
  double total = 0.0;
  for (double v : u) total += std::exp(v - peak);
  return peak + std::log(total) - u[label];
}

std::vector<double> LogisticModel::gradient(std::span<const float> input, std::uint32_t label) const {
  if (label >= num_classes_) throw_validation("label out of range for model");
  const auto x = prepare(input);
  std::vector<double> p(num_classes_);
  logits(x, p);
  softmax_inplace(p);
  p[label] -= 1.0;

  std::vector<double> grad(params_.size());
  for (std::uint32_t c = 0; c < num_classes_; ++c) {
    double* row = grad.data() + c * input_dim_;
    for (std::size_t j = 0; j < input_dim_; ++j) row[j] = p[c] * x[j];
    grad[weight_count() + c] = p[c];
  }
  return grad;
}

std::vector<double> LogisticModel::features(std::span<const float> input) const {
  const auto x = prepare(input);
  std::vector<double> u(num_classes_);
  logits(x, u);
  return u;
}

std::uint32_t LogisticModel::predict(std::span<const float> input) const {
  const auto u = features(input);
  // max_element returns the first maximum, i.e. the lowest class index.
  return static_cast<std::uint32_t>(std::max_element(u.begin(), u.end()) - u.begin());
}

}  // namespace adq
