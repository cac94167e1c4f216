#include "adq/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "adq/byte_io.hpp"
#include "adq/error.hpp"
#include "adq/rng.hpp"

namespace adq {

namespace {

constexpr char kDatasetMagic[4] = {'A', 'D', 'Q', 'D'};
constexpr std::uint16_t kDatasetVersion = 1;
constexpr std::size_t kDatasetHeaderBytes = 4 + 2 + 8 + 4 * 4;

void check_label(std::uint32_t label, std::uint32_t num_classes, std::size_t index) {
  if (label >= num_classes) {
    throw_validation("sample " + std::to_string(index) + ": label " + std::to_string(label) +
                     " out of range for " + std::to_string(num_classes) + " classes");
  }
}

}  // namespace

void validate_shape(const SampleShape& shape) {
  if (shape.height == 0 || shape.width == 0 || shape.channels == 0) {
    throw_validation("sample shape dimensions must be positive");
  }
}

Dataset::Dataset(SampleShape shape, std::uint32_t num_classes, std::vector<Sample> samples)
    : shape_(shape), num_classes_(num_classes), samples_(std::move(samples)) {
  validate_shape(shape_);
  if (num_classes_ == 0) throw_validation("num_classes must be positive");
  const std::size_t n = shape_.element_count();
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const Sample& s = samples_[i];
    if (s.values.size() != n) {
      throw_validation("sample " + std::to_string(i) + " has " + std::to_string(s.values.size()) +
                       " values, expected " + std::to_string(n));
    }
    check_label(s.label, num_classes_, i);
    for (float v : s.values) {
      if (!std::isfinite(v)) throw_validation("sample " + std::to_string(i) + " has a non-finite value");
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<Sample> picked;
  picked.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= samples_.size()) throw_validation("subset index out of range");
    picked.push_back(samples_[i]);
  }
  return Dataset(shape_, num_classes_, std::move(picked));
}

Dataset ingest_cifar_binary(std::span<const std::byte> file_bytes, std::uint32_t num_classes) {
  if (num_classes != 10 && num_classes != 100) {
    throw_validation("CIFAR ingestion supports 10 or 100 classes");
  }
  const std::size_t label_bytes = num_classes == 100 ? 2 : 1;
  const std::size_t record = label_bytes + kCifarPixels;
  if (file_bytes.size() % record != 0) {
    throw_validation("CIFAR stream of " + std::to_string(file_bytes.size()) +
                     " bytes is not a multiple of the " + std::to_string(record) + "-byte record");
  }
  const std::size_t count = file_bytes.size() / record;
  std::vector<Sample> samples(count);
  for (std::size_t r = 0; r < count; ++r) {
    const std::byte* rec = file_bytes.data() + r * record;
    // CIFAR-100 stores <coarse><fine>; the fine label is the class.
    const auto label = std::to_integer<std::uint32_t>(rec[label_bytes - 1]);
    check_label(label, num_classes, r);
    Sample& s = samples[r];
    s.label = label;
    s.values.resize(kCifarPixels);
    const std::byte* pixels = rec + label_bytes;
    for (std::size_t i = 0; i < kCifarPixels; ++i) {
      s.values[i] = static_cast<float>(std::to_integer<unsigned>(pixels[i]) / 255.0);
    }
  }
  return Dataset(SampleShape{32, 32, 3}, num_classes, std::move(samples));
}

Dataset ingest_raw(std::span<const std::byte> values_file, std::span<const std::byte> labels_file,
                   const SampleShape& shape, std::uint32_t num_classes) {
  validate_shape(shape);
  const std::size_t n = shape.element_count();
  if (labels_file.size() % 4 != 0) throw_validation("label file length is not a multiple of 4");
  const std::size_t count = labels_file.size() / 4;
  if (values_file.size() != count * n * 4) {
    throw_validation("value file holds " + std::to_string(values_file.size()) + " bytes but " +
                     std::to_string(count) + " labels of " + std::to_string(n) +
                     " float32 elements need " + std::to_string(count * n * 4));
  }
  std::vector<Sample> samples(count);
  for (std::size_t r = 0; r < count; ++r) {
    samples[r].label = load_u32(labels_file.data() + 4 * r);
    samples[r].values.resize(n);
    const std::byte* src = values_file.data() + r * n * 4;
    for (std::size_t i = 0; i < n; ++i) samples[r].values[i] = load_f32(src + 4 * i);
  }
  return Dataset(shape, num_classes, std::move(samples));
}

std::pair<std::vector<std::byte>, std::vector<std::byte>> write_raw(const Dataset& dataset) {
  ByteWriter values;
  ByteWriter labels;
  for (const Sample& s : dataset.samples()) {
    for (float v : s.values) values.put_f32(v);
    labels.put_u32(s.label);
  }
  return {values.take(), labels.take()};
}

Dataset synth_blobs(std::uint32_t num_classes, std::uint32_t dim, std::uint32_t per_class,
                    double spread, std::uint64_t seed) {
  if (num_classes < 2) throw_validation("synth_blobs needs at least 2 classes");
  if (dim < 1) throw_validation("synth_blobs needs dim >= 1");
  if (per_class < 1) throw_validation("synth_blobs needs per_class >= 1");
  if (!(spread > 0.0) || !std::isfinite(spread)) throw_validation("synth_blobs needs spread > 0");

  Rng rng(seed);
  std::vector<std::vector<double>> means(num_classes, std::vector<double>(dim));
  for (std::uint32_t c = 0; c < num_classes; ++c) {
    bool distinct = false;
    while (!distinct) {
      for (auto& m : means[c]) m = rng.uniform(-2.0, 2.0);
      distinct = std::none_of(means.begin(), means.begin() + c,
                              [&](const std::vector<double>& other) { return other == means[c]; });
    }
  }

  const std::size_t total = static_cast<std::size_t>(num_classes) * per_class;
  std::vector<Sample> samples(total);
  for (std::size_t i = 0; i < total; ++i) {
    const auto label = static_cast<std::uint32_t>(i % num_classes);
    Sample& s = samples[i];
    s.label = label;
    s.values.resize(dim);
    for (std::uint32_t j = 0; j < dim; ++j) {
      const double v = std::clamp(rng.normal(means[label][j], spread), -8.0, 8.0);
      s.values[j] = static_cast<float>(v);
    }
  }
  return Dataset(SampleShape{1, 1, dim}, num_classes, std::move(samples));
}

Dataset synth_half_noise(std::uint32_t num_classes, std::uint32_t dim, std::uint32_t per_class,
                         std::uint64_t seed) {
  if (num_classes < 2) throw_validation("synth_half_noise needs at least 2 classes");
  if (dim < 2) throw_validation("synth_half_noise needs dim >= 2");
  if (per_class < 1) throw_validation("synth_half_noise needs per_class >= 1");

  constexpr double kSpike = 4.0;
  constexpr double kPatternMax = 0.25;

  Rng rng(seed);
  std::vector<std::vector<double>> patterns(num_classes, std::vector<double>(dim, 0.0));
  for (auto& p : patterns) {
    for (std::uint32_t j = 1; j < dim; ++j) p[j] = rng.uniform(-0.2, 0.2);
  }

  const std::size_t informative = static_cast<std::size_t>(num_classes) * per_class;
  std::vector<Sample> samples;
  samples.reserve(2 * informative);
  for (std::size_t i = 0; i < informative; ++i) {
    Sample signal;
    signal.label = static_cast<std::uint32_t>(i % num_classes);
    signal.values.resize(dim);
    signal.values[0] = static_cast<float>(rng.uniform() < 0.5 ? -kSpike : kSpike);
    for (std::uint32_t j = 1; j < dim; ++j) {
      const double v = patterns[signal.label][j] + rng.normal(0.0, 0.03);
      signal.values[j] = static_cast<float>(std::clamp(v, -kPatternMax, kPatternMax));
    }
    samples.push_back(std::move(signal));

    Sample noise;
    noise.label = static_cast<std::uint32_t>(rng.below(num_classes));
    noise.values.resize(dim);
    for (auto& v : noise.values) v = rng.uniform() < 0.5 ? -1.0f : 1.0f;
    samples.push_back(std::move(noise));
  }
  return Dataset(SampleShape{1, 1, dim}, num_classes, std::move(samples));
}

std::vector<std::byte> encode_dataset(const Dataset& dataset) {
  ByteWriter out;
  for (char c : kDatasetMagic) out.put_u8(static_cast<std::uint8_t>(c));
  out.put_u16(kDatasetVersion);
  out.put_u64(dataset.size());
  out.put_u32(dataset.shape().height);
  out.put_u32(dataset.shape().width);
  out.put_u32(dataset.shape().channels);
  out.put_u32(dataset.num_classes());
  for (const Sample& s : dataset.samples()) {
    out.put_u32(s.label);
    for (float v : s.values) out.put_f32(v);
  }
  return out.take();
}

Dataset decode_dataset(std::span<const std::byte> bytes) {
  if (bytes.size() < kDatasetHeaderBytes) throw_format("dataset file shorter than its header");
  const std::byte* p = bytes.data();
  if (std::memcmp(p, kDatasetMagic, 4) != 0) throw_format("bad dataset magic (expected ADQD)");
  if (load_u16(p + 4) != kDatasetVersion) throw_format("unsupported dataset version");
  const std::uint64_t count = load_u64(p + 6);
  SampleShape shape{load_u32(p + 14), load_u32(p + 18), load_u32(p + 22)};
  const std::uint32_t num_classes = load_u32(p + 26);
  validate_shape(shape);
  const std::size_t n = shape.element_count();
  const std::size_t record = 4 + 4 * n;
  if ((bytes.size() - kDatasetHeaderBytes) / record < count ||
      bytes.size() - kDatasetHeaderBytes != count * record) {
    throw_format("dataset file length does not match its header");
  }
  std::vector<Sample> samples(count);
  p += kDatasetHeaderBytes;
  for (auto& s : samples) {
    s.label = load_u32(p);
    s.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.values[i] = load_f32(p + 4 + 4 * i);
    p += record;
  }
  return Dataset(shape, num_classes, std::move(samples));
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  write_file_atomic(path, encode_dataset(dataset));
}

Dataset load_dataset(const std::filesystem::path& path) { return decode_dataset(read_file(path)); }

}  // namespace adq
