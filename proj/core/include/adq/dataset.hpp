#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

namespace adq {

/// Height x width x channels of one sample. Elements are flattened
/// channel-planar (all of channel 0 row-major, then channel 1, ...),
/// the order CIFAR binaries store them in.
struct SampleShape {
  std::uint32_t height = 1;
  std::uint32_t width = 1;
  std::uint32_t channels = 1;

  std::size_t element_count() const {
    return static_cast<std::size_t>(height) * width * channels;
  }
  bool operator==(const SampleShape&) const = default;
};

/// Throws ValidationError if any dimension is zero.
void validate_shape(const SampleShape& shape);

struct Sample {
  std::vector<float> values;
  std::uint32_t label = 0;

  bool operator==(const Sample&) const = default;
};

/// Immutable, index-addressed collection of equally shaped labelled samples.
/// The position of a sample is its identity throughout the pipeline.
class Dataset {
 public:
  Dataset() = default;

  /// Validates shape, value finiteness, per-sample length and labels.
  Dataset(SampleShape shape, std::uint32_t num_classes, std::vector<Sample> samples);

  const SampleShape& shape() const { return shape_; }
  std::uint32_t num_classes() const { return num_classes_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  std::size_t element_count() const { return shape_.element_count(); }

  const Sample& operator[](std::size_t i) const { return samples_[i]; }
  const std::vector<Sample>& samples() const { return samples_; }

  /// New dataset holding the given samples in the given order.
  Dataset subset(std::span<const std::size_t> indices) const;

  bool operator==(const Dataset&) const = default;

 private:
  SampleShape shape_{};
  std::uint32_t num_classes_ = 1;
  std::vector<Sample> samples_;
};

inline constexpr std::size_t kCifarPixels = 32 * 32 * 3;

/// Parses concatenated CIFAR-10 (num_classes = 10, one label byte) or
/// CIFAR-100 (num_classes = 100, coarse + fine label bytes; the coarse
/// label is skipped) records. Pixel byte v becomes v / 255.
Dataset ingest_cifar_binary(std::span<const std::byte> file_bytes, std::uint32_t num_classes);

/// Values as little-endian float32, labels as little-endian uint32, both in
/// sample order.
Dataset ingest_raw(std::span<const std::byte> values_file, std::span<const std::byte> labels_file,
                   const SampleShape& shape, std::uint32_t num_classes);

/// Inverse of ingest_raw: returns (values bytes, labels bytes).
std::pair<std::vector<std::byte>, std::vector<std::byte>> write_raw(const Dataset& dataset);

/// Gaussian blobs, one isotropic cloud per class around a seeded mean in
/// [-2, 2]^dim, values clipped to [-8, 8]. Samples are interleaved by class
/// (label of sample i is i % num_classes). Shape is 1 x 1 x dim.
Dataset synth_blobs(std::uint32_t num_classes, std::uint32_t dim, std::uint32_t per_class,
                    double spread, std::uint64_t seed);

/// Half informative, half noise. Informative samples carry a random-sign
/// spike of magnitude 4 in element 0 and a class-dependent pattern of
/// amplitude <= 0.25 elsewhere, so a coarse symmetric quantizer erases the
/// class information. Noise samples are random +/-1 vectors with random
/// labels. Informative and noise samples alternate. Total size is
/// 2 * num_classes * per_class.
Dataset synth_half_noise(std::uint32_t num_classes, std::uint32_t dim, std::uint32_t per_class,
                         std::uint64_t seed);

/// Native dataset container ("ADQD" v1):
///   magic "ADQD" | u16 version | u64 N | u32 H | u32 W | u32 C | u32 classes
///   then N records of u32 label followed by H*W*C float32 values.
/// All little-endian.
std::vector<std::byte> encode_dataset(const Dataset& dataset);
Dataset decode_dataset(std::span<const std::byte> bytes);

void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace adq
