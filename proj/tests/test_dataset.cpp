#include <doctest.h>

#include <cstring>
#include <filesystem>

#include "adq/dataset.hpp"
#include "adq/error.hpp"
#include "adq/trainer.hpp"
#include "oracles.hpp"

using namespace adq;

namespace {

std::vector<std::byte> cifar10_record(std::uint8_t label, auto pixel) {
  std::vector<std::byte> rec(1 + kCifarPixels);
  rec[0] = std::byte{label};
  for (std::size_t i = 0; i < kCifarPixels; ++i) rec[1 + i] = std::byte{static_cast<std::uint8_t>(pixel(i))};
  return rec;
}

}  // namespace

TEST_CASE("cifar: single all-white record") {
  auto bytes = cifar10_record(7, [](std::size_t) { return 255; });
  REQUIRE(bytes.size() == 3073);
  const Dataset d = ingest_cifar_binary(bytes, 10);
  REQUIRE(d.size() == 1);
  CHECK(d[0].label == 7);
  CHECK(d.shape() == SampleShape{32, 32, 3});
  for (float v : d[0].values) REQUIRE(v == 1.0f);
}

TEST_CASE("cifar: empty stream is an empty dataset") {
  const Dataset d = ingest_cifar_binary({}, 10);
  CHECK(d.empty());
  CHECK(d.num_classes() == 10);
}

TEST_CASE("cifar: two records match an independent byte decoder") {
  auto a = cifar10_record(3, [](std::size_t i) { return (i * 7) % 256; });
  auto b = cifar10_record(9, [](std::size_t i) { return 255 - i % 256; });
  std::vector<std::byte> stream(a);
  stream.insert(stream.end(), b.begin(), b.end());

  const Dataset d = ingest_cifar_binary(stream, 10);
  REQUIRE(d.size() == 2);
  for (std::size_t r = 0; r < 2; ++r) {
    const unsigned char* raw = reinterpret_cast<const unsigned char*>(stream.data()) + r * 3073;
    CHECK(d[r].label == raw[0]);
    for (std::size_t i = 0; i < kCifarPixels; ++i) {
      const float expected = static_cast<float>(raw[1 + i] / 255.0);
      REQUIRE(d[r].values[i] == expected);
    }
  }
  CHECK(d[0].values[0] == 0.0f);
}

TEST_CASE("cifar-100: fine label is used, coarse ignored") {
  std::vector<std::byte> rec(2 + kCifarPixels, std::byte{0});
  rec[0] = std::byte{19};
  rec[1] = std::byte{42};
  const Dataset d = ingest_cifar_binary(rec, 100);
  REQUIRE(d.size() == 1);
  CHECK(d[0].label == 42);
}

TEST_CASE("cifar: errors") {
  std::vector<std::byte> truncated(3072);
  CHECK_THROWS_AS(ingest_cifar_binary(truncated, 10), ValidationError);
  auto bad_label = cifar10_record(10, [](std::size_t) { return 0; });
  CHECK_THROWS_AS(ingest_cifar_binary(bad_label, 10), ValidationError);
  CHECK_THROWS_AS(ingest_cifar_binary({}, 7), ValidationError);
}

TEST_CASE("raw: empty and single-element inputs") {
  CHECK(ingest_raw({}, {}, SampleShape{2, 2, 1}, 3).empty());

  const float half = 0.5f;
  std::byte value[4];
  std::memcpy(value, &half, 4);  // host is little-endian in every supported build
  const std::byte label[4] = {};
  const Dataset d = ingest_raw(value, label, SampleShape{1, 1, 1}, 1);
  REQUIRE(d.size() == 1);
  CHECK(d[0].values == std::vector<float>{0.5f});
  CHECK(d[0].label == 0);
}

TEST_CASE("raw: write then ingest is the identity") {
  std::vector<Sample> samples = {
      {{0.f, 1.f, -2.5f, 3.25f}, 0}, {{1e-30f, -1e30f, 7.f, 0.125f}, 2}, {{-0.f, 4.f, 5.f, 6.f}, 1}};
  const Dataset d(SampleShape{2, 2, 1}, 3, samples);
  const auto [values, labels] = write_raw(d);
  CHECK(values.size() == 3 * 4 * 4);
  CHECK(labels.size() == 3 * 4);
  CHECK(ingest_raw(values, labels, d.shape(), 3) == d);
}

TEST_CASE("raw: errors") {
  const Dataset d(SampleShape{1, 1, 2}, 2, {{{1.f, 2.f}, 1}});
  auto [values, labels] = write_raw(d);
  CHECK_THROWS_AS(ingest_raw(std::span(values).first(4), labels, d.shape(), 2), ValidationError);
  CHECK_THROWS_AS(ingest_raw(values, labels, d.shape(), 1), ValidationError);

  const float nan = std::nanf("");
  std::memcpy(values.data(), &nan, 4);
  CHECK_THROWS_AS(ingest_raw(values, labels, d.shape(), 2), ValidationError);
}

TEST_CASE("dataset invariants are enforced") {
  CHECK_THROWS_AS(Dataset(SampleShape{0, 1, 1}, 2, {}), ValidationError);
  CHECK_THROWS_AS(Dataset(SampleShape{1, 1, 2}, 2, {{{1.f}, 0}}), ValidationError);
  CHECK_THROWS_AS(Dataset(SampleShape{1, 1, 1}, 2, {{{INFINITY}, 0}}), ValidationError);
  CHECK_THROWS_AS(Dataset(SampleShape{1, 1, 1}, 2, {{{1.f}, 2}}), ValidationError);
}

TEST_CASE("synth_blobs: determinism, counts, clipping") {
  const Dataset a = synth_blobs(3, 8, 100, 0.5, 11);
  const Dataset b = synth_blobs(3, 8, 100, 0.5, 11);
  CHECK(a == b);
  CHECK(synth_blobs(3, 8, 100, 0.5, 12) != a);
  REQUIRE(a.size() == 300);
  std::vector<int> per(3, 0);
  for (const auto& s : a.samples()) ++per[s.label];
  CHECK(per == std::vector<int>{100, 100, 100});
  CHECK(a.shape() == SampleShape{1, 1, 8});

  const Dataset wide = synth_blobs(2, 4, 50, 100.0, 3);
  for (const auto& s : wide.samples()) {
    for (float v : s.values) REQUIRE(std::fabs(v) <= 8.0f);
  }
}

TEST_CASE("synth_blobs: invalid sizes") {
  CHECK_THROWS_AS(synth_blobs(1, 4, 10, 1.0, 0), ValidationError);
  CHECK_THROWS_AS(synth_blobs(2, 0, 10, 1.0, 0), ValidationError);
  CHECK_THROWS_AS(synth_blobs(2, 4, 0, 1.0, 0), ValidationError);
  CHECK_THROWS_AS(synth_blobs(2, 4, 10, 0.0, 0), ValidationError);
}

TEST_CASE("synth_blobs: tight blobs are learnable by the trainer") {
  const Dataset d = synth_blobs(3, 16, 100, 0.01, 5);
  CHECK(oracle::nearest_mean_accuracy(d) >= 0.99);
  TrainConfig config;
  config.epochs = 10;
  CHECK(evaluate(train(d, config), d) >= 0.99);
}

TEST_CASE("synth_half_noise: layout") {
  const Dataset d = synth_half_noise(3, 16, 10, 1);
  REQUIRE(d.size() == 60);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto& v = d[i].values;
    if (i % 2 == 0) {
      CHECK(std::fabs(v[0]) == 4.0f);
      for (std::size_t j = 1; j < v.size(); ++j) REQUIRE(std::fabs(v[j]) <= 0.25f);
    } else {
      for (float x : v) REQUIRE(std::fabs(x) == 1.0f);
    }
  }
}

TEST_CASE("native container round trip and corruption") {
  const Dataset d = synth_blobs(2, 5, 7, 1.0, 9);
  const auto bytes = encode_dataset(d);
  CHECK(bytes.size() == 30 + 14 * (4 + 5 * 4));
  CHECK(decode_dataset(bytes) == d);

  auto bad = bytes;
  bad[0] = std::byte{'X'};
  CHECK_THROWS_AS(decode_dataset(bad), FormatError);
  CHECK_THROWS_AS(decode_dataset(std::span(bytes).first(bytes.size() - 1)), FormatError);

  const auto path = std::filesystem::temp_directory_path() / "adq_test_dataset.bin";
  save_dataset(d, path);
  CHECK(load_dataset(path) == d);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_dataset(path), IoError);
}
