#include <benchmark/benchmark.h>

#include <random>

#include "adq/dataset.hpp"
#include "adq/logistic_model.hpp"
#include "adq/qds_format.hpp"
#include "adq/quantizer.hpp"
#include "adq/sensitivity.hpp"

using namespace adq;

namespace {

constexpr std::size_t kCifarElements = 32 * 32 * 3;

Sample random_sample(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  Sample s;
  s.values.resize(n);
  for (auto& v : s.values) v = u(rng);
  return s;
}

void BM_Quantize(benchmark::State& state) {
  const Sample s = random_sample(kCifarElements, 1);
  const BitWidth b = BitWidth::of(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(quantize_sample(s, b));
  state.SetItemsProcessed(state.iterations() * kCifarElements);
}
BENCHMARK(BM_Quantize)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

void BM_Pack(benchmark::State& state) {
  const BitWidth b = BitWidth::of(static_cast<int>(state.range(0)));
  const auto q = quantize_sample(random_sample(kCifarElements, 2), b);
  for (auto _ : state) benchmark::DoNotOptimize(pack_codes(q));
  state.SetItemsProcessed(state.iterations() * kCifarElements);
}
BENCHMARK(BM_Pack)->DenseRange(2, 16, 2);

void BM_Unpack(benchmark::State& state) {
  const BitWidth b = BitWidth::of(static_cast<int>(state.range(0)));
  const auto packed = pack_codes(quantize_sample(random_sample(kCifarElements, 3), b));
  std::vector<std::int32_t> out(kCifarElements);
  for (auto _ : state) {
    unpack_codes(packed.payload, packed.count, b, out);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * kCifarElements);
}
BENCHMARK(BM_Unpack)->DenseRange(2, 16, 2);

void BM_ScoreDataset(benchmark::State& state) {
  const Dataset d = synth_blobs(10, static_cast<std::uint32_t>(state.range(0)), 20, 1.0, 4);
  const auto model = LogisticModel::random_init(d.element_count(), 10, 5);
  for (auto _ : state) benchmark::DoNotOptimize(score_dataset(d, model, BitWidth::of(4)));
  state.SetItemsProcessed(state.iterations() * d.size());
}
BENCHMARK(BM_ScoreDataset)->Arg(64)->Arg(kCifarElements);

void BM_EncodeQds(benchmark::State& state) {
  const Dataset d = synth_blobs(10, kCifarElements, 10, 1.0, 6);
  std::vector<BitWidth> widths;
  for (std::size_t i = 0; i < d.size(); ++i) widths.push_back(BitWidth::of(i % 2 ? 8 : 0));
  const auto plan = AllocationPlan::from_assignments(widths);
  for (auto _ : state) benchmark::DoNotOptimize(encode_qds(d, plan));
  state.SetItemsProcessed(state.iterations() * d.size());
}
BENCHMARK(BM_EncodeQds);

}  // namespace

BENCHMARK_MAIN();
