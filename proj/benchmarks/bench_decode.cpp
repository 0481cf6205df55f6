#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "lcner/decode.hpp"
#include "lcner/labelspace.hpp"

namespace {

std::vector<std::string> types(std::size_t count) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back("T" + std::to_string(i));
  return out;
}

lcner::LogitsSequence noise(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 2.0);
  lcner::LogitsSequence x(n, k);
  for (auto& v : x.data()) v = d(rng);
  return x;
}

// Args: sentence length, entity types.
void BM_Argmax(benchmark::State& state) {
  const auto cm = lcner::build_constraint_matrix(lcner::build_label_set(types(state.range(1))));
  const auto x = noise(state.range(0), cm.size(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(lcner::argmax_decode(x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_LcDecode(benchmark::State& state) {
  const auto cm = lcner::build_constraint_matrix(lcner::build_label_set(types(state.range(1))));
  const auto x = noise(state.range(0), cm.size(), 2);
  for (auto _ : state) benchmark::DoNotOptimize(lcner::lc_decode(x, cm));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ViterbiDecode(benchmark::State& state) {
  const auto cm = lcner::build_constraint_matrix(lcner::build_label_set(types(state.range(1))));
  const auto x = noise(state.range(0), cm.size(), 3);
  for (auto _ : state) benchmark::DoNotOptimize(lcner::viterbi_decode(x, cm));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_DecodeBatch(benchmark::State& state) {
  const auto cm = lcner::build_constraint_matrix(lcner::build_label_set(types(6)));
  std::vector<lcner::LogitsSequence> batch;
  for (int i = 0; i < 1000; ++i) batch.push_back(noise(40, cm.size(), 100 + i));
  for (auto _ : state)
    benchmark::DoNotOptimize(
        lcner::decode_batch(batch, lcner::Decoder::Lc, cm, {}, static_cast<unsigned>(state.range(0))));
  state.SetItemsProcessed(state.iterations() * 1000);
}

}  // namespace

BENCHMARK(BM_Argmax)->ArgsProduct({{16, 128, 512}, {3, 9}});
BENCHMARK(BM_LcDecode)->ArgsProduct({{16, 128, 512}, {3, 9}});
BENCHMARK(BM_ViterbiDecode)->ArgsProduct({{16, 128, 512}, {3, 9}});
BENCHMARK(BM_DecodeBatch)->Arg(1)->Arg(4)->UseRealTime();
