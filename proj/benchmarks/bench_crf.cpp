#include <benchmark/benchmark.h>

#include <random>

#include "lcner/crf.hpp"

namespace {

struct Instance {
  lcner::LogitsSequence x;
  lcner::LabelSequence gold;
  lcner::CrfParams params;
};

Instance make(std::size_t n, std::size_t k) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> d(0.0, 1.0);
  Instance in{lcner::LogitsSequence(n, k), lcner::LabelSequence(n), lcner::CrfParams::zeros(k)};
  for (auto& v : in.x.data()) v = d(rng);
  for (auto& y : in.gold) y = static_cast<lcner::LabelId>(rng() % k);
  for (auto& v : in.params.scores.transitions) v = d(rng);
  return in;
}

// Args: sentence length, labels.
void BM_LogPartition(benchmark::State& state) {
  const auto in = make(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(lcner::log_partition(in.x, in.params));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_NllAndGradient(benchmark::State& state) {
  const auto in = make(state.range(0), state.range(1));
  const lcner::CrfExample ex{&in.x, &in.gold};
  for (auto _ : state) benchmark::DoNotOptimize(lcner::nll_and_gradient({&ex, 1}, in.params));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_CrfDecode(benchmark::State& state) {
  const auto in = make(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(lcner::crf_decode(in.x, in.params));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_LogPartition)->ArgsProduct({{16, 128}, {13, 37}});
BENCHMARK(BM_NllAndGradient)->ArgsProduct({{16, 128}, {13, 37}});
BENCHMARK(BM_CrfDecode)->ArgsProduct({{16, 128}, {13, 37}});
