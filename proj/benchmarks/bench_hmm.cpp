#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "gahmm/hmm.hpp"

using namespace gahmm;

namespace {

HmmModel random_model(std::mt19937_64& rng, std::size_t n, std::size_t m) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  auto row = [&](std::size_t k) {
    std::vector<double> r(k);
    double s = 0;
    for (auto& x : r) s += x = u(rng);
    for (auto& x : r) x /= s;
    return r;
  };
  HmmModel h;
  h.transition = Matrix(n, n);
  h.emission = Matrix(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = row(n), b = row(m);
    std::copy(a.begin(), a.end(), h.transition.row(i).begin());
    std::copy(b.begin(), b.end(), h.emission.row(i).begin());
  }
  h.initial = row(n);
  return h;
}

std::vector<Code> random_codes(std::mt19937_64& rng, std::size_t len, std::size_t m) {
  std::vector<Code> c(len);
  for (auto& x : c) x = static_cast<Code>(rng() % m);
  return c;
}

}  // namespace

static void BM_Forward(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto model = random_model(rng, static_cast<std::size_t>(state.range(0)), 32);
  const auto codes = random_codes(rng, static_cast<std::size_t>(state.range(1)), 32);
  for (auto _ : state) benchmark::DoNotOptimize(forward_log_likelihood(model, codes));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}
BENCHMARK(BM_Forward)->Args({3, 1000})->Args({8, 1000})->Args({8, 100000});

static void BM_Viterbi(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto model = random_model(rng, static_cast<std::size_t>(state.range(0)), 32);
  const auto codes = random_codes(rng, 10000, 32);
  for (auto _ : state) benchmark::DoNotOptimize(viterbi(model, codes));
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_Viterbi)->Arg(3)->Arg(16);

static void BM_BaumWelchStep(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const auto model = random_model(rng, 4, 8);
  std::vector<std::vector<Code>> data;
  for (int i = 0; i < 16; ++i) data.push_back(random_codes(rng, 200, 8));
  for (auto _ : state) benchmark::DoNotOptimize(baum_welch(model, data, 1, 1e-12));
}
BENCHMARK(BM_BaumWelchStep);
