#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>
#include <string>

#include "gahmm/pipelines.hpp"

using namespace gahmm;

namespace {

std::string fixture(const std::string& name) {
  std::ifstream in(std::string(GAHMM_DATA_DIR) + "/" + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

LayerConfig layer(const std::string& catalog) {
  auto cat = parse_catalog(fixture(catalog));
  auto bank = build_model_bank(cat);
  return make_layer(std::move(cat), std::move(bank));
}

}  // namespace

static void BM_ScoreAll(benchmark::State& state) {
  const auto l = layer("activities.ont");
  const std::vector<Code> codes{1, 2, 3};
  for (auto _ : state) benchmark::DoNotOptimize(score_all(l.bank, codes));
}
BENCHMARK(BM_ScoreAll);

static void BM_CascadeCabinet(benchmark::State& state) {
  const auto l = layer("cabinet.ont");
  const auto events = parse_event_stream(fixture("cabinet.events"));
  const auto stream = make_stream(events);
  for (auto _ : state) benchmark::DoNotOptimize(run_chmm(stream, l));
}
BENCHMARK(BM_CascadeCabinet);

// Long noisy stream with the cabinet pattern repeated.
static void BM_CascadeLongStream(benchmark::State& state) {
  const auto l = layer("cabinet.ont");
  std::vector<ObservationEvent> events;
  const char* tokens[] = {"Towards_cabinet", "opens_cabinet", "object_picked", "Object_Carrying", "Walking", "Idle"};
  for (int i = 0; i < state.range(0); ++i) events.push_back({tokens[i % 6]});
  const auto stream = make_stream(events);
  for (auto _ : state) benchmark::DoNotOptimize(run_chmm(stream, l));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CascadeLongStream)->Arg(600)->Arg(6000);

static void BM_ExchangeScenario(benchmark::State& state) {
  auto l = layer("exchange_boxes.ont");
  l.min_confidence = 0.5;
  LayerStack stack;
  stack.layers.push_back(std::move(l));
  const auto events = parse_event_stream(fixture("exchange_boxes.events"));
  for (auto _ : state) benchmark::DoNotOptimize(run_hhmm(events, stack, ContextMode::PerEntity));
}
BENCHMARK(BM_ExchangeScenario);
BENCHMARK_MAIN();
