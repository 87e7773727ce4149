#include <benchmark/benchmark.h>

#include <random>

#include "scenesense/classifiers.hpp"
#include "scenesense/cooccurrence.hpp"
#include "scenesense/lm_backend.hpp"
#include "scenesense/mlp.hpp"

namespace {

using namespace scenesense;

LabelSpace bench_space() {
  std::vector<std::string> objects, rooms;
  for (int i = 0; i < 40; ++i) objects.push_back("object " + std::to_string(i));
  for (int i = 0; i < 23; ++i) rooms.push_back("room " + std::to_string(i));
  return LabelSpace("bench", objects, rooms);
}

std::vector<RoomSample> bench_rooms(const LabelSpace& space, std::size_t n) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> obj(0, space.object_labels().size() - 1);
  std::uniform_int_distribution<std::size_t> room(0, space.room_labels().size() - 1);
  std::vector<RoomSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    RoomSample s{"r" + std::to_string(i), "b" + std::to_string(i / 5), space.room_labels()[room(rng)], {}};
    for (int j = 0; j < 12; ++j) s.object_labels.push_back(space.object_labels()[obj(rng)]);
    out.push_back(std::move(s));
  }
  return out;
}

void BM_CountCooccurrences(benchmark::State& state) {
  const auto space = bench_space();
  const auto rooms = bench_rooms(space, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(count_cooccurrences(rooms, space, 1.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CountCooccurrences)->Arg(1000)->Arg(10000);

void BM_BuildIndex(benchmark::State& state) {
  const auto space = bench_space();
  const auto table = count_cooccurrences(bench_rooms(space, 2000), space, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(build_index(table));
}
BENCHMARK(BM_BuildIndex);

void BM_ClassifyStatistical(benchmark::State& state) {
  const auto space = bench_space();
  const auto rooms = bench_rooms(space, 2000);
  const auto table = count_cooccurrences(rooms, space, 1.0);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(classify_statistical(rooms[i++ % rooms.size()], table));
}
BENCHMARK(BM_ClassifyStatistical);

void BM_HashEmbed(benchmark::State& state) {
  const auto embedder = hash_embedder(static_cast<std::size_t>(state.range(0)), 0);
  const std::vector<std::string> texts(32, "A room containing a bed, a lamp, and a desk is called a bedroom.");
  for (auto _ : state) benchmark::DoNotOptimize(embedder->batch_embed(texts));
  state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_HashEmbed)->Arg(256)->Arg(1536);

void BM_MlpTrainEpoch(benchmark::State& state) {
  const std::size_t dim = 256, rows = 2048, classes = 23;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> gauss;
  LabeledMatrix data;
  data.dim = dim;
  data.inputs.resize(rows * dim);
  for (auto& v : data.inputs) v = gauss(rng);
  for (std::size_t i = 0; i < rows; ++i) data.labels.push_back(i % classes);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < classes; ++i) labels.push_back("room " + std::to_string(i));
  TrainConfig cfg;
  cfg.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train_mlp(data, nullptr, labels, {"bench", dim}, cfg));
  state.SetItemsProcessed(state.iterations() * rows);
}
BENCHMARK(BM_MlpTrainEpoch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
