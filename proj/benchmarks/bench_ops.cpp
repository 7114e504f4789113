#include <benchmark/benchmark.h>

#include "vidpace/model.hpp"
#include "vidpace/objective.hpp"
#include "vidpace/ops.hpp"
#include "vidpace/rng.hpp"

using namespace vidpace;

namespace {

TensorF random_tensor(std::vector<int> dims, uint64_t seed) {
  TensorF t(std::move(dims));
  Rng rng(seed);
  for (auto& v : t.data) v = static_cast<float>(rng.next_double());
  return t;
}

// The three convolution shapes of the default 16x32x32 three-block model.
struct ConvCase {
  std::vector<int> input, weight;
};

const ConvCase kCases[] = {
    {{1, 3, 16, 32, 32}, {8, 3, 3, 3, 3}},
    {{1, 8, 16, 16, 16}, {16, 8, 3, 3, 3}},
    {{1, 16, 8, 8, 8}, {32, 16, 3, 3, 3}},
};

void BM_Conv3dForward(benchmark::State& state) {
  const ConvCase& c = kCases[state.range(0)];
  const TensorF input = random_tensor(c.input, 1);
  const TensorF weight = random_tensor(c.weight, 2);
  const TensorF bias = random_tensor({c.weight[0]}, 3);
  const Conv3dGeom geom{{1, 1, 1}, {1, 1, 1}};
  int64_t flops = 0;
  for (auto _ : state) {
    TensorF out = conv3d_forward(input, weight, bias, geom);
    benchmark::DoNotOptimize(out.data.data());
    flops += 2 * out.numel() * c.weight[1] * c.weight[2] * c.weight[3] * c.weight[4];
  }
  state.counters["flops"] = benchmark::Counter(static_cast<double>(flops),
                                               benchmark::Counter::kIsRate);
}
BENCHMARK(BM_Conv3dForward)->DenseRange(0, 2);

void BM_Conv3dBackward(benchmark::State& state) {
  const ConvCase& c = kCases[state.range(0)];
  const TensorF input = random_tensor(c.input, 1);
  const TensorF weight = random_tensor(c.weight, 2);
  const TensorF bias = random_tensor({c.weight[0]}, 3);
  const Conv3dGeom geom{{1, 1, 1}, {1, 1, 1}};
  const TensorF upstream =
      random_tensor(conv3d_forward(input, weight, bias, geom).dims, 4);
  for (auto _ : state) {
    auto grads = conv3d_backward(input, weight, upstream, geom, true);
    benchmark::DoNotOptimize(grads.d_weight.data.data());
  }
}
BENCHMARK(BM_Conv3dBackward)->DenseRange(0, 2);

void BM_TrainStep(benchmark::State& state) {
  const ModelConfig cfg = ModelConfig::tiny(3, 16, 32, 32, 4);
  Model<float> model(cfg);
  Rng rng(7);
  model.init_params(rng);

  const int batch_size = static_cast<int>(state.range(0));
  TrainBatchT<float> batch;
  batch.clips = random_tensor({batch_size, 3, 16, 32, 32}, 8);
  batch.pace_labels.resize(static_cast<size_t>(batch_size));
  batch.video_ids.resize(static_cast<size_t>(batch_size));
  for (int i = 0; i < batch_size; ++i) {
    batch.pace_labels[static_cast<size_t>(i)] = i % 4;
    batch.video_ids[static_cast<size_t>(i)] = i;
  }
  const Objective objective{ContrastiveMode::SamePace, LossWeights{1.0, 0.1},
                            SimMode::L2Normalized};
  std::vector<TensorF> grads;
  for (auto _ : state) {
    const auto res = evaluate_objective(model, batch, objective, &grads);
    benchmark::DoNotOptimize(res.loss);
  }
  state.counters["clips_per_s"] = benchmark::Counter(
      static_cast<double>(state.iterations()) * batch_size,
      benchmark::Counter::kIsRate);
}
BENCHMARK(BM_TrainStep)->Arg(16);

}  // namespace

BENCHMARK_MAIN();
