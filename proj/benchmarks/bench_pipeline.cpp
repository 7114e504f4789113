#include <benchmark/benchmark.h>

#include "vidpace/corpus.hpp"
#include "vidpace/losses.hpp"
#include "vidpace/trainer.hpp"

using namespace vidpace;

namespace {

const Corpus& bench_corpus() {
  static const Corpus corpus = [] {
    CorpusSpec spec;
    spec.num_videos = 24;
    spec.seed = 99;
    return generate_corpus(spec);
  }();
  return corpus;
}

void BM_SampleClip(benchmark::State& state) {
  const Corpus& corpus = bench_corpus();
  const VideoTensor& video = corpus.videos[0];
  int start = 0;
  for (auto _ : state) {
    Clip clip = sample_clip(video, Pace::fast(3), start, 16);
    benchmark::DoNotOptimize(clip.frames.u8.data());
    start = (start + 1) % video.t;
  }
}
BENCHMARK(BM_SampleClip);

void BM_BuildBatchSameContext(benchmark::State& state) {
  const Corpus& corpus = bench_corpus();
  TrainConfig cfg;
  cfg.batch_videos = 8;
  const std::vector<int> train = corpus.train_indices();
  const std::vector<int> videos(train.begin(), train.begin() + 8);
  uint64_t seed = 0;
  for (auto _ : state) {
    TrainBatch batch = build_batch_same_context(corpus, cfg, videos, seed++);
    benchmark::DoNotOptimize(batch.clips.data.data());
  }
  state.counters["clips_per_s"] = benchmark::Counter(
      static_cast<double>(state.iterations()) * 16, benchmark::Counter::kIsRate);
}
BENCHMARK(BM_BuildBatchSameContext);

void BM_ContrastiveLoss(benchmark::State& state) {
  Rng rng(3);
  EmbeddingBatchT<float> batch;
  const int b = 32, d = 64;
  batch.z = TensorF({b, d});
  for (auto& v : batch.z.data) v = static_cast<float>(rng.normal());
  batch.video_ids.resize(b);
  batch.pace_labels.resize(b);
  for (int i = 0; i < b; ++i) {
    batch.video_ids[static_cast<size_t>(i)] = i % (b / 2);
    batch.pace_labels[static_cast<size_t>(i)] = i % 4;
  }
  for (auto _ : state) {
    const auto res = ctr_same_context(batch, SimMode::L2Normalized);
    benchmark::DoNotOptimize(res.loss);
  }
}
BENCHMARK(BM_ContrastiveLoss);

}  // namespace

BENCHMARK_MAIN();
