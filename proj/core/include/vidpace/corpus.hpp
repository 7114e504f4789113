#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "vidpace/video.hpp"

namespace vidpace {

// Parameters of the synthetic moving-shape corpus. Every video shows one
// shape of its class orbiting at exactly base_speed pixels of displacement
// per frame, over a constant background plus uniform noise.
struct CorpusSpec {
  int num_videos = 200;
  int frames = 40;
  int height = 36;
  int width = 36;
  int channels = 3;
  double base_speed = 2.0;     // per-frame centroid displacement, pixels
  int shape_classes = 3;       // 2 or 3: square, disc, triangle
  double noise_amplitude = 0.05;  // fraction of dynamic range
  Dtype dtype = Dtype::U8;
  uint64_t seed = 7;

  void validate() const;  // throws ConfigError naming the field
};

enum class Split : uint8_t { Train, Test };

struct Corpus {
  std::vector<VideoTensor> videos;
  std::vector<int> labels;   // shape-class index per video
  std::vector<Split> split;  // per-video train/test tag

  size_t size() const { return videos.size(); }
  std::vector<int> train_indices() const;
  std::vector<int> test_indices() const;
};

// Deterministic function of the spec (including the seed): equal specs give
// byte-equal corpora. Each video derives an independent RNG stream from
// (seed, video index), so generation may run in parallel. The split is
// 80/20, stratified per class so every class appears in both splits.
Corpus generate_corpus(const CorpusSpec& spec, int workers = 1);

// On-disk layout: <dir>/videos/video_NNNN.vpc plus <dir>/manifest.tsv with
// one line per video: "<relative path>\t<class>\t<split>".
void save_corpus(const Corpus& corpus, const std::filesystem::path& dir);
Corpus load_corpus(const std::filesystem::path& dir);

}  // namespace vidpace
