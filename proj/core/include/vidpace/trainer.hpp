#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vidpace/augment.hpp"
#include "vidpace/corpus.hpp"
#include "vidpace/objective.hpp"
#include "vidpace/pace.hpp"

namespace vidpace {

struct AugmentConfig {
  bool enable = true;
  JitterParams jitter;
  double hflip_prob = 0.5;
};

struct TrainConfig {
  PaceConfig pace = PaceConfig::relative(4);
  int clip_len = 16;
  int crop_h = 32;
  int crop_w = 32;
  int batch_videos = 16;  // N
  ContrastiveMode contrastive = ContrastiveMode::None;
  LossWeights weights;
  SimMode sim = SimMode::L2Normalized;
  double lr = 1e-3;
  int lr_decay_every = 6;
  double lr_decay_factor = 10.0;
  int epochs = 18;
  int epoch_size = 0;  // clips per epoch; 0 means 10x the train split
  double momentum = 0.9;
  double weight_decay = 0.0;
  uint64_t seed = 1;
  AugmentConfig augment;
  int val_clips_per_class = 1;
  int workers = 1;

  void validate() const;
};

// base_lr / decay_factor^floor(epoch / decay_every)
double lr_schedule(int epoch, const TrainConfig& config);

// Writes an f32 clip into a batch row, changing layout [L,h,w,C] -> [C,L,h,w].
void write_clip_row(TensorF& clips, int row, const Clip& clip);

// The per-clip input pipeline: f32 conversion, random crop, per-frame color
// jitter and whole-clip flip (when enabled), then write_clip_row. Every
// random draw comes from `rng`.
void fill_batch_row(TensorF& clips, int row, const Clip& raw,
                    const TrainConfig& config, Rng& rng);

// Two independently paced and augmented clips of each of the N given videos;
// rows i and i + N share video_id (B = 2N).
TrainBatch build_batch_same_context(const Corpus& corpus, const TrainConfig& config,
                                    std::span<const int> videos, uint64_t batch_seed);
// One clip per given video with an independent pace draw (B = N).
TrainBatch build_batch_same_pace(const Corpus& corpus, const TrainConfig& config,
                                 std::span<const int> videos, uint64_t batch_seed);

// Convenience forms that draw N distinct train-split videos from rng first.
TrainBatch build_batch_same_context(const Corpus& corpus, const TrainConfig& config,
                                    Rng& rng);
TrainBatch build_batch_same_pace(const Corpus& corpus, const TrainConfig& config,
                                 Rng& rng);

struct EpochMetrics {
  int epoch = 0;
  double loss = 0;
  double cls_loss = 0;
  double ctr_loss = 0;
  double pace_acc = 0;
  double val_pace_acc = 0;
  double lr = 0;
  int degenerate_ctr_batches = 0;  // not serialized
};

std::string metrics_json_line(const EpochMetrics& m);

// Fixed evaluation draw seed: balanced pace evaluations of different runs on
// the same corpus score the same clips and stay directly comparable.
inline constexpr uint64_t kPaceEvalSeed = 0x50455641ull;

// Balanced pace-prediction accuracy on the given videos: for every video and
// every pace class, val_clips_per_class clips at seeded starts, center crop,
// no augmentation; per-clip argmax scoring. Deterministic given the seed.
double evaluate_pace_accuracy(Model<float>& model, const Corpus& corpus,
                              const TrainConfig& config, std::span<const int> videos,
                              uint64_t seed = kPaceEvalSeed);

struct PretrainResult {
  Model<float> model;
  std::vector<EpochMetrics> history;
};

// The pretraining loop. Per epoch: ceil(epoch_size / N) batches assembled per
// the contrastive mode, joint loss, SGD step; then held-out pace accuracy.
// Writes checkpoint_epoch_NNN.pck, checkpoint_final.pck and metrics.jsonl to
// out_dir when given. Bitwise reproducible for a fixed config: every batch's
// randomness derives from (seed, epoch, batch index), independent of the
// worker count.
PretrainResult pretrain(const Corpus& corpus, const ModelConfig& model_config,
                        const TrainConfig& config,
                        const std::optional<std::filesystem::path>& out_dir);

}  // namespace vidpace
