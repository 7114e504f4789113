#pragma once

#include <span>
#include <string>
#include <vector>

#include "vidpace/corpus.hpp"
#include "vidpace/model.hpp"
#include "vidpace/trainer.hpp"

namespace vidpace {

enum class LayerTag { PLast, PPenultimate };

// Per-video features under the fixed-clip protocol.
struct VideoFeature {
  TensorF clips;              // [num_clips, D_layer]
  std::vector<float> pooled;  // mean over clips
  LayerTag tag = LayerTag::PLast;
  int video_index = 0;
  int label = 0;
};

// num_clips uniformly spaced pace-1 clips (starts floor(i*T/num_clips)),
// center crop, forward; the feature is the globally average-pooled output of
// the last (p_last) or second-to-last (p_penultimate) pooling layer. The
// path is deterministic: no augmentation, no random draws.
VideoFeature extract_features(Model<float>& model, const VideoTensor& video,
                              LayerTag tag, int video_index, int label,
                              int num_clips = 10);

struct RetrievalReport {
  std::vector<std::pair<int, double>> topk_accuracy;  // ascending k
};

// Cosine-distance nearest-neighbor retrieval of test queries against the
// train gallery. A query is a hit at k if any of its top-k neighbors shares
// its class. Default granularity pools the clips of each video; per_clip
// queries every clip feature against every gallery clip feature.
RetrievalReport retrieve_topk(std::span<const VideoFeature> train_features,
                              std::span<const VideoFeature> test_features,
                              std::span<const int> ks, bool per_clip = false);

std::string retrieval_report_json(const RetrievalReport& report);
std::string retrieval_report_csv(const RetrievalReport& report);

enum class ProbeTask { Shape, Pace };
enum class ProbeMode { Linear, Full };

struct ProbeConfig {
  ProbeTask task = ProbeTask::Shape;
  ProbeMode mode = ProbeMode::Linear;
  // lr, epochs, batch size, augmentation, clip geometry and seed of the
  // probe run; pace is used when task == Pace.
  TrainConfig train;
  int eval_clips = 10;
};

struct ProbeResult {
  double test_accuracy = 0;
  std::vector<double> train_loss;  // per epoch
  std::vector<double> train_acc;
};

// Re-initializes the classification head for the task's class count and
// trains on the train split: linear mode freezes everything but the head,
// full mode trains all parameters. Shape-task test accuracy follows the
// 10-clip protocol (argmax of the mean softmax per video); pace-task
// accuracy uses the balanced per-clip protocol.
ProbeResult finetune_probe(Model<float>& model, const Corpus& corpus,
                           const ProbeConfig& config);

// Mean over channels of absolute activations of one sample, normalized to
// sum to 1. activations are [N, C, T, H, W]; the result is [T, H, W].
TensorF attention_map(const TensorF& activations, int sample = 0);

// Attention map as a single-channel f32 video for VPC1 export.
VideoTensor attention_to_video(const TensorF& map);

}  // namespace vidpace
