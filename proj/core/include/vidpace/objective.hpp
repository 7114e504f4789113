#pragma once

#include <vector>

#include "vidpace/losses.hpp"
#include "vidpace/model.hpp"

namespace vidpace {

enum class ContrastiveMode { None, SameContext, SamePace };

// A mini-batch ready for the network: clips as a [B, C, L, h, w] tensor plus
// per-row pace labels and source video ids.
template <typename S>
struct TrainBatchT {
  TensorT<S> clips;
  std::vector<int> pace_labels;
  std::vector<int> video_ids;

  int batch_size() const { return clips.dims.empty() ? 0 : clips.dims[0]; }
};

using TrainBatch = TrainBatchT<float>;

struct Objective {
  ContrastiveMode contrastive = ContrastiveMode::None;
  LossWeights weights;
  SimMode sim = SimMode::L2Normalized;
};

struct ObjectiveResult {
  double loss = 0;      // weighted joint loss
  double cls_loss = 0;  // unweighted components
  double ctr_loss = 0;
  bool ctr_degenerate = false;
  int correct = 0;  // pace predictions matching the label
};

// Forward pass, classification + contrastive losses, and, when grads is
// non-null, the full backward pass. The contrastive term reads the
// projection output (the embedding itself when no head is configured).
// A degenerate contrastive batch contributes zero and sets the flag.
template <typename S>
ObjectiveResult evaluate_objective(Model<S>& model, const TrainBatchT<S>& batch,
                                   const Objective& objective,
                                   std::vector<TensorT<S>>* grads = nullptr);

extern template ObjectiveResult evaluate_objective<float>(
    Model<float>&, const TrainBatchT<float>&, const Objective&,
    std::vector<TensorT<float>>*);
extern template ObjectiveResult evaluate_objective<double>(
    Model<double>&, const TrainBatchT<double>&, const Objective&,
    std::vector<TensorT<double>>*);

}  // namespace vidpace
