#pragma once

#include <span>
#include <vector>

#include "vidpace/tensor.hpp"

namespace vidpace {

// How embedding similarities are computed: the raw dot product (the literal
// formulation) or the dot of L2-normalized vectors (default; bounded
// exponents). No temperature parameter.
enum class SimMode { L2Normalized, RawDot };

// Per-clip latent vectors plus the metadata contrastive losses need.
template <typename S>
struct EmbeddingBatchT {
  TensorT<S> z;                  // [B, D]
  std::vector<int> video_ids;    // size B
  std::vector<int> pace_labels;  // size B
  bool normalized = false;       // rows are unit L2 norm

  int batch_size() const { return z.dims.empty() ? 0 : z.dims[0]; }
  void validate() const;
};

using EmbeddingBatch = EmbeddingBatchT<float>;

struct LossWeights {
  double lambda_cls = 1.0;
  double lambda_ctr = 0.1;
  void validate() const;  // both >= 0, not both zero
};

template <typename S>
struct CrossEntropyResult {
  double loss;
  TensorT<S> d_logits;  // (softmax - one-hot) / B
};

// Mean over the batch of -log softmax(logits)[label].
template <typename S>
CrossEntropyResult<S> cross_entropy(const TensorT<S>& logits,
                                    std::span<const int> labels);

// Dot product of the two vectors, L2-normalizing first in normalized mode.
double similarity(std::span<const float> a, std::span<const float> b, SimMode mode);
double similarity(std::span<const double> a, std::span<const double> b, SimMode mode);

template <typename S>
struct ContrastiveResult {
  double loss;
  TensorT<S> d_z;  // gradient wrt the raw (pre-normalization) embeddings
};

// Same-context loss: each anchor's positive is its same-video partner
// (every video id must occur exactly twice); the denominator pools the
// positive with every different-video row. Mean over the 2N anchors.
template <typename S>
ContrastiveResult<S> ctr_same_context(const EmbeddingBatchT<S>& batch, SimMode mode);

// Same-pace loss: rows sharing a pace label are positives. One term per
// (anchor, positive) pair, each normalized over all other rows; anchors
// without a positive contribute nothing. A batch with zero pairs raises
// DegenerateBatchError.
template <typename S>
ContrastiveResult<S> ctr_same_pace(const EmbeddingBatchT<S>& batch, SimMode mode);

// lambda_cls * cls + lambda_ctr * ctr.
double joint_loss(double cls_loss, double ctr_loss, const LossWeights& weights);

}  // namespace vidpace
