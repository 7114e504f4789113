#include "vidpace/objective.hpp"

#include "vidpace/errors.hpp"

namespace vidpace {

template <typename S>
ObjectiveResult evaluate_objective(Model<S>& model, const TrainBatchT<S>& batch,
                                   const Objective& objective,
                                   std::vector<TensorT<S>>* grads) {
  objective.weights.validate();
  const int b = batch.batch_size();
  if (static_cast<int>(batch.pace_labels.size()) != b ||
      static_cast<int>(batch.video_ids.size()) != b)
    throw ArgumentError("train batch metadata length mismatch");

  auto out = model.forward(batch.clips);

  ObjectiveResult res;
  auto ce = cross_entropy(out.logits, batch.pace_labels);
  res.cls_loss = ce.loss;

  const int m = out.logits.dims[1];
  for (int i = 0; i < b; ++i) {
    const S* row = out.logits.ptr() + static_cast<int64_t>(i) * m;
    int arg = 0;
    for (int j = 1; j < m; ++j)
      if (row[j] > row[arg]) arg = j;
    if (arg == batch.pace_labels[static_cast<size_t>(i)]) ++res.correct;
  }

  ContrastiveResult<S> ctr;
  bool have_ctr = false;
  if (objective.contrastive != ContrastiveMode::None &&
      objective.weights.lambda_ctr != 0.0) {
    EmbeddingBatchT<S> emb;
    emb.z = out.projection;
    emb.video_ids = batch.video_ids;
    emb.pace_labels = batch.pace_labels;
    try {
      ctr = objective.contrastive == ContrastiveMode::SameContext
                ? ctr_same_context(emb, objective.sim)
                : ctr_same_pace(emb, objective.sim);
      have_ctr = true;
      res.ctr_loss = ctr.loss;
    } catch (const DegenerateBatchError&) {
      res.ctr_degenerate = true;
    }
  }

  res.loss = joint_loss(res.cls_loss, res.ctr_loss, objective.weights);

  if (grads != nullptr) {
    TensorT<S> d_logits = ce.d_logits;
    const S scale = static_cast<S>(objective.weights.lambda_cls);
    for (S& v : d_logits.data) v *= scale;

    TensorT<S> d_projection;  // empty unless the contrastive term is live
    if (have_ctr) {
      d_projection = std::move(ctr.d_z);
      const S cscale = static_cast<S>(objective.weights.lambda_ctr);
      for (S& v : d_projection.data) v *= cscale;
    }
    *grads = model.backward(d_logits, d_projection);
  }
  return res;
}

template ObjectiveResult evaluate_objective<float>(Model<float>&,
                                                   const TrainBatchT<float>&,
                                                   const Objective&,
                                                   std::vector<TensorT<float>>*);
template ObjectiveResult evaluate_objective<double>(Model<double>&,
                                                    const TrainBatchT<double>&,
                                                    const Objective&,
                                                    std::vector<TensorT<double>>*);

}  // namespace vidpace
