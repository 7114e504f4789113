#include "vidpace/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "vidpace/errors.hpp"
#include "vidpace/optim.hpp"

namespace vidpace {

namespace {
constexpr uint64_t kProbeInitKey = 0x50524F42ull;
constexpr uint64_t kProbeBatchKey = 0x50424154ull;
constexpr uint64_t kProbeOrderKey = 0x504F5244ull;
}  // namespace

VideoFeature extract_features(Model<float>& model, const VideoTensor& video,
                              LayerTag tag, int video_index, int label,
                              int num_clips) {
  if (num_clips < 1) throw ArgumentError("num_clips must be >= 1");
  const ModelConfig& cfg = model.config();
  const int layer = tag == LayerTag::PLast ? model.num_blocks() - 1
                                           : model.num_blocks() - 2;
  if (layer < 0)
    throw ArgumentError("p_penultimate needs a model with at least two blocks");

  TensorF batch({num_clips, video.c, cfg.in_t, cfg.in_h, cfg.in_w});
  for (int i = 0; i < num_clips; ++i) {
    const int start = static_cast<int>(
        (static_cast<int64_t>(i) * video.t) / num_clips);
    Clip clip = sample_clip(video, Pace{1, 1}, start, cfg.in_t);
    clip = to_f32(clip);
    clip = center_crop(clip, cfg.in_h, cfg.in_w);
    write_clip_row(batch, i, clip);
  }
  model.forward(batch);
  const TensorF pooled = global_avg_pool(model.block_output(layer));

  VideoFeature feat;
  feat.clips = pooled;  // [num_clips, D_layer]
  feat.tag = tag;
  feat.video_index = video_index;
  feat.label = label;
  const int d = pooled.dims[1];
  feat.pooled.assign(static_cast<size_t>(d), 0.0f);
  for (int i = 0; i < num_clips; ++i)
    for (int k = 0; k < d; ++k)
      feat.pooled[static_cast<size_t>(k)] +=
          pooled.data[static_cast<size_t>(i) * d + k] / static_cast<float>(num_clips);
  return feat;
}

namespace {

struct FlatFeature {
  const float* v;
  int label;
};

double cosine_distance(const float* a, const float* b, int d) {
  double dot = 0, na = 0, nb = 0;
  for (int i = 0; i < d; ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  return 1.0 - dot / std::max(std::sqrt(na) * std::sqrt(nb), 1e-12);
}

std::vector<FlatFeature> flatten(std::span<const VideoFeature> feats, bool per_clip,
                                 int expect_dim) {
  std::vector<FlatFeature> out;
  for (const VideoFeature& f : feats) {
    const int d = f.clips.dims[1];
    if (d != expect_dim)
      throw ShapeError("feature dim " + std::to_string(d) + " vs " +
                       std::to_string(expect_dim));
    if (per_clip) {
      for (int i = 0; i < f.clips.dims[0]; ++i)
        out.push_back({f.clips.ptr() + static_cast<int64_t>(i) * d, f.label});
    } else {
      out.push_back({f.pooled.data(), f.label});
    }
  }
  return out;
}

}  // namespace

RetrievalReport retrieve_topk(std::span<const VideoFeature> train_features,
                              std::span<const VideoFeature> test_features,
                              std::span<const int> ks, bool per_clip) {
  if (train_features.empty() || test_features.empty())
    throw ArgumentError("retrieval needs nonempty train and test feature sets");
  if (ks.empty()) throw ArgumentError("retrieval needs at least one k");
  for (int k : ks)
    if (k < 1) throw ArgumentError("retrieval k must be >= 1");

  const int d = train_features.front().clips.dims[1];
  const auto gallery = flatten(train_features, per_clip, d);
  const auto queries = flatten(test_features, per_clip, d);

  std::vector<int> sorted_ks(ks.begin(), ks.end());
  std::sort(sorted_ks.begin(), sorted_ks.end());
  const int max_k = std::min<int>(sorted_ks.back(), static_cast<int>(gallery.size()));

  std::vector<int64_t> hits(sorted_ks.size(), 0);
  std::vector<int> order(gallery.size());
  std::vector<double> dist(gallery.size());
  for (const FlatFeature& q : queries) {
    for (size_t g = 0; g < gallery.size(); ++g)
      dist[g] = cosine_distance(q.v, gallery[g].v, d);
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + max_k, order.end(),
                      [&](int a, int b) {
                        return dist[static_cast<size_t>(a)] < dist[static_cast<size_t>(b)] ||
                               (dist[static_cast<size_t>(a)] == dist[static_cast<size_t>(b)] && a < b);
                      });
    int first_hit_rank = -1;
    for (int r = 0; r < max_k; ++r) {
      if (gallery[static_cast<size_t>(order[static_cast<size_t>(r)])].label == q.label) {
        first_hit_rank = r + 1;
        break;
      }
    }
    if (first_hit_rank > 0)
      for (size_t ki = 0; ki < sorted_ks.size(); ++ki)
        if (std::min(sorted_ks[ki], static_cast<int>(gallery.size())) >= first_hit_rank)
          ++hits[ki];
  }

  RetrievalReport report;
  for (size_t ki = 0; ki < sorted_ks.size(); ++ki)
    report.topk_accuracy.emplace_back(
        sorted_ks[ki], static_cast<double>(hits[ki]) / static_cast<double>(queries.size()));
  return report;
}

std::string retrieval_report_json(const RetrievalReport& report) {
  nlohmann::ordered_json topk;
  for (const auto& [k, acc] : report.topk_accuracy)
    topk[std::to_string(k)] = acc;
  nlohmann::ordered_json j;
  j["topk"] = topk;
  return j.dump();
}

std::string retrieval_report_csv(const RetrievalReport& report) {
  std::string out = "k,accuracy\n";
  char line[64];
  for (const auto& [k, acc] : report.topk_accuracy) {
    std::snprintf(line, sizeof(line), "%d,%.10g\n", k, acc);
    out += line;
  }
  return out;
}

namespace {

// One cross-entropy training batch for a probe task.
TrainBatch build_probe_batch(const Corpus& corpus, const TrainConfig& config,
                             ProbeTask task, std::span<const int> videos,
                             uint64_t batch_seed) {
  if (task == ProbeTask::Pace)
    return build_batch_same_pace(corpus, config, videos, batch_seed);

  const int n = static_cast<int>(videos.size());
  const VideoTensor& v0 = corpus.videos.front();
  TrainBatch batch;
  batch.clips = TensorF({n, v0.c, config.clip_len, config.crop_h, config.crop_w});
  batch.pace_labels.resize(static_cast<size_t>(n));  // shape-class labels here
  batch.video_ids.resize(static_cast<size_t>(n));
  for (int row = 0; row < n; ++row) {
    const int v = videos[static_cast<size_t>(row)];
    const VideoTensor& video = corpus.videos[static_cast<size_t>(v)];
    Rng rng(derive_seed(batch_seed, static_cast<uint64_t>(row)));
    const int start = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(video.t)));
    const Clip clip = sample_clip(video, Pace{1, 1}, start, config.clip_len);
    fill_batch_row(batch.clips, row, clip, config, rng);
    batch.pace_labels[static_cast<size_t>(row)] = corpus.labels[static_cast<size_t>(v)];
    batch.video_ids[static_cast<size_t>(row)] = v;
  }
  return batch;
}

// Ten center-cropped pace-1 clips, mean softmax, argmax, per test video.
double shape_test_accuracy(Model<float>& model, const Corpus& corpus,
                           const ProbeConfig& config) {
  const std::vector<int> test = corpus.test_indices();
  int64_t correct = 0;
  for (int v : test) {
    const VideoTensor& video = corpus.videos[static_cast<size_t>(v)];
    const ModelConfig& mc = model.config();
    TensorF batch({config.eval_clips, video.c, mc.in_t, mc.in_h, mc.in_w});
    for (int i = 0; i < config.eval_clips; ++i) {
      const int start = static_cast<int>(
          (static_cast<int64_t>(i) * video.t) / config.eval_clips);
      Clip clip = sample_clip(video, Pace{1, 1}, start, mc.in_t);
      clip = to_f32(clip);
      clip = center_crop(clip, mc.in_h, mc.in_w);
      write_clip_row(batch, i, clip);
    }
    auto out = model.forward(batch);
    softmax_rows_inplace(out.logits);
    const int m = out.logits.dims[1];
    std::vector<double> mean(static_cast<size_t>(m), 0.0);
    for (int i = 0; i < config.eval_clips; ++i)
      for (int j = 0; j < m; ++j)
        mean[static_cast<size_t>(j)] +=
            out.logits.data[static_cast<size_t>(i) * m + j];
    const int arg = static_cast<int>(
        std::max_element(mean.begin(), mean.end()) - mean.begin());
    if (arg == corpus.labels[static_cast<size_t>(v)]) ++correct;
  }
  return test.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(test.size());
}

}  // namespace

ProbeResult finetune_probe(Model<float>& model, const Corpus& corpus,
                           const ProbeConfig& config) {
  const TrainConfig& tc = config.train;
  tc.validate();
  if (corpus.size() == 0) throw ArgumentError("empty corpus");

  int num_classes;
  if (config.task == ProbeTask::Shape) {
    num_classes = 1 + *std::max_element(corpus.labels.begin(), corpus.labels.end());
  } else {
    num_classes = tc.pace.num_classes();
  }

  Rng head_rng(derive_seed(tc.seed, kProbeInitKey));
  model.reinit_head(num_classes, head_rng);

  // Linear mode trains only the new head.
  std::vector<bool> trainable(model.params().size(), config.mode == ProbeMode::Full);
  for (size_t i = 0; i < model.params().size(); ++i) {
    const std::string& name = model.params()[i].name;
    if (name == "fc.weight" || name == "fc.bias") trainable[i] = true;
  }

  const std::vector<int> train = corpus.train_indices();
  if (tc.batch_videos > static_cast<int>(train.size()))
    throw ArgumentError("batch_videos exceeds train split");

  Sgd opt(tc.momentum, tc.weight_decay);
  Objective objective{ContrastiveMode::None, LossWeights{1.0, 0.0}, tc.sim};

  const int64_t epoch_clips =
      tc.epoch_size > 0 ? tc.epoch_size : 10 * static_cast<int64_t>(train.size());
  const int batches_per_epoch =
      static_cast<int>((epoch_clips + tc.batch_videos - 1) / tc.batch_videos);

  ProbeResult result;
  std::vector<TensorF> grads;
  for (int epoch = 0; epoch < tc.epochs; ++epoch) {
    const double lr = lr_schedule(epoch, tc);
    Rng order_rng(derive_seed(derive_seed(tc.seed, kProbeOrderKey),
                              static_cast<uint64_t>(epoch)));
    const uint64_t epoch_seed = derive_seed(derive_seed(tc.seed, kProbeBatchKey),
                                            static_cast<uint64_t>(epoch));
    std::vector<int> pass = train;
    order_rng.shuffle(pass);
    size_t cursor = 0;

    double sum_loss = 0;
    int64_t sum_correct = 0, sum_rows = 0;
    for (int b = 0; b < batches_per_epoch; ++b) {
      if (cursor + static_cast<size_t>(tc.batch_videos) > pass.size()) {
        pass = train;
        order_rng.shuffle(pass);
        cursor = 0;
      }
      const std::span<const int> videos(pass.data() + cursor,
                                        static_cast<size_t>(tc.batch_videos));
      cursor += static_cast<size_t>(tc.batch_videos);

      TrainBatch batch = build_probe_batch(corpus, tc, config.task, videos,
                                           derive_seed(epoch_seed, static_cast<uint64_t>(b)));
      const ObjectiveResult r = evaluate_objective(model, batch, objective, &grads);
      opt.step(model, grads, lr, trainable);
      sum_loss += r.loss;
      sum_correct += r.correct;
      sum_rows += batch.batch_size();
    }
    result.train_loss.push_back(sum_loss / batches_per_epoch);
    result.train_acc.push_back(sum_rows > 0 ? static_cast<double>(sum_correct) / sum_rows : 0.0);
  }

  if (config.task == ProbeTask::Shape) {
    result.test_accuracy = shape_test_accuracy(model, corpus, config);
  } else {
    const std::vector<int> test = corpus.test_indices();
    result.test_accuracy = evaluate_pace_accuracy(model, corpus, tc, test);
  }
  return result;
}

TensorF attention_map(const TensorF& activations, int sample) {
  if (activations.dims.size() != 5)
    throw ShapeError("attention_map expects [N,C,T,H,W] activations, got " +
                     activations.shape_str());
  const int n = activations.dims[0], c = activations.dims[1];
  if (sample < 0 || sample >= n)
    throw ArgumentError("sample index out of range");
  const int t = activations.dims[2], h = activations.dims[3], w = activations.dims[4];
  const int64_t spatial = static_cast<int64_t>(t) * h * w;

  TensorF map({t, h, w});
  const float* base = activations.ptr() + static_cast<int64_t>(sample) * c * spatial;
  double total = 0;
  for (int64_t i = 0; i < spatial; ++i) {
    double acc = 0;
    for (int ci = 0; ci < c; ++ci)
      acc += std::abs(static_cast<double>(base[static_cast<int64_t>(ci) * spatial + i]));
    const double v = acc / c;
    map.data[static_cast<size_t>(i)] = static_cast<float>(v);
    total += v;
  }
  if (total <= 0) {
    // All-zero activations: a uniform distribution by convention.
    map.fill(static_cast<float>(1.0 / static_cast<double>(spatial)));
    return map;
  }
  for (float& v : map.data) v = static_cast<float>(v / total);
  return map;
}

VideoTensor attention_to_video(const TensorF& map) {
  if (map.dims.size() != 3)
    throw ShapeError("attention map must be [T,H,W], got " + map.shape_str());
  VideoTensor video = VideoTensor::make(map.dims[0], map.dims[1], map.dims[2], 1,
                                        Dtype::F32);
  video.f32 = map.data;
  return video;
}

}  // namespace vidpace
