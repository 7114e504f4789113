#include "vidpace/trainer.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "vidpace/errors.hpp"
#include "vidpace/optim.hpp"
#include "vidpace/util.hpp"

namespace vidpace {

namespace {
// Stream keys under the run seed.
constexpr uint64_t kInitKey = 0x494E4954ull;   // model init
constexpr uint64_t kOrderKey = 0x4F524445ull;  // per-epoch video order
constexpr uint64_t kBatchKey = 0x42415443ull;  // per-batch content
}  // namespace

void TrainConfig::validate() const {
  pace.validate();
  if (clip_len < 1) throw ConfigError("clip_len must be >= 1");
  if (crop_h < 1 || crop_w < 1) throw ConfigError("crop dims must be >= 1");
  if (batch_videos < 1) throw ConfigError("batch_videos must be >= 1");
  if (contrastive == ContrastiveMode::SameContext && batch_videos < 2)
    throw ConfigError("same-context contrastive training needs batch_videos >= 2");
  weights.validate();
  if (!(lr > 0)) throw ConfigError("lr must be > 0");
  if (lr_decay_every < 1) throw ConfigError("lr_decay_every must be >= 1");
  if (!(lr_decay_factor >= 1)) throw ConfigError("lr_decay_factor must be >= 1");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (epoch_size < 0) throw ConfigError("epoch_size must be >= 0");
  if (val_clips_per_class < 1) throw ConfigError("val_clips_per_class must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
}

double lr_schedule(int epoch, const TrainConfig& config) {
  if (epoch < 0) throw ArgumentError("epoch must be >= 0");
  const int steps = epoch / config.lr_decay_every;
  return config.lr / std::pow(config.lr_decay_factor, steps);
}

void write_clip_row(TensorF& clips, int row, const Clip& clip) {
  const int c = clip.frames.c, l = clip.frames.t;
  const int h = clip.frames.h, w = clip.frames.w;
  float* dst = clips.ptr() + static_cast<int64_t>(row) * c * l * h * w;
  const float* src = clip.frames.f32.data();
  for (int ci = 0; ci < c; ++ci)
    for (int li = 0; li < l; ++li)
      for (int y = 0; y < h; ++y) {
        const float* srow = src + ((static_cast<int64_t>(li) * h + y) * w) * c + ci;
        float* drow = dst + ((static_cast<int64_t>(ci) * l + li) * h + y) * w;
        for (int x = 0; x < w; ++x) drow[x] = srow[static_cast<int64_t>(x) * c];
      }
}

void fill_batch_row(TensorF& clips, int row, const Clip& raw,
                    const TrainConfig& config, Rng& rng) {
  Clip clip = to_f32(raw);
  clip = random_crop(clip, config.crop_h, config.crop_w, rng);
  if (config.augment.enable) {
    clip = color_jitter(clip, config.augment.jitter, rng);
    clip = hflip(clip, rng, config.augment.hflip_prob);
  }
  write_clip_row(clips, row, clip);
}

namespace {

TrainBatch make_empty_batch(const Corpus& corpus, const TrainConfig& config, int rows) {
  const VideoTensor& v0 = corpus.videos.front();
  TrainBatch batch;
  batch.clips = TensorF({rows, v0.c, config.clip_len, config.crop_h, config.crop_w});
  batch.pace_labels.assign(static_cast<size_t>(rows), 0);
  batch.video_ids.assign(static_cast<size_t>(rows), 0);
  return batch;
}

void check_videos(const Corpus& corpus, std::span<const int> videos, int n) {
  if (static_cast<int>(videos.size()) != n)
    throw ArgumentError("batch needs " + std::to_string(n) + " videos, got " +
                        std::to_string(videos.size()));
  for (int v : videos)
    if (v < 0 || v >= static_cast<int>(corpus.size()))
      throw ArgumentError("video index " + std::to_string(v) + " out of range");
}

// One augmented training clip into a batch row, from its own stream.
void build_row(TrainBatch& batch, int row, const Corpus& corpus, int video,
               const TrainConfig& config, uint64_t row_seed) {
  Rng rng(row_seed);
  const ClipDraw draw =
      random_clip(corpus.videos[static_cast<size_t>(video)], config.pace,
                  config.clip_len, rng);
  fill_batch_row(batch.clips, row, draw.clip, config, rng);
  batch.pace_labels[static_cast<size_t>(row)] = draw.label.class_index;
  batch.video_ids[static_cast<size_t>(row)] = video;
}

std::vector<int> draw_distinct_train_videos(const Corpus& corpus,
                                            const TrainConfig& config, Rng& rng) {
  std::vector<int> train = corpus.train_indices();
  const int n = config.batch_videos;
  if (n > static_cast<int>(train.size()))
    throw ArgumentError("batch_videos " + std::to_string(n) +
                        " exceeds train split of " + std::to_string(train.size()));
  // Partial Fisher-Yates: the first n entries become the draw.
  for (int i = 0; i < n; ++i) {
    const size_t j = i + static_cast<size_t>(rng.uniform_int(train.size() - i));
    std::swap(train[static_cast<size_t>(i)], train[j]);
  }
  train.resize(static_cast<size_t>(n));
  return train;
}

}  // namespace

TrainBatch build_batch_same_context(const Corpus& corpus, const TrainConfig& config,
                                    std::span<const int> videos, uint64_t batch_seed) {
  const int n = config.batch_videos;
  check_videos(corpus, videos, n);
  TrainBatch batch = make_empty_batch(corpus, config, 2 * n);
  parallel_for(2 * n, config.workers, [&](int64_t row) {
    const int video = videos[static_cast<size_t>(row % n)];
    build_row(batch, static_cast<int>(row), corpus, video, config,
              derive_seed(batch_seed, static_cast<uint64_t>(row)));
  });
  return batch;
}

TrainBatch build_batch_same_pace(const Corpus& corpus, const TrainConfig& config,
                                 std::span<const int> videos, uint64_t batch_seed) {
  const int n = config.batch_videos;
  check_videos(corpus, videos, n);
  TrainBatch batch = make_empty_batch(corpus, config, n);
  parallel_for(n, config.workers, [&](int64_t row) {
    build_row(batch, static_cast<int>(row), corpus, videos[static_cast<size_t>(row)],
              config, derive_seed(batch_seed, static_cast<uint64_t>(row)));
  });
  return batch;
}

TrainBatch build_batch_same_context(const Corpus& corpus, const TrainConfig& config,
                                    Rng& rng) {
  const auto videos = draw_distinct_train_videos(corpus, config, rng);
  return build_batch_same_context(corpus, config, videos, rng.next_u64());
}

TrainBatch build_batch_same_pace(const Corpus& corpus, const TrainConfig& config,
                                 Rng& rng) {
  const auto videos = draw_distinct_train_videos(corpus, config, rng);
  return build_batch_same_pace(corpus, config, videos, rng.next_u64());
}

std::string metrics_json_line(const EpochMetrics& m) {
  nlohmann::ordered_json j;
  j["epoch"] = m.epoch;
  j["loss"] = m.loss;
  j["cls_loss"] = m.cls_loss;
  j["ctr_loss"] = m.ctr_loss;
  j["pace_acc"] = m.pace_acc;
  j["val_pace_acc"] = m.val_pace_acc;
  j["lr"] = m.lr;
  return j.dump();
}

double evaluate_pace_accuracy(Model<float>& model, const Corpus& corpus,
                              const TrainConfig& config, std::span<const int> videos,
                              uint64_t seed) {
  const auto [paces, num_classes] = pace_set(config.pace);
  const int per_video = num_classes * config.val_clips_per_class;
  int64_t correct = 0, total = 0;

  TrainConfig eval_config = config;  // reuse the row pipeline minus augmentation
  eval_config.augment.enable = false;

  for (int v : videos) {
    const VideoTensor& video = corpus.videos[static_cast<size_t>(v)];
    TensorF batch({per_video, video.c, config.clip_len, config.crop_h, config.crop_w});
    std::vector<int> labels;
    int row = 0;
    for (int m = 0; m < num_classes; ++m) {
      Rng rng(derive_seed(derive_seed(seed, static_cast<uint64_t>(v)),
                          static_cast<uint64_t>(m)));
      for (int k = 0; k < config.val_clips_per_class; ++k) {
        const int start = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(video.t)));
        Clip clip = sample_clip(video, paces[static_cast<size_t>(m)], start,
                                config.clip_len);
        clip = to_f32(clip);
        clip = center_crop(clip, config.crop_h, config.crop_w);
        write_clip_row(batch, row, clip);
        labels.push_back(m);
        ++row;
      }
    }
    auto out = model.forward(batch);
    const int mcls = out.logits.dims[1];
    for (int i = 0; i < per_video; ++i) {
      const float* lrow = out.logits.ptr() + static_cast<int64_t>(i) * mcls;
      int arg = 0;
      for (int j = 1; j < mcls; ++j)
        if (lrow[j] > lrow[arg]) arg = j;
      if (arg == labels[static_cast<size_t>(i)]) ++correct;
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

PretrainResult pretrain(const Corpus& corpus, const ModelConfig& model_config,
                        const TrainConfig& config,
                        const std::optional<std::filesystem::path>& out_dir) {
  config.validate();
  model_config.validate();
  if (corpus.size() == 0) throw ArgumentError("empty corpus");
  const VideoTensor& v0 = corpus.videos.front();
  if (model_config.in_channels != v0.c || model_config.in_t != config.clip_len ||
      model_config.in_h != config.crop_h || model_config.in_w != config.crop_w)
    throw ConfigError("model input dims do not match clip_len/crop/corpus channels");
  if (model_config.num_classes != config.pace.num_classes())
    throw ConfigError("model num_classes does not match the pace set");

  const std::vector<int> train = corpus.train_indices();
  const std::vector<int> test = corpus.test_indices();
  if (config.batch_videos > static_cast<int>(train.size()))
    throw ArgumentError("batch_videos " + std::to_string(config.batch_videos) +
                        " exceeds train split of " + std::to_string(train.size()));

  PretrainResult result{Model<float>(model_config), {}};
  Rng init_rng(derive_seed(config.seed, kInitKey));
  result.model.init_params(init_rng);

  Sgd opt(config.momentum, config.weight_decay);
  Objective objective{config.contrastive, config.weights, config.sim};

  const int64_t epoch_clips =
      config.epoch_size > 0 ? config.epoch_size
                            : 10 * static_cast<int64_t>(train.size());
  const int batches_per_epoch = static_cast<int>(
      (epoch_clips + config.batch_videos - 1) / config.batch_videos);

  std::ofstream metrics_out;
  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    metrics_out.open(*out_dir / "metrics.jsonl", std::ios::trunc);
    if (!metrics_out) throw IoError("cannot write metrics in " + out_dir->string());
  }

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = lr_schedule(epoch, config);
    const uint64_t epoch_seed = derive_seed(derive_seed(config.seed, kBatchKey),
                                            static_cast<uint64_t>(epoch));
    Rng order_rng(derive_seed(derive_seed(config.seed, kOrderKey),
                              static_cast<uint64_t>(epoch)));

    // Seeded passes over the train split: videos are sampled without
    // replacement within a pass; a fresh shuffle starts whenever fewer than
    // N remain (the remainder is dropped to keep batch videos distinct).
    std::vector<int> pass = train;
    order_rng.shuffle(pass);
    size_t cursor = 0;

    double sum_loss = 0, sum_cls = 0, sum_ctr = 0;
    int64_t sum_correct = 0, sum_rows = 0;
    int ctr_batches = 0, degenerate = 0;

    std::vector<TensorF> grads;
    for (int b = 0; b < batches_per_epoch; ++b) {
      if (cursor + static_cast<size_t>(config.batch_videos) > pass.size()) {
        pass = train;
        order_rng.shuffle(pass);
        cursor = 0;
      }
      const std::span<const int> videos(pass.data() + cursor,
                                        static_cast<size_t>(config.batch_videos));
      cursor += static_cast<size_t>(config.batch_videos);

      const uint64_t batch_seed = derive_seed(epoch_seed, static_cast<uint64_t>(b));
      TrainBatch batch = config.contrastive == ContrastiveMode::SameContext
                             ? build_batch_same_context(corpus, config, videos, batch_seed)
                             : build_batch_same_pace(corpus, config, videos, batch_seed);

      const ObjectiveResult r =
          evaluate_objective(result.model, batch, objective, &grads);
      opt.step(result.model, grads, lr);

      sum_loss += r.loss;
      sum_cls += r.cls_loss;
      if (config.contrastive != ContrastiveMode::None) {
        if (r.ctr_degenerate)
          ++degenerate;
        else {
          sum_ctr += r.ctr_loss;
          ++ctr_batches;
        }
      }
      sum_correct += r.correct;
      sum_rows += batch.batch_size();
    }

    EpochMetrics m;
    m.epoch = epoch + 1;
    m.loss = sum_loss / batches_per_epoch;
    m.cls_loss = sum_cls / batches_per_epoch;
    m.ctr_loss = ctr_batches > 0 ? sum_ctr / ctr_batches : 0.0;
    m.pace_acc = sum_rows > 0 ? static_cast<double>(sum_correct) / sum_rows : 0.0;
    m.val_pace_acc = evaluate_pace_accuracy(result.model, corpus, config, test);
    m.lr = lr;
    m.degenerate_ctr_batches = degenerate;
    if (degenerate > 0)
      std::fprintf(stderr, "epoch %d: %d degenerate contrastive batch(es) skipped\n",
                   m.epoch, degenerate);
    result.history.push_back(m);

    if (out_dir) {
      metrics_out << metrics_json_line(m) << '\n';
      metrics_out.flush();
      char name[40];
      std::snprintf(name, sizeof(name), "checkpoint_epoch_%03d.pck", m.epoch);
      save_checkpoint(result.model, *out_dir / name);
    }
  }

  if (out_dir) save_checkpoint(result.model, *out_dir / "checkpoint_final.pck");
  return result;
}

}  // namespace vidpace
