// Acceptance suite: one pass/fail line per criterion, pinned tolerances.
// Usage: acceptance <vidpace-binary> <golden-dir> [filter] [--write-golden]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "vidpace/corpus.hpp"
#include "vidpace/eval.hpp"
#include "vidpace/gradcheck.hpp"
#include "vidpace/model.hpp"
#include "vidpace/objective.hpp"
#include "vidpace/trainer.hpp"

namespace fs = std::filesystem;
using namespace vidpace;
using Clock = std::chrono::steady_clock;

namespace {

std::string g_cli;
fs::path g_golden;
fs::path g_work;

std::vector<uint8_t> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  return std::vector<uint8_t>((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
}

void dump(const fs::path& p, const std::vector<uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

int run_cli(const std::string& args) {
  const std::string cmd =
      g_cli + " " + args + " >> " + (g_work / "cli.log").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return status < 0 ? -1 : WEXITSTATUS(status);
}

// ---------------------------------------------------------------------------
// Shared fixtures.

CorpusSpec default_corpus_spec() {
  CorpusSpec spec;  // 200 videos, 36x36x3, base speed 2 - the default corpus
  return spec;
}

TrainConfig learnability_train_config() {
  TrainConfig cfg;
  cfg.pace = PaceConfig::relative(4);
  cfg.clip_len = 16;
  cfg.crop_h = cfg.crop_w = 32;
  cfg.batch_videos = 16;
  cfg.contrastive = ContrastiveMode::None;
  cfg.lr = 2e-3;
  cfg.epochs = 10;
  cfg.epoch_size = 1600;
  cfg.seed = 1;
  cfg.val_clips_per_class = 2;
  return cfg;
}

// Small geometry shared by the trend and transfer criteria.
CorpusSpec small_corpus_spec(uint64_t seed) {
  CorpusSpec spec;
  spec.num_videos = 60;
  spec.frames = 36;
  spec.height = 28;
  spec.width = 28;
  spec.channels = 1;
  spec.base_speed = 2.0;
  spec.shape_classes = 3;
  spec.noise_amplitude = 0.05;
  spec.seed = seed;
  return spec;
}

TrainConfig small_train_config(int relative_b, uint64_t seed) {
  TrainConfig cfg;
  cfg.pace = PaceConfig::relative(relative_b);
  cfg.clip_len = 10;
  cfg.crop_h = cfg.crop_w = 24;
  cfg.batch_videos = 8;
  cfg.contrastive = ContrastiveMode::None;
  cfg.lr = 2e-3;
  cfg.epochs = 4;
  cfg.epoch_size = 288;
  cfg.seed = seed;
  cfg.val_clips_per_class = 2;
  return cfg;
}

ModelConfig small_model_config(const TrainConfig& tc) {
  return ModelConfig::tiny(1, tc.clip_len, tc.crop_h, tc.crop_w,
                           tc.pace.num_classes());
}

// ---------------------------------------------------------------------------
// Criterion 1: the pace sampler reproduces the worked examples and the
// modular index formula over 1,000 random draws. Runtime < 1 s.

bool pace_sampler_oracle(std::string& detail) {
  VideoTensor v25 = VideoTensor::make(25, 2, 2, 1, Dtype::U8);
  for (int t = 0; t < 25; ++t)
    for (int i = 0; i < 4; ++i) v25.u8[static_cast<size_t>(t * 4 + i)] = static_cast<uint8_t>(t);

  // 1-based frames {11,14,17,20,23} are 0-based {10,13,16,19,22}.
  const Clip fast = sample_clip(v25, Pace::fast(3), 10, 5);
  if (fast.source_indices != std::vector<int>{10, 13, 16, 19, 22}) {
    detail = "fast worked example mismatch";
    return false;
  }
  const Clip slow = sample_clip(v25, Pace::slow(2), 0, 5);
  if (slow.source_indices != std::vector<int>{0, 0, 1, 1, 2}) {
    detail = "slow replication pattern mismatch";
    return false;
  }

  Rng rng(20260809);
  for (int iter = 0; iter < 1000; ++iter) {
    const int t = 1 + static_cast<int>(rng.uniform_int(48));
    const int length = 1 + static_cast<int>(rng.uniform_int(32));
    const int start = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(t)));
    const bool is_slow = rng.uniform_int(2) == 0;
    const int q = 1 + static_cast<int>(rng.uniform_int(6));
    const VideoTensor video = VideoTensor::make(t, 1, 1, 1, Dtype::U8);
    const Clip clip = sample_clip(video, is_slow ? Pace::slow(q) : Pace::fast(q),
                                  start, length);
    for (int i = 0; i < length; ++i) {
      const int want = is_slow
                           ? (start + i / q) % t
                           : static_cast<int>((start + static_cast<int64_t>(i) * q) % t);
      if (clip.source_indices[static_cast<size_t>(i)] != want) {
        detail = "index formula violated at draw " + std::to_string(iter);
        return false;
      }
    }
  }
  detail = "worked examples and 1000 random draws";
  return true;
}

// ---------------------------------------------------------------------------
// Criterion 2: grad_check on the tiny architecture with the joint loss,
// both contrastive modes, f64: max relative error < 1e-4; a sign-flipped
// backward must report > 1e-1. Runtime < 60 s.

bool gradient_integrity(std::string& detail) {
  const ModelConfig cfg = ModelConfig::tiny(3, 8, 12, 12, 4);
  double worst_healthy = 0;

  for (const ContrastiveMode mode :
       {ContrastiveMode::SameContext, ContrastiveMode::SamePace}) {
    Model<double> model(cfg);
    Rng rng(mode == ContrastiveMode::SameContext ? 404 : 405);
    model.init_params(rng);

    TrainBatchT<double> batch;
    batch.clips = TensorD({4, 3, 8, 12, 12});
    for (auto& v : batch.clips.data) v = rng.next_double();
    batch.video_ids = {0, 1, 0, 1};
    batch.pace_labels = {0, 2, 1, 2};  // one same-pace positive pair

    const Objective objective{mode, LossWeights{1.0, 0.1}, SimMode::L2Normalized};
    const GradCheckLossFn fn = [&](Model<double>& m, std::vector<TensorD>* grads) {
      return evaluate_objective(m, batch, objective, grads).loss;
    };
    const GradCheckReport report = grad_check(model, fn, 1e-4, 200, 77);
    worst_healthy = std::max(worst_healthy, report.max_rel_error);
    if (report.max_rel_error >= 1e-4) {
      detail = "healthy backward reports " + std::to_string(report.max_rel_error) +
               " (worst " + report.worst_param + ")";
      return false;
    }

    // Fault injection: flip the sign of one tensor's gradient.
    const GradCheckLossFn corrupted = [&](Model<double>& m,
                                          std::vector<TensorD>* grads) {
      const double loss = evaluate_objective(m, batch, objective, grads).loss;
      if (grads)
        for (size_t p = 0; p < m.params().size(); ++p)
          if (m.params()[p].name == "fc.bias")
            for (auto& g : (*grads)[p].data) g = -g;
      return loss;
    };
    const GradCheckReport bad = grad_check(model, corrupted, 1e-4, 200, 78);
    if (bad.max_rel_error <= 1e-1) {
      detail = "fault injection not detected (" + std::to_string(bad.max_rel_error) + ")";
      return false;
    }
  }
  std::ostringstream s;
  s << "max rel error " << worst_healthy << " over both modes; fault detected";
  detail = s.str();
  return true;
}

// ---------------------------------------------------------------------------
// Criterion 3: both contrastive losses match brute-force pair enumeration to
// 1e-10 on 200 random batches, and hit ln 3 / ln 2 on the constant batches.
// Runtime < 10 s.

bool loss_oracle_equivalence(std::string& detail) {
  // Closed forms on constant batches.
  {
    EmbeddingBatchT<double> batch;
    batch.z = TensorD({4, 3});
    for (int i = 0; i < 4; ++i) {
      batch.z.data[static_cast<size_t>(i) * 3 + 0] = 0.6;
      batch.z.data[static_cast<size_t>(i) * 3 + 1] = 0.8;
    }
    batch.video_ids = {0, 1, 0, 1};
    batch.pace_labels = {0, 1, 2, 3};
    const double got = ctr_same_context(batch, SimMode::L2Normalized).loss;
    if (std::abs(got - std::log(3.0)) > 1e-12) {
      detail = "same-context constant batch != ln 3";
      return false;
    }
  }
  {
    EmbeddingBatchT<double> batch;
    batch.z = TensorD({3, 2});
    for (int i = 0; i < 3; ++i) batch.z.data[static_cast<size_t>(i) * 2] = 1.0;
    batch.video_ids = {0, 1, 2};
    batch.pace_labels = {0, 0, 1};
    const double got = ctr_same_pace(batch, SimMode::L2Normalized).loss;
    if (std::abs(got - std::log(2.0)) > 1e-12) {
      detail = "same-pace (a,a,b) batch != ln 2";
      return false;
    }
  }

  Rng rng(3141);
  double worst = 0;
  int tested = 0;
  while (tested < 200) {
    const bool context = tested % 2 == 0;
    const int n = 2 + static_cast<int>(rng.uniform_int(7));
    const int b = context ? 2 * n : 2 + static_cast<int>(rng.uniform_int(14));
    const int d = 2 + static_cast<int>(rng.uniform_int(8));
    EmbeddingBatchT<double> batch;
    batch.z = TensorD({b, d});
    for (auto& v : batch.z.data) v = rng.normal();
    batch.video_ids.resize(static_cast<size_t>(b));
    batch.pace_labels.resize(static_cast<size_t>(b));
    for (int i = 0; i < b; ++i) {
      batch.video_ids[static_cast<size_t>(i)] = context ? i % n : i;
      batch.pace_labels[static_cast<size_t>(i)] = static_cast<int>(rng.uniform_int(3));
    }

    std::vector<std::vector<double>> rows(static_cast<size_t>(b),
                                          std::vector<double>(static_cast<size_t>(d)));
    for (int i = 0; i < b; ++i)
      for (int k = 0; k < d; ++k)
        rows[static_cast<size_t>(i)][static_cast<size_t>(k)] =
            batch.z.data[static_cast<size_t>(i) * d + k];

    const SimMode mode = rng.uniform_int(2) == 0 ? SimMode::L2Normalized : SimMode::RawDot;
    const bool norm = mode == SimMode::L2Normalized;
    double got, want;
    if (context) {
      got = ctr_same_context(batch, mode).loss;
      want = oracle::brute_ctr_same_context(rows, batch.video_ids, norm);
    } else {
      bool has_pair = false;
      for (int i = 0; i < b && !has_pair; ++i)
        for (int j = 0; j < b && !has_pair; ++j)
          has_pair = i != j && batch.pace_labels[static_cast<size_t>(i)] ==
                                   batch.pace_labels[static_cast<size_t>(j)];
      if (!has_pair) continue;
      got = ctr_same_pace(batch, mode).loss;
      want = oracle::brute_ctr_same_pace(rows, batch.pace_labels, norm);
    }
    if (std::abs(got - want) > 1e-10) {
      detail = "batch " + std::to_string(tested) + " differs by " +
               std::to_string(std::abs(got - want));
      return false;
    }
    worst = std::max(worst, std::abs(got - want));
    ++tested;
  }
  std::ostringstream s;
  s << "200 batches, worst |impl - oracle| = " << worst;
  detail = s.str();
  return true;
}

// ---------------------------------------------------------------------------
// Criterion 4: conv3d matches the naive summation oracle on 100 random small
// shapes to 1e-5. Runtime < 30 s.

bool conv_oracle(std::string& detail) {
  Rng rng(2718);
  double worst = 0;
  for (int iter = 0; iter < 100; ++iter) {
    const int n = 1 + static_cast<int>(rng.uniform_int(2));
    const int c = 1 + static_cast<int>(rng.uniform_int(3));
    const int k = 1 + static_cast<int>(rng.uniform_int(4));
    const int kt = 1 + static_cast<int>(rng.uniform_int(3));
    const int kh = 1 + static_cast<int>(rng.uniform_int(3));
    const int kw = 1 + static_cast<int>(rng.uniform_int(3));
    Conv3dGeom geom;
    for (int a = 0; a < 3; ++a) {
      geom.stride[a] = 1 + static_cast<int>(rng.uniform_int(2));
      geom.padding[a] = static_cast<int>(rng.uniform_int(2));
    }
    const int t = kt + static_cast<int>(rng.uniform_int(6));
    const int h = kh + static_cast<int>(rng.uniform_int(8));
    const int w = kw + static_cast<int>(rng.uniform_int(8));

    TensorD in64({n, c, t, h, w});
    for (auto& v : in64.data) v = rng.next_double() * 2 - 1;
    TensorD w64({k, c, kt, kh, kw});
    for (auto& v : w64.data) v = rng.next_double() * 2 - 1;
    TensorD b64({k});
    for (auto& v : b64.data) v = rng.next_double() * 2 - 1;

    const TensorF got = conv3d_forward(tensor_cast<float>(in64), tensor_cast<float>(w64),
                                       tensor_cast<float>(b64), geom);
    const TensorD want = oracle::naive_conv3d(in64, w64, b64, geom);
    for (size_t i = 0; i < got.data.size(); ++i)
      worst = std::max(worst, std::abs(static_cast<double>(got.data[i]) - want.data[i]));
    if (worst > 1e-5) {
      detail = "shape " + std::to_string(iter) + " deviates by " + std::to_string(worst);
      return false;
    }
  }
  std::ostringstream s;
  s << "100 shapes, worst |impl - oracle| = " << worst;
  detail = s.str();
  return true;
}

// ---------------------------------------------------------------------------
// Criterion 5: pretraining the tiny model on the default 200-video corpus
// (16x32x32 clips, M = 4 relative paces) reaches held-out pace accuracy
// >= 0.85 within 30 epochs and 20 minutes.

bool learnability(std::string& detail) {
  const auto t0 = Clock::now();
  const Corpus corpus = generate_corpus(default_corpus_spec(), 1);
  const TrainConfig tc = learnability_train_config();
  const ModelConfig mc =
      ModelConfig::tiny(3, tc.clip_len, tc.crop_h, tc.crop_w, 4);

  const PretrainResult result = pretrain(corpus, mc, tc, std::nullopt);
  double best = 0;
  std::ostringstream curve;
  for (const auto& m : result.history) {
    best = std::max(best, m.val_pace_acc);
    curve << ' ' << m.val_pace_acc;
  }
  const double minutes =
      std::chrono::duration<double>(Clock::now() - t0).count() / 60.0;
  std::ostringstream s;
  s << "best held-out pace accuracy " << best << " (chance 0.25) in "
    << result.history.size() << " epochs, " << minutes << " min; curve:" << curve.str();
  detail = s.str();
  return best >= 0.85 && result.history.size() <= 30 && minutes < 20.0;
}

// ---------------------------------------------------------------------------
// Criterion 6: held-out pretext accuracy is non-increasing across relative
// pace sets b = 3, 4, 5, 6 on a fixed corpus, majority direction over 3 seeds.

bool difficulty_trend(std::string& detail) {
  const Corpus corpus = generate_corpus(small_corpus_spec(501), 1);
  const std::vector<int> bs{3, 4, 5, 6};
  const std::vector<uint64_t> seeds{11, 12, 13};

  std::vector<std::vector<double>> acc(seeds.size());
  std::ostringstream table;
  for (size_t si = 0; si < seeds.size(); ++si) {
    for (const int b : bs) {
      TrainConfig tc = small_train_config(b, seeds[si]);
      const ModelConfig mc = small_model_config(tc);
      const PretrainResult r = pretrain(corpus, mc, tc, std::nullopt);
      acc[si].push_back(r.history.back().val_pace_acc);
    }
    table << " seed" << seeds[si] << ':';
    for (const double a : acc[si]) table << ' ' << a;
  }

  // Majority direction per adjacent pair of pace sets.
  bool ok = true;
  for (size_t step = 0; step + 1 < bs.size(); ++step) {
    int non_increasing = 0;
    for (size_t si = 0; si < seeds.size(); ++si)
      if (acc[si][step + 1] <= acc[si][step] + 1e-12) ++non_increasing;
    if (2 * non_increasing < static_cast<int>(seeds.size())) ok = false;
  }
  detail = "accuracy by seed and b=3,4,5,6:" + table.str();
  return ok;
}

// ---------------------------------------------------------------------------
// Criterion 7: transfer direction. Linear probes of pace-pretrained features
// beat random initialization by >= 10 points on shape classification,
// pretrained retrieval top-1 beats random top-1, and same-context joint
// pretraining matches or exceeds pace-only on the probe (2pt noise margin)
// across 3 seeds.

struct TransferOutcome {
  double probe_pretrained = 0;
  double probe_random = 0;
  double probe_joint = 0;
  double top1_pretrained = 0;
  double top1_random = 0;
};

double shape_probe(Model<float> model, const Corpus& corpus, uint64_t seed) {
  ProbeConfig pc;
  pc.task = ProbeTask::Shape;
  pc.mode = ProbeMode::Linear;
  pc.train = small_train_config(4, seed);
  pc.train.epochs = 6;
  pc.train.lr = 3e-3;
  pc.eval_clips = 10;
  return finetune_probe(model, corpus, pc).test_accuracy;
}

double retrieval_top1(Model<float>& model, const Corpus& corpus) {
  std::vector<VideoFeature> train_feats, test_feats;
  for (int v : corpus.train_indices())
    train_feats.push_back(extract_features(model, corpus.videos[static_cast<size_t>(v)],
                                           LayerTag::PLast, v,
                                           corpus.labels[static_cast<size_t>(v)]));
  for (int v : corpus.test_indices())
    test_feats.push_back(extract_features(model, corpus.videos[static_cast<size_t>(v)],
                                          LayerTag::PLast, v,
                                          corpus.labels[static_cast<size_t>(v)]));
  const auto report = retrieve_topk(train_feats, test_feats, std::vector<int>{1}, false);
  return report.topk_accuracy[0].second;
}

bool transfer_direction(std::string& detail) {
  const Corpus corpus = generate_corpus(small_corpus_spec(601), 1);
  const std::vector<uint64_t> seeds{21, 22, 23};

  double probe_pre = 0, probe_rnd = 0, probe_joint = 0, top1_pre = 0, top1_rnd = 0;
  for (const uint64_t seed : seeds) {
    TrainConfig pace_tc = small_train_config(4, seed);
    pace_tc.epochs = 6;
    const ModelConfig mc = small_model_config(pace_tc);
    PretrainResult pace_run = pretrain(corpus, mc, pace_tc, std::nullopt);

    TrainConfig joint_tc = pace_tc;
    joint_tc.contrastive = ContrastiveMode::SameContext;
    PretrainResult joint_run = pretrain(corpus, mc, joint_tc, std::nullopt);

    Model<float> random_model(mc);
    Rng rng(derive_seed(seed, 0xBA5Eull));
    random_model.init_params(rng);

    probe_pre += shape_probe(pace_run.model, corpus, seed + 100);
    probe_joint += shape_probe(joint_run.model, corpus, seed + 100);
    probe_rnd += shape_probe(random_model, corpus, seed + 100);
    top1_pre += retrieval_top1(pace_run.model, corpus);
    top1_rnd += retrieval_top1(random_model, corpus);
  }
  const double n = static_cast<double>(seeds.size());
  probe_pre /= n;
  probe_rnd /= n;
  probe_joint /= n;
  top1_pre /= n;
  top1_rnd /= n;

  std::ostringstream s;
  s << "probe pretrained " << probe_pre << " vs random " << probe_rnd
    << " (need +0.10); joint " << probe_joint << " (need >= pace-only - 0.02); "
    << "retrieval top-1 pretrained " << top1_pre << " vs random " << top1_rnd;
  detail = s.str();
  return probe_pre - probe_rnd >= 0.10 && top1_pre > top1_rnd &&
         probe_joint >= probe_pre - 0.02;
}

// ---------------------------------------------------------------------------
// Criterion 8: identical CLI runs (config, seed, workers) produce
// byte-identical checkpoints and metrics.

bool determinism(std::string& detail) {
  const fs::path dir = g_work / "determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string small =
      " --set corpus.num_videos=12 --set corpus.frames=20 --set corpus.height=24"
      " --set corpus.width=24 --set corpus.channels=1"
      " --set train.clip_len=8 --set train.crop=20 --set train.batch_videos=4"
      " --set train.epochs=2 --set train.epoch_size=16"
      " --set model.channels=4,8 --set model.pools=122,222 --set model.embed_dim=16";

  const std::string data = (dir / "data").string();
  if (run_cli("gen-corpus --out " + data + small) != 0 ||
      run_cli("gen-corpus --out " + (dir / "data2").string() + small) != 0) {
    detail = "gen-corpus failed";
    return false;
  }
  if (slurp(dir / "data" / "videos" / "video_0000.vpc") !=
      slurp(dir / "data2" / "videos" / "video_0000.vpc")) {
    detail = "corpus bytes differ";
    return false;
  }
  for (const char* name : {"runA", "runB"}) {
    if (run_cli("pretrain --corpus " + data + " --out " + (dir / name).string() +
                " --contrastive same_context --workers 2" + small) != 0) {
      detail = "pretrain failed";
      return false;
    }
  }
  if (slurp(dir / "runA" / "checkpoint_final.pck") !=
      slurp(dir / "runB" / "checkpoint_final.pck")) {
    detail = "checkpoints differ";
    return false;
  }
  if (slurp(dir / "runA" / "metrics.jsonl") != slurp(dir / "runB" / "metrics.jsonl")) {
    detail = "metrics differ";
    return false;
  }
  detail = "corpus, checkpoints and metrics byte-identical across reruns";
  return true;
}

// ---------------------------------------------------------------------------
// Criterion 9: committed golden binaries for both file formats round-trip
// byte-exactly.

VideoTensor golden_video_u8() {
  VideoTensor v = VideoTensor::make(1, 1, 1, 1, Dtype::U8);
  v.u8[0] = 42;
  return v;
}

VideoTensor golden_video_f32() {
  VideoTensor v = VideoTensor::make(2, 3, 2, 1, Dtype::F32);
  for (size_t i = 0; i < v.f32.size(); ++i)
    v.f32[i] = static_cast<float>(i) / static_cast<float>(v.f32.size());
  return v;
}

Model<float> golden_model() {
  ModelConfig cfg;
  cfg.blocks = {{BlockKind::Conv3d, 2, {3, 3, 3}, {1, 1, 1}, {1, 1, 1},
                 PoolKind::Max1x2x2, 0}};
  cfg.embed_dim = 3;
  cfg.num_classes = 2;
  cfg.in_channels = 1;
  cfg.in_t = 2;
  cfg.in_h = 4;
  cfg.in_w = 4;
  Model<float> model(cfg);
  Rng rng(20200806);
  model.init_params(rng);
  return model;
}

void write_golden_files() {
  fs::create_directories(g_golden);
  dump(g_golden / "tiny_u8.vpc", encode_video(golden_video_u8()));
  dump(g_golden / "small_f32.vpc", encode_video(golden_video_f32()));
  dump(g_golden / "small_model.pck", encode_checkpoint(golden_model()));
  std::cout << "golden files written to " << g_golden << "\n";
}

bool format_golden_files(std::string& detail) {
  // VPC1, u8: the hand-encoded expectation, the committed bytes, and a fresh
  // encode must all agree.
  const std::vector<uint8_t> hand = {'V', 'P', 'C', '1', 1, 0, 0, 0, 1, 0, 0, 0,
                                     1,   0,   0,   0,  1, 0, 0, 0, 0, 42};
  const auto tiny = slurp(g_golden / "tiny_u8.vpc");
  if (tiny != hand) {
    detail = "tiny_u8.vpc differs from the hand-encoded bytes";
    return false;
  }
  if (encode_video(decode_video(tiny)) != tiny || encode_video(golden_video_u8()) != tiny) {
    detail = "tiny_u8.vpc does not round-trip";
    return false;
  }

  const auto f32 = slurp(g_golden / "small_f32.vpc");
  if (encode_video(decode_video(f32)) != f32 || encode_video(golden_video_f32()) != f32) {
    detail = "small_f32.vpc does not round-trip";
    return false;
  }

  const auto pck = slurp(g_golden / "small_model.pck");
  Model<float> model = golden_model();
  if (encode_checkpoint(model) != pck) {
    detail = "freshly built golden model bytes differ from small_model.pck";
    return false;
  }
  Model<float> reloaded = golden_model();
  decode_checkpoint_into(reloaded, pck);
  if (encode_checkpoint(reloaded) != pck) {
    detail = "small_model.pck does not round-trip";
    return false;
  }
  detail = "VPC1 and PCK1 fixtures round-trip byte-exactly";
  return true;
}

struct Criterion {
  const char* name;
  double budget_seconds;  // 0 = no pinned runtime budget
  std::function<bool(std::string&)> fn;
};

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: acceptance <vidpace-binary> <golden-dir> [filter|--write-golden]\n";
    return 2;
  }
  g_cli = argv[1];
  g_golden = argv[2];
  g_work = fs::temp_directory_path() / "vidpace_acceptance";
  fs::create_directories(g_work);
  std::string filter = argc > 3 ? argv[3] : "";

  if (filter == "--write-golden") {
    write_golden_files();
    return 0;
  }

  const std::vector<Criterion> criteria = {
      {"pace-sampler-oracle", 1.0, pace_sampler_oracle},
      {"gradient-integrity", 60.0, gradient_integrity},
      {"loss-oracle-equivalence", 10.0, loss_oracle_equivalence},
      {"conv-oracle", 30.0, conv_oracle},
      {"learnability", 1200.0, learnability},
      {"difficulty-trend", 0.0, difficulty_trend},
      {"transfer-direction", 0.0, transfer_direction},
      {"determinism", 0.0, determinism},
      {"format-golden-files", 0.0, format_golden_files},
  };

  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!filter.empty() && std::string(c.name).find(filter) == std::string::npos)
      continue;
    const auto t0 = Clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = c.fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (ok && c.budget_seconds > 0 && secs >= c.budget_seconds) {
      ok = false;
      detail += " [exceeded runtime budget of " +
                std::to_string(c.budget_seconds) + " s]";
    }
    std::printf("[%s] %s (%.2f s): %s\n", ok ? "PASS" : "FAIL", c.name, secs,
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failed;
  }
  if (failed > 0) {
    std::printf("%d criterion(s) failed\n", failed);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
