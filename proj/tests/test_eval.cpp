#include <doctest.h>

#include <cmath>

#include "vidpace/errors.hpp"
#include "vidpace/eval.hpp"

using namespace vidpace;

namespace {

Corpus eval_corpus(int num_videos = 12, uint64_t seed = 5) {
  CorpusSpec spec;
  spec.num_videos = num_videos;
  spec.frames = 20;
  spec.height = 24;
  spec.width = 24;
  spec.channels = 1;
  spec.base_speed = 2.0;
  spec.shape_classes = 3;
  spec.seed = seed;
  return generate_corpus(spec);
}

ModelConfig eval_model_config(int classes = 4) {
  ModelConfig mc;
  mc.blocks = {
      {BlockKind::Conv3d, 4, {3, 3, 3}, {1, 1, 1}, {1, 1, 1}, PoolKind::Max1x2x2, 0},
      {BlockKind::Conv3d, 8, {3, 3, 3}, {1, 1, 1}, {1, 1, 1}, PoolKind::Max2x2x2, 0},
  };
  mc.embed_dim = 16;
  mc.num_classes = classes;
  mc.in_channels = 1;
  mc.in_t = 8;
  mc.in_h = mc.in_w = 20;
  return mc;
}

Model<float> random_model(const ModelConfig& mc, uint64_t seed) {
  Model<float> model(mc);
  Rng rng(seed);
  model.init_params(rng);
  return model;
}

VideoFeature synthetic_feature(std::vector<float> pooled, int label) {
  VideoFeature f;
  const int d = static_cast<int>(pooled.size());
  f.clips = TensorF({1, d});
  std::copy(pooled.begin(), pooled.end(), f.clips.data.begin());
  f.pooled = std::move(pooled);
  f.label = label;
  return f;
}

}  // namespace

TEST_SUITE_BEGIN("evalsuite");

TEST_CASE("extract_features is deterministic and pools the clip mean") {
  const Corpus corpus = eval_corpus();
  Model<float> model = random_model(eval_model_config(), 3);

  const VideoFeature a = extract_features(model, corpus.videos[0], LayerTag::PLast, 0,
                                          corpus.labels[0]);
  const VideoFeature b = extract_features(model, corpus.videos[0], LayerTag::PLast, 0,
                                          corpus.labels[0]);
  CHECK(a.clips.data == b.clips.data);
  CHECK(a.pooled == b.pooled);
  CHECK(a.clips.dims == std::vector<int>{10, 8});

  const int d = a.clips.dims[1];
  for (int k = 0; k < d; ++k) {
    double mean = 0;
    for (int i = 0; i < 10; ++i) mean += a.clips.data[static_cast<size_t>(i) * d + k];
    CHECK(a.pooled[static_cast<size_t>(k)] == doctest::Approx(mean / 10.0).epsilon(1e-5));
  }
}

TEST_CASE("p_penultimate features carry the second-to-last channel width") {
  const Corpus corpus = eval_corpus();
  Model<float> model = random_model(eval_model_config(), 3);
  const VideoFeature f = extract_features(model, corpus.videos[0],
                                          LayerTag::PPenultimate, 0, 0);
  CHECK(f.clips.dims == std::vector<int>{10, 4});

  ModelConfig one_block = eval_model_config();
  one_block.blocks.resize(1);
  Model<float> shallow = random_model(one_block, 4);
  CHECK_THROWS_AS(extract_features(shallow, corpus.videos[0], LayerTag::PPenultimate, 0, 0),
                  ArgumentError);
}

TEST_CASE("a query duplicated from the gallery is a top-1 hit") {
  std::vector<VideoFeature> train;
  train.push_back(synthetic_feature({1.0f, 0.0f, 0.0f}, 0));
  train.push_back(synthetic_feature({0.0f, 1.0f, 0.0f}, 1));
  train.push_back(synthetic_feature({0.0f, 0.0f, 1.0f}, 2));
  std::vector<VideoFeature> test;
  test.push_back(synthetic_feature({0.0f, 1.0f, 0.0f}, 1));

  const auto report = retrieve_topk(train, test, std::vector<int>{1}, false);
  CHECK(report.topk_accuracy[0].second == doctest::Approx(1.0));
}

TEST_CASE("k equal to the gallery size retrieves everything") {
  Rng rng(7);
  std::vector<VideoFeature> train, test;
  for (int i = 0; i < 9; ++i) {
    std::vector<float> v(4);
    for (auto& x : v) x = static_cast<float>(rng.normal());
    train.push_back(synthetic_feature(v, i % 3));
  }
  for (int i = 0; i < 5; ++i) {
    std::vector<float> v(4);
    for (auto& x : v) x = static_cast<float>(rng.normal());
    test.push_back(synthetic_feature(v, i % 3));
  }
  const auto report = retrieve_topk(train, test, std::vector<int>{1, 3, 9}, false);
  CHECK(report.topk_accuracy.back().second == doctest::Approx(1.0));
  // Monotone non-decreasing in k.
  for (size_t i = 1; i < report.topk_accuracy.size(); ++i)
    CHECK(report.topk_accuracy[i].second >= report.topk_accuracy[i - 1].second);
}

TEST_CASE("random balanced features retrieve near chance at top-1") {
  Rng rng(11);
  std::vector<VideoFeature> train, test;
  for (int i = 0; i < 150; ++i) {
    std::vector<float> v(8);
    for (auto& x : v) x = static_cast<float>(rng.normal());
    train.push_back(synthetic_feature(v, i % 3));
  }
  for (int i = 0; i < 300; ++i) {
    std::vector<float> v(8);
    for (auto& x : v) x = static_cast<float>(rng.normal());
    test.push_back(synthetic_feature(v, i % 3));
  }
  const auto report = retrieve_topk(train, test, std::vector<int>{1}, false);
  CHECK(report.topk_accuracy[0].second == doctest::Approx(1.0 / 3).epsilon(0.35));
}

TEST_CASE("retrieval is invariant to uniform positive scaling") {
  Rng rng(13);
  std::vector<VideoFeature> train, test;
  for (int i = 0; i < 20; ++i) {
    std::vector<float> v(5);
    for (auto& x : v) x = static_cast<float>(rng.normal());
    train.push_back(synthetic_feature(v, i % 3));
  }
  for (int i = 0; i < 10; ++i) {
    std::vector<float> v(5);
    for (auto& x : v) x = static_cast<float>(rng.normal());
    test.push_back(synthetic_feature(v, i % 3));
  }
  const std::vector<int> ks{1, 5, 10};
  const auto base = retrieve_topk(train, test, ks, false);
  for (auto& f : train)
    for (auto& v : f.pooled) v *= 3.25f;
  for (auto& f : test)
    for (auto& v : f.pooled) v *= 0.4f;
  const auto scaled = retrieve_topk(train, test, ks, false);
  for (size_t i = 0; i < base.topk_accuracy.size(); ++i)
    CHECK(base.topk_accuracy[i].second == scaled.topk_accuracy[i].second);
}

TEST_CASE("per-clip retrieval uses every clip row") {
  Rng rng(17);
  std::vector<VideoFeature> train, test;
  for (int i = 0; i < 6; ++i) {
    VideoFeature f;
    f.clips = TensorF({3, 4});
    for (auto& v : f.clips.data) v = static_cast<float>(rng.normal());
    f.pooled.assign(4, 0.0f);
    f.label = i % 2;
    train.push_back(f);
  }
  std::vector<VideoFeature> queries(train.begin(), train.begin() + 2);
  const auto report = retrieve_topk(train, queries, std::vector<int>{1}, true);
  CHECK(report.topk_accuracy[0].second == doctest::Approx(1.0));  // self matches
}

TEST_CASE("retrieval report serialization") {
  RetrievalReport report;
  report.topk_accuracy = {{1, 0.5}, {5, 0.75}};
  CHECK(retrieval_report_json(report) == "{\"topk\":{\"1\":0.5,\"5\":0.75}}");
  CHECK(retrieval_report_csv(report) == "k,accuracy\n1,0.5\n5,0.75\n");
}

TEST_CASE("retrieval input validation") {
  std::vector<VideoFeature> train{synthetic_feature({1.0f, 0.0f}, 0)};
  std::vector<VideoFeature> test{synthetic_feature({1.0f, 0.0f, 0.0f}, 0)};
  CHECK_THROWS_AS(retrieve_topk(train, test, std::vector<int>{1}, false), ShapeError);
  CHECK_THROWS_AS(retrieve_topk(train, {}, std::vector<int>{1}, false), ArgumentError);
  std::vector<VideoFeature> ok{synthetic_feature({1.0f, 0.0f}, 0)};
  CHECK_THROWS_AS(retrieve_topk(train, ok, std::vector<int>{0}, false), ArgumentError);
}

TEST_CASE("linear probes freeze every non-head parameter") {
  const Corpus corpus = eval_corpus();
  ProbeConfig pc;
  pc.task = ProbeTask::Shape;
  pc.mode = ProbeMode::Linear;
  pc.train.pace = PaceConfig::relative(4);
  pc.train.clip_len = 8;
  pc.train.crop_h = pc.train.crop_w = 20;
  pc.train.batch_videos = 4;
  pc.train.epochs = 1;
  pc.train.epoch_size = 8;
  pc.train.seed = 9;
  pc.eval_clips = 4;

  Model<float> model = random_model(eval_model_config(), 21);
  const auto conv_before = model.param("block0.conv.weight").value.data;
  const auto embed_before = model.param("embed.weight").value.data;
  finetune_probe(model, corpus, pc);
  CHECK(model.param("block0.conv.weight").value.data == conv_before);
  CHECK(model.param("embed.weight").value.data == embed_before);
  CHECK(model.config().num_classes == 3);  // re-headed for shape classes

  // Full mode updates conv weights too.
  Model<float> full_model = random_model(eval_model_config(), 21);
  pc.mode = ProbeMode::Full;
  finetune_probe(full_model, corpus, pc);
  CHECK(full_model.param("block0.conv.weight").value.data != conv_before);
}

TEST_CASE("attention maps normalize channel-mean magnitudes") {
  SUBCASE("constant activations give a uniform map") {
    TensorF act({2, 3, 2, 2, 2});
    act.fill(0.7f);
    const TensorF map = attention_map(act, 1);
    CHECK(map.dims == std::vector<int>{2, 2, 2});
    for (float v : map.data) CHECK(v == doctest::Approx(1.0f / 8));
  }
  SUBCASE("mass is nonnegative and sums to one") {
    Rng rng(19);
    TensorF act({1, 4, 2, 3, 3});
    for (auto& v : act.data) v = static_cast<float>(rng.normal());
    const TensorF map = attention_map(act, 0);
    double sum = 0;
    for (float v : map.data) {
      CHECK(v >= 0.0f);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("a single hot location dominates the map") {
    TensorF act({1, 2, 2, 2, 2});
    act.fill(0.0f);
    act.data[3] = 5.0f;   // channel 0, position 3
    act.data[11] = 5.0f;  // channel 1, same position
    const TensorF map = attention_map(act, 0);
    CHECK(map.data[3] == doctest::Approx(1.0f));
  }
  SUBCASE("vpc export wraps the map as a single-channel f32 video") {
    TensorF map({2, 2, 2});
    map.fill(1.0f / 8);
    const VideoTensor video = attention_to_video(map);
    CHECK(video.c == 1);
    CHECK(video.dtype == Dtype::F32);
    CHECK_NOTHROW(video.validate());
  }
}

TEST_SUITE_END();
