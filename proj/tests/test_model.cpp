#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "vidpace/errors.hpp"
#include "vidpace/gradcheck.hpp"
#include "vidpace/losses.hpp"
#include "vidpace/model.hpp"
#include "vidpace/objective.hpp"
#include "vidpace/optim.hpp"

using namespace vidpace;

namespace {

// Two-block model small enough for finite differences.
ModelConfig mini_config(int classes = 3, BlockKind kind = BlockKind::Conv3d,
                        ProjectionKind proj = ProjectionKind::None) {
  ModelConfig cfg;
  cfg.blocks = {
      {kind, 4, {3, 3, 3}, {1, 1, 1}, {1, 1, 1}, PoolKind::Max1x2x2, 0},
      {kind, 6, {3, 3, 3}, {1, 1, 1}, {1, 1, 1}, PoolKind::Max2x2x2, 0},
  };
  cfg.embed_dim = 8;
  cfg.num_classes = classes;
  cfg.projection_head = proj;
  cfg.projection_dim = 5;
  cfg.in_channels = 1;
  cfg.in_t = 4;
  cfg.in_h = 8;
  cfg.in_w = 8;
  return cfg;
}

template <typename S>
TensorT<S> random_batch(const ModelConfig& cfg, int n, uint64_t seed) {
  Rng rng(seed);
  TensorT<S> batch({n, cfg.in_channels, cfg.in_t, cfg.in_h, cfg.in_w});
  for (auto& v : batch.data) v = static_cast<S>(rng.next_double());
  return batch;
}

}  // namespace

TEST_SUITE_BEGIN("model");

TEST_CASE("parameter shapes follow the config") {
  Model<float> model(ModelConfig::tiny(3, 16, 32, 32, 4));
  CHECK(model.param("block0.conv.weight").value.dims == std::vector<int>{8, 3, 3, 3, 3});
  CHECK(model.param("block1.conv.weight").value.dims == std::vector<int>{16, 8, 3, 3, 3});
  CHECK(model.param("block2.conv.weight").value.dims == std::vector<int>{32, 16, 3, 3, 3});
  CHECK(model.param("embed.weight").value.dims == std::vector<int>{64, 32});
  CHECK(model.param("fc.weight").value.dims == std::vector<int>{4, 64});
  CHECK_THROWS_AS(model.param("nope"), ArgumentError);

  Model<float> factored(ModelConfig::tiny(3, 16, 32, 32, 4, BlockKind::Conv2Plus1d));
  CHECK(factored.param("block0.spatial.weight").value.dims ==
        std::vector<int>{8, 3, 1, 3, 3});
  CHECK(factored.param("block0.temporal.weight").value.dims ==
        std::vector<int>{8, 8, 3, 1, 1});
}

TEST_CASE("init gives zero biases and nonzero weights") {
  Model<float> model(mini_config());
  Rng rng(1);
  model.init_params(rng);
  for (const auto& p : model.params()) {
    if (p.name.ends_with(".bias")) {
      for (float v : p.value.data) CHECK(v == 0.0f);
    } else {
      double mass = 0;
      for (float v : p.value.data) mass += std::abs(v);
      CHECK(mass > 0);
    }
  }
}

TEST_CASE("config validation rejects collapsing dims") {
  ModelConfig cfg = mini_config();
  cfg.in_t = 1;  // block1 pool 2x2x2 collapses T to 0
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("forward output shapes and projection variants") {
  const int n = 3;
  SUBCASE("no head: projection is the embedding") {
    Model<float> model(mini_config());
    Rng rng(2);
    model.init_params(rng);
    const auto out = model.forward(random_batch<float>(model.config(), n, 5));
    CHECK(out.logits.dims == std::vector<int>{n, 3});
    CHECK(out.embedding.dims == std::vector<int>{n, 8});
    CHECK(out.projection.dims == std::vector<int>{n, 8});
    CHECK(out.projection.data == out.embedding.data);
  }
  SUBCASE("mlp head") {
    Model<float> model(mini_config(3, BlockKind::Conv3d, ProjectionKind::Mlp));
    Rng rng(2);
    model.init_params(rng);
    const auto out = model.forward(random_batch<float>(model.config(), n, 5));
    CHECK(out.projection.dims == std::vector<int>{n, 5});
    for (float v : out.projection.data) CHECK(v >= 0.0f);  // post-relu
  }
}

TEST_CASE("zero classifier weights give uniform softmax") {
  Model<float> model(mini_config(4));
  Rng rng(3);
  model.init_params(rng);
  model.param("fc.weight").value.fill(0.0f);
  model.param("fc.bias").value.fill(0.0f);
  auto out = model.forward(random_batch<float>(model.config(), 2, 6));
  for (float v : out.logits.data) CHECK(v == 0.0f);
  softmax_rows_inplace(out.logits);
  for (float v : out.logits.data) CHECK(v == doctest::Approx(0.25f));
}

TEST_CASE("permuting the batch permutes the outputs") {
  Model<float> model(mini_config());
  Rng rng(4);
  model.init_params(rng);
  const TensorF batch = random_batch<float>(model.config(), 3, 7);

  TensorF permuted(batch.dims);
  const int64_t sample = batch.numel() / 3;
  const int perm[3] = {2, 0, 1};
  for (int i = 0; i < 3; ++i)
    std::copy_n(batch.data.begin() + perm[i] * sample, sample,
                permuted.data.begin() + i * sample);

  const auto a = model.forward(batch);
  const auto b = model.forward(permuted);
  const int m = a.logits.dims[1];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < m; ++j)
      CHECK(a.logits.data[static_cast<size_t>(perm[i]) * m + j] ==
            b.logits.data[static_cast<size_t>(i) * m + j]);
}

// A bias-free conv/relu/pool stack is positively homogeneous: degree 1 in
// the input (every conv is linear), and degree equal to the conv depth in
// the weights.
TEST_CASE("bias-free network scales predictably") {
  ModelConfig cfg = mini_config();
  cfg.embed_dim = cfg.blocks.back().out_channels;  // pass-through embedding
  Model<float> model(cfg);
  Rng rng(5);
  model.init_params(rng);  // biases stay zero

  const TensorF x = random_batch<float>(cfg, 2, 8);

  SUBCASE("doubling the input scales activations linearly at any depth") {
    TensorF x2 = x;
    for (auto& v : x2.data) v *= 2.0f;
    model.forward(x);
    const TensorF act1 = model.block_activation(1);
    model.forward(x2);
    const TensorF act2 = model.block_activation(1);
    for (size_t i = 0; i < act1.data.size(); ++i)
      CHECK(act2.data[i] == doctest::Approx(2.0f * act1.data[i]).epsilon(1e-4));
  }

  SUBCASE("doubling the conv weights scales block k activations by 2^(k+1)") {
    model.forward(x);
    const TensorF act0 = model.block_activation(0);
    const TensorF act1 = model.block_activation(1);

    for (auto& p : model.params())
      if (p.name.find(".conv.weight") != std::string::npos)
        for (auto& v : p.value.data) v *= 2.0f;

    model.forward(x);
    const TensorF scaled0 = model.block_activation(0);
    const TensorF scaled1 = model.block_activation(1);
    for (size_t i = 0; i < act0.data.size(); ++i)
      CHECK(scaled0.data[i] == doctest::Approx(2.0f * act0.data[i]).epsilon(1e-4));
    for (size_t i = 0; i < act1.data.size(); ++i)
      CHECK(scaled1.data[i] == doctest::Approx(4.0f * act1.data[i]).epsilon(1e-4));
  }
}

TEST_CASE("backward before forward is a state error") {
  Model<float> model(mini_config());
  Rng rng(6);
  model.init_params(rng);
  TensorF d_logits({1, 3});
  CHECK_THROWS_AS(model.backward(d_logits, TensorF{}), StateError);
}

TEST_CASE("zero upstream gives zero gradients") {
  Model<float> model(mini_config());
  Rng rng(7);
  model.init_params(rng);
  model.forward(random_batch<float>(model.config(), 2, 9));
  const auto grads = model.backward(TensorF({2, 3}), TensorF{});
  for (const auto& g : grads)
    for (float v : g.data) CHECK(v == 0.0f);
}

TEST_CASE("gradient of a batch equals the sum of per-sample gradients") {
  Model<float> model(mini_config());
  Rng rng(8);
  model.init_params(rng);
  const TensorF batch = random_batch<float>(model.config(), 2, 10);
  TensorF up({2, 3});
  Rng urng(11);
  for (auto& v : up.data) v = static_cast<float>(urng.normal());

  model.forward(batch);
  const auto g_joint = model.backward(up, TensorF{});

  const int64_t sample = batch.numel() / 2;
  std::vector<std::vector<TensorF>> parts;
  for (int i = 0; i < 2; ++i) {
    TensorF one({1, model.config().in_channels, model.config().in_t,
                 model.config().in_h, model.config().in_w});
    std::copy_n(batch.data.begin() + i * sample, sample, one.data.begin());
    TensorF uone({1, 3});
    std::copy_n(up.data.begin() + static_cast<int64_t>(i) * 3, 3, uone.data.begin());
    model.forward(one);
    parts.push_back(model.backward(uone, TensorF{}));
  }
  for (size_t p = 0; p < g_joint.size(); ++p)
    for (size_t i = 0; i < g_joint[p].data.size(); ++i) {
      const double want = static_cast<double>(parts[0][p].data[i]) + parts[1][p].data[i];
      CHECK(g_joint[p].data[i] == doctest::Approx(want).epsilon(2e-3).scale(1.0));
    }
}

TEST_CASE("model gradients match finite differences through the joint objective") {
  for (const BlockKind kind : {BlockKind::Conv3d, BlockKind::Conv2Plus1d}) {
    ModelConfig cfg = mini_config(3, kind, ProjectionKind::Mlp);
    Model<double> model(cfg);
    Rng rng(12);
    model.init_params(rng);

    TrainBatchT<double> batch;
    batch.clips = random_batch<double>(cfg, 4, 13);
    batch.pace_labels = {0, 1, 2, 1};
    batch.video_ids = {0, 1, 0, 1};
    const Objective objective{ContrastiveMode::SameContext, LossWeights{1.0, 0.1},
                              SimMode::L2Normalized};
    const GradCheckLossFn fn = [&](Model<double>& m, std::vector<TensorD>* grads) {
      return evaluate_objective(m, batch, objective, grads).loss;
    };
    const auto report = grad_check(model, fn, 1e-5, 40, 99);
    INFO("worst parameter: ", report.worst_param);
    CHECK(report.max_rel_error < 1e-4);
  }
}

TEST_CASE("every parameter participates in the gradient") {
  ModelConfig cfg = mini_config(3, BlockKind::Conv3d, ProjectionKind::Mlp);
  Model<double> model(cfg);
  Rng rng(14);
  model.init_params(rng);
  TrainBatchT<double> batch;
  batch.clips = random_batch<double>(cfg, 4, 15);
  batch.pace_labels = {0, 1, 2, 1};
  batch.video_ids = {0, 1, 0, 1};
  const Objective objective{ContrastiveMode::SamePace, LossWeights{1.0, 0.1},
                            SimMode::L2Normalized};
  std::vector<TensorD> grads;
  evaluate_objective(model, batch, objective, &grads);
  for (size_t p = 0; p < grads.size(); ++p) {
    double mass = 0;
    for (double v : grads[p].data) mass += std::abs(v);
    INFO("parameter ", model.params()[p].name);
    CHECK(mass > 0.0);
  }
}

TEST_CASE("grad_check is exact for a quadratic objective") {
  Model<double> model(mini_config());
  Rng rng(16);
  model.init_params(rng);
  // sum over parameters of (w - 0.5)^2 is exactly differentiated by central
  // differences, so the report must be at rounding level.
  const GradCheckLossFn fn = [](Model<double>& m, std::vector<TensorD>* grads) {
    double loss = 0;
    if (grads) {
      grads->clear();
      for (auto& p : m.params()) grads->emplace_back(p.value.dims);
    }
    for (size_t pi = 0; pi < m.params().size(); ++pi) {
      const auto& data = m.params()[pi].value.data;
      for (size_t i = 0; i < data.size(); ++i) {
        const double d = data[i] - 0.5;
        loss += d * d;
        if (grads) (*grads)[pi].data[i] = 2.0 * d;
      }
    }
    return loss;
  };
  const auto report = grad_check(model, fn, 1e-4, 50, 3);
  CHECK(report.max_rel_error < 1e-8);
}

TEST_CASE("grad_check flags a corrupted backward pass") {
  ModelConfig cfg = mini_config();
  Model<double> model(cfg);
  Rng rng(17);
  model.init_params(rng);
  TrainBatchT<double> batch;
  batch.clips = random_batch<double>(cfg, 2, 18);
  batch.pace_labels = {0, 2};
  batch.video_ids = {0, 1};
  const Objective objective{ContrastiveMode::None, LossWeights{1.0, 0.0},
                            SimMode::L2Normalized};
  int fc_bias_index = -1;
  for (size_t i = 0; i < model.params().size(); ++i)
    if (model.params()[i].name == "fc.bias") fc_bias_index = static_cast<int>(i);
  REQUIRE(fc_bias_index >= 0);

  const GradCheckLossFn corrupted = [&](Model<double>& m, std::vector<TensorD>* grads) {
    const double loss = evaluate_objective(m, batch, objective, grads).loss;
    if (grads)  // single sign flip
      for (auto& v : (*grads)[static_cast<size_t>(fc_bias_index)].data) v = -v;
    return loss;
  };
  const auto report = grad_check(model, corrupted, 1e-5, 40, 7);
  CHECK(report.max_rel_error > 1e-1);
}

TEST_CASE("checkpoint round trip restores every tensor bit-exactly") {
  Model<float> model(mini_config());
  Rng rng(19);
  model.init_params(rng);
  const auto bytes = encode_checkpoint(model);

  Model<float> other(mini_config());
  Rng rng2(99);
  other.init_params(rng2);
  decode_checkpoint_into(other, bytes);
  for (size_t p = 0; p < model.params().size(); ++p)
    CHECK(model.params()[p].value.data == other.params()[p].value.data);
  CHECK(encode_checkpoint(other) == bytes);
}

TEST_CASE("checkpoint config-hash and shape mismatches are checkpoint errors") {
  Model<float> model(mini_config(3));
  Rng rng(20);
  model.init_params(rng);
  const auto bytes = encode_checkpoint(model);

  Model<float> different(mini_config(4));
  CHECK_THROWS_AS(decode_checkpoint_into(different, bytes), CheckpointError);

  // Same tensor inventory, different hash: flip the factorized-relu flag.
  ModelConfig cfg = mini_config(3);
  cfg.factorized_relu = !cfg.factorized_relu;
  Model<float> hash_only(cfg);
  CHECK_THROWS_AS(decode_checkpoint_into(hash_only, bytes), CheckpointError);

  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  Model<float> target(mini_config(3));
  CHECK_THROWS_AS(decode_checkpoint_into(target, bad_magic), FormatError);

  auto truncated = bytes;
  truncated.resize(truncated.size() - 5);
  CHECK_THROWS_AS(decode_checkpoint_into(target, truncated), FormatError);
}

TEST_CASE("checkpoint file io") {
  const auto dir = std::filesystem::temp_directory_path() / "vidpace_ckpt_test";
  std::filesystem::create_directories(dir);
  Model<float> model(mini_config());
  Rng rng(21);
  model.init_params(rng);
  save_checkpoint(model, dir / "m.pck");
  Model<float> loaded(mini_config());
  load_checkpoint(loaded, dir / "m.pck");
  for (size_t p = 0; p < model.params().size(); ++p)
    CHECK(model.params()[p].value.data == loaded.params()[p].value.data);
  std::filesystem::remove_all(dir);
}

TEST_CASE("reinit_head replaces only the classifier") {
  Model<float> model(mini_config(3));
  Rng rng(22);
  model.init_params(rng);
  const auto conv_before = model.param("block0.conv.weight").value.data;
  Rng head_rng(23);
  model.reinit_head(7, head_rng);
  CHECK(model.config().num_classes == 7);
  CHECK(model.param("fc.weight").value.dims == std::vector<int>{7, 8});
  CHECK(model.param("block0.conv.weight").value.data == conv_before);
}

TEST_CASE("sgd update rule") {
  Model<float> model(mini_config());
  Rng rng(24);
  model.init_params(rng);

  std::vector<TensorF> grads;
  for (const auto& p : model.params()) {
    TensorF g(p.value.dims);
    g.fill(0.5f);
    grads.push_back(g);
  }

  SUBCASE("lr 0 leaves parameters unchanged") {
    const auto before = model.param("fc.weight").value.data;
    Sgd opt(0.9, 0.0);
    opt.step(model, grads, 0.0);
    CHECK(model.param("fc.weight").value.data == before);
  }
  SUBCASE("plain sgd subtracts lr * grad") {
    const auto before = model.param("fc.weight").value.data;
    Sgd opt(0.0, 0.0);
    opt.step(model, grads, 0.1);
    const auto& after = model.param("fc.weight").value.data;
    for (size_t i = 0; i < before.size(); ++i)
      CHECK(after[i] == doctest::Approx(before[i] - 0.1f * 0.5f));
  }
  SUBCASE("two momentum steps displace by lr * g * (1 + 1.9)") {
    const auto before = model.param("fc.weight").value.data;
    Sgd opt(0.9, 0.0);
    opt.step(model, grads, 0.1);
    opt.step(model, grads, 0.1);
    const auto& after = model.param("fc.weight").value.data;
    for (size_t i = 0; i < before.size(); ++i)
      CHECK(after[i] == doctest::Approx(before[i] - 0.1f * 0.5f * 2.9f).epsilon(1e-5));
  }
  SUBCASE("weight decay joins the gradient") {
    Model<float> m2(mini_config());
    Rng r2(24);
    m2.init_params(r2);
    Sgd opt(0.0, 0.1);
    opt.step(m2, grads, 0.1);
    const auto& ref = model.param("fc.weight").value.data;
    const auto& got = m2.param("fc.weight").value.data;
    for (size_t i = 0; i < ref.size(); ++i)
      CHECK(got[i] == doctest::Approx(ref[i] - 0.1f * (0.5f + 0.1f * ref[i])).epsilon(1e-5));
  }
  SUBCASE("shape mismatch is an error") {
    grads[0] = TensorF({1, 2});
    Sgd opt;
    CHECK_THROWS_AS(opt.step(model, grads, 0.1), ShapeError);
  }
}

TEST_SUITE_END();
