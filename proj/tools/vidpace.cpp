// Command-line front end: corpus generation, pretraining, gradient checking,
// probing, retrieval and attention-map export, driven by key = value configs.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vidpace/config.hpp"
#include "vidpace/corpus.hpp"
#include "vidpace/errors.hpp"
#include "vidpace/eval.hpp"
#include "vidpace/gradcheck.hpp"
#include "vidpace/objective.hpp"
#include "vidpace/trainer.hpp"

namespace fs = std::filesystem;
using namespace vidpace;

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<uint64_t> seed;
  int workers = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "key = value config file");
  cmd->add_option("--set", args.sets, "override a config key (key=value), repeatable");
  cmd->add_option("--seed", args.seed, "root seed for every random draw");
  cmd->add_option("--workers", args.workers, "worker threads (output is identical for any value)")
      ->check(CLI::PositiveNumber);
}

RunConfig resolve_config(const CommonArgs& args) {
  RunConfig cfg;
  if (!args.config_path.empty()) cfg.load_file(args.config_path);
  for (const std::string& kv : args.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (args.seed) {
    const std::string s = std::to_string(*args.seed);
    cfg.set("corpus.seed", s);
    cfg.set("train.seed", s);
    cfg.set("eval.seed", s);
  }
  return cfg;
}

void log_resolved(const RunConfig& cfg, const std::optional<fs::path>& out_dir) {
  const std::string text = cfg.resolved_text();
  std::cout << "# resolved config\n" << text << std::flush;
  if (out_dir) {
    fs::create_directories(*out_dir);
    std::ofstream out(*out_dir / "config.resolved.cfg", std::ios::trunc);
    if (!out) throw IoError("cannot write resolved config in " + out_dir->string());
    out << text;
  }
}

Model<float> build_model(const RunConfig& cfg, const Corpus& corpus,
                         const std::string& checkpoint, uint64_t init_seed) {
  ModelConfig mc = cfg.model_config();
  mc.in_channels = corpus.videos.front().c;
  Model<float> model(mc);
  if (!checkpoint.empty()) {
    load_checkpoint(model, checkpoint);
  } else {
    Rng rng(derive_seed(init_seed, 0x494E4954ull));
    model.init_params(rng);
    std::cout << "no checkpoint given: using randomly initialized weights\n";
  }
  return model;
}

int cmd_gen_corpus(const CommonArgs& args, const std::string& out_dir) {
  RunConfig cfg = resolve_config(args);
  log_resolved(cfg, fs::path(out_dir));
  const CorpusSpec spec = cfg.corpus_spec();
  const Corpus corpus = generate_corpus(spec, args.workers);
  save_corpus(corpus, out_dir);
  std::cout << "wrote " << corpus.size() << " videos ("
            << corpus.train_indices().size() << " train, "
            << corpus.test_indices().size() << " test) to " << out_dir << "\n";
  return 0;
}

int cmd_pretrain(const CommonArgs& args, const std::string& corpus_dir,
                 const std::string& out_dir, const std::string& contrastive) {
  RunConfig cfg = resolve_config(args);
  if (!contrastive.empty()) cfg.set("train.contrastive", contrastive);
  log_resolved(cfg, fs::path(out_dir));

  const Corpus corpus = load_corpus(corpus_dir);
  ModelConfig mc = cfg.model_config();
  mc.in_channels = corpus.videos.front().c;
  TrainConfig tc = cfg.train_config();
  tc.workers = args.workers;

  const PretrainResult result = pretrain(corpus, mc, tc, fs::path(out_dir));
  for (const EpochMetrics& m : result.history)
    std::cout << metrics_json_line(m) << "\n";
  std::cout << "final val_pace_acc " << result.history.back().val_pace_acc
            << "; checkpoints in " << out_dir << "\n";
  return 0;
}

int cmd_gradcheck(const CommonArgs& args) {
  RunConfig cfg = resolve_config(args);
  log_resolved(cfg, std::nullopt);

  // The configured architecture on a reduced input geometry: finite
  // differences need thousands of forward passes.
  ModelConfig mc = cfg.model_config();
  mc.in_t = std::min(mc.in_t, 8);
  mc.in_h = std::min(mc.in_h, 12);
  mc.in_w = std::min(mc.in_w, 12);
  mc.validate();

  TrainConfig tc = cfg.train_config();
  const uint64_t seed = tc.seed;

  Model<double> model(mc);
  Rng rng(derive_seed(seed, 0x4743484Bull));
  model.init_params(rng);

  const int n = 4;
  TrainBatchT<double> batch;
  batch.clips = TensorD({n, mc.in_channels, mc.in_t, mc.in_h, mc.in_w});
  for (auto& v : batch.clips.data) v = rng.next_double();
  batch.video_ids = {0, 1, 0, 1};  // two clips per video for same-context
  batch.pace_labels.resize(n);
  for (int i = 0; i < n; ++i)
    batch.pace_labels[static_cast<size_t>(i)] =
        static_cast<int>(rng.uniform_int(static_cast<uint64_t>(mc.num_classes)));
  // Same-pace needs at least one positive pair.
  batch.pace_labels[1] = batch.pace_labels[0];

  Objective objective{tc.contrastive, tc.weights, tc.sim};
  const GradCheckLossFn loss_fn = [&](Model<double>& m,
                                      std::vector<TensorD>* grads) {
    return evaluate_objective(m, batch, objective, grads).loss;
  };
  const GradCheckReport report = grad_check(model, loss_fn, 1e-4, 200, seed);

  std::printf("max relative error %.3e (worst: %s, analytic %.6e vs numeric %.6e)\n",
              report.max_rel_error, report.worst_param.c_str(),
              report.worst_analytic, report.worst_numeric);
  return report.max_rel_error < 1e-4 ? 0 : 2;
}

int cmd_probe(const CommonArgs& args, const std::string& corpus_dir,
              const std::string& checkpoint, const std::string& out_dir,
              const std::string& task, const std::string& mode) {
  RunConfig cfg = resolve_config(args);
  if (!task.empty()) cfg.set("eval.task", task);
  if (!mode.empty()) cfg.set("eval.mode", mode);
  log_resolved(cfg, out_dir.empty() ? std::nullopt : std::optional<fs::path>(out_dir));

  const Corpus corpus = load_corpus(corpus_dir);
  Model<float> model = build_model(cfg, corpus, checkpoint, cfg.get_u64("eval.seed"));
  const ProbeConfig pc = cfg.probe_config();
  const ProbeResult result = finetune_probe(model, corpus, pc);

  std::printf("probe task=%s mode=%s test_accuracy %.4f\n",
              cfg.get_str("eval.task").c_str(), cfg.get_str("eval.mode").c_str(),
              result.test_accuracy);
  if (!out_dir.empty()) {
    std::ofstream out(fs::path(out_dir) / "probe_report.json", std::ios::trunc);
    out << "{\"task\": \"" << cfg.get_str("eval.task") << "\", \"mode\": \""
        << cfg.get_str("eval.mode") << "\", \"test_accuracy\": "
        << result.test_accuracy << "}\n";
  }
  return 0;
}

int cmd_retrieve(const CommonArgs& args, const std::string& corpus_dir,
                 const std::string& checkpoint, const std::string& out_dir,
                 bool per_clip_flag, const std::string& layer) {
  RunConfig cfg = resolve_config(args);
  if (per_clip_flag) cfg.set("eval.per_clip", "true");
  if (!layer.empty()) cfg.set("eval.layer", layer);
  log_resolved(cfg, out_dir.empty() ? std::nullopt : std::optional<fs::path>(out_dir));

  const Corpus corpus = load_corpus(corpus_dir);
  Model<float> model = build_model(cfg, corpus, checkpoint, cfg.get_u64("eval.seed"));
  const LayerTag tag = cfg.eval_layer();
  const int num_clips = cfg.get_int("eval.clips");

  std::vector<VideoFeature> train_feats, test_feats;
  for (int v : corpus.train_indices())
    train_feats.push_back(extract_features(model, corpus.videos[static_cast<size_t>(v)],
                                           tag, v, corpus.labels[static_cast<size_t>(v)],
                                           num_clips));
  for (int v : corpus.test_indices())
    test_feats.push_back(extract_features(model, corpus.videos[static_cast<size_t>(v)],
                                          tag, v, corpus.labels[static_cast<size_t>(v)],
                                          num_clips));

  const std::vector<int> ks = cfg.eval_ks();
  const RetrievalReport report =
      retrieve_topk(train_feats, test_feats, ks, cfg.eval_per_clip());

  std::cout << retrieval_report_json(report) << "\n";
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream j(fs::path(out_dir) / "retrieval.json", std::ios::trunc);
    j << retrieval_report_json(report) << "\n";
    std::ofstream c(fs::path(out_dir) / "retrieval.csv", std::ios::trunc);
    c << retrieval_report_csv(report);
  }
  return 0;
}

int cmd_attention(const CommonArgs& args, const std::string& corpus_dir,
                  const std::string& checkpoint, const std::string& out_file,
                  int video_index, int start, int block) {
  RunConfig cfg = resolve_config(args);
  log_resolved(cfg, std::nullopt);

  const Corpus corpus = load_corpus(corpus_dir);
  if (video_index < 0 || video_index >= static_cast<int>(corpus.size()))
    throw ArgumentError("video index " + std::to_string(video_index) + " out of range");
  Model<float> model = build_model(cfg, corpus, checkpoint, cfg.get_u64("eval.seed"));
  const ModelConfig& mc = model.config();

  const VideoTensor& video = corpus.videos[static_cast<size_t>(video_index)];
  Clip clip = sample_clip(video, Pace{1, 1}, start, mc.in_t);
  clip = to_f32(clip);
  clip = center_crop(clip, mc.in_h, mc.in_w);
  TensorF batch({1, video.c, mc.in_t, mc.in_h, mc.in_w});
  write_clip_row(batch, 0, clip);
  model.forward(batch);

  const int b = block < 0 ? model.num_blocks() - 1 : block;
  const TensorF map = attention_map(model.block_activation(b), 0);
  write_video(attention_to_video(map), out_file);
  std::cout << "wrote attention map " << map.shape_str() << " of block " << b
            << " to " << out_file << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-supervised video-pace representation learning toolkit"};
  app.require_subcommand(1);

  CommonArgs common;

  auto* gen = app.add_subcommand("gen-corpus", "generate a synthetic corpus");
  std::string gen_out;
  add_common(gen, common);
  gen->add_option("--out", gen_out, "output directory")->required();

  auto* pre = app.add_subcommand("pretrain", "run self-supervised pretraining");
  std::string pre_corpus, pre_out, pre_ctr;
  add_common(pre, common);
  pre->add_option("--corpus", pre_corpus, "corpus directory")->required();
  pre->add_option("--out", pre_out, "run directory")->required();
  pre->add_option("--contrastive", pre_ctr,
                  "contrastive mode: none|same_context|same_pace");

  auto* grad = app.add_subcommand("gradcheck", "finite-difference gradient check");
  add_common(grad, common);

  auto* probe = app.add_subcommand("probe", "linear probe / fine-tune a checkpoint");
  std::string probe_corpus, probe_ckpt, probe_out, probe_task, probe_mode;
  add_common(probe, common);
  probe->add_option("--corpus", probe_corpus, "corpus directory")->required();
  probe->add_option("--checkpoint", probe_ckpt, "PCK1 checkpoint (omit for random init)");
  probe->add_option("--out", probe_out, "report directory");
  probe->add_option("--task", probe_task, "downstream task: shape|pace");
  probe->add_option("--mode", probe_mode, "probe mode: linear|full");

  auto* retr = app.add_subcommand("retrieve", "nearest-neighbor retrieval report");
  std::string retr_corpus, retr_ckpt, retr_out, retr_layer;
  bool retr_per_clip = false;
  add_common(retr, common);
  retr->add_option("--corpus", retr_corpus, "corpus directory")->required();
  retr->add_option("--checkpoint", retr_ckpt, "PCK1 checkpoint (omit for random init)");
  retr->add_option("--out", retr_out, "report directory");
  retr->add_option("--layer", retr_layer, "feature layer: p_last|p_penultimate");
  retr->add_flag("--per-clip", retr_per_clip, "clip-level queries and gallery");

  auto* att = app.add_subcommand("attention", "export an activation attention map");
  std::string att_corpus, att_ckpt, att_out;
  int att_video = 0, att_start = 0, att_block = -1;
  add_common(att, common);
  att->add_option("--corpus", att_corpus, "corpus directory")->required();
  att->add_option("--checkpoint", att_ckpt, "PCK1 checkpoint (omit for random init)");
  att->add_option("--out", att_out, "output .vpc file")->required();
  att->add_option("--video", att_video, "video index");
  att->add_option("--start", att_start, "clip start frame");
  att->add_option("--block", att_block, "conv block index (-1 = last)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage errors are exit 1
  }

  try {
    if (gen->parsed()) return cmd_gen_corpus(common, gen_out);
    if (pre->parsed()) return cmd_pretrain(common, pre_corpus, pre_out, pre_ctr);
    if (grad->parsed()) return cmd_gradcheck(common);
    if (probe->parsed())
      return cmd_probe(common, probe_corpus, probe_ckpt, probe_out, probe_task,
                       probe_mode);
    if (retr->parsed())
      return cmd_retrieve(common, retr_corpus, retr_ckpt, retr_out, retr_per_clip,
                          retr_layer);
    if (att->parsed())
      return cmd_attention(common, att_corpus, att_ckpt, att_out, att_video,
                           att_start, att_block);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
