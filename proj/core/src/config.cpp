#include "vidpace/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "vidpace/errors.hpp"

namespace vidpace {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

const std::map<std::string, std::string>& default_values() {
  static const std::map<std::string, std::string> defaults = {
      {"corpus.num_videos", "200"},
      {"corpus.frames", "40"},
      {"corpus.height", "36"},
      {"corpus.width", "36"},
      {"corpus.channels", "3"},
      {"corpus.base_speed", "2.0"},
      {"corpus.shape_classes", "3"},
      {"corpus.noise_amplitude", "0.05"},
      {"corpus.dtype", "u8"},
      {"corpus.seed", "7"},
      {"pace.mode", "relative"},
      {"pace.relative_max", "4"},
      {"pace.step", "1"},
      {"model.kind", "conv3d"},
      {"model.channels", "8,16,32"},
      {"model.pools", "122,222,222"},
      {"model.kernel", "3"},
      {"model.embed_dim", "64"},
      {"model.projection", "none"},
      {"model.projection_dim", "64"},
      {"train.clip_len", "16"},
      {"train.crop", "32"},
      {"train.batch_videos", "16"},
      {"train.contrastive", "none"},
      {"train.lambda_cls", "1.0"},
      {"train.lambda_ctr", "0.1"},
      {"train.similarity", "normalized"},
      {"train.lr", "0.001"},
      {"train.lr_decay_every", "6"},
      {"train.lr_decay_factor", "10.0"},
      {"train.epochs", "18"},
      {"train.epoch_size", "0"},
      {"train.momentum", "0.9"},
      {"train.weight_decay", "0.0"},
      {"train.seed", "1"},
      {"train.val_clips_per_class", "1"},
      {"augment.enable", "true"},
      {"augment.brightness", "0.25"},
      {"augment.contrast", "0.25"},
      {"augment.saturation", "0.25"},
      {"augment.hue", "0.04"},
      {"augment.per_frame", "true"},
      {"augment.hflip_prob", "0.5"},
      {"eval.layer", "p_last"},
      {"eval.per_clip", "false"},
      {"eval.ks", "1,5,10,20,50"},
      {"eval.task", "shape"},
      {"eval.mode", "linear"},
      {"eval.epochs", "8"},
      {"eval.lr", "0.003"},
      {"eval.batch_videos", "16"},
      {"eval.epoch_size", "0"},
      {"eval.clips", "10"},
      {"eval.seed", "11"},
  };
  return defaults;
}

}  // namespace

RunConfig::RunConfig() : values_(default_values()) {}

const std::map<std::string, std::string>& RunConfig::registry() {
  return default_values();
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto it = values_.find(key);
  if (it == values_.end())
    throw ConfigError("unknown config key '" + key + "'");
  it->second = value;
}

bool RunConfig::has(const std::string& key) const {
  return values_.count(key) != 0;
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    try {
      set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

const std::string& RunConfig::get_str(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

int RunConfig::get_int(const std::string& key) const {
  const std::string& v = get_str(key);
  int out{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("config key '" + key + "': '" + v + "' is not an integer");
  return out;
}

uint64_t RunConfig::get_u64(const std::string& key) const {
  const std::string& v = get_str(key);
  uint64_t out{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("config key '" + key + "': '" + v + "' is not an unsigned integer");
  return out;
}

double RunConfig::get_double(const std::string& key) const {
  const std::string& v = get_str(key);
  try {
    size_t pos = 0;
    const double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': '" + v + "' is not a number");
  }
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string& v = get_str(key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config key '" + key + "': '" + v + "' is not a boolean");
}

std::vector<int> RunConfig::get_int_list(const std::string& key) const {
  const std::string& v = get_str(key);
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    int val{};
    const auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), val);
    if (ec != std::errc() || p != item.data() + item.size())
      throw ConfigError("config key '" + key + "': '" + item + "' is not an integer");
    out.push_back(val);
  }
  if (out.empty())
    throw ConfigError("config key '" + key + "': empty list");
  return out;
}

std::string RunConfig::resolved_text() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

CorpusSpec RunConfig::corpus_spec() const {
  CorpusSpec spec;
  spec.num_videos = get_int("corpus.num_videos");
  spec.frames = get_int("corpus.frames");
  spec.height = get_int("corpus.height");
  spec.width = get_int("corpus.width");
  spec.channels = get_int("corpus.channels");
  spec.base_speed = get_double("corpus.base_speed");
  spec.shape_classes = get_int("corpus.shape_classes");
  spec.noise_amplitude = get_double("corpus.noise_amplitude");
  const std::string& dtype = get_str("corpus.dtype");
  if (dtype == "u8")
    spec.dtype = Dtype::U8;
  else if (dtype == "f32")
    spec.dtype = Dtype::F32;
  else
    throw ConfigError("corpus.dtype must be u8 or f32, got '" + dtype + "'");
  spec.seed = get_u64("corpus.seed");
  return spec;
}

PaceConfig RunConfig::pace_config() const {
  const std::string& mode = get_str("pace.mode");
  if (mode == "relative") return PaceConfig::relative(get_int("pace.relative_max"));
  if (mode == "absolute") return PaceConfig::absolute();
  if (mode == "slow_only") return PaceConfig::slow_only();
  if (mode == "stepped") return PaceConfig::stepped(get_int("pace.step"));
  throw ConfigError("pace.mode must be relative|absolute|slow_only|stepped, got '" +
                    mode + "'");
}

ModelConfig RunConfig::model_config() const {
  ModelConfig cfg;
  const std::string& kind_str = get_str("model.kind");
  BlockKind kind;
  if (kind_str == "conv3d")
    kind = BlockKind::Conv3d;
  else if (kind_str == "conv2plus1d")
    kind = BlockKind::Conv2Plus1d;
  else
    throw ConfigError("model.kind must be conv3d or conv2plus1d, got '" + kind_str + "'");

  const std::vector<int> channels = get_int_list("model.channels");
  const std::vector<int> pools = get_int_list("model.pools");
  if (pools.size() != channels.size())
    throw ConfigError("model.pools must list one pool per block");
  const int kernel = get_int("model.kernel");
  if (kernel < 1 || kernel % 2 == 0)
    throw ConfigError("model.kernel must be odd and >= 1");
  const int pad = kernel / 2;

  cfg.blocks.clear();
  for (size_t i = 0; i < channels.size(); ++i) {
    BlockConfig b;
    b.kind = kind;
    b.out_channels = channels[i];
    b.kernel = {kernel, kernel, kernel};
    b.padding = {pad, pad, pad};
    switch (pools[i]) {
      case 0: b.pool = PoolKind::None; break;
      case 122: b.pool = PoolKind::Max1x2x2; break;
      case 222: b.pool = PoolKind::Max2x2x2; break;
      default:
        throw ConfigError("model.pools entries must be 0, 122 or 222");
    }
    cfg.blocks.push_back(b);
  }

  cfg.embed_dim = get_int("model.embed_dim");
  const std::string& proj = get_str("model.projection");
  if (proj == "none")
    cfg.projection_head = ProjectionKind::None;
  else if (proj == "mlp")
    cfg.projection_head = ProjectionKind::Mlp;
  else
    throw ConfigError("model.projection must be none or mlp, got '" + proj + "'");
  cfg.projection_dim = get_int("model.projection_dim");

  cfg.in_channels = get_int("corpus.channels");
  cfg.in_t = get_int("train.clip_len");
  cfg.in_h = get_int("train.crop");
  cfg.in_w = get_int("train.crop");
  cfg.num_classes = pace_config().num_classes();
  return cfg;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig cfg;
  cfg.pace = pace_config();
  cfg.clip_len = get_int("train.clip_len");
  cfg.crop_h = cfg.crop_w = get_int("train.crop");
  cfg.batch_videos = get_int("train.batch_videos");
  const std::string& ctr = get_str("train.contrastive");
  if (ctr == "none")
    cfg.contrastive = ContrastiveMode::None;
  else if (ctr == "same_context")
    cfg.contrastive = ContrastiveMode::SameContext;
  else if (ctr == "same_pace")
    cfg.contrastive = ContrastiveMode::SamePace;
  else
    throw ConfigError("train.contrastive must be none|same_context|same_pace, got '" +
                      ctr + "'");
  cfg.weights.lambda_cls = get_double("train.lambda_cls");
  cfg.weights.lambda_ctr = get_double("train.lambda_ctr");
  const std::string& sim = get_str("train.similarity");
  if (sim == "normalized")
    cfg.sim = SimMode::L2Normalized;
  else if (sim == "raw_dot")
    cfg.sim = SimMode::RawDot;
  else
    throw ConfigError("train.similarity must be normalized or raw_dot, got '" + sim + "'");
  cfg.lr = get_double("train.lr");
  cfg.lr_decay_every = get_int("train.lr_decay_every");
  cfg.lr_decay_factor = get_double("train.lr_decay_factor");
  cfg.epochs = get_int("train.epochs");
  cfg.epoch_size = get_int("train.epoch_size");
  cfg.momentum = get_double("train.momentum");
  cfg.weight_decay = get_double("train.weight_decay");
  cfg.seed = get_u64("train.seed");
  cfg.val_clips_per_class = get_int("train.val_clips_per_class");
  cfg.augment.enable = get_bool("augment.enable");
  cfg.augment.jitter.brightness_delta = get_double("augment.brightness");
  cfg.augment.jitter.contrast_delta = get_double("augment.contrast");
  cfg.augment.jitter.saturation_delta = get_double("augment.saturation");
  cfg.augment.jitter.hue_shift = get_double("augment.hue");
  cfg.augment.jitter.per_frame = get_bool("augment.per_frame");
  cfg.augment.hflip_prob = get_double("augment.hflip_prob");
  return cfg;
}

ProbeConfig RunConfig::probe_config() const {
  ProbeConfig cfg;
  const std::string& task = get_str("eval.task");
  if (task == "shape")
    cfg.task = ProbeTask::Shape;
  else if (task == "pace")
    cfg.task = ProbeTask::Pace;
  else
    throw ConfigError("eval.task must be shape or pace, got '" + task + "'");
  const std::string& mode = get_str("eval.mode");
  if (mode == "linear")
    cfg.mode = ProbeMode::Linear;
  else if (mode == "full")
    cfg.mode = ProbeMode::Full;
  else
    throw ConfigError("eval.mode must be linear or full, got '" + mode + "'");

  cfg.train = train_config();
  cfg.train.contrastive = ContrastiveMode::None;
  cfg.train.weights = LossWeights{1.0, 0.0};
  cfg.train.epochs = get_int("eval.epochs");
  cfg.train.lr = get_double("eval.lr");
  cfg.train.batch_videos = get_int("eval.batch_videos");
  cfg.train.epoch_size = get_int("eval.epoch_size");
  cfg.train.seed = get_u64("eval.seed");
  cfg.eval_clips = get_int("eval.clips");
  return cfg;
}

LayerTag RunConfig::eval_layer() const {
  const std::string& layer = get_str("eval.layer");
  if (layer == "p_last") return LayerTag::PLast;
  if (layer == "p_penultimate") return LayerTag::PPenultimate;
  throw ConfigError("eval.layer must be p_last or p_penultimate, got '" + layer + "'");
}

std::vector<int> RunConfig::eval_ks() const { return get_int_list("eval.ks"); }

bool RunConfig::eval_per_clip() const { return get_bool("eval.per_clip"); }

}  // namespace vidpace
