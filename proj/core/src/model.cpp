#include "vidpace/model.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

#include "bytes.hpp"
#include "vidpace/errors.hpp"
#include "vidpace/util.hpp"

namespace vidpace {

namespace {

std::array<int, 3> pool_kernel(PoolKind pool) {
  switch (pool) {
    case PoolKind::None: return {1, 1, 1};
    case PoolKind::Max1x2x2: return {1, 2, 2};
    case PoolKind::Max2x2x2: return {2, 2, 2};
  }
  return {1, 1, 1};
}

const char* pool_tag(PoolKind pool) {
  switch (pool) {
    case PoolKind::None: return "none";
    case PoolKind::Max1x2x2: return "p122";
    case PoolKind::Max2x2x2: return "p222";
  }
  return "?";
}

Conv3dGeom block_geom(const BlockConfig& b) {
  return Conv3dGeom{b.stride, b.padding};
}

int block_mid_channels(const BlockConfig& b) {
  return b.mid_channels > 0 ? b.mid_channels : b.out_channels;
}

}  // namespace

void ModelConfig::validate() const {
  if (blocks.empty()) throw ConfigError("model needs at least one block");
  if (embed_dim < 1) throw ConfigError("embed_dim must be >= 1");
  if (num_classes < 1) throw ConfigError("num_classes must be >= 1");
  if (projection_head == ProjectionKind::Mlp && projection_dim < 1)
    throw ConfigError("projection_dim must be >= 1");
  if (in_channels != 1 && in_channels != 3)
    throw ConfigError("in_channels must be 1 or 3");
  if (in_t < 1 || in_h < 1 || in_w < 1)
    throw ConfigError("model input dims must be >= 1");
  block_dims();  // throws ConfigError if any extent collapses
}

std::vector<ModelConfig::Dims> ModelConfig::block_dims() const {
  std::vector<Dims> out;
  Dims d{in_channels, in_t, in_h, in_w};
  for (size_t i = 0; i < blocks.size(); ++i) {
    const BlockConfig& b = blocks[i];
    if (b.out_channels < 1)
      throw ConfigError("block " + std::to_string(i) + ": out_channels must be >= 1");
    const int ot = conv_out_extent(d.t, b.kernel[0], b.stride[0], b.padding[0]);
    const int oh = conv_out_extent(d.h, b.kernel[1], b.stride[1], b.padding[1]);
    const int ow = conv_out_extent(d.w, b.kernel[2], b.stride[2], b.padding[2]);
    if (ot < 1 || oh < 1 || ow < 1)
      throw ConfigError("block " + std::to_string(i) +
                        " collapses the activation to an empty tensor");
    const auto pk = pool_kernel(b.pool);
    d = Dims{b.out_channels, ot / pk[0], oh / pk[1], ow / pk[2]};
    if (d.t < 1 || d.h < 1 || d.w < 1)
      throw ConfigError("block " + std::to_string(i) +
                        " pool collapses the activation to an empty tensor");
    out.push_back(d);
  }
  return out;
}

int ModelConfig::last_channels() const {
  return blocks.back().out_channels;
}

bool ModelConfig::has_embed_layer() const {
  return embed_dim != last_channels();
}

std::string ModelConfig::canonical_string() const {
  std::ostringstream s;
  s << "vidpace-model-v1|in:" << in_channels << 'x' << in_t << 'x' << in_h
    << 'x' << in_w;
  for (const BlockConfig& b : blocks) {
    s << "|b:" << (b.kind == BlockKind::Conv3d ? "c3d" : "c2p1d") << ','
      << b.out_channels << ',' << block_mid_channels(b) << ','
      << b.kernel[0] << 'x' << b.kernel[1] << 'x' << b.kernel[2] << ','
      << b.stride[0] << 'x' << b.stride[1] << 'x' << b.stride[2] << ','
      << b.padding[0] << 'x' << b.padding[1] << 'x' << b.padding[2] << ','
      << pool_tag(b.pool);
  }
  s << "|embed:" << embed_dim << "|cls:" << num_classes << "|proj:"
    << (projection_head == ProjectionKind::None ? "none"
                                                : "mlp:" + std::to_string(projection_dim))
    << "|frelu:" << (factorized_relu ? 1 : 0);
  return s.str();
}

uint32_t ModelConfig::hash() const { return fnv1a32(canonical_string()); }

ModelConfig ModelConfig::tiny(int in_channels, int in_t, int in_h, int in_w,
                              int num_classes, BlockKind kind,
                              ProjectionKind projection) {
  ModelConfig cfg;
  cfg.in_channels = in_channels;
  cfg.in_t = in_t;
  cfg.in_h = in_h;
  cfg.in_w = in_w;
  cfg.num_classes = num_classes;
  cfg.projection_head = projection;
  cfg.embed_dim = 64;
  cfg.projection_dim = 64;
  cfg.blocks = {
      {kind, 8, {3, 3, 3}, {1, 1, 1}, {1, 1, 1}, PoolKind::Max1x2x2, 0},
      {kind, 16, {3, 3, 3}, {1, 1, 1}, {1, 1, 1}, PoolKind::Max2x2x2, 0},
      {kind, 32, {3, 3, 3}, {1, 1, 1}, {1, 1, 1}, PoolKind::Max2x2x2, 0},
  };
  return cfg;
}

template <typename S>
Model<S>::Model(ModelConfig config) : config_(std::move(config)) {
  config_.validate();
  build_params();
}

template <typename S>
void Model<S>::build_params() {
  params_.clear();
  int c_in = config_.in_channels;
  for (size_t i = 0; i < config_.blocks.size(); ++i) {
    const BlockConfig& b = config_.blocks[i];
    const std::string prefix = "block" + std::to_string(i);
    if (b.kind == BlockKind::Conv3d) {
      params_.push_back({prefix + ".conv.weight",
                         TensorT<S>({b.out_channels, c_in, b.kernel[0], b.kernel[1], b.kernel[2]})});
      params_.push_back({prefix + ".conv.bias", TensorT<S>({b.out_channels})});
    } else {
      const int mid = block_mid_channels(b);
      params_.push_back({prefix + ".spatial.weight",
                         TensorT<S>({mid, c_in, 1, b.kernel[1], b.kernel[2]})});
      params_.push_back({prefix + ".spatial.bias", TensorT<S>({mid})});
      params_.push_back({prefix + ".temporal.weight",
                         TensorT<S>({b.out_channels, mid, b.kernel[0], 1, 1})});
      params_.push_back({prefix + ".temporal.bias", TensorT<S>({b.out_channels})});
    }
    c_in = b.out_channels;
  }
  if (config_.has_embed_layer()) {
    params_.push_back({"embed.weight", TensorT<S>({config_.embed_dim, c_in})});
    params_.push_back({"embed.bias", TensorT<S>({config_.embed_dim})});
  }
  params_.push_back({"fc.weight", TensorT<S>({config_.num_classes, config_.embed_dim})});
  params_.push_back({"fc.bias", TensorT<S>({config_.num_classes})});
  if (config_.projection_head == ProjectionKind::Mlp) {
    params_.push_back({"proj.weight", TensorT<S>({config_.projection_dim, config_.embed_dim})});
    params_.push_back({"proj.bias", TensorT<S>({config_.projection_dim})});
  }
}

namespace {

template <typename S>
void he_init(TensorT<S>& weight, int fan_in, Rng& rng) {
  const double stddev = std::sqrt(2.0 / fan_in);
  for (S& v : weight.data) v = static_cast<S>(rng.normal() * stddev);
}

}  // namespace

template <typename S>
void Model<S>::init_params(Rng& rng) {
  for (Param<S>& p : params_) {
    const auto& d = p.value.dims;
    if (d.size() == 1) {
      p.value.fill(S(0));  // biases
    } else if (d.size() == 2) {
      he_init(p.value, d[1], rng);
    } else {
      int fan_in = 1;
      for (size_t i = 1; i < d.size(); ++i) fan_in *= d[i];
      he_init(p.value, fan_in, rng);
    }
  }
}

template <typename S>
int Model<S>::param_index(std::string_view name) const {
  for (size_t i = 0; i < params_.size(); ++i)
    if (params_[i].name == name) return static_cast<int>(i);
  return -1;
}

template <typename S>
Param<S>& Model<S>::param(std::string_view name) {
  const int i = param_index(name);
  if (i < 0) throw ArgumentError("no parameter named '" + std::string(name) + "'");
  return params_[static_cast<size_t>(i)];
}

template <typename S>
const Param<S>& Model<S>::param(std::string_view name) const {
  const int i = param_index(name);
  if (i < 0) throw ArgumentError("no parameter named '" + std::string(name) + "'");
  return params_[static_cast<size_t>(i)];
}

template <typename S>
typename Model<S>::Output Model<S>::forward(const TensorT<S>& batch) {
  const std::vector<int> expected{batch.dims.empty() ? 0 : batch.dims[0],
                                  config_.in_channels, config_.in_t,
                                  config_.in_h, config_.in_w};
  if (batch.dims.size() != 5 || batch.dims != expected || batch.dims[0] < 1)
    throw ShapeError("model input " + batch.shape_str() + " expected [N, " +
                     std::to_string(config_.in_channels) + ", " +
                     std::to_string(config_.in_t) + ", " +
                     std::to_string(config_.in_h) + ", " +
                     std::to_string(config_.in_w) + "]");

  cache_.emplace();
  cache_->input = batch;
  cache_->blocks.resize(config_.blocks.size());

  const TensorT<S>* x = &cache_->input;
  int pi = 0;  // params_ cursor; layout matches build_params order
  for (size_t i = 0; i < config_.blocks.size(); ++i) {
    const BlockConfig& b = config_.blocks[i];
    BlockCache& bc = cache_->blocks[i];
    const Conv3dGeom geom = block_geom(b);

    TensorT<S> conv_out;
    if (b.kind == BlockKind::Conv3d) {
      const TensorT<S>& w = params_[pi].value;
      const TensorT<S>& bias = params_[pi + 1].value;
      pi += 2;
      conv_out = conv3d_forward(*x, w, bias, geom);
    } else {
      const TensorT<S>& sw = params_[pi].value;
      const TensorT<S>& sb = params_[pi + 1].value;
      const TensorT<S>& tw = params_[pi + 2].value;
      const TensorT<S>& tb = params_[pi + 3].value;
      pi += 4;
      Conv3dGeom sg{{1, geom.stride[1], geom.stride[2]}, {0, geom.padding[1], geom.padding[2]}};
      Conv3dGeom tg{{geom.stride[0], 1, 1}, {geom.padding[0], 0, 0}};
      bc.spatial_out = conv3d_forward(*x, sw, sb, sg);
      if (config_.factorized_relu) relu_inplace(bc.spatial_out);
      conv_out = conv3d_forward(bc.spatial_out, tw, tb, tg);
    }

    relu_inplace(conv_out);
    bc.relu_out = std::move(conv_out);
    bc.prepool_dims = bc.relu_out.dims;
    if (b.pool == PoolKind::None) {
      bc.out = bc.relu_out;
    } else {
      auto pooled = maxpool3d_forward(bc.relu_out, pool_kernel(b.pool));
      bc.out = std::move(pooled.output);
      bc.pool_argmax = std::move(pooled.argmax);
    }
    x = &cache_->blocks[i].out;
  }

  cache_->gap_out = global_avg_pool(*x);
  if (config_.has_embed_layer()) {
    cache_->embedding = linear_forward(cache_->gap_out, param("embed.weight").value,
                                       param("embed.bias").value);
  } else {
    cache_->embedding = cache_->gap_out;
  }

  Output out;
  out.logits = linear_forward(cache_->embedding, param("fc.weight").value,
                              param("fc.bias").value);
  if (config_.projection_head == ProjectionKind::Mlp) {
    TensorT<S> hidden = linear_forward(cache_->embedding, param("proj.weight").value,
                                       param("proj.bias").value);
    relu_inplace(hidden);
    cache_->projection = std::move(hidden);
  } else {
    cache_->projection = cache_->embedding;
  }
  out.embedding = cache_->embedding;
  out.projection = cache_->projection;
  return out;
}

template <typename S>
std::vector<TensorT<S>> Model<S>::backward(const TensorT<S>& d_logits,
                                           const TensorT<S>& d_projection,
                                           TensorT<S>* d_input) {
  if (!cache_) throw StateError("backward called before forward");
  const Cache& cache = *cache_;

  std::vector<TensorT<S>> grads(params_.size());
  for (size_t i = 0; i < params_.size(); ++i)
    grads[i] = TensorT<S>(params_[i].value.dims);

  auto grad_of = [&](const char* name) -> TensorT<S>& {
    const int i = param_index(name);
    if (i < 0) throw ArgumentError(std::string("no parameter named ") + name);
    return grads[static_cast<size_t>(i)];
  };

  const int n = cache.input.dims[0];
  if (d_logits.dims != std::vector<int>{n, config_.num_classes})
    throw ShapeError("d_logits " + d_logits.shape_str() + " expected [" +
                     std::to_string(n) + ", " + std::to_string(config_.num_classes) + "]");

  // Classifier head.
  auto fc = linear_backward(cache.embedding, param("fc.weight").value, d_logits);
  grad_of("fc.weight") = std::move(fc.d_weight);
  grad_of("fc.bias") = std::move(fc.d_bias);
  TensorT<S> d_embedding = std::move(fc.d_input);

  // Contrastive head.
  if (d_projection.numel() != 0) {
    if (d_projection.dims != std::vector<int>{n, config_.projection_output_dim()})
      throw ShapeError("d_projection " + d_projection.shape_str() + " expected [" +
                       std::to_string(n) + ", " +
                       std::to_string(config_.projection_output_dim()) + "]");
    if (config_.projection_head == ProjectionKind::Mlp) {
      TensorT<S> d_hidden = relu_backward(cache.projection, d_projection);
      auto pj = linear_backward(cache.embedding, param("proj.weight").value, d_hidden);
      grad_of("proj.weight") = std::move(pj.d_weight);
      grad_of("proj.bias") = std::move(pj.d_bias);
      for (int64_t i = 0; i < d_embedding.numel(); ++i)
        d_embedding.data[static_cast<size_t>(i)] += pj.d_input.data[static_cast<size_t>(i)];
    } else {
      for (int64_t i = 0; i < d_embedding.numel(); ++i)
        d_embedding.data[static_cast<size_t>(i)] += d_projection.data[static_cast<size_t>(i)];
    }
  }

  TensorT<S> d_gap;
  if (config_.has_embed_layer()) {
    auto em = linear_backward(cache.gap_out, param("embed.weight").value, d_embedding);
    grad_of("embed.weight") = std::move(em.d_weight);
    grad_of("embed.bias") = std::move(em.d_bias);
    d_gap = std::move(em.d_input);
  } else {
    d_gap = std::move(d_embedding);
  }

  const TensorT<S>& last_out = cache.blocks.back().out;
  TensorT<S> d = global_avg_pool_backward(d_gap, last_out.dims);

  for (int i = num_blocks() - 1; i >= 0; --i) {
    const BlockConfig& b = config_.blocks[static_cast<size_t>(i)];
    const BlockCache& bc = cache.blocks[static_cast<size_t>(i)];
    const Conv3dGeom geom = block_geom(b);
    const std::string prefix = "block" + std::to_string(i);

    if (b.pool != PoolKind::None)
      d = maxpool3d_backward(bc.pool_argmax, bc.prepool_dims, d);
    d = relu_backward(bc.relu_out, d);

    const TensorT<S>& block_in =
        i == 0 ? cache.input : cache.blocks[static_cast<size_t>(i - 1)].out;
    const bool need_input = i > 0 || d_input != nullptr;

    if (b.kind == BlockKind::Conv3d) {
      auto cg = conv3d_backward(block_in, param((prefix + ".conv.weight").c_str()).value,
                                d, geom, need_input);
      grad_of((prefix + ".conv.weight").c_str()) = std::move(cg.d_weight);
      grad_of((prefix + ".conv.bias").c_str()) = std::move(cg.d_bias);
      d = std::move(cg.d_input);
    } else {
      Conv3dGeom sg{{1, geom.stride[1], geom.stride[2]}, {0, geom.padding[1], geom.padding[2]}};
      Conv3dGeom tg{{geom.stride[0], 1, 1}, {geom.padding[0], 0, 0}};
      auto tgrads = conv3d_backward(bc.spatial_out,
                                    param((prefix + ".temporal.weight").c_str()).value,
                                    d, tg, true);
      grad_of((prefix + ".temporal.weight").c_str()) = std::move(tgrads.d_weight);
      grad_of((prefix + ".temporal.bias").c_str()) = std::move(tgrads.d_bias);
      TensorT<S> d_mid = config_.factorized_relu
                             ? relu_backward(bc.spatial_out, tgrads.d_input)
                             : std::move(tgrads.d_input);
      auto sgrads = conv3d_backward(block_in,
                                    param((prefix + ".spatial.weight").c_str()).value,
                                    d_mid, sg, need_input);
      grad_of((prefix + ".spatial.weight").c_str()) = std::move(sgrads.d_weight);
      grad_of((prefix + ".spatial.bias").c_str()) = std::move(sgrads.d_bias);
      d = std::move(sgrads.d_input);
    }
  }

  if (d_input != nullptr) *d_input = std::move(d);
  return grads;
}

template <typename S>
const TensorT<S>& Model<S>::block_activation(int block) const {
  if (!cache_) throw StateError("no cached activations; run forward first");
  if (block < 0 || block >= num_blocks())
    throw ArgumentError("block index " + std::to_string(block) + " out of range");
  return cache_->blocks[static_cast<size_t>(block)].relu_out;
}

template <typename S>
const TensorT<S>& Model<S>::block_output(int block) const {
  if (!cache_) throw StateError("no cached activations; run forward first");
  if (block < 0 || block >= num_blocks())
    throw ArgumentError("block index " + std::to_string(block) + " out of range");
  return cache_->blocks[static_cast<size_t>(block)].out;
}

template <typename S>
void Model<S>::reinit_head(int new_num_classes, Rng& rng) {
  if (new_num_classes < 1) throw ArgumentError("num_classes must be >= 1");
  config_.num_classes = new_num_classes;
  Param<S>& w = param("fc.weight");
  Param<S>& b = param("fc.bias");
  w.value = TensorT<S>({new_num_classes, config_.embed_dim});
  he_init(w.value, config_.embed_dim, rng);
  b.value = TensorT<S>({new_num_classes});
  cache_.reset();
}

template class Model<float>;
template class Model<double>;

namespace {
constexpr char kCkptMagic[4] = {'P', 'C', 'K', '1'};
}

std::vector<uint8_t> encode_checkpoint(const Model<float>& model) {
  detail::ByteWriter w;
  w.bytes(kCkptMagic, 4);
  w.u32(static_cast<uint32_t>(model.params().size()));
  for (const Param<float>& p : model.params()) {
    w.u16(static_cast<uint16_t>(p.name.size()));
    w.str(p.name);
    w.u8(static_cast<uint8_t>(p.value.dims.size()));
    for (int d : p.value.dims) w.u32(static_cast<uint32_t>(d));
    w.bytes(p.value.data.data(), p.value.data.size() * sizeof(float));
  }
  w.u32(model.config().hash());
  return w.take();
}

void decode_checkpoint_into(Model<float>& model, std::span<const uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kCkptMagic, 4) != 0)
    throw FormatError("bad magic, expected \"PCK1\"", 0);
  detail::ByteReader r(bytes);
  r.take(4, "magic");

  const uint32_t count = r.u32("parameter count");
  if (count != model.params().size())
    throw CheckpointError("checkpoint has " + std::to_string(count) +
                          " tensors, model expects " +
                          std::to_string(model.params().size()));

  std::vector<std::pair<std::string, std::vector<float>>> loaded;
  for (uint32_t i = 0; i < count; ++i) {
    const uint16_t name_len = r.u16("name length");
    const std::string name = r.str(name_len, "name");
    const uint8_t rank = r.u8("rank");
    std::vector<int> dims(rank);
    uint64_t numel = 1;
    for (auto& d : dims) {
      const uint32_t v = r.u32("dim");
      d = static_cast<int>(v);
      numel *= v;
      if (numel > (1ull << 32))
        throw FormatError("tensor '" + name + "' implausibly large", r.offset());
    }
    const uint8_t* payload =
        r.take(static_cast<size_t>(numel) * sizeof(float), "tensor data");
    std::vector<float> data(static_cast<size_t>(numel));
    std::memcpy(data.data(), payload, data.size() * sizeof(float));

    const auto find = [&]() -> Param<float>& {
      try {
        return model.param(name);
      } catch (const ArgumentError&) {
        throw CheckpointError("checkpoint tensor '" + name +
                              "' has no counterpart in the model");
      }
    };
    Param<float>& p = find();
    if (p.value.dims != dims)
      throw CheckpointError("tensor '" + name + "' has shape " +
                            TensorF::dims_str(dims) + ", model expects " +
                            p.value.shape_str());
    loaded.emplace_back(name, std::move(data));
  }

  const uint32_t stored_hash = r.u32("config hash");
  if (r.remaining() != 0)
    throw FormatError("trailing bytes after checkpoint", r.offset());
  if (stored_hash != model.config().hash())
    throw CheckpointError("config hash mismatch: checkpoint " +
                          std::to_string(stored_hash) + ", model " +
                          std::to_string(model.config().hash()));

  for (auto& [name, data] : loaded)
    model.param(name).value.data = std::move(data);
  model.clear_cache();
}

void save_checkpoint(const Model<float>& model, const std::filesystem::path& path) {
  detail::write_file_bytes(path.string(), encode_checkpoint(model));
}

void load_checkpoint(Model<float>& model, const std::filesystem::path& path) {
  decode_checkpoint_into(model, detail::read_file_bytes(path.string()));
}

}  // namespace vidpace
