#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vidpace/ops.hpp"
#include "vidpace/rng.hpp"
#include "vidpace/tensor.hpp"

namespace vidpace {

enum class BlockKind { Conv3d, Conv2Plus1d };
enum class PoolKind { None, Max1x2x2, Max2x2x2 };
enum class ProjectionKind { None, Mlp };

struct BlockConfig {
  BlockKind kind = BlockKind::Conv3d;
  int out_channels = 8;
  std::array<int, 3> kernel{3, 3, 3};
  std::array<int, 3> stride{1, 1, 1};
  std::array<int, 3> padding{1, 1, 1};
  PoolKind pool = PoolKind::Max2x2x2;
  int mid_channels = 0;  // Conv2Plus1d factor width; 0 means out_channels
};

// Architecture plus input geometry. Parameter shapes are a pure function of
// this struct; its hash is embedded in checkpoints for mismatch detection.
struct ModelConfig {
  std::vector<BlockConfig> blocks;
  int embed_dim = 64;
  int num_classes = 4;
  ProjectionKind projection_head = ProjectionKind::None;
  int projection_dim = 64;  // mlp head output width
  int in_channels = 3;
  int in_t = 16;
  int in_h = 32;
  int in_w = 32;
  bool factorized_relu = true;  // nonlinearity between the (2+1)D factors

  struct Dims {
    int c, t, h, w;
  };

  void validate() const;
  // Output dims after each block (post-pool); size() == blocks.size().
  std::vector<Dims> block_dims() const;
  int last_channels() const;
  // The embedding is the pooled final block output; a linear layer maps it
  // to embed_dim when the two widths differ.
  bool has_embed_layer() const;
  int projection_output_dim() const {
    return projection_head == ProjectionKind::Mlp ? projection_dim : embed_dim;
  }
  std::string canonical_string() const;
  uint32_t hash() const;

  // 3 blocks of 8 -> 16 -> 32 channels, 3x3x3 kernels, pools
  // (1,2,2)/(2,2,2)/(2,2,2), embedding width 64.
  static ModelConfig tiny(int in_channels, int in_t, int in_h, int in_w,
                          int num_classes, BlockKind kind = BlockKind::Conv3d,
                          ProjectionKind projection = ProjectionKind::None);
};

template <typename S>
struct Param {
  std::string name;
  TensorT<S> value;
};

// The network: named parameters, the architecture config and the forward
// cache consumed by backward. An instance is exclusively owned during
// forward/backward.
template <typename S>
class Model {
 public:
  explicit Model(ModelConfig config);

  // He-initialized weights, zero biases. Draw order is pinned by the
  // parameter list order.
  void init_params(Rng& rng);

  const ModelConfig& config() const { return config_; }
  std::vector<Param<S>>& params() { return params_; }
  const std::vector<Param<S>>& params() const { return params_; }
  Param<S>& param(std::string_view name);
  const Param<S>& param(std::string_view name) const;

  struct Output {
    TensorT<S> logits;     // [N, num_classes]
    TensorT<S> embedding;  // [N, embed_dim]
    TensorT<S> projection; // [N, projection_output_dim]
  };

  Output forward(const TensorT<S>& batch);

  // Reverse-mode gradients for every parameter, aligned with params().
  // d_projection may be an empty tensor when no gradient flows into the
  // contrastive head. Requires a previous forward (StateError otherwise).
  std::vector<TensorT<S>> backward(const TensorT<S>& d_logits,
                                   const TensorT<S>& d_projection,
                                   TensorT<S>* d_input = nullptr);

  bool has_cache() const { return cache_.has_value(); }
  void clear_cache() { cache_.reset(); }

  int num_blocks() const { return static_cast<int>(config_.blocks.size()); }
  // Post-activation convolution output of a block (before pooling).
  const TensorT<S>& block_activation(int block) const;
  // Block output after pooling.
  const TensorT<S>& block_output(int block) const;

  // Replaces the classification head with a freshly initialized one for a
  // new class count; all other parameters are retained.
  void reinit_head(int new_num_classes, Rng& rng);

 private:
  struct BlockCache {
    TensorT<S> spatial_out;  // 2+1D: spatial factor output (post interleaved relu)
    TensorT<S> relu_out;     // post-relu conv output, pre-pool
    std::vector<int64_t> pool_argmax;
    std::vector<int> prepool_dims;
    TensorT<S> out;          // block output (post-pool)
  };
  struct Cache {
    TensorT<S> input;
    std::vector<BlockCache> blocks;
    TensorT<S> gap_out;
    TensorT<S> embedding;
    TensorT<S> projection;
  };

  void build_params();
  int param_index(std::string_view name) const;

  ModelConfig config_;
  std::vector<Param<S>> params_;
  std::optional<Cache> cache_;
};

extern template class Model<float>;
extern template class Model<double>;

// "PCK1" checkpoint: magic, u32 parameter count, then per tensor a u16 name
// length, the UTF-8 name, u8 rank, u32 dims and f32 little-endian data;
// a trailing u32 config hash detects architecture mismatches.
std::vector<uint8_t> encode_checkpoint(const Model<float>& model);
void decode_checkpoint_into(Model<float>& model, std::span<const uint8_t> bytes);

void save_checkpoint(const Model<float>& model, const std::filesystem::path& path);
void load_checkpoint(Model<float>& model, const std::filesystem::path& path);

}  // namespace vidpace
