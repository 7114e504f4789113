#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "vidpace/tensor.hpp"

namespace vidpace {

struct Conv3dGeom {
  std::array<int, 3> stride{1, 1, 1};   // (t, h, w)
  std::array<int, 3> padding{0, 0, 0};  // zero padding
};

// Output extent of one axis: floor((in + 2p - k) / s) + 1.
int conv_out_extent(int in, int kernel, int stride, int padding);

// Cross-correlation. input [N,C,T,H,W], weight [K,C,kt,kh,kw], bias [K]
// (empty tensor for no bias) -> output [N,K,T',H',W'].
template <typename S>
TensorT<S> conv3d_forward(const TensorT<S>& input, const TensorT<S>& weight,
                          const TensorT<S>& bias, const Conv3dGeom& geom);

template <typename S>
struct Conv3dGrads {
  TensorT<S> d_input;
  TensorT<S> d_weight;
  TensorT<S> d_bias;
};

template <typename S>
Conv3dGrads<S> conv3d_backward(const TensorT<S>& input, const TensorT<S>& weight,
                               const TensorT<S>& d_output, const Conv3dGeom& geom,
                               bool need_input_grad = true);

// Factorized (2+1)D convolution: a 2D spatial convolution (1,kh,kw) followed
// by a 1D temporal convolution (kt,1,1), with an optional nonlinearity in
// between. With the nonlinearity disabled this equals a full 3D convolution
// with the rank-limited composed kernel.
template <typename S>
TensorT<S> conv2plus1d_forward(const TensorT<S>& input,
                               const TensorT<S>& spatial_weight,
                               const TensorT<S>& spatial_bias,
                               const TensorT<S>& temporal_weight,
                               const TensorT<S>& temporal_bias,
                               const Conv3dGeom& geom, bool interleaved_relu);

template <typename S>
void relu_inplace(TensorT<S>& x);

// d_input given the forward *output* (mask is output > 0).
template <typename S>
TensorT<S> relu_backward(const TensorT<S>& output, const TensorT<S>& d_output);

template <typename S>
struct Pool3dResult {
  TensorT<S> output;
  std::vector<int64_t> argmax;  // flat input offset per output value
};

// Non-overlapping max pooling with kernel == stride; trailing remainders
// are dropped (floor semantics).
template <typename S>
Pool3dResult<S> maxpool3d_forward(const TensorT<S>& input, std::array<int, 3> kernel);

template <typename S>
TensorT<S> maxpool3d_backward(const std::vector<int64_t>& argmax,
                              const std::vector<int>& input_dims,
                              const TensorT<S>& d_output);

// [N,C,T,H,W] -> [N,C], mean over T, H, W.
template <typename S>
TensorT<S> global_avg_pool(const TensorT<S>& input);

template <typename S>
TensorT<S> global_avg_pool_backward(const TensorT<S>& d_output,
                                    const std::vector<int>& input_dims);

// y [N,O] = x [N,I] * W^T + b, weight stored [O,I].
template <typename S>
TensorT<S> linear_forward(const TensorT<S>& x, const TensorT<S>& weight,
                          const TensorT<S>& bias);

template <typename S>
struct LinearGrads {
  TensorT<S> d_input;
  TensorT<S> d_weight;
  TensorT<S> d_bias;
};

template <typename S>
LinearGrads<S> linear_backward(const TensorT<S>& x, const TensorT<S>& weight,
                               const TensorT<S>& d_output);

// Row-wise softmax with max subtraction.
template <typename S>
void softmax_rows_inplace(TensorT<S>& logits);

namespace detail {

// Row-major GEMM kernels. C[M,N] = A*B with optional accumulation.
template <typename S>
void gemm_nn(int m, int n, int k, const S* a, const S* b, S* c, bool accumulate);
// A is [K,M]: C = A^T * B.
template <typename S>
void gemm_tn(int m, int n, int k, const S* a, const S* b, S* c, bool accumulate);
// B is [N,K]: C = A * B^T.
template <typename S>
void gemm_nt(int m, int n, int k, const S* a, const S* b, S* c, bool accumulate);

}  // namespace detail

}  // namespace vidpace
