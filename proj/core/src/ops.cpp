#include "vidpace/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "vidpace/errors.hpp"

namespace vidpace {

int conv_out_extent(int in, int kernel, int stride, int padding) {
  const int span = in + 2 * padding - kernel;
  if (span < 0 || stride < 1) return 0;
  return span / stride + 1;
}

namespace detail {

namespace {
constexpr int kTile = 256;  // column tile, sized for L1 residency
}

template <typename S>
void gemm_nn(int m, int n, int k, const S* a, const S* b, S* c, bool accumulate) {
  if (!accumulate) std::fill(c, c + static_cast<int64_t>(m) * n, S(0));
  for (int n0 = 0; n0 < n; n0 += kTile) {
    const int nw = std::min(kTile, n - n0);
    int i = 0;
    for (; i + 4 <= m; i += 4) {
      S* c0 = c + static_cast<int64_t>(i) * n + n0;
      S* c1 = c0 + n;
      S* c2 = c1 + n;
      S* c3 = c2 + n;
      for (int p = 0; p < k; ++p) {
        const S a0 = a[static_cast<int64_t>(i) * k + p];
        const S a1 = a[static_cast<int64_t>(i + 1) * k + p];
        const S a2 = a[static_cast<int64_t>(i + 2) * k + p];
        const S a3 = a[static_cast<int64_t>(i + 3) * k + p];
        const S* br = b + static_cast<int64_t>(p) * n + n0;
        for (int j = 0; j < nw; ++j) {
          const S bv = br[j];
          c0[j] += a0 * bv;
          c1[j] += a1 * bv;
          c2[j] += a2 * bv;
          c3[j] += a3 * bv;
        }
      }
    }
    for (; i < m; ++i) {
      S* cr = c + static_cast<int64_t>(i) * n + n0;
      for (int p = 0; p < k; ++p) {
        const S av = a[static_cast<int64_t>(i) * k + p];
        const S* br = b + static_cast<int64_t>(p) * n + n0;
        for (int j = 0; j < nw; ++j) cr[j] += av * br[j];
      }
    }
  }
}

template <typename S>
void gemm_tn(int m, int n, int k, const S* a, const S* b, S* c, bool accumulate) {
  if (!accumulate) std::fill(c, c + static_cast<int64_t>(m) * n, S(0));
  // Row-quad blocking keeps four C rows hot while the B tile stays in L1.
  for (int n0 = 0; n0 < n; n0 += kTile) {
    const int nw = std::min(kTile, n - n0);
    int i = 0;
    for (; i + 4 <= m; i += 4) {
      S* c0 = c + static_cast<int64_t>(i) * n + n0;
      S* c1 = c0 + n;
      S* c2 = c1 + n;
      S* c3 = c2 + n;
      for (int p = 0; p < k; ++p) {
        const S* ar = a + static_cast<int64_t>(p) * m + i;
        const S a0 = ar[0], a1 = ar[1], a2 = ar[2], a3 = ar[3];
        const S* br = b + static_cast<int64_t>(p) * n + n0;
        for (int j = 0; j < nw; ++j) {
          const S bv = br[j];
          c0[j] += a0 * bv;
          c1[j] += a1 * bv;
          c2[j] += a2 * bv;
          c3[j] += a3 * bv;
        }
      }
    }
    for (; i < m; ++i) {
      S* cr = c + static_cast<int64_t>(i) * n + n0;
      for (int p = 0; p < k; ++p) {
        const S av = a[static_cast<int64_t>(p) * m + i];
        const S* br = b + static_cast<int64_t>(p) * n + n0;
        for (int j = 0; j < nw; ++j) cr[j] += av * br[j];
      }
    }
  }
}

template <typename S>
void gemm_nt(int m, int n, int k, const S* a, const S* b, S* c, bool accumulate) {
  for (int i = 0; i < m; ++i) {
    const S* ar = a + static_cast<int64_t>(i) * k;
    S* cr = c + static_cast<int64_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const S* br = b + static_cast<int64_t>(j) * k;
      S acc0 = 0, acc1 = 0, acc2 = 0, acc3 = 0;
      int p = 0;
      for (; p + 4 <= k; p += 4) {
        acc0 += ar[p] * br[p];
        acc1 += ar[p + 1] * br[p + 1];
        acc2 += ar[p + 2] * br[p + 2];
        acc3 += ar[p + 3] * br[p + 3];
      }
      S acc = acc0 + acc1 + acc2 + acc3;
      for (; p < k; ++p) acc += ar[p] * br[p];
      cr[j] = accumulate ? cr[j] + acc : acc;
    }
  }
}

template void gemm_nn<float>(int, int, int, const float*, const float*, float*, bool);
template void gemm_nn<double>(int, int, int, const double*, const double*, double*, bool);
template void gemm_tn<float>(int, int, int, const float*, const float*, float*, bool);
template void gemm_tn<double>(int, int, int, const double*, const double*, double*, bool);
template void gemm_nt<float>(int, int, int, const float*, const float*, float*, bool);
template void gemm_nt<double>(int, int, int, const double*, const double*, double*, bool);

}  // namespace detail

namespace {

struct ConvShape {
  int n, c, t, h, w;        // input
  int k, kt, kh, kw;        // kernel
  int ot, oh, ow;           // output
  int64_t patch;            // C*kt*kh*kw
  int64_t cols;             // ot*oh*ow
};

ConvShape conv_shape(const std::vector<int>& in, const std::vector<int>& wt,
                     const Conv3dGeom& g) {
  if (in.size() != 5 || wt.size() != 5)
    throw ShapeError("conv3d expects 5-d input and weight, got " +
                     TensorF::dims_str(in) + " and " + TensorF::dims_str(wt));
  if (in[1] != wt[1])
    throw ShapeError("conv3d channel mismatch: input " + TensorF::dims_str(in) +
                     " vs weight " + TensorF::dims_str(wt));
  ConvShape s{};
  s.n = in[0]; s.c = in[1]; s.t = in[2]; s.h = in[3]; s.w = in[4];
  s.k = wt[0]; s.kt = wt[2]; s.kh = wt[3]; s.kw = wt[4];
  s.ot = conv_out_extent(s.t, s.kt, g.stride[0], g.padding[0]);
  s.oh = conv_out_extent(s.h, s.kh, g.stride[1], g.padding[1]);
  s.ow = conv_out_extent(s.w, s.kw, g.stride[2], g.padding[2]);
  if (s.ot < 1 || s.oh < 1 || s.ow < 1)
    throw ShapeError("conv3d output empty for input " + TensorF::dims_str(in) +
                     " and weight " + TensorF::dims_str(wt));
  s.patch = static_cast<int64_t>(s.c) * s.kt * s.kh * s.kw;
  s.cols = static_cast<int64_t>(s.ot) * s.oh * s.ow;
  return s;
}

// Patch matrix: cols[r, x] with r = ((ci*kt + dt)*kh + dh)*kw + dw and
// x = (ot*OH + oh)*OW + ow. Out-of-bounds taps are zero.
template <typename S>
void im2col(const S* in, const ConvShape& s, const Conv3dGeom& g, S* cols) {
  const int64_t plane = static_cast<int64_t>(s.h) * s.w;
  for (int ci = 0; ci < s.c; ++ci) {
    const S* chan = in + static_cast<int64_t>(ci) * s.t * plane;
    for (int dt = 0; dt < s.kt; ++dt) {
      for (int dh = 0; dh < s.kh; ++dh) {
        for (int dw = 0; dw < s.kw; ++dw) {
          S* row = cols;
          cols += s.cols;
          for (int ot = 0; ot < s.ot; ++ot) {
            const int it = ot * g.stride[0] - g.padding[0] + dt;
            if (it < 0 || it >= s.t) {
              std::fill(row, row + static_cast<int64_t>(s.oh) * s.ow, S(0));
              row += static_cast<int64_t>(s.oh) * s.ow;
              continue;
            }
            const S* tplane = chan + static_cast<int64_t>(it) * plane;
            for (int oh = 0; oh < s.oh; ++oh) {
              const int ih = oh * g.stride[1] - g.padding[1] + dh;
              if (ih < 0 || ih >= s.h) {
                std::fill(row, row + s.ow, S(0));
                row += s.ow;
                continue;
              }
              const S* hrow = tplane + static_cast<int64_t>(ih) * s.w;
              const int iw0 = -g.padding[2] + dw;
              if (g.stride[2] == 1) {
                // Contiguous fast path with edge clamping.
                const int lo = std::max(0, -iw0);
                const int hi = std::min(s.ow, s.w - iw0);
                if (lo > 0) std::fill(row, row + std::min(lo, s.ow), S(0));
                if (hi > lo) std::copy(hrow + iw0 + lo, hrow + iw0 + hi, row + lo);
                if (hi < s.ow) std::fill(row + std::max(hi, 0), row + s.ow, S(0));
                row += s.ow;
              } else {
                for (int ow = 0; ow < s.ow; ++ow) {
                  const int iw = ow * g.stride[2] + iw0;
                  *row++ = (iw < 0 || iw >= s.w) ? S(0) : hrow[iw];
                }
              }
            }
          }
        }
      }
    }
  }
}

// Transpose of im2col: accumulates patch-matrix gradients back into the
// input gradient.
template <typename S>
void col2im(const S* cols, const ConvShape& s, const Conv3dGeom& g, S* d_in) {
  const int64_t plane = static_cast<int64_t>(s.h) * s.w;
  for (int ci = 0; ci < s.c; ++ci) {
    S* chan = d_in + static_cast<int64_t>(ci) * s.t * plane;
    for (int dt = 0; dt < s.kt; ++dt) {
      for (int dh = 0; dh < s.kh; ++dh) {
        for (int dw = 0; dw < s.kw; ++dw) {
          const S* row = cols;
          cols += s.cols;
          for (int ot = 0; ot < s.ot; ++ot) {
            const int it = ot * g.stride[0] - g.padding[0] + dt;
            if (it < 0 || it >= s.t) {
              row += static_cast<int64_t>(s.oh) * s.ow;
              continue;
            }
            S* tplane = chan + static_cast<int64_t>(it) * plane;
            for (int oh = 0; oh < s.oh; ++oh) {
              const int ih = oh * g.stride[1] - g.padding[1] + dh;
              if (ih < 0 || ih >= s.h) {
                row += s.ow;
                continue;
              }
              S* hrow = tplane + static_cast<int64_t>(ih) * s.w;
              const int iw0 = -g.padding[2] + dw;
              if (g.stride[2] == 1) {
                const int lo = std::max(0, -iw0);
                const int hi = std::min(s.ow, s.w - iw0);
                for (int ow = lo; ow < hi; ++ow) hrow[iw0 + ow] += row[ow];
                row += s.ow;
              } else {
                for (int ow = 0; ow < s.ow; ++ow) {
                  const int iw = ow * g.stride[2] + iw0;
                  if (iw >= 0 && iw < s.w) hrow[iw] += row[ow];
                }
                row += s.ow;
              }
            }
          }
        }
      }
    }
  }
}

}  // namespace

template <typename S>
TensorT<S> conv3d_forward(const TensorT<S>& input, const TensorT<S>& weight,
                          const TensorT<S>& bias, const Conv3dGeom& geom) {
  const ConvShape s = conv_shape(input.dims, weight.dims, geom);
  if (bias.numel() != 0 && bias.numel() != s.k)
    throw ShapeError("conv3d bias " + bias.shape_str() + " does not match K = " +
                     std::to_string(s.k));

  TensorT<S> output({s.n, s.k, s.ot, s.oh, s.ow});
  std::vector<S> cols(static_cast<size_t>(s.patch * s.cols));
  const int64_t in_stride = static_cast<int64_t>(s.c) * s.t * s.h * s.w;
  const int64_t out_stride = static_cast<int64_t>(s.k) * s.cols;

  for (int n = 0; n < s.n; ++n) {
    im2col(input.ptr() + n * in_stride, s, geom, cols.data());
    S* out = output.ptr() + n * out_stride;
    detail::gemm_nn(s.k, static_cast<int>(s.cols), static_cast<int>(s.patch),
                    weight.ptr(), cols.data(), out, false);
    if (bias.numel() != 0) {
      for (int k = 0; k < s.k; ++k) {
        const S b = bias.data[static_cast<size_t>(k)];
        S* row = out + static_cast<int64_t>(k) * s.cols;
        for (int64_t x = 0; x < s.cols; ++x) row[x] += b;
      }
    }
  }
  return output;
}

template <typename S>
Conv3dGrads<S> conv3d_backward(const TensorT<S>& input, const TensorT<S>& weight,
                               const TensorT<S>& d_output, const Conv3dGeom& geom,
                               bool need_input_grad) {
  const ConvShape s = conv_shape(input.dims, weight.dims, geom);
  const std::vector<int> expected{s.n, s.k, s.ot, s.oh, s.ow};
  if (d_output.dims != expected)
    throw ShapeError("conv3d d_output " + d_output.shape_str() + " expected " +
                     TensorF::dims_str(expected));

  Conv3dGrads<S> g;
  g.d_weight = TensorT<S>(weight.dims);
  g.d_bias = TensorT<S>({s.k});
  if (need_input_grad) g.d_input = TensorT<S>(input.dims);

  std::vector<S> cols(static_cast<size_t>(s.patch * s.cols));
  const int64_t in_stride = static_cast<int64_t>(s.c) * s.t * s.h * s.w;
  const int64_t out_stride = static_cast<int64_t>(s.k) * s.cols;

  for (int n = 0; n < s.n; ++n) {
    const S* dout = d_output.ptr() + n * out_stride;

    im2col(input.ptr() + n * in_stride, s, geom, cols.data());
    // dW[k, r] += dOut[k, x] * cols[r, x]
    detail::gemm_nt(s.k, static_cast<int>(s.patch), static_cast<int>(s.cols),
                    dout, cols.data(), g.d_weight.ptr(), true);

    for (int k = 0; k < s.k; ++k) {
      const S* row = dout + static_cast<int64_t>(k) * s.cols;
      S acc = 0;
      for (int64_t x = 0; x < s.cols; ++x) acc += row[x];
      g.d_bias.data[static_cast<size_t>(k)] += acc;
    }

    if (need_input_grad) {
      // dCols[r, x] = W[k, r]^T dOut[k, x], then scatter back.
      detail::gemm_tn(static_cast<int>(s.patch), static_cast<int>(s.cols), s.k,
                      weight.ptr(), dout, cols.data(), false);
      col2im(cols.data(), s, geom, g.d_input.ptr() + n * in_stride);
    }
  }
  return g;
}

template <typename S>
TensorT<S> conv2plus1d_forward(const TensorT<S>& input,
                               const TensorT<S>& spatial_weight,
                               const TensorT<S>& spatial_bias,
                               const TensorT<S>& temporal_weight,
                               const TensorT<S>& temporal_bias,
                               const Conv3dGeom& geom, bool interleaved_relu) {
  if (spatial_weight.dims.size() != 5 || spatial_weight.dims[2] != 1)
    throw ShapeError("spatial weight must be [M,C,1,kh,kw], got " +
                     spatial_weight.shape_str());
  if (temporal_weight.dims.size() != 5 || temporal_weight.dims[3] != 1 ||
      temporal_weight.dims[4] != 1)
    throw ShapeError("temporal weight must be [K,M,kt,1,1], got " +
                     temporal_weight.shape_str());

  Conv3dGeom spatial_geom{{1, geom.stride[1], geom.stride[2]},
                          {0, geom.padding[1], geom.padding[2]}};
  Conv3dGeom temporal_geom{{geom.stride[0], 1, 1}, {geom.padding[0], 0, 0}};

  TensorT<S> mid = conv3d_forward(input, spatial_weight, spatial_bias, spatial_geom);
  if (interleaved_relu) relu_inplace(mid);
  return conv3d_forward(mid, temporal_weight, temporal_bias, temporal_geom);
}

template <typename S>
void relu_inplace(TensorT<S>& x) {
  for (S& v : x.data) v = v > S(0) ? v : S(0);
}

template <typename S>
TensorT<S> relu_backward(const TensorT<S>& output, const TensorT<S>& d_output) {
  if (!output.same_shape(d_output))
    throw ShapeError("relu_backward shape mismatch: " + output.shape_str() +
                     " vs " + d_output.shape_str());
  TensorT<S> d_in(output.dims);
  for (int64_t i = 0; i < output.numel(); ++i)
    d_in.data[static_cast<size_t>(i)] =
        output.data[static_cast<size_t>(i)] > S(0)
            ? d_output.data[static_cast<size_t>(i)]
            : S(0);
  return d_in;
}

template <typename S>
Pool3dResult<S> maxpool3d_forward(const TensorT<S>& input, std::array<int, 3> kernel) {
  if (input.dims.size() != 5)
    throw ShapeError("maxpool3d expects 5-d input, got " + input.shape_str());
  const int n = input.dims[0], c = input.dims[1];
  const int t = input.dims[2], h = input.dims[3], w = input.dims[4];
  const int ot = t / kernel[0], oh = h / kernel[1], ow = w / kernel[2];
  if (ot < 1 || oh < 1 || ow < 1)
    throw ShapeError("maxpool3d kernel larger than input " + input.shape_str());

  Pool3dResult<S> res;
  res.output = TensorT<S>({n, c, ot, oh, ow});
  res.argmax.resize(static_cast<size_t>(res.output.numel()));

  int64_t out_i = 0;
  for (int ni = 0; ni < n; ++ni) {
    for (int ci = 0; ci < c; ++ci) {
      const int64_t chan_off = (static_cast<int64_t>(ni) * c + ci) * t * h * w;
      for (int oti = 0; oti < ot; ++oti) {
        for (int ohi = 0; ohi < oh; ++ohi) {
          for (int owi = 0; owi < ow; ++owi) {
            S best = -std::numeric_limits<S>::infinity();
            int64_t best_at = -1;
            for (int dt = 0; dt < kernel[0]; ++dt) {
              const int it = oti * kernel[0] + dt;
              for (int dh = 0; dh < kernel[1]; ++dh) {
                const int ih = ohi * kernel[1] + dh;
                for (int dw = 0; dw < kernel[2]; ++dw) {
                  const int iw = owi * kernel[2] + dw;
                  const int64_t at =
                      chan_off + (static_cast<int64_t>(it) * h + ih) * w + iw;
                  const S v = input.data[static_cast<size_t>(at)];
                  if (v > best) {
                    best = v;
                    best_at = at;
                  }
                }
              }
            }
            res.output.data[static_cast<size_t>(out_i)] = best;
            res.argmax[static_cast<size_t>(out_i)] = best_at;
            ++out_i;
          }
        }
      }
    }
  }
  return res;
}

template <typename S>
TensorT<S> maxpool3d_backward(const std::vector<int64_t>& argmax,
                              const std::vector<int>& input_dims,
                              const TensorT<S>& d_output) {
  TensorT<S> d_in(input_dims);
  if (argmax.size() != d_output.data.size())
    throw ShapeError("maxpool3d_backward argmax/d_output length mismatch");
  for (size_t i = 0; i < argmax.size(); ++i)
    d_in.data[static_cast<size_t>(argmax[i])] += d_output.data[i];
  return d_in;
}

template <typename S>
TensorT<S> global_avg_pool(const TensorT<S>& input) {
  if (input.dims.size() != 5)
    throw ShapeError("global_avg_pool expects 5-d input, got " + input.shape_str());
  const int n = input.dims[0], c = input.dims[1];
  const int64_t spatial = static_cast<int64_t>(input.dims[2]) * input.dims[3] * input.dims[4];
  TensorT<S> out({n, c});
  for (int ni = 0; ni < n; ++ni) {
    for (int ci = 0; ci < c; ++ci) {
      const S* p = input.ptr() + (static_cast<int64_t>(ni) * c + ci) * spatial;
      double acc = 0;
      for (int64_t i = 0; i < spatial; ++i) acc += static_cast<double>(p[i]);
      out.data[static_cast<size_t>(ni) * c + ci] =
          static_cast<S>(acc / static_cast<double>(spatial));
    }
  }
  return out;
}

template <typename S>
TensorT<S> global_avg_pool_backward(const TensorT<S>& d_output,
                                    const std::vector<int>& input_dims) {
  const int n = input_dims[0], c = input_dims[1];
  const int64_t spatial = static_cast<int64_t>(input_dims[2]) * input_dims[3] * input_dims[4];
  if (d_output.dims != std::vector<int>{n, c})
    throw ShapeError("global_avg_pool_backward d_output " + d_output.shape_str());
  TensorT<S> d_in(input_dims);
  for (int ni = 0; ni < n; ++ni) {
    for (int ci = 0; ci < c; ++ci) {
      const S g = d_output.data[static_cast<size_t>(ni) * c + ci] /
                  static_cast<S>(spatial);
      S* p = d_in.ptr() + (static_cast<int64_t>(ni) * c + ci) * spatial;
      for (int64_t i = 0; i < spatial; ++i) p[i] = g;
    }
  }
  return d_in;
}

template <typename S>
TensorT<S> linear_forward(const TensorT<S>& x, const TensorT<S>& weight,
                          const TensorT<S>& bias) {
  if (x.dims.size() != 2 || weight.dims.size() != 2 || x.dims[1] != weight.dims[1])
    throw ShapeError("linear shapes " + x.shape_str() + " vs " + weight.shape_str());
  const int n = x.dims[0], in = x.dims[1], out = weight.dims[0];
  TensorT<S> y({n, out});
  detail::gemm_nt(n, out, in, x.ptr(), weight.ptr(), y.ptr(), false);
  if (bias.numel() != 0) {
    if (bias.numel() != out)
      throw ShapeError("linear bias " + bias.shape_str());
    for (int i = 0; i < n; ++i)
      for (int o = 0; o < out; ++o)
        y.data[static_cast<size_t>(i) * out + o] += bias.data[static_cast<size_t>(o)];
  }
  return y;
}

template <typename S>
LinearGrads<S> linear_backward(const TensorT<S>& x, const TensorT<S>& weight,
                               const TensorT<S>& d_output) {
  const int n = x.dims[0], in = x.dims[1], out = weight.dims[0];
  if (d_output.dims != std::vector<int>{n, out})
    throw ShapeError("linear d_output " + d_output.shape_str());
  LinearGrads<S> g;
  g.d_input = TensorT<S>({n, in});
  g.d_weight = TensorT<S>({out, in});
  g.d_bias = TensorT<S>({out});
  // dX = dY * W; dW = dY^T * X
  detail::gemm_nn(n, in, out, d_output.ptr(), weight.ptr(), g.d_input.ptr(), false);
  detail::gemm_tn(out, in, n, d_output.ptr(), x.ptr(), g.d_weight.ptr(), false);
  for (int i = 0; i < n; ++i)
    for (int o = 0; o < out; ++o)
      g.d_bias.data[static_cast<size_t>(o)] +=
          d_output.data[static_cast<size_t>(i) * out + o];
  return g;
}

template <typename S>
void softmax_rows_inplace(TensorT<S>& logits) {
  if (logits.dims.size() != 2)
    throw ShapeError("softmax expects 2-d logits, got " + logits.shape_str());
  const int n = logits.dims[0], m = logits.dims[1];
  for (int i = 0; i < n; ++i) {
    S* row = logits.ptr() + static_cast<int64_t>(i) * m;
    S mx = row[0];
    for (int j = 1; j < m; ++j) mx = std::max(mx, row[j]);
    double sum = 0;
    for (int j = 0; j < m; ++j) {
      const double e = std::exp(static_cast<double>(row[j] - mx));
      row[j] = static_cast<S>(e);
      sum += e;
    }
    for (int j = 0; j < m; ++j)
      row[j] = static_cast<S>(static_cast<double>(row[j]) / sum);
  }
}

#define VIDPACE_INSTANTIATE_OPS(S)                                              \
  template TensorT<S> conv3d_forward<S>(const TensorT<S>&, const TensorT<S>&,   \
                                        const TensorT<S>&, const Conv3dGeom&);  \
  template Conv3dGrads<S> conv3d_backward<S>(const TensorT<S>&, const TensorT<S>&, \
                                             const TensorT<S>&, const Conv3dGeom&, \
                                             bool);                             \
  template TensorT<S> conv2plus1d_forward<S>(const TensorT<S>&, const TensorT<S>&, \
                                             const TensorT<S>&, const TensorT<S>&, \
                                             const TensorT<S>&, const Conv3dGeom&, \
                                             bool);                             \
  template void relu_inplace<S>(TensorT<S>&);                                   \
  template TensorT<S> relu_backward<S>(const TensorT<S>&, const TensorT<S>&);   \
  template Pool3dResult<S> maxpool3d_forward<S>(const TensorT<S>&,              \
                                                std::array<int, 3>);            \
  template TensorT<S> maxpool3d_backward<S>(const std::vector<int64_t>&,        \
                                            const std::vector<int>&,            \
                                            const TensorT<S>&);                 \
  template TensorT<S> global_avg_pool<S>(const TensorT<S>&);                    \
  template TensorT<S> global_avg_pool_backward<S>(const TensorT<S>&,            \
                                                  const std::vector<int>&);     \
  template TensorT<S> linear_forward<S>(const TensorT<S>&, const TensorT<S>&,   \
                                        const TensorT<S>&);                     \
  template LinearGrads<S> linear_backward<S>(const TensorT<S>&, const TensorT<S>&, \
                                             const TensorT<S>&);                \
  template void softmax_rows_inplace<S>(TensorT<S>&);

VIDPACE_INSTANTIATE_OPS(float)
VIDPACE_INSTANTIATE_OPS(double)

#undef VIDPACE_INSTANTIATE_OPS

}  // namespace vidpace
