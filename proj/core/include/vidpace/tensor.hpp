#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "vidpace/errors.hpp"

namespace vidpace {

// Dense tensor with explicit extents and no implicit broadcasting.
// Activations use [N, C, T, H, W]; parameter layouts are layer-specific.
template <typename S>
struct TensorT {
  std::vector<int> dims;
  std::vector<S> data;

  TensorT() = default;
  explicit TensorT(std::vector<int> d) : dims(std::move(d)) {
    data.assign(static_cast<size_t>(numel_of(dims)), S(0));
  }
  TensorT(std::vector<int> d, std::vector<S> values)
      : dims(std::move(d)), data(std::move(values)) {
    if (static_cast<int64_t>(data.size()) != numel_of(dims))
      throw ShapeError("tensor data length " + std::to_string(data.size()) +
                       " does not match dims " + dims_str(dims));
  }

  static int64_t numel_of(const std::vector<int>& d) {
    int64_t n = 1;
    for (int e : d) {
      if (e < 0) throw ShapeError("negative extent in dims " + dims_str(d));
      n *= e;
    }
    return n;
  }

  static std::string dims_str(const std::vector<int>& d) {
    std::string s = "[";
    for (size_t i = 0; i < d.size(); ++i) {
      if (i) s += ", ";
      s += std::to_string(d[i]);
    }
    return s + "]";
  }

  int64_t numel() const { return static_cast<int64_t>(data.size()); }
  std::string shape_str() const { return dims_str(dims); }

  S* ptr() { return data.data(); }
  const S* ptr() const { return data.data(); }

  void fill(S v) { std::fill(data.begin(), data.end(), v); }

  bool same_shape(const TensorT& o) const { return dims == o.dims; }
};

using TensorF = TensorT<float>;
using TensorD = TensorT<double>;

template <typename To, typename From>
TensorT<To> tensor_cast(const TensorT<From>& t) {
  TensorT<To> out;
  out.dims = t.dims;
  out.data.resize(t.data.size());
  for (size_t i = 0; i < t.data.size(); ++i)
    out.data[i] = static_cast<To>(t.data[i]);
  return out;
}

}  // namespace vidpace
