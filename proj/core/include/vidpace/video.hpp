#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "vidpace/errors.hpp"

namespace vidpace {

enum class Dtype : uint8_t { U8 = 0, F32 = 1 };

// A decoded video: dense [T, H, W, C] frames, frame-major, row-major,
// channel-last. U8 values live in [0, 255], F32 values in [0, 1].
struct VideoTensor {
  int t = 0;
  int h = 0;
  int w = 0;
  int c = 0;
  Dtype dtype = Dtype::U8;
  float fps = 25.0f;  // informational only; not serialized

  std::vector<uint8_t> u8;  // populated when dtype == U8
  std::vector<float> f32;   // populated when dtype == F32

  static VideoTensor make(int t, int h, int w, int c, Dtype dtype);

  int64_t values_per_frame() const {
    return static_cast<int64_t>(h) * w * c;
  }
  int64_t num_values() const { return static_cast<int64_t>(t) * values_per_frame(); }

  int64_t index(int ti, int hi, int wi, int ci) const {
    return ((static_cast<int64_t>(ti) * h + hi) * w + wi) * c + ci;
  }

  // Value as stored (no rescaling): u8 in [0,255], f32 in [0,1].
  float at(int ti, int hi, int wi, int ci) const {
    const int64_t i = index(ti, hi, wi, ci);
    return dtype == Dtype::U8 ? static_cast<float>(u8[static_cast<size_t>(i)])
                              : f32[static_cast<size_t>(i)];
  }

  // Checks dims, payload size and value range. Throws ConfigError.
  void validate() const;

  bool operator==(const VideoTensor& o) const {
    return t == o.t && h == o.h && w == o.w && c == o.c && dtype == o.dtype &&
           u8 == o.u8 && f32 == o.f32;
  }
};

// "VPC1" codec. Layout: ASCII magic "VPC1", little-endian u32 T, H, W, C,
// u8 dtype code (0 = u8, 1 = f32), then raw frame-major, row-major,
// channel-last data (f32 little-endian when dtype = 1).
std::vector<uint8_t> encode_video(const VideoTensor& video);
VideoTensor decode_video(std::span<const uint8_t> bytes);

void write_video(const VideoTensor& video, const std::filesystem::path& path);
VideoTensor read_video(const std::filesystem::path& path);

}  // namespace vidpace
