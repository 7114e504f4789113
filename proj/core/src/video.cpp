#include "vidpace/video.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "bytes.hpp"

namespace vidpace {

namespace {
constexpr char kMagic[4] = {'V', 'P', 'C', '1'};
// Byte offsets of the header fields, for format errors.
constexpr size_t kOffT = 4, kOffH = 8, kOffW = 12, kOffC = 16, kOffDtype = 20;
constexpr size_t kHeaderSize = 21;
}  // namespace

namespace detail {

std::vector<uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path);
  return bytes;
}

void write_file_bytes(const std::string& path, std::span<const uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace detail

VideoTensor VideoTensor::make(int t, int h, int w, int c, Dtype dtype) {
  VideoTensor v;
  v.t = t;
  v.h = h;
  v.w = w;
  v.c = c;
  v.dtype = dtype;
  if (t < 1 || h < 1 || w < 1 || (c != 1 && c != 3))
    throw ConfigError("invalid video dims: T,H,W must be >= 1 and C in {1,3}");
  const auto n = static_cast<size_t>(v.num_values());
  if (dtype == Dtype::U8)
    v.u8.assign(n, 0);
  else
    v.f32.assign(n, 0.0f);
  return v;
}

void VideoTensor::validate() const {
  if (t < 1) throw ConfigError("video field T must be >= 1");
  if (h < 1) throw ConfigError("video field H must be >= 1");
  if (w < 1) throw ConfigError("video field W must be >= 1");
  if (c != 1 && c != 3) throw ConfigError("video field C must be 1 or 3");
  const auto n = static_cast<size_t>(num_values());
  if (dtype == Dtype::U8) {
    if (u8.size() != n || !f32.empty())
      throw ConfigError("u8 video payload size mismatch");
  } else {
    if (f32.size() != n || !u8.empty())
      throw ConfigError("f32 video payload size mismatch");
    for (float v : f32)
      if (!(v >= 0.0f && v <= 1.0f))
        throw ConfigError("f32 video value outside [0,1]");
  }
}

std::vector<uint8_t> encode_video(const VideoTensor& video) {
  video.validate();
  detail::ByteWriter w;
  w.bytes(kMagic, 4);
  w.u32(static_cast<uint32_t>(video.t));
  w.u32(static_cast<uint32_t>(video.h));
  w.u32(static_cast<uint32_t>(video.w));
  w.u32(static_cast<uint32_t>(video.c));
  w.u8(static_cast<uint8_t>(video.dtype));
  if (video.dtype == Dtype::U8) {
    w.bytes(video.u8.data(), video.u8.size());
  } else {
    w.bytes(video.f32.data(), video.f32.size() * sizeof(float));
  }
  return w.take();
}

VideoTensor decode_video(std::span<const uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw FormatError("bad magic, expected \"VPC1\"", 0);
  detail::ByteReader r(bytes);
  r.take(4, "magic");

  auto read_dim = [&](const char* name, size_t off, uint32_t lo, uint32_t hi) {
    uint32_t v = r.u32(name);
    if (v < lo || v > hi)
      throw FormatError(std::string("invalid ") + name + " = " + std::to_string(v), off);
    return static_cast<int>(v);
  };
  constexpr uint32_t kDimCap = 1u << 24;  // guards payload-size overflow
  const int t = read_dim("T", kOffT, 1, kDimCap);
  const int h = read_dim("H", kOffH, 1, kDimCap);
  const int w = read_dim("W", kOffW, 1, kDimCap);
  const int c = read_dim("C", kOffC, 1, 3);
  if (c == 2) throw FormatError("invalid C = 2, expected 1 or 3", kOffC);

  const uint8_t code = r.u8("dtype");
  if (code != 0 && code != 1)
    throw FormatError("unknown dtype code " + std::to_string(code), kOffDtype);
  const Dtype dtype = static_cast<Dtype>(code);

  VideoTensor video = VideoTensor::make(t, h, w, c, dtype);
  const size_t n = static_cast<size_t>(video.num_values());
  const size_t payload = dtype == Dtype::U8 ? n : n * sizeof(float);
  if (bytes.size() - kHeaderSize < payload)
    throw FormatError("truncated payload, need " + std::to_string(payload) +
                          " data bytes",
                      bytes.size());
  if (bytes.size() - kHeaderSize > payload)
    throw FormatError("trailing bytes after payload", kHeaderSize + payload);

  if (dtype == Dtype::U8) {
    std::memcpy(video.u8.data(), bytes.data() + kHeaderSize, payload);
  } else {
    std::memcpy(video.f32.data(), bytes.data() + kHeaderSize, payload);
    for (size_t i = 0; i < n; ++i) {
      const float v = video.f32[i];
      if (!(v >= 0.0f && v <= 1.0f))
        throw FormatError("f32 value outside [0,1]", kHeaderSize + i * sizeof(float));
    }
  }
  return video;
}

void write_video(const VideoTensor& video, const std::filesystem::path& path) {
  detail::write_file_bytes(path.string(), encode_video(video));
}

VideoTensor read_video(const std::filesystem::path& path) {
  return decode_video(detail::read_file_bytes(path.string()));
}

}  // namespace vidpace
