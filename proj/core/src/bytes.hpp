#pragma once

// Little-endian byte packing helpers shared by the file codecs.

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "vidpace/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "file codecs assume a little-endian host");

namespace vidpace::detail {

class ByteWriter {
 public:
  void u8(uint8_t v) { buf_.push_back(v); }
  void u16(uint16_t v) { raw(&v, 2); }
  void u32(uint32_t v) { raw(&v, 4); }
  void f32(float v) { raw(&v, 4); }
  void bytes(const void* p, size_t n) { raw(p, n); }
  void str(std::string_view s) { raw(s.data(), s.size()); }

  std::vector<uint8_t> take() { return std::move(buf_); }
  const std::vector<uint8_t>& buffer() const { return buf_; }

 private:
  void raw(const void* p, size_t n) {
    const auto* b = static_cast<const uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  std::vector<uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const uint8_t> data) : data_(data) {}

  size_t offset() const { return pos_; }
  size_t remaining() const { return data_.size() - pos_; }

  uint8_t u8(const char* what) { return *take(1, what); }
  uint16_t u16(const char* what) {
    uint16_t v;
    std::memcpy(&v, take(2, what), 2);
    return v;
  }
  uint32_t u32(const char* what) {
    uint32_t v;
    std::memcpy(&v, take(4, what), 4);
    return v;
  }
  float f32(const char* what) {
    float v;
    std::memcpy(&v, take(4, what), 4);
    return v;
  }
  const uint8_t* take(size_t n, const char* what) {
    if (remaining() < n)
      throw FormatError(std::string("truncated ") + what, data_.size());
    const uint8_t* p = data_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::string str(size_t n, const char* what) {
    const uint8_t* p = take(n, what);
    return std::string(reinterpret_cast<const char*>(p), n);
  }

 private:
  std::span<const uint8_t> data_;
  size_t pos_ = 0;
};

std::vector<uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, std::span<const uint8_t> bytes);

}  // namespace vidpace::detail
