#include "vidpace/pace.hpp"

#include <algorithm>
#include <cstring>

#include "vidpace/errors.hpp"

namespace vidpace {

void Pace::validate() const {
  if (num < 1 || den < 1)
    throw ConfigError("pace " + str() + ": numerator and denominator must be >= 1");
  if (num > 1 && den > 1)
    throw ConfigError("pace " + str() + ": must be an integer or a unit fraction");
}

std::string Pace::str() const {
  return den == 1 ? std::to_string(num)
                  : std::to_string(num) + "/" + std::to_string(den);
}

PaceConfig PaceConfig::relative(int max_pace) {
  if (max_pace < 2)
    throw ConfigError("relative pace set needs max_pace >= 2, got " +
                      std::to_string(max_pace));
  PaceConfig c;
  c.mode = PaceMode::Relative;
  for (int p = 1; p <= max_pace; ++p) c.paces.push_back(Pace::fast(p));
  return c;
}

PaceConfig PaceConfig::absolute() {
  PaceConfig c;
  c.mode = PaceMode::Absolute;
  c.paces = {Pace::slow(3), Pace::slow(2), {1, 1}, Pace::fast(2), Pace::fast(3)};
  return c;
}

PaceConfig PaceConfig::slow_only() {
  PaceConfig c;
  c.mode = PaceMode::SlowOnly;
  c.paces = {Pace::slow(4), Pace::slow(3), Pace::slow(2), {1, 1}};
  return c;
}

PaceConfig PaceConfig::stepped(int step) {
  if (step < 1)
    throw ConfigError("stepped pace set needs step >= 1, got " + std::to_string(step));
  PaceConfig c;
  c.mode = PaceMode::Stepped;
  c.step = step;
  for (int i = 0; i < 4; ++i) c.paces.push_back(Pace::fast(1 + i * step));
  return c;
}

void PaceConfig::validate() const {
  if (paces.size() < 2)
    throw ConfigError("pace set needs at least 2 candidates");
  for (const Pace& p : paces) p.validate();
  for (size_t i = 0; i < paces.size(); ++i)
    for (size_t j = i + 1; j < paces.size(); ++j)
      if (paces[i] == paces[j])
        throw ConfigError("duplicate pace " + paces[i].str() + " in pace set");
  if (mode == PaceMode::Stepped && step < 1)
    throw ConfigError("stepped pace set needs step >= 1");
}

std::pair<std::vector<Pace>, int> pace_set(const PaceConfig& config) {
  config.validate();
  return {config.paces, config.num_classes()};
}

namespace {

// Source index for clip position t. Slow paces replicate: position t maps to
// the floor(t/q)-th consecutive fresh frame.
inline int source_index(int start, int t, const Pace& pace, int total_frames) {
  const int64_t offset = pace.den == 1 ? static_cast<int64_t>(t) * pace.num
                                       : static_cast<int64_t>(t) / pace.den;
  return static_cast<int>((start + offset) % total_frames);
}

}  // namespace

Clip sample_clip(const VideoTensor& video, Pace pace, int start, int length) {
  pace.validate();
  if (length < 1)
    throw ArgumentError("clip length must be >= 1, got " + std::to_string(length));
  if (start < 0 || start >= video.t)
    throw ArgumentError("start frame " + std::to_string(start) +
                        " outside [0, " + std::to_string(video.t) + ")");

  Clip clip;
  clip.frames = VideoTensor::make(length, video.h, video.w, video.c, video.dtype);
  clip.frames.fps = video.fps;
  clip.source_indices.resize(static_cast<size_t>(length));

  const size_t frame_values = static_cast<size_t>(video.values_per_frame());
  for (int t = 0; t < length; ++t) {
    const int src = source_index(start, t, pace, video.t);
    clip.source_indices[static_cast<size_t>(t)] = src;
    const size_t src_off = static_cast<size_t>(src) * frame_values;
    const size_t dst_off = static_cast<size_t>(t) * frame_values;
    if (video.dtype == Dtype::U8) {
      std::memcpy(clip.frames.u8.data() + dst_off, video.u8.data() + src_off,
                  frame_values);
    } else {
      std::memcpy(clip.frames.f32.data() + dst_off, video.f32.data() + src_off,
                  frame_values * sizeof(float));
    }
  }
  return clip;
}

ClipDraw random_clip(const VideoTensor& video, const PaceConfig& config,
                     int length, Rng& rng) {
  const auto [paces, num_classes] = pace_set(config);
  ClipDraw draw;
  draw.label.class_index = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(num_classes)));
  draw.start = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(video.t)));
  draw.clip = sample_clip(video, paces[static_cast<size_t>(draw.label.class_index)],
                          draw.start, length);
  return draw;
}

}  // namespace vidpace
