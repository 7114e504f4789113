#include "vidpace/augment.hpp"

#include <algorithm>
#include <cmath>

#include "vidpace/errors.hpp"

namespace vidpace {

namespace {

void require_f32(const Clip& clip, const char* op) {
  if (clip.frames.dtype != Dtype::F32)
    throw ArgumentError(std::string(op) + " requires an f32 clip");
}

inline float clamp01(float v) { return std::clamp(v, 0.0f, 1.0f); }

// Rec. 601 luma.
inline float luma(float r, float g, float b) {
  return 0.299f * r + 0.587f * g + 0.114f * b;
}

void rgb_to_hsv(float r, float g, float b, float& h, float& s, float& v) {
  const float mx = std::max({r, g, b});
  const float mn = std::min({r, g, b});
  const float d = mx - mn;
  v = mx;
  s = mx > 0.0f ? d / mx : 0.0f;
  if (d <= 0.0f) {
    h = 0.0f;
    return;
  }
  if (mx == r)
    h = (g - b) / d;
  else if (mx == g)
    h = 2.0f + (b - r) / d;
  else
    h = 4.0f + (r - g) / d;
  h /= 6.0f;
  if (h < 0.0f) h += 1.0f;
}

void hsv_to_rgb(float h, float s, float v, float& r, float& g, float& b) {
  if (s <= 0.0f) {
    r = g = b = v;
    return;
  }
  h = h - std::floor(h);
  const float hh = h * 6.0f;
  const int sector = std::min(5, static_cast<int>(hh));
  const float f = hh - sector;
  const float p = v * (1.0f - s);
  const float q = v * (1.0f - s * f);
  const float t = v * (1.0f - s * (1.0f - f));
  switch (sector) {
    case 0: r = v; g = t; b = p; break;
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    default: r = v; g = p; b = q; break;
  }
}

struct JitterDraw {
  float brightness;
  float contrast;
  float saturation;
  float hue;
};

JitterDraw draw_jitter(const JitterParams& p, int channels, Rng& rng) {
  JitterDraw d{};
  d.brightness = static_cast<float>(rng.uniform_real(-p.brightness_delta, p.brightness_delta));
  d.contrast = static_cast<float>(rng.uniform_real(1.0 - p.contrast_delta, 1.0 + p.contrast_delta));
  if (channels == 3) {
    d.saturation = static_cast<float>(rng.uniform_real(1.0 - p.saturation_delta, 1.0 + p.saturation_delta));
    d.hue = static_cast<float>(rng.uniform_real(-p.hue_shift, p.hue_shift));
  }
  return d;
}

void jitter_frame(float* frame, int h, int w, int c, const JitterDraw& d) {
  const int64_t n = static_cast<int64_t>(h) * w * c;

  // Sub-transforms with an exactly-identity draw are skipped so degenerate
  // ranges reproduce the input bit for bit.
  if (d.brightness != 0.0f)
    for (int64_t i = 0; i < n; ++i) frame[i] = clamp01(frame[i] + d.brightness);

  if (d.contrast != 1.0f) {
    double mean = 0.0;
    for (int64_t i = 0; i < n; ++i) mean += frame[i];
    const float m = static_cast<float>(mean / static_cast<double>(n));
    for (int64_t i = 0; i < n; ++i)
      frame[i] = clamp01(m + d.contrast * (frame[i] - m));
  }

  if (c != 3) return;

  if (d.saturation != 1.0f) {
    for (int64_t i = 0; i < n; i += 3) {
      const float y = luma(frame[i], frame[i + 1], frame[i + 2]);
      for (int k = 0; k < 3; ++k)
        frame[i + k] = clamp01(y + d.saturation * (frame[i + k] - y));
    }
  }

  if (d.hue != 0.0f) {
    for (int64_t i = 0; i < n; i += 3) {
      float hch, sch, vch;
      rgb_to_hsv(frame[i], frame[i + 1], frame[i + 2], hch, sch, vch);
      hsv_to_rgb(hch + d.hue, sch, vch, frame[i], frame[i + 1], frame[i + 2]);
      for (int k = 0; k < 3; ++k) frame[i + k] = clamp01(frame[i + k]);
    }
  }
}

}  // namespace

Clip color_jitter(const Clip& clip, const JitterParams& params, Rng& rng) {
  require_f32(clip, "color_jitter");
  Clip out = clip;
  const int h = out.frames.h, w = out.frames.w, c = out.frames.c;
  const int64_t frame_values = out.frames.values_per_frame();

  JitterDraw shared{};
  if (!params.per_frame) shared = draw_jitter(params, c, rng);
  for (int t = 0; t < out.frames.t; ++t) {
    const JitterDraw d = params.per_frame ? draw_jitter(params, c, rng) : shared;
    jitter_frame(out.frames.f32.data() + static_cast<size_t>(t) * frame_values,
                 h, w, c, d);
  }
  return out;
}

Clip color_jitter_fixed(const Clip& clip, double brightness, double contrast,
                        double saturation, double hue) {
  require_f32(clip, "color_jitter_fixed");
  Clip out = clip;
  const JitterDraw d{static_cast<float>(brightness), static_cast<float>(contrast),
                     static_cast<float>(saturation), static_cast<float>(hue)};
  const int64_t frame_values = out.frames.values_per_frame();
  for (int t = 0; t < out.frames.t; ++t)
    jitter_frame(out.frames.f32.data() + static_cast<size_t>(t) * frame_values,
                 out.frames.h, out.frames.w, out.frames.c, d);
  return out;
}

namespace {

Clip crop_at(const Clip& clip, int oy, int ox, int out_h, int out_w) {
  const VideoTensor& src = clip.frames;
  Clip out;
  out.source_indices = clip.source_indices;
  out.frames = VideoTensor::make(src.t, out_h, out_w, src.c, src.dtype);
  out.frames.fps = src.fps;
  const int c = src.c;
  for (int t = 0; t < src.t; ++t) {
    for (int y = 0; y < out_h; ++y) {
      const int64_t src_off = src.index(t, oy + y, ox, 0);
      const int64_t dst_off = out.frames.index(t, y, 0, 0);
      const size_t bytes_per_row = static_cast<size_t>(out_w) * c;
      if (src.dtype == Dtype::U8)
        std::copy_n(src.u8.begin() + src_off, bytes_per_row,
                    out.frames.u8.begin() + dst_off);
      else
        std::copy_n(src.f32.begin() + src_off, bytes_per_row,
                    out.frames.f32.begin() + dst_off);
    }
  }
  return out;
}

void check_crop(const Clip& clip, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1 || out_h > clip.frames.h || out_w > clip.frames.w)
    throw ArgumentError("crop " + std::to_string(out_h) + "x" + std::to_string(out_w) +
                        " does not fit frame " + std::to_string(clip.frames.h) + "x" +
                        std::to_string(clip.frames.w));
}

}  // namespace

Clip random_crop(const Clip& clip, int out_h, int out_w, Rng& rng) {
  check_crop(clip, out_h, out_w);
  const int oy = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(clip.frames.h - out_h + 1)));
  const int ox = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(clip.frames.w - out_w + 1)));
  return crop_at(clip, oy, ox, out_h, out_w);
}

Clip center_crop(const Clip& clip, int out_h, int out_w) {
  check_crop(clip, out_h, out_w);
  return crop_at(clip, (clip.frames.h - out_h) / 2, (clip.frames.w - out_w) / 2,
                 out_h, out_w);
}

Clip hflip_forced(const Clip& clip) {
  Clip out = clip;
  const int c = clip.frames.c, w = clip.frames.w;
  for (int t = 0; t < clip.frames.t; ++t) {
    for (int y = 0; y < clip.frames.h; ++y) {
      for (int x = 0; x < w; ++x) {
        const int64_t src = clip.frames.index(t, y, w - 1 - x, 0);
        const int64_t dst = clip.frames.index(t, y, x, 0);
        for (int ch = 0; ch < c; ++ch) {
          if (clip.frames.dtype == Dtype::U8)
            out.frames.u8[static_cast<size_t>(dst + ch)] =
                clip.frames.u8[static_cast<size_t>(src + ch)];
          else
            out.frames.f32[static_cast<size_t>(dst + ch)] =
                clip.frames.f32[static_cast<size_t>(src + ch)];
        }
      }
    }
  }
  return out;
}

Clip hflip(const Clip& clip, Rng& rng, double probability) {
  const bool flip = rng.next_double() < probability;
  return flip ? hflip_forced(clip) : clip;
}

Clip to_f32(const Clip& clip) {
  if (clip.frames.dtype == Dtype::F32) return clip;
  Clip out;
  out.source_indices = clip.source_indices;
  out.frames = VideoTensor::make(clip.frames.t, clip.frames.h, clip.frames.w,
                                 clip.frames.c, Dtype::F32);
  out.frames.fps = clip.frames.fps;
  for (size_t i = 0; i < clip.frames.u8.size(); ++i)
    out.frames.f32[i] = static_cast<float>(clip.frames.u8[i]) / 255.0f;
  return out;
}

}  // namespace vidpace
