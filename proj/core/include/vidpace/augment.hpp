#pragma once

#include "vidpace/pace.hpp"
#include "vidpace/rng.hpp"

namespace vidpace {

// Per-frame color jitter ranges, all centered: brightness is an additive
// shift in [-brightness_delta, +brightness_delta] of the dynamic range,
// contrast/saturation are scales in [1 - d, 1 + d], hue is a rotation of
// +-hue_shift of the hue circle. per_frame draws fresh parameters per frame
// rather than once per clip.
struct JitterParams {
  double brightness_delta = 0.25;
  double contrast_delta = 0.25;
  double saturation_delta = 0.25;
  double hue_shift = 0.04;
  bool per_frame = true;
};

// Applies brightness, contrast (around the frame mean), saturation (around
// per-pixel luma) and hue rotation, in that fixed order, clamping to [0, 1]
// after each step. Requires an f32 clip; C = 1 clips get brightness and
// contrast only. Draw order per frame: brightness, contrast, then for C = 3
// saturation and hue.
Clip color_jitter(const Clip& clip, const JitterParams& params, Rng& rng);

// Deterministic replay: applies the given draws to every frame. brightness
// is the additive shift, contrast/saturation the scales, hue the rotation.
Clip color_jitter_fixed(const Clip& clip, double brightness, double contrast,
                        double saturation, double hue);

// One offset drawn per clip, applied to every frame.
Clip random_crop(const Clip& clip, int out_h, int out_w, Rng& rng);
Clip center_crop(const Clip& clip, int out_h, int out_w);

// Reverses the W axis of every frame with the given probability; the whole
// clip flips or none of it.
Clip hflip(const Clip& clip, Rng& rng, double probability = 0.5);
Clip hflip_forced(const Clip& clip);

// U8 clips become f32 scaled by 1/255; f32 clips are copied unchanged.
Clip to_f32(const Clip& clip);

}  // namespace vidpace
