#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vidpace/rng.hpp"
#include "vidpace/video.hpp"

namespace vidpace {

// A sampling pace as a rational num/den. Paces are integers (num/1, fast
// when > 1) or unit fractions (1/den, slow); proper rationals like 3/2 are
// rejected.
struct Pace {
  int num = 1;
  int den = 1;

  static Pace fast(int n) { return {n, 1}; }
  static Pace slow(int d) { return {1, d}; }

  double value() const { return static_cast<double>(num) / den; }
  bool is_fast() const { return num > 1; }
  bool is_slow() const { return den > 1; }
  bool is_normal() const { return num == 1 && den == 1; }

  void validate() const;
  std::string str() const;

  bool operator==(const Pace&) const = default;
};

enum class PaceMode { Relative, Absolute, SlowOnly, Stepped };

// The ordered candidate set defining the M-way pace classification task.
// List order defines class indices 0..M-1.
struct PaceConfig {
  std::vector<Pace> paces;
  PaceMode mode = PaceMode::Relative;
  int step = 1;  // Stepped mode only

  // p = 1..max_pace
  static PaceConfig relative(int max_pace);
  // p in {1/3, 1/2, 1, 2, 3}
  static PaceConfig absolute();
  // p in {1/4, 1/3, 1/2, 1}
  static PaceConfig slow_only();
  // p in {1, 1+s, 1+2s, 1+3s}
  static PaceConfig stepped(int step);

  int num_classes() const { return static_cast<int>(paces.size()); }
  void validate() const;
};

// Canonical ordered pace list and class count M for the config.
std::pair<std::vector<Pace>, int> pace_set(const PaceConfig& config);

struct PaceLabel {
  int class_index = 0;
};

// A fixed-length training clip plus the source-frame indices that produced it
// (after slow-pace replication / loop-over wrapping).
struct Clip {
  VideoTensor frames;               // frames.t is the clip length L
  std::vector<int> source_indices;  // length L, all in [0, T)
};

// The pace sampling transform. Fast/normal pace n: position t reads source
// frame (start + t*n) mod T. Slow pace 1/q: every q-th position takes the
// next consecutive source frame (position 0 is always fresh) and the
// positions in between replicate their predecessor. Frames are copied,
// never aliased.
Clip sample_clip(const VideoTensor& video, Pace pace, int start, int length);

struct ClipDraw {
  Clip clip;
  PaceLabel label;
  int start = 0;
};

// Uniform pace class and uniform start, then sample_clip. Draw order is
// pinned: class first, then start.
ClipDraw random_clip(const VideoTensor& video, const PaceConfig& config,
                     int length, Rng& rng);

}  // namespace vidpace
