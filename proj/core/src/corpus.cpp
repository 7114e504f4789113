#include "vidpace/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "vidpace/errors.hpp"
#include "vidpace/rng.hpp"
#include "vidpace/util.hpp"

namespace vidpace {

namespace {

constexpr double kBackground = 0.10;
constexpr double kShapeMargin = 1.0;  // clearance between orbit extent and border
constexpr uint64_t kSplitStreamKey = 0x53504C4954ull;

enum class ShapeKind { Square, Disc, Triangle };

bool inside_shape(ShapeKind kind, double px, double py, double cx, double cy,
                  double s) {
  const double dx = px - cx;
  const double dy = py - cy;
  switch (kind) {
    case ShapeKind::Square:
      return std::abs(dx) <= s && std::abs(dy) <= s;
    case ShapeKind::Disc:
      return dx * dx + dy * dy <= s * s;
    case ShapeKind::Triangle:
      // Upright isosceles triangle with apex at (cx, cy - s).
      return dy >= -s && dy <= s && std::abs(dx) <= 0.5 * (dy + s);
  }
  return false;
}

// Fraction of the pixel covered by the shape, 8x8 supersampled.
double coverage(ShapeKind kind, int x, int y, double cx, double cy, double s) {
  int hits = 0;
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      const double px = x - 0.5 + (i + 0.5) / 8.0;
      const double py = y - 0.5 + (j + 0.5) / 8.0;
      if (inside_shape(kind, px, py, cx, cy, s)) ++hits;
    }
  }
  return hits / 64.0;
}

struct Orbit {
  double cx, cy;      // circle center
  double radius;
  double phase;       // initial angle
  double step;        // signed per-frame angle increment
};

// Picks a closed orbit whose per-frame chord is exactly base_speed: the
// angular step is 2*pi*k/T for an integer number of turns k, and the radius
// follows as base_speed / (2 sin(pi k / T)). Closing the loop keeps the
// displacement exact across the wrap frame as well.
Orbit pick_orbit(const CorpusSpec& spec, double shape_extent, Rng& rng) {
  const double min_hw = std::min(spec.height, spec.width);
  // Pixel centers span [0, extent - 1]; the whole orbit plus the shape and a
  // margin must fit inside.
  const double max_radius = (min_hw - 1.0) / 2.0 - shape_extent - kShapeMargin;
  if (max_radius < spec.base_speed / 2.0)
    throw ConfigError("base_speed " + std::to_string(spec.base_speed) +
                      " too large for the canvas (no feasible orbit)");

  Orbit orbit{};
  if (spec.frames == 1) {
    orbit.radius = 0.0;
    orbit.step = 0.0;
  } else {
    const double lo = std::min(std::max(spec.base_speed / 2.0, 2.0), max_radius);
    const double target = rng.uniform_real(lo, std::max(max_radius, lo));
    const double ratio = std::min(1.0, spec.base_speed / (2.0 * target));
    int k = std::max<int>(1, static_cast<int>(std::lround(
                                 spec.frames * std::asin(ratio) / std::numbers::pi)));
    const int k_max = spec.frames / 2;
    double radius = 0.0;
    for (; k <= std::max(k_max, 1); ++k) {
      const double sin_arg = std::sin(std::numbers::pi * k / spec.frames);
      if (sin_arg <= 0.0) continue;
      radius = spec.base_speed / (2.0 * sin_arg);
      if (radius <= max_radius) break;
    }
    if (radius <= 0.0 || radius > max_radius)
      throw ConfigError("base_speed " + std::to_string(spec.base_speed) +
                        " too large for the canvas (no feasible orbit)");
    orbit.radius = radius;
    const double sign = rng.uniform_int(2) == 0 ? 1.0 : -1.0;
    orbit.step = sign * 2.0 * std::numbers::pi * k / spec.frames;
  }
  orbit.phase = rng.uniform_real(0.0, 2.0 * std::numbers::pi);

  const double reach = orbit.radius + shape_extent + kShapeMargin;
  const double x_lo = reach, x_hi = spec.width - 1 - reach;
  const double y_lo = reach, y_hi = spec.height - 1 - reach;
  if (x_hi < x_lo || y_hi < y_lo)
    throw ConfigError("base_speed/orbit does not fit canvas width/height");
  orbit.cx = rng.uniform_real(x_lo, x_hi);
  orbit.cy = rng.uniform_real(y_lo, y_hi);
  return orbit;
}

VideoTensor generate_video(const CorpusSpec& spec, int video_index, int label) {
  Rng rng(derive_seed(spec.seed, static_cast<uint64_t>(video_index)));

  const double min_hw = std::min(spec.height, spec.width);
  const double s_lo = std::max(2.0, 0.09 * min_hw);
  const double s_hi = std::max(s_lo + 0.5, 0.14 * min_hw);
  const double extent = rng.uniform_real(s_lo, s_hi);

  double color[3];
  if (spec.channels == 3) {
    for (double& ch : color) ch = rng.uniform_real(0.55, 0.95);
  } else {
    color[0] = rng.uniform_real(0.70, 0.95);
  }

  const Orbit orbit = pick_orbit(spec, extent, rng);
  const auto kind = static_cast<ShapeKind>(label);

  VideoTensor video = VideoTensor::make(spec.frames, spec.height, spec.width,
                                        spec.channels, spec.dtype);
  std::vector<float> frame(static_cast<size_t>(video.values_per_frame()));
  for (int t = 0; t < spec.frames; ++t) {
    const double angle = orbit.phase + orbit.step * t;
    const double cx = orbit.cx + orbit.radius * std::cos(angle);
    const double cy = orbit.cy + orbit.radius * std::sin(angle);

    std::fill(frame.begin(), frame.end(), static_cast<float>(kBackground));
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - extent - 1)));
    const int x1 = std::min(spec.width - 1, static_cast<int>(std::ceil(cx + extent + 1)));
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - extent - 1)));
    const int y1 = std::min(spec.height - 1, static_cast<int>(std::ceil(cy + extent + 1)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double cov = coverage(kind, x, y, cx, cy, extent);
        if (cov == 0.0) continue;
        const size_t base = (static_cast<size_t>(y) * spec.width + x) * spec.channels;
        for (int ch = 0; ch < spec.channels; ++ch)
          frame[base + ch] = static_cast<float>(kBackground + cov * (color[ch] - kBackground));
      }
    }

    // Noise draws follow the storage layout: row-major, channel-last.
    const size_t frame_off = static_cast<size_t>(t) * frame.size();
    for (size_t i = 0; i < frame.size(); ++i) {
      const double noisy =
          frame[i] + rng.uniform_real(-spec.noise_amplitude, spec.noise_amplitude);
      const double v = std::clamp(noisy, 0.0, 1.0);
      if (spec.dtype == Dtype::U8)
        video.u8[frame_off + i] = static_cast<uint8_t>(std::lround(v * 255.0));
      else
        video.f32[frame_off + i] = static_cast<float>(v);
    }
  }
  return video;
}

}  // namespace

void CorpusSpec::validate() const {
  if (num_videos < 1) throw ConfigError("num_videos must be >= 1");
  if (frames < 1) throw ConfigError("frames must be >= 1");
  if (height < 8) throw ConfigError("height must be >= 8");
  if (width < 8) throw ConfigError("width must be >= 8");
  if (channels != 1 && channels != 3) throw ConfigError("channels must be 1 or 3");
  if (!(base_speed > 0)) throw ConfigError("base_speed must be > 0");
  if (base_speed >= std::min(height, width))
    throw ConfigError("base_speed too large for the canvas");
  if (shape_classes < 2 || shape_classes > 3)
    throw ConfigError("shape_classes must be 2 or 3");
  if (num_videos < 2 * shape_classes)
    throw ConfigError("num_videos must be >= 2 * shape_classes so every class "
                      "appears in both splits");
  if (noise_amplitude < 0 || noise_amplitude > 0.5)
    throw ConfigError("noise_amplitude must be in [0, 0.5]");
}

std::vector<int> Corpus::train_indices() const {
  std::vector<int> out;
  for (size_t i = 0; i < split.size(); ++i)
    if (split[i] == Split::Train) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<int> Corpus::test_indices() const {
  std::vector<int> out;
  for (size_t i = 0; i < split.size(); ++i)
    if (split[i] == Split::Test) out.push_back(static_cast<int>(i));
  return out;
}

Corpus generate_corpus(const CorpusSpec& spec, int workers) {
  spec.validate();

  Corpus corpus;
  corpus.videos.resize(static_cast<size_t>(spec.num_videos));
  corpus.labels.resize(static_cast<size_t>(spec.num_videos));
  corpus.split.assign(static_cast<size_t>(spec.num_videos), Split::Train);

  for (int i = 0; i < spec.num_videos; ++i)
    corpus.labels[static_cast<size_t>(i)] = i % spec.shape_classes;

  parallel_for(spec.num_videos, workers, [&](int64_t i) {
    corpus.videos[static_cast<size_t>(i)] =
        generate_video(spec, static_cast<int>(i), corpus.labels[static_cast<size_t>(i)]);
  });

  // Stratified 80/20 split: a seeded shuffle within each class, at least one
  // test video per class.
  Rng split_rng(derive_seed(spec.seed, kSplitStreamKey));
  for (int cls = 0; cls < spec.shape_classes; ++cls) {
    std::vector<int> members;
    for (int i = 0; i < spec.num_videos; ++i)
      if (corpus.labels[static_cast<size_t>(i)] == cls) members.push_back(i);
    split_rng.shuffle(members);
    const size_t n_test = std::max<size_t>(1, members.size() / 5);
    for (size_t j = 0; j < n_test; ++j)
      corpus.split[static_cast<size_t>(members[j])] = Split::Test;
  }
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  if (corpus.videos.size() != corpus.labels.size() ||
      corpus.videos.size() != corpus.split.size())
    throw ArgumentError("corpus fields have mismatched lengths");

  std::filesystem::create_directories(dir / "videos");
  std::ostringstream manifest;
  for (size_t i = 0; i < corpus.videos.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "video_%04zu.vpc", i);
    const std::string rel = std::string("videos/") + name;
    write_video(corpus.videos[i], dir / rel);
    manifest << rel << '\t' << corpus.labels[i] << '\t'
             << (corpus.split[i] == Split::Train ? "train" : "test") << '\n';
  }
  std::ofstream out(dir / "manifest.tsv", std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write manifest in " + dir.string());
  out << manifest.str();
}

Corpus load_corpus(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.tsv");
  if (!in) throw IoError("cannot open manifest in " + dir.string());

  Corpus corpus;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const size_t tab1 = line.find('\t');
    const size_t tab2 = tab1 == std::string::npos ? std::string::npos
                                                  : line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos)
      throw IoError("manifest line " + std::to_string(line_no) +
                    ": expected <path>\\t<class>\\t<split>");
    const std::string rel = line.substr(0, tab1);
    const std::string cls = line.substr(tab1 + 1, tab2 - tab1 - 1);
    const std::string split = line.substr(tab2 + 1);

    corpus.videos.push_back(read_video(dir / rel));
    try {
      corpus.labels.push_back(std::stoi(cls));
    } catch (const std::exception&) {
      throw IoError("manifest line " + std::to_string(line_no) + ": bad class '" + cls + "'");
    }
    if (split == "train")
      corpus.split.push_back(Split::Train);
    else if (split == "test")
      corpus.split.push_back(Split::Test);
    else
      throw IoError("manifest line " + std::to_string(line_no) + ": bad split '" + split + "'");
  }
  return corpus;
}

}  // namespace vidpace
