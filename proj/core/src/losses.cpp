#include "vidpace/losses.hpp"

#include <algorithm>
#include <cmath>

#include "vidpace/errors.hpp"

namespace vidpace {

namespace {
constexpr double kNormFloor = 1e-12;
}

template <typename S>
void EmbeddingBatchT<S>::validate() const {
  const int b = batch_size();
  if (z.dims.size() != 2 || b < 2)
    throw ArgumentError("embedding batch must be [B, D] with B >= 2, got " +
                        z.shape_str());
  if (static_cast<int>(video_ids.size()) != b ||
      static_cast<int>(pace_labels.size()) != b)
    throw ArgumentError("embedding batch metadata length mismatch");
  if (normalized) {
    const int d = z.dims[1];
    for (int i = 0; i < b; ++i) {
      double n2 = 0;
      for (int k = 0; k < d; ++k) {
        const double v = z.data[static_cast<size_t>(i) * d + k];
        n2 += v * v;
      }
      if (std::abs(std::sqrt(n2) - 1.0) > 1e-6)
        throw ArgumentError("batch flagged normalized but row " + std::to_string(i) +
                            " has norm " + std::to_string(std::sqrt(n2)));
    }
  }
}

template struct EmbeddingBatchT<float>;
template struct EmbeddingBatchT<double>;

void LossWeights::validate() const {
  if (lambda_cls < 0 || lambda_ctr < 0)
    throw ConfigError("loss weights must be >= 0");
  if (lambda_cls == 0 && lambda_ctr == 0)
    throw ConfigError("loss weights must not both be zero");
}

template <typename S>
CrossEntropyResult<S> cross_entropy(const TensorT<S>& logits,
                                    std::span<const int> labels) {
  if (logits.dims.size() != 2)
    throw ShapeError("cross_entropy expects [B, M] logits, got " + logits.shape_str());
  const int b = logits.dims[0], m = logits.dims[1];
  if (static_cast<int>(labels.size()) != b)
    throw ArgumentError("cross_entropy: " + std::to_string(labels.size()) +
                        " labels for batch of " + std::to_string(b));

  CrossEntropyResult<S> res;
  res.d_logits = TensorT<S>(logits.dims);
  double total = 0;
  std::vector<double> p(static_cast<size_t>(m));
  for (int i = 0; i < b; ++i) {
    const int y = labels[static_cast<size_t>(i)];
    if (y < 0 || y >= m)
      throw ArgumentError("label " + std::to_string(y) + " outside [0, " +
                          std::to_string(m) + ")");
    const S* row = logits.ptr() + static_cast<int64_t>(i) * m;
    double mx = row[0];
    for (int j = 1; j < m; ++j) mx = std::max(mx, static_cast<double>(row[j]));
    double sum = 0;
    for (int j = 0; j < m; ++j) {
      p[static_cast<size_t>(j)] = std::exp(static_cast<double>(row[j]) - mx);
      sum += p[static_cast<size_t>(j)];
    }
    total += -(static_cast<double>(row[y]) - mx - std::log(sum));
    for (int j = 0; j < m; ++j) {
      const double soft = p[static_cast<size_t>(j)] / sum;
      res.d_logits.data[static_cast<size_t>(i) * m + j] =
          static_cast<S>((soft - (j == y ? 1.0 : 0.0)) / b);
    }
  }
  res.loss = total / b;
  return res;
}

template CrossEntropyResult<float> cross_entropy<float>(const TensorF&, std::span<const int>);
template CrossEntropyResult<double> cross_entropy<double>(const TensorD&, std::span<const int>);

namespace {

template <typename S>
double similarity_impl(std::span<const S> a, std::span<const S> b, SimMode mode) {
  if (a.size() != b.size())
    throw ShapeError("similarity dim mismatch: " + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()));
  double dot = 0, na = 0, nb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (mode == SimMode::RawDot) return dot;
  return dot / std::max(std::sqrt(na) * std::sqrt(nb), kNormFloor);
}

// Normalized (or raw) embeddings in double plus what the chain rule needs.
struct SimSpace {
  int b = 0, d = 0;
  bool normalized = false;
  std::vector<double> zhat;   // B x D
  std::vector<double> norms;  // B

  const double* row(int i) const { return zhat.data() + static_cast<int64_t>(i) * d; }

  double sim(int i, int j) const {
    const double* a = row(i);
    const double* c = row(j);
    double dot = 0;
    for (int k = 0; k < d; ++k) dot += a[k] * c[k];
    return dot;
  }
};

template <typename S>
SimSpace prepare(const TensorT<S>& z, SimMode mode) {
  SimSpace s;
  s.b = z.dims[0];
  s.d = z.dims[1];
  s.normalized = mode == SimMode::L2Normalized;
  s.zhat.resize(static_cast<size_t>(s.b) * s.d);
  s.norms.assign(static_cast<size_t>(s.b), 1.0);
  for (int i = 0; i < s.b; ++i) {
    const S* src = z.ptr() + static_cast<int64_t>(i) * s.d;
    double* dst = s.zhat.data() + static_cast<int64_t>(i) * s.d;
    double n2 = 0;
    for (int k = 0; k < s.d; ++k) {
      dst[k] = static_cast<double>(src[k]);
      n2 += dst[k] * dst[k];
    }
    if (s.normalized) {
      const double n = std::max(std::sqrt(n2), kNormFloor);
      s.norms[static_cast<size_t>(i)] = n;
      for (int k = 0; k < s.d; ++k) dst[k] /= n;
    }
  }
  return s;
}

// Chain rule through the optional row normalization:
// d/dz = (g - zhat * (zhat . g)) / |z|.
template <typename S>
TensorT<S> grad_to_raw(const SimSpace& s, const std::vector<double>& d_zhat) {
  TensorT<S> out({s.b, s.d});
  for (int i = 0; i < s.b; ++i) {
    const double* g = d_zhat.data() + static_cast<int64_t>(i) * s.d;
    const double* zh = s.row(i);
    S* dst = out.ptr() + static_cast<int64_t>(i) * s.d;
    if (!s.normalized) {
      for (int k = 0; k < s.d; ++k) dst[k] = static_cast<S>(g[k]);
      continue;
    }
    double dot = 0;
    for (int k = 0; k < s.d; ++k) dot += zh[k] * g[k];
    const double inv_n = 1.0 / s.norms[static_cast<size_t>(i)];
    for (int k = 0; k < s.d; ++k)
      dst[k] = static_cast<S>((g[k] - zh[k] * dot) * inv_n);
  }
  return out;
}

// Accumulates c * d(sim(i,j))/dz into both rows.
inline void add_sim_grad(const SimSpace& s, std::vector<double>& d_zhat, int i,
                         int j, double c) {
  const double* zi = s.row(i);
  const double* zj = s.row(j);
  double* gi = d_zhat.data() + static_cast<int64_t>(i) * s.d;
  double* gj = d_zhat.data() + static_cast<int64_t>(j) * s.d;
  for (int k = 0; k < s.d; ++k) {
    gi[k] += c * zj[k];
    gj[k] += c * zi[k];
  }
}

double log_sum_exp(std::span<const double> v) {
  double mx = v[0];
  for (double x : v) mx = std::max(mx, x);
  double sum = 0;
  for (double x : v) sum += std::exp(x - mx);
  return mx + std::log(sum);
}

}  // namespace

double similarity(std::span<const float> a, std::span<const float> b, SimMode mode) {
  return similarity_impl<float>(a, b, mode);
}
double similarity(std::span<const double> a, std::span<const double> b, SimMode mode) {
  return similarity_impl<double>(a, b, mode);
}

template <typename S>
ContrastiveResult<S> ctr_same_context(const EmbeddingBatchT<S>& batch, SimMode mode) {
  batch.validate();
  const int b = batch.batch_size();

  // Exactly two clips per video; find each anchor's partner.
  std::vector<int> partner(static_cast<size_t>(b), -1);
  for (int i = 0; i < b; ++i) {
    int count = 0;
    for (int j = 0; j < b; ++j) {
      if (j != i && batch.video_ids[static_cast<size_t>(j)] ==
                        batch.video_ids[static_cast<size_t>(i)]) {
        partner[static_cast<size_t>(i)] = j;
        ++count;
      }
    }
    if (count != 1)
      throw ArgumentError("same-context batch: video id " +
                          std::to_string(batch.video_ids[static_cast<size_t>(i)]) +
                          " occurs " + std::to_string(count + 1) +
                          " times, expected exactly 2");
  }

  const SimSpace s = prepare(batch.z, mode);
  std::vector<double> d_zhat(static_cast<size_t>(b) * s.d, 0.0);
  double total = 0;

  std::vector<int> denom;      // rows in this anchor's denominator
  std::vector<double> scores;  // matching similarities
  for (int i = 0; i < b; ++i) {
    const int pos = partner[static_cast<size_t>(i)];
    denom.clear();
    scores.clear();
    denom.push_back(pos);
    scores.push_back(s.sim(i, pos));
    for (int j = 0; j < b; ++j) {
      if (batch.video_ids[static_cast<size_t>(j)] !=
          batch.video_ids[static_cast<size_t>(i)]) {
        denom.push_back(j);
        scores.push_back(s.sim(i, j));
      }
    }
    const double lse = log_sum_exp(scores);
    total += -(scores[0] - lse);

    // d/ds_ij = (softmax_j - [j == pos]) / B over the denominator set.
    for (size_t k = 0; k < denom.size(); ++k) {
      const double soft = std::exp(scores[k] - lse);
      const double coeff = (soft - (k == 0 ? 1.0 : 0.0)) / b;
      add_sim_grad(s, d_zhat, i, denom[k], coeff);
    }
  }

  ContrastiveResult<S> res;
  res.loss = total / b;
  res.d_z = grad_to_raw<S>(s, d_zhat);
  return res;
}

template <typename S>
ContrastiveResult<S> ctr_same_pace(const EmbeddingBatchT<S>& batch, SimMode mode) {
  batch.validate();
  const int b = batch.batch_size();

  std::vector<std::vector<int>> positives(static_cast<size_t>(b));
  int64_t pairs = 0;
  for (int i = 0; i < b; ++i) {
    for (int j = 0; j < b; ++j)
      if (j != i && batch.pace_labels[static_cast<size_t>(j)] ==
                        batch.pace_labels[static_cast<size_t>(i)])
        positives[static_cast<size_t>(i)].push_back(j);
    pairs += static_cast<int64_t>(positives[static_cast<size_t>(i)].size());
  }
  if (pairs == 0)
    throw DegenerateBatchError(
        "same-pace batch has no (anchor, positive) pair; the loss is undefined");

  const SimSpace s = prepare(batch.z, mode);
  std::vector<double> d_zhat(static_cast<size_t>(b) * s.d, 0.0);
  double total = 0;

  std::vector<double> scores(static_cast<size_t>(b));
  for (int i = 0; i < b; ++i) {
    const auto& pos = positives[static_cast<size_t>(i)];
    if (pos.empty()) continue;

    // Shared denominator over every other row.
    scores.clear();
    std::vector<int> others;
    for (int j = 0; j < b; ++j) {
      if (j == i) continue;
      others.push_back(j);
      scores.push_back(s.sim(i, j));
    }
    const double lse = log_sum_exp(scores);
    for (int j : pos) total += lse - s.sim(i, j);

    // Summed over the |pos| terms: d/ds_il = |pos| * softmax_l - [l positive].
    const double npos = static_cast<double>(pos.size());
    for (size_t k = 0; k < others.size(); ++k) {
      const int l = others[k];
      const bool is_pos = batch.pace_labels[static_cast<size_t>(l)] ==
                          batch.pace_labels[static_cast<size_t>(i)];
      const double soft = std::exp(scores[k] - lse);
      const double coeff = (npos * soft - (is_pos ? 1.0 : 0.0)) / static_cast<double>(pairs);
      add_sim_grad(s, d_zhat, i, l, coeff);
    }
  }

  ContrastiveResult<S> res;
  res.loss = total / static_cast<double>(pairs);
  res.d_z = grad_to_raw<S>(s, d_zhat);
  return res;
}

template ContrastiveResult<float> ctr_same_context<float>(const EmbeddingBatchT<float>&, SimMode);
template ContrastiveResult<double> ctr_same_context<double>(const EmbeddingBatchT<double>&, SimMode);
template ContrastiveResult<float> ctr_same_pace<float>(const EmbeddingBatchT<float>&, SimMode);
template ContrastiveResult<double> ctr_same_pace<double>(const EmbeddingBatchT<double>&, SimMode);

double joint_loss(double cls_loss, double ctr_loss, const LossWeights& weights) {
  weights.validate();
  if (!std::isfinite(cls_loss) || !std::isfinite(ctr_loss))
    throw ArgumentError("joint_loss requires finite component losses");
  return weights.lambda_cls * cls_loss + weights.lambda_ctr * ctr_loss;
}

}  // namespace vidpace
