#include "resvoc/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "resvoc/errors.hpp"
#include "resvoc/rng.hpp"

namespace resvoc {

namespace {

void fnv_bytes(uint64_t& h, const void* data, size_t n) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
}

void fnv_u64(uint64_t& h, uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  fnv_bytes(h, b, 8);
}

void fnv_double(uint64_t& h, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  fnv_u64(h, bits);
}

}  // namespace

ExtractResult extract_frames(const Waveform& residual, const GciList& gcis, const F0Track& f0t,
                             int32_t utterance_id) {
  const int64_t len = static_cast<int64_t>(residual.samples.size());
  ExtractResult result;
  result.frames.reserve(gcis.size());
  for (size_t idx = 0; idx < gcis.size(); ++idx) {
    const int64_t g = gcis[idx];
    const int T = period_at(f0t, g, residual.sample_rate);
    if (T < 2 || g - T < 0 || g + T > len) {
      ++result.skipped;
      continue;
    }
    const Frame window = hanning(2 * T);
    ResidualFrame frame;
    frame.period = T;
    frame.source = {utterance_id, static_cast<int32_t>(idx)};
    frame.samples.resize(static_cast<size_t>(2 * T));
    for (int j = 0; j < 2 * T; ++j)
      frame.samples[static_cast<size_t>(j)] =
          residual.samples[static_cast<size_t>(g - T + j)] * window.samples[static_cast<size_t>(j)];

    // Canonical polarity: the dominant-magnitude sample points down. Keys and
    // selection targets then agree regardless of recording polarity.
    size_t peak = 0;
    for (size_t j = 1; j < frame.samples.size(); ++j)
      if (std::abs(frame.samples[j]) > std::abs(frame.samples[peak])) peak = j;
    if (frame.samples[peak] > 0.0) {
      for (double& v : frame.samples) v = -v;
      ++result.flipped;
    }
    frame.energy = sum_squares(frame.samples);
    result.frames.push_back(std::move(frame));
  }
  return result;
}

RnFrame rn(const ResidualFrame& frame) {
  if (frame.samples.size() != static_cast<size_t>(2 * frame.period) || frame.period < 2)
    throw std::invalid_argument("rn: malformed residual frame");
  Frame f;
  f.samples = frame.samples;
  f.anchor = frame.period;
  Frame shrunk = resample_frame(f, kRnDim);
  Frame unit = scale_to_energy(shrunk, 1.0);  // throws degenerate_frame_error on silence
  RnFrame out;
  std::copy(unit.samples.begin(), unit.samples.end(), out.coeffs.begin());
  return out;
}

double rn_distance(const RnFrame& a, const RnFrame& b) {
  double acc = 0.0;
  for (int i = 0; i < kRnDim; ++i) {
    const double d = a.coeffs[static_cast<size_t>(i)] - b.coeffs[static_cast<size_t>(i)];
    acc += d * d;
  }
  return acc / kRnDim;
}

double rn_distance(const RnFrame& a, const std::array<double, kRnDim>& b) {
  RnFrame tmp;
  tmp.coeffs = b;
  return rn_distance(a, tmp);
}

std::vector<std::array<double, kRnDim>> kmeans(const std::vector<RnFrame>& points, int k,
                                               uint64_t seed, int max_iterations,
                                               std::vector<double>* distortion_history) {
  const size_t n = points.size();
  if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
  if (n < static_cast<size_t>(k))
    throw std::invalid_argument("kmeans: fewer points (" + std::to_string(n) + ") than clusters (" +
                                std::to_string(k) + ")");
  if (distortion_history) distortion_history->clear();

  std::vector<std::array<double, kRnDim>> centroids(static_cast<size_t>(k));
  Rng rng(seed);

  // kmeans++ seeding: subsequent centers drawn proportionally to the squared
  // distance from the nearest existing center.
  centroids[0] = points[rng.next_below(n)].coeffs;
  std::vector<double> nearest(n);
  for (size_t i = 0; i < n; ++i) nearest[i] = rn_distance(points[i], centroids[0]);
  for (int c = 1; c < k; ++c) {
    double total = std::accumulate(nearest.begin(), nearest.end(), 0.0);
    size_t pick = 0;
    if (total > 0.0) {
      const double r = rng.next_unit() * total;
      double acc = 0.0;
      pick = n - 1;
      for (size_t i = 0; i < n; ++i) {
        acc += nearest[i];
        if (acc > r) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<size_t>(c) % n;  // all points coincide with a center
    }
    centroids[static_cast<size_t>(c)] = points[pick].coeffs;
    for (size_t i = 0; i < n; ++i)
      nearest[i] = std::min(nearest[i], rn_distance(points[i], centroids[static_cast<size_t>(c)]));
  }

  std::vector<int> assign(n, -1);
  std::vector<int> prev_assign;
  std::vector<int64_t> counts(static_cast<size_t>(k));
  std::vector<std::array<double, kRnDim>> sums(static_cast<size_t>(k));

  for (int iter = 0; iter < max_iterations; ++iter) {
    double distortion = 0.0;
    for (size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = rn_distance(points[i], centroids[0]);
      for (int c = 1; c < k; ++c) {
        const double d = rn_distance(points[i], centroids[static_cast<size_t>(c)]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      assign[i] = best;
      distortion += best_d;
    }
    if (distortion_history) distortion_history->push_back(distortion / static_cast<double>(n));
    if (assign == prev_assign) break;
    prev_assign = assign;

    for (int c = 0; c < k; ++c) {
      counts[static_cast<size_t>(c)] = 0;
      sums[static_cast<size_t>(c)].fill(0.0);
    }
    for (size_t i = 0; i < n; ++i) {
      const size_t c = static_cast<size_t>(assign[i]);
      ++counts[c];
      for (int d = 0; d < kRnDim; ++d) sums[c][static_cast<size_t>(d)] += points[i].coeffs[static_cast<size_t>(d)];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<size_t>(c)] == 0) continue;
      for (int d = 0; d < kRnDim; ++d)
        centroids[static_cast<size_t>(c)][static_cast<size_t>(d)] =
            sums[static_cast<size_t>(c)][static_cast<size_t>(d)] /
            static_cast<double>(counts[static_cast<size_t>(c)]);
    }
    // Reseed empty clusters to the point farthest from its own centroid.
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<size_t>(c)] != 0) continue;
      size_t far = 0;
      double far_d = -1.0;
      for (size_t i = 0; i < n; ++i) {
        if (counts[static_cast<size_t>(assign[i])] <= 1) continue;  // keep donors nonempty
        const double d = rn_distance(points[i], centroids[static_cast<size_t>(assign[i])]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far_d < 0.0) continue;
      centroids[static_cast<size_t>(c)] = points[far].coeffs;
      --counts[static_cast<size_t>(assign[far])];
      assign[static_cast<size_t>(far)] = c;
      counts[static_cast<size_t>(c)] = 1;
    }
  }
  return centroids;
}

uint64_t corpus_digest(const std::vector<ResidualFrame>& frames) {
  uint64_t h = 14695981039346656037ull;
  for (const ResidualFrame& f : frames) {
    fnv_u64(h, static_cast<uint64_t>(f.period));
    for (double v : f.samples) fnv_double(h, v);
  }
  return h;
}

namespace {

Codebook make_codebook(CodebookKind kind, const std::vector<ResidualFrame>& frames,
                       int sample_rate) {
  if (frames.empty()) throw std::invalid_argument("codebook: no frames");
  if (sample_rate <= 0) throw std::invalid_argument("codebook: sample rate must be positive");
  Codebook cb;
  cb.kind = kind;
  cb.meta.sample_rate = sample_rate;
  cb.meta.corpus_digest = corpus_digest(frames);
  return cb;
}

}  // namespace

Codebook compress(const std::vector<std::array<double, kRnDim>>& centroids,
                  const std::vector<ResidualFrame>& frames, int n_closest, int sample_rate) {
  if (centroids.empty()) throw std::invalid_argument("compress: no centroids");
  if (n_closest < 1) throw std::invalid_argument("compress: n_closest must be >= 1");
  if (frames.size() < static_cast<size_t>(n_closest))
    throw std::invalid_argument("compress: fewer frames than n_closest");

  Codebook cb = make_codebook(CodebookKind::compressed, frames, sample_rate);
  cb.meta.k = static_cast<int>(centroids.size());
  cb.meta.n_closest = n_closest;

  std::vector<RnFrame> keys(frames.size());
  for (size_t i = 0; i < frames.size(); ++i) keys[i] = rn(frames[i]);

  std::vector<size_t> order(frames.size());
  std::vector<double> dist(frames.size());
  cb.entries.reserve(centroids.size());
  for (const auto& centroid : centroids) {
    for (size_t i = 0; i < frames.size(); ++i) dist[i] = rn_distance(keys[i], centroid);
    std::iota(order.begin(), order.end(), size_t{0});
    const auto closer = [&](size_t a, size_t b) {
      if (dist[a] != dist[b]) return dist[a] < dist[b];
      return frames[a].source < frames[b].source;
    };
    const size_t take = std::min(static_cast<size_t>(n_closest), order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<long>(take), order.end(), closer);

    size_t best = order[0];
    for (size_t j = 1; j < take; ++j) {
      const size_t i = order[j];
      if (frames[i].period > frames[best].period ||
          (frames[i].period == frames[best].period && closer(i, best)))
        best = i;
    }
    cb.entries.push_back({keys[best], frames[best]});
  }
  return cb;
}

Codebook full_codebook(const std::vector<ResidualFrame>& frames, int sample_rate) {
  Codebook cb = make_codebook(CodebookKind::full, frames, sample_rate);
  cb.meta.k = static_cast<int>(frames.size());
  cb.meta.n_closest = 0;
  cb.entries.reserve(frames.size());
  for (const ResidualFrame& f : frames) cb.entries.push_back({rn(f), f});
  return cb;
}

}  // namespace resvoc
