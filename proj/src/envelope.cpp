#include "resvoc/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace resvoc {

namespace {

constexpr double kEnergyFloor = 1e-12;
constexpr double kGainFloor = 1e-6;
constexpr double kReflectionLimit = 0.999;

void check_track(const EnvelopeTrack& env, int64_t length) {
  if (env.positions.empty()) throw std::invalid_argument("envelope track has no positions");
  if (env.coeffs.size() != env.positions.size() || env.gains.size() != env.positions.size())
    throw std::invalid_argument("envelope track arrays disagree in length");
  for (size_t i = 0; i < env.positions.size(); ++i) {
    if (env.positions[i] < 0 || env.positions[i] >= length)
      throw std::invalid_argument("envelope position outside signal");
    if (i > 0 && env.positions[i] <= env.positions[i - 1])
      throw std::invalid_argument("envelope positions must be strictly increasing");
    if (static_cast<int>(env.coeffs[i].size()) != env.order)
      throw std::invalid_argument("envelope coefficient count does not match order");
  }
}

// Filters w through the track, switching coefficient sets at midpoints
// between adjacent positions. `inverse` selects FIR A(z), otherwise IIR
// 1/A(z). One state array carries across segment boundaries.
Waveform run_filter(const Waveform& w, const EnvelopeTrack& env, bool inverse) {
  const int64_t len = static_cast<int64_t>(w.samples.size());
  check_track(env, len);
  const int p = env.order;
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples.resize(w.samples.size());

  size_t seg = 0;
  int64_t seg_end = env.positions.size() > 1
                        ? (env.positions[0] + env.positions[1] + 1) / 2
                        : len;
  const std::vector<double>* a = &env.coeffs[0];
  for (int64_t n = 0; n < len; ++n) {
    while (n >= seg_end && seg + 1 < env.positions.size()) {
      ++seg;
      a = &env.coeffs[seg];
      seg_end = seg + 1 < env.positions.size()
                    ? (env.positions[seg] + env.positions[seg + 1] + 1) / 2
                    : len;
    }
    double acc = 0.0;
    if (inverse) {
      for (int i = 1; i <= p; ++i)
        if (n - i >= 0) acc += (*a)[static_cast<size_t>(i - 1)] * w.samples[static_cast<size_t>(n - i)];
      out.samples[static_cast<size_t>(n)] = w.samples[static_cast<size_t>(n)] - acc;
    } else {
      for (int i = 1; i <= p; ++i)
        if (n - i >= 0) acc += (*a)[static_cast<size_t>(i - 1)] * out.samples[static_cast<size_t>(n - i)];
      out.samples[static_cast<size_t>(n)] = w.samples[static_cast<size_t>(n)] + acc;
    }
  }
  return out;
}

}  // namespace

EnvelopeTrack estimate_envelope(const Waveform& w, const std::vector<int64_t>& positions,
                                int order, int window_len) {
  const int64_t len = static_cast<int64_t>(w.samples.size());
  if (order < 2) throw std::invalid_argument("estimate_envelope: order must be >= 2");
  if (window_len < 2 * order)
    throw std::invalid_argument("estimate_envelope: window must span at least twice the order");
  if (positions.empty()) throw std::invalid_argument("estimate_envelope: no analysis positions");
  for (size_t i = 0; i < positions.size(); ++i) {
    if (positions[i] < 0 || positions[i] >= len)
      throw std::invalid_argument("estimate_envelope: position outside signal");
    if (i > 0 && positions[i] <= positions[i - 1])
      throw std::invalid_argument("estimate_envelope: positions must be strictly increasing");
  }

  const Frame window = hanning(window_len);
  EnvelopeTrack env;
  env.order = order;
  env.positions = positions;
  env.coeffs.reserve(positions.size());
  env.gains.reserve(positions.size());

  std::vector<double> seg(static_cast<size_t>(window_len));
  std::vector<double> r(static_cast<size_t>(order) + 1);
  std::vector<double> a(static_cast<size_t>(order));
  std::vector<double> prev(static_cast<size_t>(order));

  for (int64_t pos : positions) {
    const int64_t start = pos - window_len / 2;
    for (int i = 0; i < window_len; ++i) {
      const int64_t n = start + i;
      const double v = (n >= 0 && n < len) ? w.samples[static_cast<size_t>(n)] : 0.0;
      seg[static_cast<size_t>(i)] = v * window.samples[static_cast<size_t>(i)];
    }
    for (int j = 0; j <= order; ++j) {
      double acc = 0.0;
      for (int i = j; i < window_len; ++i) acc += seg[static_cast<size_t>(i)] * seg[static_cast<size_t>(i - j)];
      r[static_cast<size_t>(j)] = acc;
    }

    std::fill(a.begin(), a.end(), 0.0);
    double gain = kGainFloor;
    if (r[0] > kEnergyFloor) {
      double err = r[0];
      for (int i = 1; i <= order; ++i) {
        double acc = r[static_cast<size_t>(i)];
        for (int j = 1; j < i; ++j) acc -= a[static_cast<size_t>(j - 1)] * r[static_cast<size_t>(i - j)];
        double k = acc / err;
        k = std::clamp(k, -kReflectionLimit, kReflectionLimit);
        prev = a;
        a[static_cast<size_t>(i - 1)] = k;
        for (int j = 1; j < i; ++j)
          a[static_cast<size_t>(j - 1)] = prev[static_cast<size_t>(j - 1)] - k * prev[static_cast<size_t>(i - j - 1)];
        err *= 1.0 - k * k;
        if (err < r[0] * 1e-15) break;  // numerically exhausted, keep a as is
      }
      gain = std::sqrt(std::max(err / window_len, kGainFloor * kGainFloor));
    }
    env.coeffs.push_back(a);
    env.gains.push_back(gain);
  }
  return env;
}

Waveform inverse_filter(const Waveform& w, const EnvelopeTrack& env) {
  return run_filter(w, env, true);
}

Waveform synth_filter(const Waveform& excitation, const EnvelopeTrack& env) {
  return run_filter(excitation, env, false);
}

bool stable_predictor(const std::vector<double>& a) {
  std::vector<double> cur = a;
  for (int p = static_cast<int>(cur.size()); p > 0; --p) {
    const double k = cur[static_cast<size_t>(p - 1)];
    if (!(std::abs(k) < 1.0)) return false;
    const double denom = 1.0 - k * k;
    std::vector<double> next(static_cast<size_t>(p - 1));
    for (int j = 1; j < p; ++j)
      next[static_cast<size_t>(j - 1)] =
          (cur[static_cast<size_t>(j - 1)] + k * cur[static_cast<size_t>(p - j - 1)]) / denom;
    cur = std::move(next);
  }
  return true;
}

}  // namespace resvoc
