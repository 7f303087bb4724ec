#include "resvoc/pitch_marks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace resvoc {

namespace {

// Half-up rounding of n/hop in integer arithmetic.
inline int64_t nearest_frame(int64_t n, int hop) { return (2 * n + hop) / (2 * hop); }

struct SampleRun {
  int64_t lo = 0;
  int64_t hi = 0;  // half-open
};

// Half-wave rectified signal smoothed by an odd, unit-sum Hann kernel of
// about 1.6 ms. Voiced excitation shows up here as one energy burst per
// period with the formant carrier stripped away, so burst alignment, not
// carrier phase, decides where the correlation peaks land.
std::vector<double> burst_envelope(const Waveform& w) {
  int half = static_cast<int>(std::lround(w.sample_rate * 0.0008));
  if (half < 2) half = 2;
  const Frame h = hanning(2 * half + 1);
  double taps = 0.0;
  for (double v : h.samples) taps += v;

  const int64_t len = static_cast<int64_t>(w.samples.size());
  std::vector<double> env(w.samples.size(), 0.0);
  for (int64_t n = 0; n < len; ++n) {
    double acc = 0.0;
    const int64_t lo = std::max<int64_t>(n - half, 0);
    const int64_t hi = std::min<int64_t>(n + half, len - 1);
    for (int64_t k = lo; k <= hi; ++k) {
      const double v = w.samples[static_cast<size_t>(k)];
      if (v > 0.0) acc += h.samples[static_cast<size_t>(k - n + half)] * v;
    }
    env[static_cast<size_t>(n)] = acc / taps;
  }
  return env;
}

// Maximal stretches of samples whose nearest f0 frame is voiced.
std::vector<SampleRun> voiced_runs(const F0Track& t, int64_t length) {
  std::vector<SampleRun> runs;
  bool in_run = false;
  for (int64_t n = 0; n < length; ++n) {
    const bool v = t.voiced_at(n);
    if (v && !in_run) {
      runs.push_back({n, n});
      in_run = true;
    }
    if (!v && in_run) {
      runs.back().hi = n;
      in_run = false;
    }
  }
  if (in_run) runs.back().hi = length;
  return runs;
}

}  // namespace

int F0Track::frame_at(int64_t sample) const {
  if (hop <= 0 || f0.empty()) throw std::invalid_argument("F0Track: empty track");
  int64_t t = sample <= 0 ? 0 : nearest_frame(sample, hop);
  if (t >= static_cast<int64_t>(f0.size())) t = static_cast<int64_t>(f0.size()) - 1;
  return static_cast<int>(t);
}

int period_at(const F0Track& t, int64_t sample, int sample_rate) {
  const double f = t.f0_at(sample);
  if (f <= 0.0) return 0;
  return static_cast<int>(std::lround(sample_rate / f));
}

F0Track estimate_f0(const Waveform& w, const F0Config& cfg) {
  const int fs = w.sample_rate;
  if (fs <= 0) throw std::invalid_argument("estimate_f0: sample rate must be positive");
  if (!(cfg.f_min > 0.0) || !(cfg.f_max > cfg.f_min))
    throw std::invalid_argument("estimate_f0: need 0 < f_min < f_max");
  const int hop = std::max(1, static_cast<int>(std::lround(cfg.hop_ms * fs / 1000.0)));
  const int win = std::max(4, static_cast<int>(std::lround(cfg.window_ms * fs / 1000.0)));
  const int64_t len = static_cast<int64_t>(w.samples.size());
  if (len < hop) throw std::invalid_argument("estimate_f0: signal shorter than one hop");

  const int tau_min = std::max(2, static_cast<int>(std::floor(fs / cfg.f_max)));
  const int tau_max = std::max(tau_min + 2, static_cast<int>(std::ceil(fs / cfg.f_min)));

  double peak = 0.0;
  for (double v : w.samples) peak = std::max(peak, std::abs(v));
  const double floor_rms =
      std::max(cfg.silence_floor_abs, peak * std::pow(10.0, cfg.silence_floor_db / 20.0));

  F0Track track;
  track.hop = hop;
  const int64_t frames = (len + hop - 1) / hop;
  track.f0.assign(static_cast<size_t>(frames), 0.0);
  track.voiced.assign(static_cast<size_t>(frames), 0);

  const std::vector<double> env = burst_envelope(w);

  // The envelope sweep runs out to twice the longest candidate lag so the
  // chosen lag's double is always available for harmonic confirmation.
  const int env_sweep_max = 2 * tau_max;
  const int seg_raw_len = win + tau_max;
  const int seg_env_len = win + env_sweep_max;
  std::vector<double> seg_raw(static_cast<size_t>(seg_raw_len));
  std::vector<double> seg_env(static_cast<size_t>(seg_env_len));
  std::vector<double> pre_raw(static_cast<size_t>(seg_raw_len) + 1);
  std::vector<double> pre_env(static_cast<size_t>(seg_env_len) + 1);
  std::vector<double> ncc_raw(static_cast<size_t>(tau_max) + 1, 0.0);
  std::vector<double> ncc_env(static_cast<size_t>(env_sweep_max) + 1, 0.0);

  // Normalized correlation of one segment copy against itself at every
  // admissible lag, window energies from the squared prefix sum.
  const auto sweep = [&](const std::vector<double>& seg, const std::vector<double>& pre,
                         std::vector<double>& ncc, int sweep_max) {
    const double e0 = pre[static_cast<size_t>(win)];
    if (e0 <= 0.0) {
      std::fill(ncc.begin(), ncc.end(), 0.0);
      return;
    }
    for (int tau = tau_min; tau <= sweep_max; ++tau) {
      const double etau = pre[static_cast<size_t>(win + tau)] - pre[static_cast<size_t>(tau)];
      if (etau <= 0.0) {
        ncc[static_cast<size_t>(tau)] = 0.0;
        continue;
      }
      double cross = 0.0;
      const double* base = seg.data();
      const double* lag = seg.data() + tau;
      for (int i = 0; i < win; ++i) cross += base[i] * lag[i];
      ncc[static_cast<size_t>(tau)] = cross / std::sqrt(e0 * etau);
    }
  };

  // The strongest local maximum decides voicing; the lag estimate then moves
  // to the shortest local maximum within 10% of it, so a near-tie at a lag
  // multiple resolves toward the true period instead of doubling it.
  const auto pick = [&](const std::vector<double>& ncc, int& tau_out) {
    const auto is_peak = [&](int tau) {
      const double l = tau > tau_min ? ncc[static_cast<size_t>(tau) - 1] : -2.0;
      const double r = tau + 1 < static_cast<int>(ncc.size()) ? ncc[static_cast<size_t>(tau) + 1]
                                                              : -2.0;
      return ncc[static_cast<size_t>(tau)] >= l && ncc[static_cast<size_t>(tau)] >= r;
    };
    tau_out = 0;
    double best = 0.0;
    for (int tau = tau_min; tau <= tau_max; ++tau)
      if (is_peak(tau) && ncc[static_cast<size_t>(tau)] > best) best = ncc[static_cast<size_t>(tau)];
    if (best <= 0.0) return 0.0;
    for (int tau = tau_min; tau <= tau_max; ++tau) {
      if (is_peak(tau) && ncc[static_cast<size_t>(tau)] >= 0.9 * best) {
        tau_out = tau;
        break;
      }
    }
    return best;
  };

  for (int64_t t = 0; t < frames; ++t) {
    const int64_t start = t * hop - win / 2;
    for (int i = 0; i < seg_raw_len; ++i) {
      const int64_t n = start + i;
      seg_raw[static_cast<size_t>(i)] =
          n >= 0 && n < len ? w.samples[static_cast<size_t>(n)] : 0.0;
    }
    pre_raw[0] = 0.0;
    for (int i = 0; i < seg_raw_len; ++i)
      pre_raw[static_cast<size_t>(i) + 1] =
          pre_raw[static_cast<size_t>(i)] +
          seg_raw[static_cast<size_t>(i)] * seg_raw[static_cast<size_t>(i)];
    if (std::sqrt(pre_raw[static_cast<size_t>(win)] / win) < floor_rms)
      continue;  // silent frame stays unvoiced

    sweep(seg_raw, pre_raw, ncc_raw, tau_max);
    int tau_raw = 0;
    const double best_raw = pick(ncc_raw, tau_raw);
    const bool raw_ok = tau_raw != 0 && best_raw >= cfg.voicing_threshold;

    // The envelope is one-sided: any step in it, from file-edge padding or a
    // silence boundary, survives mean removal and correlates with itself at
    // every lag. The envelope arm therefore only fires on a genuine burst
    // train, attested three ways: the whole segment carries real samples,
    // the sweep dips negative between bursts, and the peak repeats at twice
    // the chosen lag.
    bool env_ok = false;
    int tau_env = 0;
    if (start >= 0 && start + seg_env_len <= len) {
      double mean = 0.0;
      for (int i = 0; i < seg_env_len; ++i) {
        seg_env[static_cast<size_t>(i)] = env[static_cast<size_t>(start + i)];
        mean += seg_env[static_cast<size_t>(i)];
      }
      mean /= seg_env_len;
      for (int i = 0; i < seg_env_len; ++i) seg_env[static_cast<size_t>(i)] -= mean;
      pre_env[0] = 0.0;
      for (int i = 0; i < seg_env_len; ++i)
        pre_env[static_cast<size_t>(i) + 1] =
            pre_env[static_cast<size_t>(i)] +
            seg_env[static_cast<size_t>(i)] * seg_env[static_cast<size_t>(i)];
      sweep(seg_env, pre_env, ncc_env, env_sweep_max);

      const double best_env = pick(ncc_env, tau_env);
      double valley = 1.0;
      for (int tau = tau_min; tau <= tau_max; ++tau)
        valley = std::min(valley, ncc_env[static_cast<size_t>(tau)]);
      env_ok = tau_env != 0 && best_env >= cfg.envelope_voicing_threshold && valley < 0.0 &&
               ncc_env[static_cast<size_t>(2 * tau_env)] >=
                   0.5 * ncc_env[static_cast<size_t>(tau_env)];
    }
    if (!env_ok && !raw_ok) continue;

    const std::vector<double>& ncc = env_ok ? ncc_env : ncc_raw;
    const int best_tau = env_ok ? tau_env : tau_raw;
    double tau_hat = best_tau;
    if (best_tau > tau_min && best_tau < tau_max) {
      const double l = ncc[static_cast<size_t>(best_tau) - 1];
      const double m = ncc[static_cast<size_t>(best_tau)];
      const double r = ncc[static_cast<size_t>(best_tau) + 1];
      const double denom = l + r - 2.0 * m;
      if (std::abs(denom) > 1e-12) {
        const double delta = (l - r) / (2.0 * denom);
        if (std::abs(delta) < 1.0) tau_hat += delta;
      }
    }
    const double f = std::clamp(fs / tau_hat, cfg.f_min, cfg.f_max);
    track.f0[static_cast<size_t>(t)] = f;
    track.voiced[static_cast<size_t>(t)] = 1;
  }
  return track;
}

F0Track estimate_f0(const Waveform& w, double f_min, double f_max) {
  F0Config cfg;
  cfg.f_min = f_min;
  cfg.f_max = f_max;
  return estimate_f0(w, cfg);
}

Waveform cog_track(const Waveform& w, const F0Track& f0t) {
  const int64_t len = static_cast<int64_t>(w.samples.size());
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples.assign(w.samples.size(), 0.0);

  int cached_T = -1;
  std::vector<double> win2;  // squared Hann taps over [-T, T]
  for (int64_t n = 0; n < len; ++n) {
    if (!f0t.voiced_at(n)) continue;
    const int T = period_at(f0t, n, w.sample_rate);
    if (T < 1) continue;
    if (T != cached_T) {
      const Frame h = hanning(2 * T + 1);
      win2.resize(h.samples.size());
      for (size_t i = 0; i < h.samples.size(); ++i) win2[i] = h.samples[i] * h.samples[i];
      cached_T = T;
    }
    double num = 0.0;
    double den = 0.0;
    const int64_t lo = std::max<int64_t>(n - T, 0);
    const int64_t hi = std::min<int64_t>(n + T, len - 1);
    for (int64_t k = lo; k <= hi; ++k) {
      const double e = win2[static_cast<size_t>(k - n + T)] * w.samples[static_cast<size_t>(k)] *
                       w.samples[static_cast<size_t>(k)];
      num += static_cast<double>(k - n) * e;
      den += e;
    }
    if (den > 0.0) out.samples[static_cast<size_t>(n)] = num / den;
  }
  return out;
}

namespace {

// Keeps the stronger of any two marks closer than `factor` of the local
// period, preferring the earlier mark on equal strength.
GciList merge_close(const GciList& gcis, const Waveform& residual, const F0Track& f0t,
                    int sample_rate, double factor) {
  GciList out;
  for (int64_t g : gcis) {
    if (!out.empty()) {
      const int T = period_at(f0t, g, sample_rate);
      if (T > 0 && g - out.back() < factor * T) {
        const double cur = std::abs(residual.samples[static_cast<size_t>(g)]);
        const double prev = std::abs(residual.samples[static_cast<size_t>(out.back())]);
        if (cur > prev) out.back() = g;
        continue;
      }
    }
    out.push_back(g);
  }
  return out;
}

}  // namespace

GciList detect_gci(const Waveform& residual, const Waveform& speech, const F0Track& f0t) {
  if (residual.samples.size() != speech.samples.size())
    throw std::invalid_argument("detect_gci: residual and speech lengths differ");
  const int64_t len = static_cast<int64_t>(residual.samples.size());
  if (len == 0) return {};

  const Waveform cog = cog_track(speech, f0t);
  GciList marks;
  for (const SampleRun& run : voiced_runs(f0t, len)) {
    const int T0 = period_at(f0t, run.lo, speech.sample_rate);
    if (T0 < 1 || run.hi - run.lo < T0) continue;  // too short to carry a full period
    for (int64_t n = run.lo; n + 1 < run.hi; ++n) {
      if (!(cog.samples[static_cast<size_t>(n)] > 0.0 && cog.samples[static_cast<size_t>(n + 1)] <= 0.0))
        continue;
      const int T = period_at(f0t, n, speech.sample_rate);
      if (T < 1) continue;
      const int64_t radius = std::max<int64_t>(1, std::llround(0.3 * T));
      const int64_t lo = std::max(run.lo, n - radius);
      const int64_t hi = std::min(run.hi - 1, n + radius);
      int64_t best = lo;
      double best_mag = -1.0;
      for (int64_t k = lo; k <= hi; ++k) {
        const double mag = std::abs(residual.samples[static_cast<size_t>(k)]);
        if (mag > best_mag) {
          best_mag = mag;
          best = k;
        }
      }
      marks.push_back(best);
    }
  }
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
  marks = merge_close(marks, residual, f0t, speech.sample_rate, 0.25);
  marks = merge_close(marks, residual, f0t, speech.sample_rate, 0.5);
  return marks;
}

}  // namespace resvoc
