#include "resvoc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "resvoc/errors.hpp"

namespace resvoc {

namespace {

constexpr double kMetricsFrameMs = 20.0;
constexpr double kSnrCapDb = 80.0;
constexpr double kSilenceFloorRatio = 1e-3;   // -60 dB of peak, amplitude
constexpr double kSpectrumFloor = 1e-4;       // -80 dB magnitude floor
constexpr int kFftSize = 512;

void check_waveform(const Waveform& w) {
  if (w.sample_rate <= 0) throw std::invalid_argument("waveform: sample rate must be positive");
  if (w.samples.empty()) throw std::invalid_argument("waveform: no samples");
  for (double v : w.samples)
    if (!std::isfinite(v)) throw std::invalid_argument("waveform: non-finite sample");
}

std::vector<int64_t> uniform_grid(int64_t length, int step) {
  std::vector<int64_t> grid;
  for (int64_t p = 0; p < length; p += step) grid.push_back(p);
  return grid;
}

// In-place iterative radix-2 FFT, n a power of two.
void fft(std::vector<std::complex<double>>& buf) {
  const size_t n = buf.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(buf[i], buf[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> step(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> u = buf[i + j];
        const std::complex<double> v = buf[i + j + len / 2] * w;
        buf[i + j] = u + v;
        buf[i + j + len / 2] = u - v;
        w *= step;
      }
    }
  }
}

// Floored magnitude spectrum (bins 0..kFftSize/2) of one zero-padded frame.
std::vector<double> magnitude_spectrum(const double* x, int n) {
  std::vector<std::complex<double>> buf(kFftSize, {0.0, 0.0});
  for (int i = 0; i < n && i < kFftSize; ++i) buf[static_cast<size_t>(i)] = x[i];
  fft(buf);
  std::vector<double> mag(kFftSize / 2 + 1);
  for (int k = 0; k <= kFftSize / 2; ++k)
    mag[static_cast<size_t>(k)] = std::max(std::abs(buf[static_cast<size_t>(k)]), kSpectrumFloor);
  return mag;
}

double frame_snr_db(const double* ref, const double* test, int n) {
  double sig = 0.0;
  double err = 0.0;
  for (int i = 0; i < n; ++i) {
    sig += ref[i] * ref[i];
    const double d = ref[i] - test[i];
    err += d * d;
  }
  if (err <= 0.0) return kSnrCapDb;
  return std::min(kSnrCapDb, 10.0 * std::log10(sig / err));
}

double frame_lsd_db(const double* ref, const double* test, int n) {
  const std::vector<double> mr = magnitude_spectrum(ref, n);
  const std::vector<double> mt = magnitude_spectrum(test, n);
  double acc = 0.0;
  for (size_t k = 0; k < mr.size(); ++k) {
    const double d = 20.0 * std::log10(mr[k]) - 20.0 * std::log10(mt[k]);
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(mr.size()));
}

struct FrameMetrics {
  double snr_db = 0.0;
  double lsd_db = 0.0;
};

// Mean segmental SNR and LSD over non-silent 20 ms frames, optionally
// restricted to frames fully inside one of `mask` (half-open sample ranges).
FrameMetrics frame_metrics(const Waveform& ref, const Waveform& test,
                           const std::vector<std::pair<int64_t, int64_t>>* mask) {
  const int frame_len = static_cast<int>(std::lround(kMetricsFrameMs * ref.sample_rate / 1000.0));
  const int64_t len = static_cast<int64_t>(ref.samples.size());
  double peak = 0.0;
  for (double v : ref.samples) peak = std::max(peak, std::abs(v));
  const double floor_rms = peak * kSilenceFloorRatio;

  FrameMetrics out;
  int64_t snr_frames = 0;
  int64_t lsd_frames = 0;
  for (int64_t start = 0; start + frame_len <= len; start += frame_len) {
    if (mask) {
      bool inside = false;
      for (const auto& [lo, hi] : *mask)
        if (start >= lo && start + frame_len <= hi) {
          inside = true;
          break;
        }
      if (!inside) continue;
    }
    const double* r = ref.samples.data() + start;
    const double* t = test.samples.data() + start;
    const double rms = std::sqrt(sum_squares({r, static_cast<size_t>(frame_len)}) / frame_len);
    if (rms < floor_rms) continue;
    out.snr_db += frame_snr_db(r, t, frame_len);
    ++snr_frames;
    out.lsd_db += frame_lsd_db(r, t, frame_len);
    ++lsd_frames;
  }
  if (snr_frames > 0) out.snr_db /= static_cast<double>(snr_frames);
  if (lsd_frames > 0) out.lsd_db /= static_cast<double>(lsd_frames);
  return out;
}

// Sample ranges spanned by consecutive voiced events (pitch mark to pitch
// mark, excluding the ramp-in/ramp-out halves of the end frames).
std::vector<std::pair<int64_t, int64_t>> voiced_ranges(const TargetTrack& track) {
  std::vector<std::pair<int64_t, int64_t>> ranges;
  int64_t run_start = -1;
  int64_t run_end = -1;
  for (const TargetEvent& e : track.events) {
    if (e.voiced) {
      if (run_start < 0) run_start = e.position;
      run_end = e.position;
    } else {
      if (run_start >= 0 && run_end > run_start) ranges.emplace_back(run_start, run_end);
      run_start = -1;
    }
  }
  if (run_start >= 0 && run_end > run_start) ranges.emplace_back(run_start, run_end);
  return ranges;
}

}  // namespace

Analysis analyze(const Waveform& w, const AnalysisConfig& cfg) {
  check_waveform(w);
  const int fs = w.sample_rate;
  const int64_t len = static_cast<int64_t>(w.samples.size());
  const int window_len = std::max(2 * cfg.lpc_order, static_cast<int>(std::lround(cfg.envelope_window_ms * fs / 1000.0)));
  const int grid_step = std::max(1, static_cast<int>(std::lround(cfg.envelope_grid_ms * fs / 1000.0)));

  const F0Track f0t = estimate_f0(w, cfg.f0);

  // Pass 1: provisional residual from a uniform-grid envelope.
  const std::vector<int64_t> grid = uniform_grid(len, grid_step);
  const EnvelopeTrack env0 = estimate_envelope(w, grid, cfg.lpc_order, window_len);
  const Waveform res0 = inverse_filter(w, env0);
  const GciList gci0 = detect_gci(res0, w, f0t);

  // Pass 2: envelope anchored at the provisional pitch marks, keeping the
  // uniform grid across unvoiced stretches.
  std::vector<int64_t> positions = gci0;
  for (int64_t p : grid)
    if (!f0t.voiced_at(p)) positions.push_back(p);
  std::sort(positions.begin(), positions.end());
  positions.erase(std::unique(positions.begin(), positions.end()), positions.end());
  if (positions.empty()) positions = grid;

  Analysis a;
  a.envelope = estimate_envelope(w, positions, cfg.lpc_order, window_len);
  a.residual = inverse_filter(w, a.envelope);
  a.gcis = detect_gci(a.residual, w, f0t);

  ExtractResult extraction = extract_frames(a.residual, a.gcis, f0t);
  a.frames_extracted = static_cast<int>(extraction.frames.size());
  a.frames_skipped = extraction.skipped;
  a.frames_flipped = extraction.flipped;

  a.track.sample_rate = fs;
  a.track.total_length = len;
  for (ResidualFrame& f : extraction.frames) {
    if (f.energy <= 0.0) {
      ++a.frames_skipped;  // silent frame, nothing to select against
      continue;
    }
    TargetEvent e;
    e.position = a.gcis[static_cast<size_t>(f.source.gci)];
    e.voiced = true;
    e.period = f.period;
    e.energy = f.energy;
    e.target_rn = rn(f);
    a.track.events.push_back(e);
    a.frames.push_back(std::move(f));
  }

  // One event per maximal unvoiced stretch of f0 frames, placed midway
  // between the last voiced event and the stretch's first frame center.
  std::vector<TargetEvent> unvoiced;
  for (int t = 0; t < f0t.frames();) {
    if (f0t.voiced[static_cast<size_t>(t)]) {
      ++t;
      continue;
    }
    const int64_t center = static_cast<int64_t>(t) * f0t.hop;
    int64_t prev_voiced = -1;
    for (const TargetEvent& e : a.track.events) {
      if (e.position >= center) break;
      prev_voiced = e.position;
    }
    int64_t q = prev_voiced < 0 ? 0 : (prev_voiced + center) / 2;
    if (q <= prev_voiced) q = prev_voiced + 1;
    if (q < len) {
      TargetEvent e;
      e.position = q;
      e.voiced = false;
      unvoiced.push_back(e);
    }
    while (t < f0t.frames() && !f0t.voiced[static_cast<size_t>(t)]) ++t;
  }

  std::vector<TargetEvent> merged;
  merged.reserve(a.track.events.size() + unvoiced.size());
  std::merge(a.track.events.begin(), a.track.events.end(), unvoiced.begin(), unvoiced.end(),
             std::back_inserter(merged),
             [](const TargetEvent& x, const TargetEvent& y) { return x.position < y.position; });
  // Drop events colliding on one position (keep the voiced one).
  std::vector<TargetEvent> deduped;
  for (TargetEvent& e : merged) {
    if (!deduped.empty() && deduped.back().position == e.position) {
      if (e.voiced) deduped.back() = e;
      continue;
    }
    deduped.push_back(e);
  }
  a.track.events = std::move(deduped);

  // Drop unvoiced events whose span collapsed to nothing, then measure each
  // surviving span's residual energy over exactly the range synthesis fills.
  for (bool changed = true; changed;) {
    changed = false;
    for (size_t i = 0; i < a.track.events.size(); ++i) {
      TargetEvent& e = a.track.events[i];
      if (e.voiced) continue;
      if (unvoiced_span_end(a.track, i) <= e.position) {
        a.track.events.erase(a.track.events.begin() + static_cast<long>(i));
        changed = true;
        break;
      }
    }
  }
  for (size_t i = 0; i < a.track.events.size(); ++i) {
    TargetEvent& e = a.track.events[i];
    if (e.voiced) continue;
    const int64_t end = unvoiced_span_end(a.track, i);
    e.energy = sum_squares({a.residual.samples.data() + e.position, static_cast<size_t>(end - e.position)});
  }
  return a;
}

TrainResult train(const std::vector<Waveform>& corpus, int k, int n_closest, uint64_t seed,
                  const AnalysisConfig& cfg) {
  if (corpus.empty()) throw std::invalid_argument("train: empty corpus");
  if (k < 1) throw std::invalid_argument("train: k must be >= 1");
  if (n_closest < 1) throw std::invalid_argument("train: n_closest must be >= 1");
  const int fs = corpus.front().sample_rate;
  for (const Waveform& w : corpus)
    if (w.sample_rate != fs) throw std::invalid_argument("train: corpus mixes sample rates");

  std::vector<ResidualFrame> frames;
  for (size_t i = 0; i < corpus.size(); ++i) {
    Analysis a = analyze(corpus[i], cfg);
    for (ResidualFrame& f : a.frames) {
      f.source.utterance = static_cast<int32_t>(i);
      frames.push_back(std::move(f));
    }
  }
  if (frames.empty())
    throw std::invalid_argument("train: corpus produced 0 usable residual frames");

  std::vector<double> energies;
  energies.reserve(frames.size());
  for (const ResidualFrame& f : frames) energies.push_back(f.energy);
  std::sort(energies.begin(), energies.end());
  const double floor = energies[(energies.size() - 1) / 2] * 1e-6;

  std::vector<ResidualFrame> kept;
  kept.reserve(frames.size());
  for (ResidualFrame& f : frames)
    if (f.energy >= floor && f.energy > 0.0) kept.push_back(std::move(f));
  if (kept.size() < static_cast<size_t>(k))
    throw std::invalid_argument("train: corpus yielded " + std::to_string(kept.size()) +
                                " frames above the energy floor, fewer than k = " + std::to_string(k));

  std::vector<RnFrame> keys(kept.size());
  for (size_t i = 0; i < kept.size(); ++i) keys[i] = rn(kept[i]);

  TrainResult result;
  result.full = full_codebook(kept, fs);
  const auto centroids = kmeans(keys, k, seed);
  result.compressed = compress(centroids, kept, n_closest, fs);
  result.pca = fit_pca(keys);
  return result;
}

std::pair<Waveform, MetricsReport> copy_synthesis(const Waveform& w, const Codebook* cb,
                                                  SynthMode mode, uint64_t seed,
                                                  const AnalysisConfig& cfg) {
  if (mode == SynthMode::full && (cb == nullptr || cb->kind != CodebookKind::full))
    throw std::invalid_argument("copy_synthesis: full mode needs a full codebook");
  if (mode == SynthMode::compressed && (cb == nullptr || cb->kind != CodebookKind::compressed))
    throw std::invalid_argument("copy_synthesis: compressed mode needs a compressed codebook");
  if (mode == SynthMode::pulse && cb != nullptr)
    throw std::invalid_argument("copy_synthesis: pulse mode takes no codebook");

  Analysis a = analyze(w, cfg);
  const ExcitationMode emode =
      mode == SynthMode::pulse ? ExcitationMode::pulse : ExcitationMode::codebook;
  auto [excitation, report] = build_excitation(a.track, cb, emode, seed);
  Waveform y = synth_filter(excitation, a.envelope);

  // Selection keys are polarity-canonicalized; if most frames were flipped to
  // get there, the synthetic excitation is upside down relative to the input.
  if (2 * a.frames_flipped > a.frames_extracted)
    for (double& v : y.samples) v = -v;

  MetricsReport m;
  const std::vector<std::pair<int64_t, int64_t>> mask = voiced_ranges(a.track);
  const FrameMetrics voiced = frame_metrics(w, y, &mask);
  const FrameMetrics global = frame_metrics(w, y, nullptr);
  m.segmental_snr_db = voiced.snr_db;
  m.log_spectral_distortion_db = global.lsd_db;
  if (!report.selections.empty()) {
    double acc = 0.0;
    for (const SelectionRecord& r : report.selections) acc += r.distance;
    m.mean_rn_selection_error = acc / static_cast<double>(report.selections.size());
  }
  m.energy_hole_count = report.energy_hole_count;
  for (const TargetEvent& e : a.track.events)
    (e.voiced ? m.voiced_frame_count : m.unvoiced_span_count) += 1;
  return {std::move(y), m};
}

MetricsReport compare_metrics(const Waveform& ref, const Waveform& test) {
  check_waveform(ref);
  check_waveform(test);
  if (ref.samples.size() != test.samples.size())
    throw std::invalid_argument("compare_metrics: lengths differ");
  if (ref.sample_rate != test.sample_rate)
    throw std::invalid_argument("compare_metrics: sample rates differ");
  MetricsReport m;
  const FrameMetrics fm = frame_metrics(ref, test, nullptr);
  m.segmental_snr_db = fm.snr_db;
  m.log_spectral_distortion_db = fm.lsd_db;
  return m;
}

}  // namespace resvoc
