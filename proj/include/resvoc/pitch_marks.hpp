#pragma once

#include <cstdint>
#include <vector>

#include "resvoc/core_dsp.hpp"

namespace resvoc {

struct F0Config {
  double f_min = 60.0;
  double f_max = 400.0;
  double hop_ms = 10.0;
  double window_ms = 40.0;
  double voicing_threshold = 0.3;           // waveform correlation peak
  double envelope_voicing_threshold = 0.55;  // rectified-envelope correlation peak
  double silence_floor_db = -50.0;          // relative to utterance peak
  double silence_floor_abs = 1e-5;          // absolute RMS floor
};

// Frame-rate pitch track. Frame t is centered at sample t*hop; f0[t] > 0
// exactly when voiced[t] is set.
struct F0Track {
  int hop = 0;
  std::vector<double> f0;
  std::vector<uint8_t> voiced;

  int frames() const { return static_cast<int>(f0.size()); }
  // Nearest analysis frame to a sample position.
  int frame_at(int64_t sample) const;
  bool voiced_at(int64_t sample) const { return voiced[static_cast<size_t>(frame_at(sample))] != 0; }
  double f0_at(int64_t sample) const { return f0[static_cast<size_t>(frame_at(sample))]; }
};

// Local pitch period in samples, rounded; 0 at unvoiced positions.
int period_at(const F0Track& t, int64_t sample, int sample_rate);

// Normalized-autocorrelation pitch estimate with parabolic peak refinement.
// Correlation runs on the half-wave rectified, smoothed excitation envelope,
// which keeps its peaks at the pitch period when period jitter shifts the
// formant carrier phase between cycles. The envelope arm only claims voicing
// when its whole analysis segment carries real samples, the lag sweep dips
// negative, and the peak repeats at twice the chosen lag; frames failing any
// of that (pure tones, nasals, file edges) fall back to waveform correlation.
// A shorter correlation lag within 10% of the best peak is preferred, so a
// near-tie at a lag multiple does not double the period.
F0Track estimate_f0(const Waveform& w, const F0Config& cfg);
F0Track estimate_f0(const Waveform& w, double f_min, double f_max);

// Energy center-of-gravity signal: at each voiced sample n, the Hann-weighted
// energy centroid offset of the two-period window around n,
//   cog[n] = sum_m m*(h(m) w[n+m])^2 / sum_m (h(m) w[n+m])^2,  m in [-T, T].
// Zero at unvoiced samples and where the window holds no energy.
Waveform cog_track(const Waveform& w, const F0Track& f0t);

// Glottal closure instants, sorted ascending.
using GciList = std::vector<int64_t>;

// Marks one instant per pitch period: positive-to-negative zero crossings of
// cog_track(speech) anchor a search for the strongest residual peak within
// +-0.3 period; candidates closer than half a period merge, keeping the
// larger peak. Voiced stretches shorter than one period yield no marks.
GciList detect_gci(const Waveform& residual, const Waveform& speech, const F0Track& f0t);

}  // namespace resvoc
