#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace resvoc {

struct Waveform {
  std::vector<double> samples;
  int sample_rate = 0;
};

// A short signal segment. `anchor` is the index that stays pinned when the
// frame is placed on a timeline or resampled (for pitch-synchronous frames it
// marks the excitation instant).
struct Frame {
  std::vector<double> samples;
  int anchor = 0;
};

double sum_squares(std::span<const double> x);

// Symmetric Hann window of length n, zero at both endpoints, anchor n/2.
// Built by mirroring the first half so w[i] == w[n-1-i] holds bit-exactly.
Frame hanning(int n);

// Resamples f to exactly m samples with an endpoint-matched windowed-sinc
// kernel (16 taps at unit ratio, widened by the decimation factor when
// shrinking). Output j is taken at input position j*(len-1)/(m-1); positions
// that land on input samples are copied through exactly. The anchor maps to
// round(anchor*(m-1)/(len-1)).
Frame resample_frame(const Frame& f, int m);

// Sum of squared samples.
double frame_energy(const Frame& f);

// Returns f scaled so frame_energy(result) == energy. energy == 0 yields a
// zero frame; scaling a zero frame to a positive energy throws
// degenerate_frame_error.
Frame scale_to_energy(const Frame& f, double energy);

}  // namespace resvoc
