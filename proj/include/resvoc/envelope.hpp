#pragma once

#include <cstdint>
#include <vector>

#include "resvoc/core_dsp.hpp"

namespace resvoc {

// Piecewise-constant all-pole spectral envelope. Position i carries predictor
// coefficients a_1..a_order of A(z) = 1 - sum_i a_i z^-i plus a gain
// (sqrt of the per-sample residual power from the analysis recursion).
struct EnvelopeTrack {
  int order = 0;
  std::vector<int64_t> positions;             // strictly increasing sample indices
  std::vector<std::vector<double>> coeffs;    // one vector of `order` values per position
  std::vector<double> gains;                  // one positive value per position
};

// Autocorrelation-method LPC at each position: a Hann-windowed segment of
// window_len samples centered on the position (zero-padded at signal edges)
// feeds a Levinson-Durbin recursion whose reflection coefficients are clamped
// to |k| <= 0.999, so every filter is minimum phase. An all-zero segment
// yields the identity filter with a floor gain.
EnvelopeTrack estimate_envelope(const Waveform& w, const std::vector<int64_t>& positions,
                                int order, int window_len);

// FIR filtering by A(z); coefficients switch at the midpoints between
// adjacent track positions. Output length equals input length.
Waveform inverse_filter(const Waveform& w, const EnvelopeTrack& env);

// IIR filtering by 1/A(z) with the same switching rule and zero initial
// state, so synth_filter(inverse_filter(w)) == w up to rounding.
Waveform synth_filter(const Waveform& excitation, const EnvelopeTrack& env);

// Step-down recursion on the predictor; true when all reflection
// coefficients have magnitude < 1 (all poles inside the unit circle).
bool stable_predictor(const std::vector<double>& a);

}  // namespace resvoc
