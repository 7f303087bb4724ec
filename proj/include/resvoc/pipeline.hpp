#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "resvoc/codebook.hpp"
#include "resvoc/eigenresid.hpp"
#include "resvoc/envelope.hpp"
#include "resvoc/excitation.hpp"
#include "resvoc/pitch_marks.hpp"

namespace resvoc {

struct AnalysisConfig {
  F0Config f0;
  int lpc_order = 24;
  double envelope_window_ms = 25.0;
  // Envelope analysis grid in unvoiced and first-pass regions.
  double envelope_grid_ms = 5.0;
};

// Everything one utterance contributes: the synthesis instructions, the
// envelope that produced the residual, the residual itself, the final pitch
// marks, and the extracted frames backing the voiced events.
struct Analysis {
  TargetTrack track;
  EnvelopeTrack envelope;
  Waveform residual;
  GciList gcis;
  std::vector<ResidualFrame> frames;
  int frames_extracted = 0;
  int frames_skipped = 0;  // edge-clipped pitch marks plus zero-energy frames
  int frames_flipped = 0;
};

// Two-pass analysis: pitch and voicing, provisional envelope on a uniform
// grid, provisional residual and pitch marks, then a final envelope anchored
// at the pitch marks (uniform grid in unvoiced stretches), final residual and
// final pitch marks.
Analysis analyze(const Waveform& w, const AnalysisConfig& cfg = {});

struct TrainResult {
  Codebook full;
  Codebook compressed;
  PcaModel pca;
};

// Analyzes every corpus utterance, drops frames below the energy floor
// (median frame energy times 1e-6), and builds the full codebook, the k-means
// compressed codebook and the PCA model from the survivors.
TrainResult train(const std::vector<Waveform>& corpus, int k, int n_closest, uint64_t seed,
                  const AnalysisConfig& cfg = {});

enum class SynthMode { full, compressed, pulse };

struct MetricsReport {
  double segmental_snr_db = 0.0;
  double log_spectral_distortion_db = 0.0;
  double mean_rn_selection_error = 0.0;
  int energy_hole_count = 0;
  int voiced_frame_count = 0;
  int unvoiced_span_count = 0;
};

// Analyzes w, rebuilds its excitation from the codebook (or as a pulse
// train), refilters through the estimated envelope, and reports quality
// metrics against the input. Voiced segmental SNR is measured on 20 ms frames
// that lie between the first and last pitch mark of a voiced stretch. Pulse
// mode takes no codebook (pass nullptr).
std::pair<Waveform, MetricsReport> copy_synthesis(const Waveform& w, const Codebook* cb,
                                                  SynthMode mode, uint64_t seed = 0,
                                                  const AnalysisConfig& cfg = {});

// Frame-level comparison of two equal-length signals: segmental SNR over
// non-silent 20 ms frames (per-frame cap +80 dB, frames below -60 dB of the
// reference peak skipped) and log-spectral distortion over 512-point spectra
// with magnitudes floored at -80 dB. Selection fields are left zero.
MetricsReport compare_metrics(const Waveform& ref, const Waveform& test);

}  // namespace resvoc
