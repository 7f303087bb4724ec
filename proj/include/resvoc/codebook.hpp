#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "resvoc/core_dsp.hpp"
#include "resvoc/pitch_marks.hpp"

namespace resvoc {

inline constexpr int kRnDim = 20;

// Where a frame came from: utterance index within the corpus and the index of
// its pitch mark within that utterance. Orders frames deterministically.
struct SourceId {
  int32_t utterance = 0;
  int32_t gci = 0;

  friend bool operator==(const SourceId&, const SourceId&) = default;
  friend auto operator<=>(const SourceId&, const SourceId&) = default;
};

// Two-period Hann-windowed residual slice centered on a pitch mark. `energy`
// is the windowed sum of squares before any normalization; the pitch mark
// sits at sample `period`.
struct ResidualFrame {
  std::vector<double> samples;  // length 2*period
  int period = 0;
  double energy = 0.0;
  SourceId source;
};

// Pitch- and energy-normalized shape key: the frame resampled to kRnDim
// samples and scaled to unit energy.
struct RnFrame {
  std::array<double, kRnDim> coeffs{};
};

struct ExtractResult {
  std::vector<ResidualFrame> frames;
  int skipped = 0;  // pitch marks too close to a signal edge
  int flipped = 0;  // frames sign-flipped into canonical (negative-peak) polarity
};

// Cuts residual[g-T, g+T) around each pitch mark, applies a 2T Hann window,
// and canonicalizes polarity so the dominant-magnitude sample is negative.
ExtractResult extract_frames(const Waveform& residual, const GciList& gcis, const F0Track& f0t,
                             int32_t utterance_id = 0);

// Resample to kRnDim, then normalize to unit energy. Throws
// degenerate_frame_error on zero-energy frames.
RnFrame rn(const ResidualFrame& frame);

// Mean squared difference over the kRnDim coefficients.
double rn_distance(const RnFrame& a, const RnFrame& b);
double rn_distance(const RnFrame& a, const std::array<double, kRnDim>& b);

// Lloyd's algorithm with kmeans++ seeding, run until the assignment reaches a
// fixpoint or max_iterations. Empty clusters are reseeded to the point
// farthest from its assigned centroid. `distortion_history`, when given,
// receives the mean squared distance after each assignment step.
std::vector<std::array<double, kRnDim>> kmeans(const std::vector<RnFrame>& points, int k,
                                               uint64_t seed, int max_iterations = 300,
                                               std::vector<double>* distortion_history = nullptr);

enum class CodebookKind : uint8_t { full = 0, compressed = 1 };

struct CodebookEntry {
  RnFrame key;
  ResidualFrame payload;
};

struct CodebookMeta {
  int sample_rate = 0;
  int k = 0;          // centroid count (entry count for full codebooks)
  int n_closest = 0;  // 0 for full codebooks
  uint64_t corpus_digest = 0;
};

struct Codebook {
  std::vector<CodebookEntry> entries;
  CodebookKind kind = CodebookKind::full;
  CodebookMeta meta;
};

// Fingerprint of the exact frame sequence a codebook was built from;
// any change to content or order changes the digest.
uint64_t corpus_digest(const std::vector<ResidualFrame>& frames);

// One entry per centroid: among the n_closest frames nearest the centroid (by
// rn_distance, ties by source id), keep the longest-period frame (ties by
// smaller distance, then source id). The entry key is the kept frame's RN.
Codebook compress(const std::vector<std::array<double, kRnDim>>& centroids,
                  const std::vector<ResidualFrame>& frames, int n_closest, int sample_rate);

// Every frame becomes an entry, in corpus order.
Codebook full_codebook(const std::vector<ResidualFrame>& frames, int sample_rate);

}  // namespace resvoc
