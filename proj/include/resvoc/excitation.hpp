#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "resvoc/codebook.hpp"
#include "resvoc/core_dsp.hpp"

namespace resvoc {

// One synthesis instruction: a pitch mark to cover with an adapted codebook
// frame, or the start of a noise span. Unvoiced events carry period 0 and an
// all-zero target_rn.
struct TargetEvent {
  int64_t position = 0;
  bool voiced = false;
  int period = 0;       // target pitch period in samples
  double energy = 0.0;  // two-period windowed energy (voiced) or span energy (unvoiced)
  RnFrame target_rn;
};

struct TargetTrack {
  std::vector<TargetEvent> events;  // positions strictly increasing
  int64_t total_length = 0;
  int sample_rate = 0;
};

struct SelectionRecord {
  int64_t event_index = 0;
  int entry = 0;
  double distance = 0.0;
  double upsampling_ratio = 0.0;  // target period / payload period
};

struct SelectionReport {
  std::vector<SelectionRecord> selections;
  int energy_hole_count = 0;  // selections that had to stretch a frame (ratio > 1)
  int clipped_frames = 0;     // frames that ran past the buffer edges
};

enum class ExcitationMode { codebook, pulse };

// Index of the entry whose key is nearest the target (ties to the lower
// index).
int select(const Codebook& cb, const RnFrame& target);

// Resamples a stored frame to a new period (length 2*period, pitch mark at
// `period`) and scales it to the requested energy.
Frame adapt(const ResidualFrame& payload, int period, double energy);

// Adds each frame into a zero buffer of the given length with its anchor at
// the paired position. Returns the buffer and how many frames were clipped at
// the edges.
std::pair<std::vector<double>, int> overlap_add(
    const std::vector<std::pair<Frame, int64_t>>& placed, int64_t length);

// Deterministic white noise with the exact requested sum of squares.
std::vector<double> noise_fill(int64_t length, double energy, uint64_t seed);

// Renders the excitation signal for a track: codebook mode selects, adapts
// and overlap-adds a frame per voiced event; pulse mode places a single
// impulse of amplitude sqrt(energy) per voiced event. Unvoiced events become
// seeded noise spans reaching to the next event's coverage. Noise seeds
// derive from (seed, span ordinal), so a span's samples do not depend on the
// lengths or contents of the spans before it.
std::pair<Waveform, SelectionReport> build_excitation(const TargetTrack& track,
                                                      const Codebook* cb, ExcitationMode mode,
                                                      uint64_t seed);

// Where an unvoiced span starting at events[i] ends: the next voiced event's
// left frame edge, the next unvoiced event's position, or total_length.
int64_t unvoiced_span_end(const TargetTrack& track, size_t event_index);

}  // namespace resvoc
