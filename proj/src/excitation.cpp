#include "resvoc/excitation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "resvoc/errors.hpp"
#include "resvoc/rng.hpp"

namespace resvoc {

namespace {

void check_track(const TargetTrack& track) {
  if (track.sample_rate <= 0) throw std::invalid_argument("target track: sample rate must be positive");
  if (track.total_length < 0) throw std::invalid_argument("target track: negative length");
  int64_t prev = -1;
  for (const TargetEvent& e : track.events) {
    if (e.position <= prev) throw std::invalid_argument("target track: positions must be strictly increasing");
    if (e.position >= track.total_length) throw std::invalid_argument("target track: event past end");
    if (e.voiced && e.period < 2) throw std::invalid_argument("target track: voiced event needs period >= 2");
    if (!(e.energy >= 0.0)) throw std::invalid_argument("target track: negative event energy");
    prev = e.position;
  }
}

}  // namespace

int select(const Codebook& cb, const RnFrame& target) {
  if (cb.entries.empty()) throw std::invalid_argument("select: empty codebook");
  int best = 0;
  double best_d = rn_distance(target, cb.entries[0].key);
  for (size_t i = 1; i < cb.entries.size(); ++i) {
    const double d = rn_distance(target, cb.entries[i].key);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

Frame adapt(const ResidualFrame& payload, int period, double energy) {
  if (period < 2) throw std::invalid_argument("adapt: period must be >= 2");
  if (!(energy >= 0.0)) throw std::invalid_argument("adapt: energy must be >= 0");
  Frame f;
  f.samples = payload.samples;
  f.anchor = payload.period;
  Frame out = scale_to_energy(resample_frame(f, 2 * period), energy);
  out.anchor = period;
  return out;
}

std::pair<std::vector<double>, int> overlap_add(
    const std::vector<std::pair<Frame, int64_t>>& placed, int64_t length) {
  if (length < 0) throw std::invalid_argument("overlap_add: negative length");
  std::vector<double> buffer(static_cast<size_t>(length), 0.0);
  int clipped = 0;
  for (const auto& [frame, position] : placed) {
    const int64_t start = position - frame.anchor;
    bool clip = false;
    for (size_t j = 0; j < frame.samples.size(); ++j) {
      const int64_t n = start + static_cast<int64_t>(j);
      if (n < 0 || n >= length) {
        clip = true;
        continue;
      }
      buffer[static_cast<size_t>(n)] += frame.samples[j];
    }
    if (clip) ++clipped;
  }
  return {std::move(buffer), clipped};
}

std::vector<double> noise_fill(int64_t length, double energy, uint64_t seed) {
  if (length < 0) throw std::invalid_argument("noise_fill: negative length");
  if (!(energy >= 0.0)) throw std::invalid_argument("noise_fill: energy must be >= 0");
  std::vector<double> out(static_cast<size_t>(length));
  if (length == 0) return out;
  Rng rng(seed);
  double have = 0.0;
  for (double& v : out) {
    v = rng.next_symmetric();
    have += v * v;
  }
  if (energy == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return out;
  }
  const double s = std::sqrt(energy / have);
  for (double& v : out) v *= s;
  return out;
}

int64_t unvoiced_span_end(const TargetTrack& track, size_t event_index) {
  const TargetEvent& e = track.events[event_index];
  if (event_index + 1 >= track.events.size()) return track.total_length;
  const TargetEvent& next = track.events[event_index + 1];
  if (!next.voiced) return next.position;
  return std::max(e.position, next.position - next.period);
}

std::pair<Waveform, SelectionReport> build_excitation(const TargetTrack& track,
                                                      const Codebook* cb, ExcitationMode mode,
                                                      uint64_t seed) {
  check_track(track);
  if (mode == ExcitationMode::codebook && (cb == nullptr || cb->entries.empty()))
    throw std::invalid_argument("build_excitation: codebook mode needs a nonempty codebook");

  SelectionReport report;
  std::vector<std::pair<Frame, int64_t>> placed;
  Waveform out;
  out.sample_rate = track.sample_rate;

  for (size_t i = 0; i < track.events.size(); ++i) {
    const TargetEvent& e = track.events[i];
    if (!e.voiced) continue;
    if (mode == ExcitationMode::codebook) {
      const int entry = select(*cb, e.target_rn);
      const ResidualFrame& payload = cb->entries[static_cast<size_t>(entry)].payload;
      placed.emplace_back(adapt(payload, e.period, e.energy), e.position);
      SelectionRecord rec;
      rec.event_index = static_cast<int64_t>(i);
      rec.entry = entry;
      rec.distance = rn_distance(e.target_rn, cb->entries[static_cast<size_t>(entry)].key);
      rec.upsampling_ratio = static_cast<double>(e.period) / payload.period;
      if (rec.upsampling_ratio > 1.0) ++report.energy_hole_count;
      report.selections.push_back(rec);
    }
  }

  auto [buffer, clipped] = overlap_add(placed, track.total_length);
  report.clipped_frames = clipped;

  if (mode == ExcitationMode::pulse) {
    for (const TargetEvent& e : track.events)
      if (e.voiced) buffer[static_cast<size_t>(e.position)] += std::sqrt(e.energy);
  }

  uint64_t span_ordinal = 0;
  for (size_t i = 0; i < track.events.size(); ++i) {
    const TargetEvent& e = track.events[i];
    if (e.voiced) continue;
    const int64_t end = std::min(unvoiced_span_end(track, i), track.total_length);
    const int64_t len = end - e.position;
    ++span_ordinal;
    if (len <= 0) continue;
    const std::vector<double> noise = noise_fill(len, e.energy, derive_seed(seed, span_ordinal - 1));
    for (int64_t j = 0; j < len; ++j)
      buffer[static_cast<size_t>(e.position + j)] += noise[static_cast<size_t>(j)];
  }

  out.samples = std::move(buffer);
  return {std::move(out), std::move(report)};
}

}  // namespace resvoc
