#pragma once

#include <string>

#include "resvoc/envelope.hpp"
#include "resvoc/excitation.hpp"

namespace resvoc {

// Track file: a text header and event list followed by a binary envelope
// block. Doubles are printed with %.17g so a serialize/parse round trip is
// exact.
//   RSTK 1
//   sample_rate <int>
//   total_length <int>
//   events <count>
//   v <position> <period> <energy> <rn0> ... <rn19>     (one per voiced event)
//   u <position> <energy>                               (one per unvoiced event)
//   envelope <order> <position count>
//   <binary, little-endian: per position i64 position, f64 gain, f64 a[order]>
void save_track(const std::string& path, const TargetTrack& track, const EnvelopeTrack& env);

struct LoadedTrack {
  TargetTrack track;
  EnvelopeTrack envelope;
};

LoadedTrack load_track(const std::string& path);

}  // namespace resvoc
