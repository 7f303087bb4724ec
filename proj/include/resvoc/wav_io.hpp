#pragma once

#include <string>

#include "resvoc/core_dsp.hpp"

namespace resvoc {

// Reads a mono RIFF/WAVE file (PCM16 or float32) and scales samples to
// [-1, 1]. Files at other rates are resampled to target_rate; when that
// happens and `warning` is non-null it receives a one-line note. Malformed
// files raise the io_error family; multichannel files are rejected.
Waveform read_wav(const std::string& path, int target_rate = 16000,
                  std::string* warning = nullptr);

struct WavWriteResult {
  int clipped = 0;  // samples outside [-1, 1] clamped to full scale
};

// Writes mono PCM16.
WavWriteResult write_wav(const std::string& path, const Waveform& w);

}  // namespace resvoc
