#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "resvoc/envelope.hpp"
#include "resvoc/pitch_marks.hpp"
#include "resvoc/rng.hpp"
#include "synth_voice.hpp"
#include "testutil.hpp"

using resvoc::cog_track;
using resvoc::detect_gci;
using resvoc::estimate_f0;
using resvoc::F0Config;
using resvoc::F0Track;
using resvoc::GciList;
using resvoc::period_at;
using resvoc::Rng;
using resvoc::Waveform;

namespace {

// Hand-built track: every frame voiced at a fixed f0.
F0Track fixed_track(int frames, int hop, double f0) {
  F0Track t;
  t.hop = hop;
  t.f0.assign(static_cast<size_t>(frames), f0);
  t.voiced.assign(static_cast<size_t>(frames), 1);
  return t;
}

Waveform impulse_train(int len, int period, double amp) {
  Waveform w;
  w.sample_rate = 16000;
  w.samples.assign(static_cast<size_t>(len), 0.0);
  for (int i = period; i + period < len; i += period) w.samples[static_cast<size_t>(i)] = amp;
  return w;
}

}  // namespace

TEST_CASE("a clean sine is voiced at its own frequency") {
  const Waveform w{testutil::make_sine(16000, 100.0, 16000, 0.5), 16000};
  const F0Track t = estimate_f0(w, 60.0, 400.0);
  REQUIRE(t.frames() > 0);
  int voiced = 0;
  for (int i = 2; i < t.frames() - 2; ++i) {
    if (!t.voiced[static_cast<size_t>(i)]) continue;
    ++voiced;
    CHECK(std::abs(t.f0[static_cast<size_t>(i)] - 100.0) < 1.0);
  }
  CHECK(voiced > t.frames() - 8);
}

TEST_CASE("noise and silence are unvoiced everywhere") {
  Waveform noise;
  noise.sample_rate = 16000;
  Rng rng(11);
  for (int i = 0; i < 16000; ++i) noise.samples.push_back(0.3 * rng.next_symmetric());
  const F0Track tn = estimate_f0(noise, 60.0, 400.0);
  for (uint8_t v : tn.voiced) CHECK(v == 0);

  Waveform hush;
  hush.sample_rate = 16000;
  hush.samples.assign(8000, 0.0);
  const F0Track ts = estimate_f0(hush, 60.0, 400.0);
  for (uint8_t v : ts.voiced) CHECK(v == 0);
  for (double f : ts.f0) CHECK(f == 0.0);
}

TEST_CASE("track lookups round to the nearest frame and period") {
  F0Track t = fixed_track(10, 160, 100.0);
  CHECK(t.frame_at(0) == 0);
  CHECK(t.frame_at(79) == 0);
  CHECK(t.frame_at(80) == 1);
  CHECK(t.frame_at(160) == 1);
  CHECK(t.frame_at(100000) == 9);
  CHECK(period_at(t, 320, 16000) == 160);
  t.voiced[2] = 0;
  t.f0[2] = 0.0;
  CHECK(period_at(t, 320, 16000) == 0);
}

TEST_CASE("centroid of a lone impulse is its own offset") {
  const int hop = 80;
  const F0Track t = fixed_track(60, hop, 100.0);  // period 160 at 16 kHz
  Waveform w;
  w.sample_rate = 16000;
  w.samples.assign(60 * 80, 0.0);

  for (int k : {-100, -3, 0, 7, 131}) {
    std::fill(w.samples.begin(), w.samples.end(), 0.0);
    w.samples[static_cast<size_t>(2000 + k)] = 0.8;
    const Waveform c = cog_track(w, t);
    CHECK(c.samples[2000] == doctest::Approx(static_cast<double>(k)).epsilon(1e-12));
  }
}

TEST_CASE("centroid vanishes on symmetric energy") {
  const int hop = 80;
  const F0Track t = fixed_track(60, hop, 100.0);
  Waveform w;
  w.sample_rate = 16000;
  w.samples.assign(60 * 80, 0.0);
  // Symmetric about sample 2400.
  for (int d = 1; d < 150; ++d) {
    const double v = std::cos(0.05 * d) * (150 - d);
    w.samples[static_cast<size_t>(2400 - d)] = v;
    w.samples[static_cast<size_t>(2400 + d)] = v;
  }
  w.samples[2400] = 200.0;
  const Waveform c = cog_track(w, t);
  CHECK(std::abs(c.samples[2400]) < 1e-9);
}

TEST_CASE("centroid stays zero off the voiced regions and on empty windows") {
  const int hop = 80;
  F0Track t = fixed_track(60, hop, 100.0);
  for (int i = 30; i < 60; ++i) t.voiced[static_cast<size_t>(i)] = 0;
  Waveform w;
  w.sample_rate = 16000;
  w.samples.assign(60 * 80, 0.0);
  w.samples[1000] = 1.0;
  w.samples[3000] = 1.0;  // unvoiced half
  const Waveform c = cog_track(w, t);
  CHECK(c.samples[3000] == 0.0);
  CHECK(c.samples[1300] == 0.0);  // window sees no energy
}

TEST_CASE("impulse excitation through a resonator is marked at the impulses") {
  const int period = 160;
  const Waveform exc = impulse_train(16000, period, -1.0);

  // Speech-like carrier: the same impulses ringing through one resonance.
  Waveform speech;
  speech.sample_rate = 16000;
  speech.samples.assign(exc.samples.size(), 0.0);
  const double r = 0.97, th = 2.0 * 3.14159265358979 * 500.0 / 16000.0;
  double y1 = 0.0, y2 = 0.0;
  for (size_t i = 0; i < exc.samples.size(); ++i) {
    const double y = exc.samples[i] + 2.0 * r * std::cos(th) * y1 - r * r * y2;
    speech.samples[i] = y;
    y2 = y1;
    y1 = y;
  }

  const F0Track t = estimate_f0(speech, 60.0, 400.0);
  const GciList gcis = detect_gci(exc, speech, t);
  REQUIRE(gcis.size() > 50);

  int hits = 0;
  for (int64_t g : gcis) {
    const int64_t nearest = ((g + period / 2) / period) * period;
    if (std::abs(g - nearest) <= 1) ++hits;
  }
  CHECK(hits >= static_cast<int>(gcis.size()) - 2);

  // One mark per period: no pair closer than half a period.
  for (size_t i = 1; i < gcis.size(); ++i) CHECK(gcis[i] - gcis[i - 1] >= period / 2);
}

TEST_CASE("close candidates merge keeping the stronger residual peak") {
  // Period 160 with a decoy impulse 40 samples after each true one. The decoy
  // is weaker, so merging keeps the true marks.
  const int period = 160;
  Waveform exc = impulse_train(16000, period, -1.0);
  for (int i = period; i + period < 16000; i += period)
    exc.samples[static_cast<size_t>(i + 40)] = -0.4;

  Waveform speech;
  speech.sample_rate = 16000;
  speech.samples.assign(exc.samples.size(), 0.0);
  double y1 = 0.0;
  for (size_t i = 0; i < exc.samples.size(); ++i) {
    const double y = exc.samples[i] + 0.9 * y1;
    speech.samples[i] = y;
    y1 = y;
  }

  const F0Track t = estimate_f0(speech, 60.0, 400.0);
  const GciList gcis = detect_gci(exc, speech, t);
  REQUIRE(!gcis.empty());
  for (size_t i = 1; i < gcis.size(); ++i) CHECK(gcis[i] - gcis[i - 1] >= period / 2);
  int on_true = 0;
  for (int64_t g : gcis) {
    const int64_t nearest = ((g + period / 2) / period) * period;
    if (std::abs(g - nearest) <= 1) ++on_true;
  }
  CHECK(on_true == static_cast<int>(gcis.size()));
}

TEST_CASE("synthetic speech closures are recovered through the full analysis front end") {
  const testvoice::Utterance utt = testvoice::make_utterance(2024, 3.0, testvoice::speaker_params(0));
  REQUIRE(utt.gcis.size() > 100);

  const F0Track t = estimate_f0(utt.speech, 60.0, 400.0);
  std::vector<int64_t> grid;
  for (int64_t p = 200; p + 200 < static_cast<int64_t>(utt.speech.samples.size()); p += 80)
    grid.push_back(p);
  const resvoc::EnvelopeTrack env = resvoc::estimate_envelope(utt.speech, grid, 24, 400);
  const Waveform residual = resvoc::inverse_filter(utt.speech, env);
  const GciList found = detect_gci(residual, utt.speech, t);
  REQUIRE(!found.empty());

  const int64_t guard = utt.speech.sample_rate * 3 / 100;  // 30 ms past each onset/offset
  int within = 0, interior = 0, interior_hit = 0;
  for (int64_t truth : utt.gcis) {
    const auto it = std::lower_bound(found.begin(), found.end(), truth);
    int64_t best = 1 << 30;
    if (it != found.end()) best = std::min<int64_t>(best, std::abs(*it - truth));
    if (it != found.begin()) best = std::min<int64_t>(best, std::abs(*(it - 1) - truth));
    const bool hit = best <= 4;
    if (hit) ++within;
    for (const auto& [lo, hi] : utt.voiced_spans)
      if (truth >= lo + guard && truth < hi - guard) {
        ++interior;
        if (hit) ++interior_hit;
        break;
      }
  }
  const double recall = static_cast<double>(within) / static_cast<double>(utt.gcis.size());
  const double interior_recall = static_cast<double>(interior_hit) / static_cast<double>(interior);
  INFO("recall ", recall, " interior ", interior_recall, " over ", utt.gcis.size(), " marks");
  REQUIRE(interior > 50);
  CHECK(recall >= 0.85);
  CHECK(interior_recall >= 0.93);
}
