#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "resvoc/pipeline.hpp"
#include "resvoc/rng.hpp"
#include "synth_voice.hpp"
#include "testutil.hpp"

using resvoc::Analysis;
using resvoc::analyze;
using resvoc::compare_metrics;
using resvoc::copy_synthesis;
using resvoc::MetricsReport;
using resvoc::SynthMode;
using resvoc::train;
using resvoc::TrainResult;
using resvoc::Waveform;

namespace {

Waveform test_utterance(uint64_t seed, double seconds, int speaker = 0) {
  return testvoice::make_utterance(seed, seconds, testvoice::speaker_params(speaker)).speech;
}

}  // namespace

TEST_CASE("identical signals measure at the SNR cap with zero distortion") {
  Waveform w;
  w.sample_rate = 16000;
  w.samples = testutil::make_sine(16000, 220.0, 16000, 0.5);
  const MetricsReport m = compare_metrics(w, w);
  CHECK(m.segmental_snr_db == doctest::Approx(80.0));
  CHECK(m.log_spectral_distortion_db == doctest::Approx(0.0));
}

TEST_CASE("a half-amplitude copy sits near six dB") {
  // Broadband noise keeps every spectral bin above the magnitude floor, so
  // the uniform gain shows up undiluted in both metrics.
  Waveform ref;
  ref.sample_rate = 16000;
  ref.samples = testutil::white_noise(16000, 3, 0.5);
  Waveform half = ref;
  for (double& v : half.samples) v *= 0.5;
  const MetricsReport m = compare_metrics(ref, half);
  CHECK(m.segmental_snr_db == doctest::Approx(6.0206).epsilon(0.001));
  CHECK(m.log_spectral_distortion_db == doctest::Approx(6.0206).epsilon(0.001));
}

TEST_CASE("spectral distortion matches a direct DFT computation") {
  // Single 20 ms frame (320 samples): the framing is trivial and the
  // spectrum can be recomputed with the plain transform definition.
  const int n = 320;
  Waveform ref, test;
  ref.sample_rate = test.sample_rate = 16000;
  ref.samples = testutil::make_sine(n, 500.0, 16000, 0.7);
  test.samples = testutil::white_noise(n, 44, 0.3);

  double acc = 0.0;
  for (int k = 0; k <= 256; ++k) {
    const double a = std::max(testutil::dft_magnitude(ref.samples, 512, k), 1e-4);
    const double b = std::max(testutil::dft_magnitude(test.samples, 512, k), 1e-4);
    const double d = 20.0 * std::log10(a / b);
    acc += d * d;
  }
  const double expect = std::sqrt(acc / 257.0);

  const MetricsReport m = compare_metrics(ref, test);
  CHECK(m.log_spectral_distortion_db == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("silent frames do not dilute the segmental average") {
  Waveform ref;
  ref.sample_rate = 16000;
  ref.samples.assign(3200, 0.0);
  // One loud frame; everything else sits far below the -60 dB floor.
  for (int i = 0; i < 320; ++i) ref.samples[static_cast<size_t>(i)] = 0.9 * std::sin(0.1 * i);
  Waveform test = ref;
  // Corrupt only the silent region: the reported SNR must stay at the cap.
  for (size_t i = 640; i < test.samples.size(); ++i) test.samples[i] = 1e-6;
  const MetricsReport m = compare_metrics(ref, test);
  CHECK(m.segmental_snr_db == doctest::Approx(80.0));
}

TEST_CASE("metric comparisons validate their inputs") {
  Waveform a, b;
  a.sample_rate = b.sample_rate = 16000;
  a.samples.assign(1000, 0.1);
  b.samples.assign(999, 0.1);
  CHECK_THROWS_AS(compare_metrics(a, b), std::invalid_argument);
  b.samples.push_back(std::nan(""));
  CHECK_THROWS_AS(compare_metrics(a, b), std::invalid_argument);
  b.samples.back() = 0.1;
  b.sample_rate = 8000;
  CHECK_THROWS_AS(compare_metrics(a, b), std::invalid_argument);
}

TEST_CASE("analysis output is internally consistent") {
  const Waveform w = test_utterance(300, 2.0);
  const Analysis a = analyze(w);

  REQUIRE(!a.track.events.empty());
  CHECK(a.track.total_length == static_cast<int64_t>(w.samples.size()));
  CHECK(a.track.sample_rate == w.sample_rate);
  CHECK(a.residual.samples.size() == w.samples.size());
  CHECK(std::is_sorted(a.gcis.begin(), a.gcis.end()));

  int64_t prev = -1;
  size_t voiced_count = 0;
  const std::set<int64_t> marks(a.gcis.begin(), a.gcis.end());
  for (const auto& e : a.track.events) {
    CHECK(e.position > prev);
    prev = e.position;
    CHECK(e.position < a.track.total_length);
    if (e.voiced) {
      ++voiced_count;
      CHECK(e.period >= 2);
      CHECK(e.energy > 0.0);
      CHECK(marks.count(e.position) == 1);
      double norm = 0.0;
      for (double v : e.target_rn.coeffs) norm += v * v;
      CHECK(norm == doctest::Approx(1.0).epsilon(1e-9));
    } else {
      CHECK(e.energy >= 0.0);
    }
  }
  CHECK(voiced_count == a.frames.size());
  CHECK(a.frames_extracted >= static_cast<int>(a.frames.size()));
  for (const auto& f : a.frames) CHECK(static_cast<size_t>(f.source.gci) < a.gcis.size());
}

TEST_CASE("unvoiced event energies cover their spans exactly") {
  const Waveform w = test_utterance(301, 2.0, 1);
  const Analysis a = analyze(w);
  int spans = 0;
  for (size_t i = 0; i < a.track.events.size(); ++i) {
    const auto& e = a.track.events[i];
    if (e.voiced) continue;
    ++spans;
    const int64_t end = resvoc::unvoiced_span_end(a.track, i);
    REQUIRE(end >= e.position);
    double energy = 0.0;
    for (int64_t s = e.position; s < end; ++s)
      energy += a.residual.samples[static_cast<size_t>(s)] * a.residual.samples[static_cast<size_t>(s)];
    CHECK(e.energy == energy);
  }
  CHECK(spans > 0);
}

TEST_CASE("the residual refilters back to the input") {
  const Waveform w = test_utterance(302, 1.5, 2);
  const Analysis a = analyze(w);
  const Waveform back = resvoc::synth_filter(a.residual, a.envelope);
  REQUIRE(back.samples.size() == w.samples.size());
  CHECK(testutil::snr_db(w.samples, back.samples) > 80.0);
}

TEST_CASE("silence analyzes to an empty voiced track") {
  Waveform w;
  w.sample_rate = 16000;
  w.samples.assign(8000, 0.0);
  const Analysis a = analyze(w);
  CHECK(a.gcis.empty());
  CHECK(a.frames.empty());
  for (const auto& e : a.track.events) CHECK_FALSE(e.voiced);
}

TEST_CASE("analysis rejects malformed input") {
  Waveform w;
  w.sample_rate = 0;
  w.samples.assign(100, 0.1);
  CHECK_THROWS_AS(analyze(w), std::invalid_argument);
  w.sample_rate = 16000;
  w.samples.clear();
  CHECK_THROWS_AS(analyze(w), std::invalid_argument);
  w.samples.assign(100, std::nan(""));
  CHECK_THROWS_AS(analyze(w), std::invalid_argument);
}

TEST_CASE("training builds consistent codebooks and a usable PCA model") {
  std::vector<Waveform> corpus;
  for (int i = 0; i < 3; ++i) corpus.push_back(test_utterance(400 + static_cast<uint64_t>(i), 1.5, i));
  const TrainResult tr = train(corpus, 12, 5, 7);

  CHECK(tr.full.meta.k == static_cast<int>(tr.full.entries.size()));
  CHECK(tr.full.meta.n_closest == 0);
  CHECK(tr.compressed.meta.k == 12);
  CHECK(tr.compressed.meta.n_closest == 5);
  CHECK(tr.compressed.entries.size() == 12);
  CHECK(tr.full.meta.corpus_digest == tr.compressed.meta.corpus_digest);
  CHECK(tr.full.entries.size() > tr.compressed.entries.size());

  // Compressed payloads are drawn from the corpus frames.
  for (const auto& e : tr.compressed.entries) {
    CHECK(e.payload.period >= 2);
    CHECK(e.payload.energy > 0.0);
  }

  // The PCA basis came out orthonormal.
  for (int i = 0; i < resvoc::kRnDim; ++i) {
    double n = 0.0;
    for (double v : tr.pca.basis[static_cast<size_t>(i)]) n += v * v;
    CHECK(n == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK(tr.pca.eigenvalues[0] > 0.0);
}

TEST_CASE("training is deterministic for a fixed seed") {
  std::vector<Waveform> corpus{test_utterance(500, 1.2), test_utterance(501, 1.2, 1)};
  const TrainResult a = train(corpus, 8, 4, 3);
  const TrainResult b = train(corpus, 8, 4, 3);
  REQUIRE(a.compressed.entries.size() == b.compressed.entries.size());
  for (size_t i = 0; i < a.compressed.entries.size(); ++i) {
    const auto& ea = a.compressed.entries[i];
    const auto& eb = b.compressed.entries[i];
    CHECK(ea.payload.period == eb.payload.period);
    CHECK(ea.payload.source.utterance == eb.payload.source.utterance);
    CHECK(ea.payload.source.gci == eb.payload.source.gci);
    for (int d = 0; d < resvoc::kRnDim; ++d)
      CHECK(ea.key.coeffs[static_cast<size_t>(d)] == eb.key.coeffs[static_cast<size_t>(d)]);
  }
}

TEST_CASE("training refuses corpora it cannot serve") {
  CHECK_THROWS_AS(train({}, 4, 2, 0), std::invalid_argument);

  std::vector<Waveform> tiny{test_utterance(600, 0.5)};
  CHECK_THROWS_AS(train(tiny, 100000, 5, 0), std::invalid_argument);

  std::vector<Waveform> mixed{test_utterance(601, 1.0), test_utterance(602, 1.0)};
  mixed[1].sample_rate = 8000;
  CHECK_THROWS_AS(train(mixed, 4, 2, 0), std::invalid_argument);
}

TEST_CASE("a training utterance reconstructs from the full codebook") {
  std::vector<Waveform> corpus{test_utterance(700, 2.0), test_utterance(701, 2.0, 1)};
  const TrainResult tr = train(corpus, 8, 4, 1);

  auto [y, report] = copy_synthesis(corpus[0], &tr.full, SynthMode::full, 11);
  CHECK(y.samples.size() == corpus[0].samples.size());
  // Every voiced frame of the input is in the book, so selection is exact.
  CHECK(report.mean_rn_selection_error == 0.0);
  CHECK(report.voiced_frame_count > 0);
  CHECK(report.unvoiced_span_count > 0);
  CHECK(report.segmental_snr_db >= 20.0);
  CHECK(report.log_spectral_distortion_db < 6.0);
}

TEST_CASE("copy synthesis is deterministic and respects its seed") {
  std::vector<Waveform> corpus{test_utterance(800, 1.5)};
  const TrainResult tr = train(corpus, 6, 3, 2);
  const Waveform held_out = test_utterance(810, 1.2, 3);

  auto [a, ra] = copy_synthesis(held_out, &tr.compressed, SynthMode::compressed, 5);
  auto [b, rb] = copy_synthesis(held_out, &tr.compressed, SynthMode::compressed, 5);
  REQUIRE(a.samples.size() == b.samples.size());
  for (size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i] == b.samples[i]);
  CHECK(ra.segmental_snr_db == rb.segmental_snr_db);

  auto [c, rc] = copy_synthesis(held_out, &tr.compressed, SynthMode::compressed, 6);
  bool any_diff = false;
  for (size_t i = 0; i < a.samples.size() && !any_diff; ++i)
    if (a.samples[i] != c.samples[i]) any_diff = true;
  CHECK(any_diff);  // a new seed reshapes the noise spans
}

TEST_CASE("mode and codebook arguments must agree") {
  std::vector<Waveform> corpus{test_utterance(900, 1.0)};
  const TrainResult tr = train(corpus, 4, 2, 0);
  const Waveform w = test_utterance(901, 0.8);
  CHECK_THROWS_AS(copy_synthesis(w, nullptr, SynthMode::full, 0), std::invalid_argument);
  CHECK_THROWS_AS(copy_synthesis(w, nullptr, SynthMode::compressed, 0), std::invalid_argument);
  CHECK_THROWS_AS(copy_synthesis(w, &tr.full, SynthMode::pulse, 0), std::invalid_argument);
  CHECK_NOTHROW(copy_synthesis(w, nullptr, SynthMode::pulse, 0));
}
