#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "resvoc/core_dsp.hpp"
#include "resvoc/errors.hpp"
#include "testutil.hpp"

using resvoc::Frame;
using resvoc::frame_energy;
using resvoc::hanning;
using resvoc::resample_frame;
using resvoc::scale_to_energy;

TEST_CASE("hanning endpoints are exactly zero and the window is symmetric") {
  const Frame w3 = hanning(3);
  CHECK(w3.samples[0] == 0.0);
  CHECK(w3.samples[1] == 1.0);
  CHECK(w3.samples[2] == 0.0);
  CHECK(w3.anchor == 1);

  const Frame w4 = hanning(4);
  CHECK(w4.samples[0] == 0.0);
  CHECK(w4.samples[1] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(w4.samples[2] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(w4.samples[3] == 0.0);

  const Frame w = hanning(64);
  for (int i = 0; i < 64; ++i) CHECK(w.samples[i] == w.samples[63 - i]);
  CHECK(w.anchor == 32);
}

TEST_CASE("hanning sums to half the span, as the raised cosine integral demands") {
  for (int n : {8, 33, 200}) {
    const Frame w = hanning(n);
    double sum = 0.0;
    for (double v : w.samples) sum += v;
    CHECK(sum == doctest::Approx((n - 1) / 2.0).epsilon(1e-12));
  }
}

TEST_CASE("hanning rejects lengths that cannot hold a window") {
  CHECK_THROWS_AS(hanning(1), std::invalid_argument);
  CHECK_THROWS_AS(hanning(0), std::invalid_argument);
}

TEST_CASE("resampling to the same length returns the frame bit for bit") {
  Frame f;
  f.anchor = 7;
  for (int i = 0; i < 20; ++i) f.samples.push_back(std::sin(0.37 * i) * 1.7);
  const Frame g = resample_frame(f, 20);
  REQUIRE(g.samples.size() == f.samples.size());
  for (size_t i = 0; i < f.samples.size(); ++i) CHECK(g.samples[i] == f.samples[i]);
  CHECK(g.anchor == 7);
}

TEST_CASE("upsampling a ramp lands every output on the line") {
  Frame f;
  f.anchor = 5;
  for (int i = 0; i <= 10; ++i) f.samples.push_back(i / 10.0);
  const Frame g = resample_frame(f, 21);
  REQUIRE(g.samples.size() == 21);
  for (int j = 0; j <= 20; ++j) CHECK(g.samples[j] == doctest::Approx(j / 20.0).epsilon(1e-9));
  CHECK(g.anchor == 10);
}

TEST_CASE("resampling preserves the endpoints exactly") {
  Frame f;
  f.anchor = 0;
  for (int i = 0; i < 37; ++i) f.samples.push_back(std::cos(0.21 * i) - 0.3);
  for (int m : {12, 37, 64, 101}) {
    const Frame g = resample_frame(f, m);
    CHECK(g.samples.front() == f.samples.front());
    CHECK(g.samples.back() == f.samples.back());
  }
}

TEST_CASE("anchors map proportionally onto the new grid") {
  Frame f;
  f.anchor = 50;
  f.samples.assign(101, 0.0);
  const Frame g = resample_frame(f, 51);
  CHECK(g.anchor == 25);
}

TEST_CASE("a slow sine survives halving and a round trip") {
  constexpr double kPi = std::numbers::pi;
  Frame f;
  f.anchor = 0;
  const int n = 100;
  for (int i = 0; i < n; ++i) f.samples.push_back(std::sin(2.0 * kPi * 3.0 * i / (n - 1)));

  const Frame half = resample_frame(f, 50);
  for (int j = 0; j < 50; ++j) {
    const double x = 2.0 * kPi * 3.0 * j / 49.0;
    CHECK(std::abs(half.samples[j] - std::sin(x)) < 0.02);
  }

  const Frame back = resample_frame(resample_frame(f, 200), 100);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(back.samples[i] - f.samples[i]));
  CHECK(worst < 0.02);
}

TEST_CASE("resampling rejects degenerate sizes") {
  Frame f;
  f.samples = {1.0, 2.0, 3.0};
  f.anchor = 1;
  CHECK_THROWS_AS(resample_frame(f, 1), std::invalid_argument);
  Frame one;
  one.samples = {1.0};
  one.anchor = 0;
  CHECK_THROWS_AS(resample_frame(one, 5), std::invalid_argument);
}

TEST_CASE("frame energy is the plain sum of squares") {
  Frame f;
  f.samples = {3.0, 4.0};
  f.anchor = 0;
  CHECK(frame_energy(f) == 25.0);
}

TEST_CASE("energy scaling hits the target exactly on exact ratios") {
  Frame f;
  f.samples = {3.0, 4.0};
  f.anchor = 0;
  const Frame g = scale_to_energy(f, 100.0);
  CHECK(g.samples[0] == 6.0);
  CHECK(g.samples[1] == 8.0);

  Frame ones;
  ones.samples = {1.0, 1.0, 1.0, 1.0};
  ones.anchor = 2;
  const Frame h = scale_to_energy(ones, 1.0);
  for (double v : h.samples) CHECK(v == 0.5);
  CHECK(h.anchor == 2);
}

TEST_CASE("scaling to zero energy silences any frame") {
  Frame f;
  f.samples = {0.5, -0.25, 0.125};
  f.anchor = 1;
  const Frame g = scale_to_energy(f, 0.0);
  for (double v : g.samples) CHECK(v == 0.0);
}

TEST_CASE("a silent frame cannot be scaled up") {
  Frame f;
  f.samples = {0.0, 0.0, 0.0};
  f.anchor = 1;
  CHECK_THROWS_AS(scale_to_energy(f, 1.0), resvoc::degenerate_frame_error);
  CHECK_THROWS_AS(scale_to_energy(f, -1.0), std::invalid_argument);
}

TEST_CASE("scaling a frame to its own energy is the identity") {
  Frame f;
  f.anchor = 3;
  for (int i = 0; i < 16; ++i) f.samples.push_back(std::sin(1.1 * i));
  const Frame g = scale_to_energy(f, frame_energy(f));
  for (size_t i = 0; i < f.samples.size(); ++i) CHECK(g.samples[i] == f.samples[i]);
}
