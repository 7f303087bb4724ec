#include "resvoc/core_dsp.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "resvoc/errors.hpp"

namespace resvoc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kKernelHalfTaps = 8;  // 16-tap kernel at unit ratio

double sinc(double v) {
  if (std::abs(v) < 1e-12) return 1.0;
  double p = kPi * v;
  return std::sin(p) / p;
}

// Reads s at an arbitrary integer position, extending past the ends by odd
// (point) reflection: f(-k) = 2 f(0) - f(k). This extension reproduces linear
// signals exactly, which keeps ramp interpolation clean at the edges.
double sample_reflected(const std::vector<double>& s, long long k) {
  const long long n = static_cast<long long>(s.size());
  double offset = 0.0;
  double sign = 1.0;
  while (k < 0 || k >= n) {
    if (k < 0) {
      offset += sign * 2.0 * s.front();
      sign = -sign;
      k = -k;
    } else {
      offset += sign * 2.0 * s.back();
      sign = -sign;
      k = 2 * (n - 1) - k;
    }
  }
  return offset + sign * s[static_cast<size_t>(k)];
}

}  // namespace

double sum_squares(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc;
}

Frame hanning(int n) {
  if (n < 2) throw std::invalid_argument("hanning: length must be >= 2, got " + std::to_string(n));
  Frame f;
  f.samples.resize(static_cast<size_t>(n));
  f.anchor = n / 2;
  for (int i = 0; i <= (n - 1) / 2; ++i) {
    double w = 0.5 - 0.5 * std::cos(2.0 * kPi * i / (n - 1));
    f.samples[static_cast<size_t>(i)] = w;
    f.samples[static_cast<size_t>(n - 1 - i)] = w;
  }
  return f;
}

Frame resample_frame(const Frame& f, int m) {
  const long long n = static_cast<long long>(f.samples.size());
  if (n < 2) throw std::invalid_argument("resample_frame: frame must have >= 2 samples");
  if (m < 2) throw std::invalid_argument("resample_frame: target length must be >= 2, got " + std::to_string(m));

  Frame out;
  out.samples.resize(static_cast<size_t>(m));
  out.anchor = static_cast<int>(std::llround(static_cast<double>(f.anchor) * (m - 1) / static_cast<double>(n - 1)));

  const double ratio = static_cast<double>(m - 1) / static_cast<double>(n - 1);
  const double cutoff = ratio < 1.0 ? ratio : 1.0;          // anti-alias when shrinking
  const double half_width = kKernelHalfTaps / cutoff;        // in input samples

  for (long long j = 0; j < m; ++j) {
    // Exact passthrough when output j lands on an input sample; this makes
    // unit-ratio resampling the identity.
    const long long num = j * (n - 1);
    if (num % (m - 1) == 0) {
      out.samples[static_cast<size_t>(j)] = f.samples[static_cast<size_t>(num / (m - 1))];
      continue;
    }
    const double x = static_cast<double>(num) / static_cast<double>(m - 1);
    const long long k0 = static_cast<long long>(std::ceil(x - half_width));
    const long long k1 = static_cast<long long>(std::floor(x + half_width));
    double acc = 0.0;
    double wsum = 0.0;
    for (long long k = k0; k <= k1; ++k) {
      const double u = static_cast<double>(k) - x;
      const double t = u / half_width;  // in (-1, 1)
      const double taper = 0.5 + 0.5 * std::cos(kPi * t);
      const double w = sinc(cutoff * u) * taper;
      acc += w * sample_reflected(f.samples, k);
      wsum += w;
    }
    // Normalizing by the actual tap sum pins constants to machine accuracy
    // and keeps slowly varying shapes close to it.
    out.samples[static_cast<size_t>(j)] = acc / wsum;
  }
  return out;
}

double frame_energy(const Frame& f) {
  if (f.samples.empty()) throw std::invalid_argument("frame_energy: empty frame");
  return sum_squares(f.samples);
}

Frame scale_to_energy(const Frame& f, double energy) {
  if (f.samples.empty()) throw std::invalid_argument("scale_to_energy: empty frame");
  if (!(energy >= 0.0)) throw std::invalid_argument("scale_to_energy: target energy must be >= 0");
  Frame out = f;
  if (energy == 0.0) {
    for (double& v : out.samples) v = 0.0;
    return out;
  }
  const double have = frame_energy(f);
  if (have == 0.0) throw degenerate_frame_error("scale_to_energy: cannot scale a zero frame to positive energy");
  const double s = std::sqrt(energy / have);
  for (double& v : out.samples) v *= s;
  return out;
}

}  // namespace resvoc
