#include "resvoc/eigenresid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace resvoc {

namespace {

constexpr int kD = kRnDim;

// Cyclic Jacobi eigensolver for a symmetric kD x kD matrix. Rotations run
// until the off-diagonal mass is negligible; V accumulates the eigenvectors
// as columns.
void jacobi_eigen(std::array<std::array<double, kD>, kD>& a,
                  std::array<std::array<double, kD>, kD>& v) {
  for (int i = 0; i < kD; ++i) {
    v[i].fill(0.0);
    v[i][static_cast<size_t>(i)] = 1.0;
  }
  double scale = 0.0;
  for (int p = 0; p < kD; ++p)
    for (int q = 0; q < kD; ++q) scale += a[p][static_cast<size_t>(q)] * a[p][static_cast<size_t>(q)];
  scale = std::sqrt(scale);
  const double tol = 1e-12 * std::max(scale, 1.0);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < kD; ++p)
      for (int q = p + 1; q < kD; ++q) off += 2.0 * a[p][static_cast<size_t>(q)] * a[p][static_cast<size_t>(q)];
    if (std::sqrt(off) <= tol) return;

    for (int p = 0; p < kD; ++p) {
      for (int q = p + 1; q < kD; ++q) {
        const double apq = a[p][static_cast<size_t>(q)];
        if (std::abs(apq) <= tol * 1e-4) continue;
        const double tau = (a[q][static_cast<size_t>(q)] - a[p][static_cast<size_t>(p)]) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (int i = 0; i < kD; ++i) {
          const double aip = a[i][static_cast<size_t>(p)];
          const double aiq = a[i][static_cast<size_t>(q)];
          a[i][static_cast<size_t>(p)] = c * aip - s * aiq;
          a[i][static_cast<size_t>(q)] = s * aip + c * aiq;
        }
        for (int i = 0; i < kD; ++i) {
          const double api = a[p][static_cast<size_t>(i)];
          const double aqi = a[q][static_cast<size_t>(i)];
          a[p][static_cast<size_t>(i)] = c * api - s * aqi;
          a[q][static_cast<size_t>(i)] = s * api + c * aqi;
        }
        for (int i = 0; i < kD; ++i) {
          const double vip = v[i][static_cast<size_t>(p)];
          const double viq = v[i][static_cast<size_t>(q)];
          v[i][static_cast<size_t>(p)] = c * vip - s * viq;
          v[i][static_cast<size_t>(q)] = s * vip + c * viq;
        }
      }
    }
  }
}

}  // namespace

PcaModel fit_pca(const std::vector<RnFrame>& points) {
  const size_t n = points.size();
  if (n < static_cast<size_t>(kD) + 1)
    throw std::invalid_argument("fit_pca: need at least " + std::to_string(kD + 1) + " points, got " +
                                std::to_string(n));

  PcaModel model;
  model.mean.fill(0.0);
  for (const RnFrame& p : points)
    for (int d = 0; d < kD; ++d) model.mean[static_cast<size_t>(d)] += p.coeffs[static_cast<size_t>(d)];
  for (int d = 0; d < kD; ++d) model.mean[static_cast<size_t>(d)] /= static_cast<double>(n);

  std::array<std::array<double, kD>, kD> cov;
  for (auto& row : cov) row.fill(0.0);
  std::array<double, kD> centered{};
  for (const RnFrame& p : points) {
    for (int d = 0; d < kD; ++d)
      centered[static_cast<size_t>(d)] = p.coeffs[static_cast<size_t>(d)] - model.mean[static_cast<size_t>(d)];
    for (int i = 0; i < kD; ++i)
      for (int j = i; j < kD; ++j)
        cov[i][static_cast<size_t>(j)] += centered[static_cast<size_t>(i)] * centered[static_cast<size_t>(j)];
  }
  for (int i = 0; i < kD; ++i)
    for (int j = i; j < kD; ++j) {
      cov[i][static_cast<size_t>(j)] /= static_cast<double>(n - 1);
      cov[j][static_cast<size_t>(i)] = cov[i][static_cast<size_t>(j)];
    }

  std::array<std::array<double, kD>, kD> vec;
  jacobi_eigen(cov, vec);

  std::array<int, kD> order{};
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    return cov[x][static_cast<size_t>(x)] > cov[y][static_cast<size_t>(y)];
  });

  for (int r = 0; r < kD; ++r) {
    const int src = order[static_cast<size_t>(r)];
    double lambda = cov[src][static_cast<size_t>(src)];
    if (lambda < 0.0) lambda = 0.0;  // rounding on rank-deficient input
    model.eigenvalues[static_cast<size_t>(r)] = lambda;
    for (int i = 0; i < kD; ++i)
      model.basis[static_cast<size_t>(r)][static_cast<size_t>(i)] = vec[i][static_cast<size_t>(src)];
    // Fix the sign: largest-magnitude component positive (first on ties).
    int peak = 0;
    for (int i = 1; i < kD; ++i)
      if (std::abs(model.basis[static_cast<size_t>(r)][static_cast<size_t>(i)]) >
          std::abs(model.basis[static_cast<size_t>(r)][static_cast<size_t>(peak)]))
        peak = i;
    if (model.basis[static_cast<size_t>(r)][static_cast<size_t>(peak)] < 0.0)
      for (int i = 0; i < kD; ++i) model.basis[static_cast<size_t>(r)][static_cast<size_t>(i)] *= -1.0;
  }
  return model;
}

std::array<double, kRnDim> pca_encode(const PcaModel& model, const RnFrame& x) {
  std::array<double, kD> y{};
  for (int r = 0; r < kD; ++r) {
    double acc = 0.0;
    for (int i = 0; i < kD; ++i)
      acc += model.basis[static_cast<size_t>(r)][static_cast<size_t>(i)] *
             (x.coeffs[static_cast<size_t>(i)] - model.mean[static_cast<size_t>(i)]);
    y[static_cast<size_t>(r)] = acc;
  }
  return y;
}

std::array<double, kRnDim> pca_decode(const PcaModel& model, const std::array<double, kRnDim>& y) {
  std::array<double, kD> x = model.mean;
  for (int r = 0; r < kD; ++r)
    for (int i = 0; i < kD; ++i)
      x[static_cast<size_t>(i)] += model.basis[static_cast<size_t>(r)][static_cast<size_t>(i)] *
                                   y[static_cast<size_t>(r)];
  return x;
}

std::array<double, kRnDim> eigen_frame(const PcaModel& model, int i) {
  if (i < 0 || i >= kD) throw std::out_of_range("eigen_frame: index out of range");
  return model.basis[static_cast<size_t>(i)];
}

}  // namespace resvoc
