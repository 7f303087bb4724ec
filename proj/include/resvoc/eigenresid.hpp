#pragma once

#include <array>
#include <vector>

#include "resvoc/codebook.hpp"

namespace resvoc {

// Principal components of a set of RN frames. `basis` rows are unit
// eigenvectors of the sample covariance (n-1 divisor), ordered by descending
// eigenvalue; each row's largest-magnitude component is made positive so the
// decomposition is reproducible.
struct PcaModel {
  std::array<double, kRnDim> mean{};
  std::array<std::array<double, kRnDim>, kRnDim> basis{};
  std::array<double, kRnDim> eigenvalues{};
};

// Needs at least kRnDim + 1 points. Rank-deficient inputs produce zero
// trailing eigenvalues with an orthonormal basis completing the span.
PcaModel fit_pca(const std::vector<RnFrame>& points);

// Coordinates of (x - mean) in the eigenbasis. Encode/decode is an isometry;
// note decode returns mean + basis^T y without renormalizing, so a decoded
// vector meant as a selection target must be rescaled to unit energy first.
std::array<double, kRnDim> pca_encode(const PcaModel& model, const RnFrame& x);
std::array<double, kRnDim> pca_decode(const PcaModel& model, const std::array<double, kRnDim>& y);

// The i-th eigenvector as a shape over kRnDim samples.
std::array<double, kRnDim> eigen_frame(const PcaModel& model, int i);

}  // namespace resvoc
