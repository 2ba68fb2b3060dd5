#pragma once

#include <span>

#include "momnet/datafit.hpp"
#include "momnet/image.hpp"

namespace momnet {

/// Scalar soft-thresholding; |u| == alpha maps to 0.
inline double soft_threshold(double u, double alpha) {
  if (u > alpha) return u - alpha;
  if (u < -alpha) return u + alpha;
  return 0.0;
}

/// Entrywise soft-thresholding; throws ConfigError for alpha < 0.
Vec soft_threshold(std::span<const double> u, double alpha);

/// argmin_{w in set} 1/2 ||w - v||_M^2 for diagonal M: the entrywise projection.
ImageVector prox_indicator(const ImageVector& v, const DiagonalMajorizer& m, const FeasibleSet& set);

/// argmin_w 1/2 ||w - z||_M^2 + beta ||w||_1: soft-threshold z_n at beta / M_n.
Vec prox_l1_metric(std::span<const double> z, const DiagonalMajorizer& m, double beta);

}  // namespace momnet
