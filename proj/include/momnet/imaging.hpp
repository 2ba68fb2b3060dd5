#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "momnet/conv.hpp"
#include "momnet/datafit.hpp"
#include "momnet/image.hpp"
#include "momnet/linop.hpp"

namespace momnet {

// ---------------------------------------------------------------- phantoms

/// Modified Shepp-Logan head phantom on an n x n grid, values in [0, 1].
ImageVector shepp_logan(std::size_t n);

/// Head-like phantom with randomized skull, interior ellipses and contrasts.
ImageVector random_ellipse_phantom(std::size_t n, std::uint64_t seed);

// ---------------------------------------------------------------- CT

/// Parallel-beam geometry. The image is centred at the origin with square
/// pixels; views are `n_views` angles picked evenly from `total_views`
/// uniform angles on [0, 180) degrees.
struct CtGeometry {
  std::size_t n = 64;
  std::size_t n_views = 23;
  std::size_t total_views = 180;
  std::size_t detector_bins = 0;  // 0: ceil(n * sqrt(2))
  double pixel_pitch = 1.0 / 16.0;
  double detector_pitch = 0.0;    // 0: pixel_pitch

  static CtGeometry desk(std::size_t n, std::size_t n_views);

  std::size_t bins() const;
  double bin_pitch() const;
  std::vector<double> angles() const;  // radians
  /// Throws ConfigError for an empty or degenerate geometry.
  void validate() const;
};

/// Sparse system matrix of exact ray / pixel intersection lengths; row index
/// is view * bins + bin, column index is row-major pixel index.
std::shared_ptr<SparseMatrixOperator> build_radon(const CtGeometry& geom);

struct CtMeasurement {
  Vec y;        // post-log sinogram
  Vec weights;  // diagonal of W
  Vec counts;   // pre-log counts p
};

/// p^2 / (p + sigma^2).
double ct_weight(double p, double sigma2);

/// Poisson-Gaussian transmission model. In noiseless mode p = I0 exp(-Ax),
/// y = Ax and W = diag(p); otherwise counts are clamped at 1 before the log.
CtMeasurement simulate_ct(const ImageVector& x, const LinearOperator& a, double incident, double sigma2,
                          std::uint64_t seed, bool noiseless = false);

/// M_f^{-1} A^T W y clipped to [0, 1].
ImageVector backprojection_init(const QuadraticDataFit& f, Shape shape);

// ---------------------------------------------------------------- deblurring

std::shared_ptr<CircularConvolutionOperator> build_blur(Shape shape, const Filter2d& kernel);

/// The same circulant operator as an explicit sparse matrix.
std::shared_ptr<SparseMatrixOperator> blur_matrix(Shape shape, const Filter2d& kernel);

/// Normalized isotropic Gaussian kernel of odd size.
Filter2d gaussian_kernel(std::size_t size, double sigma);

// ---------------------------------------------------------------- metrics

/// sqrt(sum_{j in roi} (a_j - b_j)^2 / |roi|); the whole image when mask is absent.
double rmse(const ImageVector& x_star, const ImageVector& x_true,
            const std::optional<std::vector<bool>>& roi = std::nullopt);

/// 10 log10(peak^2 / MSE); +inf for identical images.
double psnr(const ImageVector& x_star, const ImageVector& x_true, double peak = 1.0);

}  // namespace momnet
