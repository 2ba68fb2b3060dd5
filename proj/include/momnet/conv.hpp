#pragma once

#include <cstddef>
#include <vector>

#include "momnet/image.hpp"

namespace momnet {

/// Square 2-D filter with `size` x `size` taps stored row-major. Tap (a, b)
/// sits at spatial offset (a - origin, b - origin) with origin = (size-1)/2, so
/// the Kronecker delta is the single unit tap at (origin, origin).
struct Filter2d {
  std::size_t size = 1;
  Vec taps{1.0};

  Filter2d() = default;
  Filter2d(std::size_t size, Vec taps);

  static Filter2d zeros(std::size_t size);
  static Filter2d delta(std::size_t size);

  std::size_t support() const { return size * size; }  // R
  std::ptrdiff_t origin() const { return static_cast<std::ptrdiff_t>((size - 1) / 2); }
  double operator()(std::size_t a, std::size_t b) const { return taps[a * size + b]; }

  friend bool operator==(const Filter2d&, const Filter2d&) = default;
};

using FilterBank = std::vector<Filter2d>;

// All routines below use circular boundary conditions on an H x W grid.

/// out[n] = sum_r h[r] u[n - off(r)]  (circular convolution, h ⊛ u).
void convolve(const Filter2d& h, const double* u, double* out, Shape shape);
/// out[n] = sum_r h[r] v[n + off(r)]; the exact adjoint of convolve. This is
/// flip(h) ⊛ v with the flip taken about the filter origin.
void correlate(const Filter2d& h, const double* v, double* out, Shape shape);
/// Accumulating variants: out += ...
void convolve_add(const Filter2d& h, const double* u, double* out, Shape shape);
void correlate_add(const Filter2d& h, const double* v, double* out, Shape shape);

/// d/dh of <g, h ⊛ u>: grad[r] += sum_n g[n] u[n - off(r)].
void convolve_filter_grad(const double* g, const double* u, Shape shape, Filter2d& grad);
/// d/dh of <g, correlate(h, v)>: grad[r] += sum_n g[n] v[n + off(r)].
void correlate_filter_grad(const double* g, const double* v, Shape shape, Filter2d& grad);

ImageVector convolve(const Filter2d& h, const ImageVector& u);
ImageVector correlate(const Filter2d& h, const ImageVector& v);

/// Reversal along each spatial dimension.
Filter2d flip(const Filter2d& h);

}  // namespace momnet
