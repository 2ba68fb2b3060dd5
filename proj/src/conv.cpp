#include "momnet/conv.hpp"

#include <algorithm>
#include <cmath>

#include "momnet/error.hpp"

namespace momnet {
namespace {

std::size_t wrap(std::ptrdiff_t v, std::size_t n) {
  const auto m = static_cast<std::ptrdiff_t>(n);
  std::ptrdiff_t r = v % m;
  return static_cast<std::size_t>(r < 0 ? r + m : r);
}

// out[i][j] += scale * src[i + sy][j + sx]  (indices circular)
void shifted_accumulate(double scale, const double* src, double* out, Shape shape, std::ptrdiff_t sy,
                        std::ptrdiff_t sx) {
  const std::size_t H = shape.height;
  const std::size_t W = shape.width;
  const std::size_t cx = wrap(sx, W);
  const std::size_t split = W - cx;
  for (std::size_t i = 0; i < H; ++i) {
    const double* s = src + wrap(static_cast<std::ptrdiff_t>(i) + sy, H) * W;
    double* o = out + i * W;
    for (std::size_t j = 0; j < split; ++j) o[j] += scale * s[j + cx];
    for (std::size_t j = split; j < W; ++j) o[j] += scale * s[j + cx - W];
  }
}

// sum_{i,j} g[i][j] * src[i + sy][j + sx]
double shifted_dot(const double* g, const double* src, Shape shape, std::ptrdiff_t sy, std::ptrdiff_t sx) {
  const std::size_t H = shape.height;
  const std::size_t W = shape.width;
  const std::size_t cx = wrap(sx, W);
  const std::size_t split = W - cx;
  double acc = 0.0;
  for (std::size_t i = 0; i < H; ++i) {
    const double* s = src + wrap(static_cast<std::ptrdiff_t>(i) + sy, H) * W;
    const double* gi = g + i * W;
    double row = 0.0;
    for (std::size_t j = 0; j < split; ++j) row += gi[j] * s[j + cx];
    for (std::size_t j = split; j < W; ++j) row += gi[j] * s[j + cx - W];
    acc += row;
  }
  return acc;
}

}  // namespace

Filter2d::Filter2d(std::size_t size_, Vec taps_) : size(size_), taps(std::move(taps_)) {
  if (size == 0) throw ConfigError("Filter2d: size must be positive");
  require_dims(taps.size(), size * size, "Filter2d taps");
}

Filter2d Filter2d::zeros(std::size_t size) { return Filter2d(size, Vec(size * size, 0.0)); }

Filter2d Filter2d::delta(std::size_t size) {
  Filter2d f = zeros(size);
  const auto o = static_cast<std::size_t>(f.origin());
  f.taps[o * size + o] = 1.0;
  return f;
}

void convolve_add(const Filter2d& h, const double* u, double* out, Shape shape) {
  const auto o = h.origin();
  for (std::size_t a = 0; a < h.size; ++a) {
    for (std::size_t b = 0; b < h.size; ++b) {
      const double w = h(a, b);
      if (w == 0.0) continue;
      const auto dy = static_cast<std::ptrdiff_t>(a) - o;
      const auto dx = static_cast<std::ptrdiff_t>(b) - o;
      shifted_accumulate(w, u, out, shape, -dy, -dx);
    }
  }
}

void correlate_add(const Filter2d& h, const double* v, double* out, Shape shape) {
  const auto o = h.origin();
  for (std::size_t a = 0; a < h.size; ++a) {
    for (std::size_t b = 0; b < h.size; ++b) {
      const double w = h(a, b);
      if (w == 0.0) continue;
      const auto dy = static_cast<std::ptrdiff_t>(a) - o;
      const auto dx = static_cast<std::ptrdiff_t>(b) - o;
      shifted_accumulate(w, v, out, shape, dy, dx);
    }
  }
}

void convolve(const Filter2d& h, const double* u, double* out, Shape shape) {
  std::fill(out, out + shape.size(), 0.0);
  convolve_add(h, u, out, shape);
}

void correlate(const Filter2d& h, const double* v, double* out, Shape shape) {
  std::fill(out, out + shape.size(), 0.0);
  correlate_add(h, v, out, shape);
}

void convolve_filter_grad(const double* g, const double* u, Shape shape, Filter2d& grad) {
  const auto o = grad.origin();
  for (std::size_t a = 0; a < grad.size; ++a) {
    for (std::size_t b = 0; b < grad.size; ++b) {
      const auto dy = static_cast<std::ptrdiff_t>(a) - o;
      const auto dx = static_cast<std::ptrdiff_t>(b) - o;
      grad.taps[a * grad.size + b] += shifted_dot(g, u, shape, -dy, -dx);
    }
  }
}

void correlate_filter_grad(const double* g, const double* v, Shape shape, Filter2d& grad) {
  const auto o = grad.origin();
  for (std::size_t a = 0; a < grad.size; ++a) {
    for (std::size_t b = 0; b < grad.size; ++b) {
      const auto dy = static_cast<std::ptrdiff_t>(a) - o;
      const auto dx = static_cast<std::ptrdiff_t>(b) - o;
      grad.taps[a * grad.size + b] += shifted_dot(g, v, shape, dy, dx);
    }
  }
}

ImageVector convolve(const Filter2d& h, const ImageVector& u) {
  ImageVector out(u.shape());
  convolve(h, u.data().data(), out.data().data(), u.shape());
  return out;
}

ImageVector correlate(const Filter2d& h, const ImageVector& v) {
  ImageVector out(v.shape());
  correlate(h, v.data().data(), out.data().data(), v.shape());
  return out;
}

Filter2d flip(const Filter2d& h) {
  Filter2d out = Filter2d::zeros(h.size);
  const std::size_t s = h.size;
  for (std::size_t a = 0; a < s; ++a) {
    for (std::size_t b = 0; b < s; ++b) out.taps[(s - 1 - a) * s + (s - 1 - b)] = h(a, b);
  }
  return out;
}

}  // namespace momnet
