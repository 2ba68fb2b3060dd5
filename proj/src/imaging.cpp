#include "momnet/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "momnet/error.hpp"

namespace momnet {

namespace {

struct Ellipse {
  double value;
  double a;
  double b;
  double x0;
  double y0;
  double phi_deg;
};

ImageVector rasterize(std::size_t n, const std::vector<Ellipse>& ellipses) {
  ImageVector img(Shape{n, n});
  const double nd = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / nd;
    for (std::size_t j = 0; j < n; ++j) {
      const double x = (2.0 * static_cast<double>(j) + 1.0) / nd - 1.0;
      double v = 0.0;
      for (const auto& e : ellipses) {
        const double phi = e.phi_deg * std::numbers::pi / 180.0;
        const double c = std::cos(phi);
        const double s = std::sin(phi);
        const double xr = (x - e.x0) * c + (y - e.y0) * s;
        const double yr = -(x - e.x0) * s + (y - e.y0) * c;
        if ((xr * xr) / (e.a * e.a) + (yr * yr) / (e.b * e.b) <= 1.0) v += e.value;
      }
      img.at(i, j) = std::clamp(v, 0.0, 1.0);
    }
  }
  return img;
}

// Length of the line {p : <p, (c, s)> = t} inside [x0, x1) x [y0, y1).
double chord(double c, double s, double t, double x0, double x1, double y0, double y1) {
  constexpr double eps = 1e-14;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  // Points: x = t c - u s, y = t s + u c.
  const auto clip = [&](double base, double slope, double a, double b) {
    if (std::abs(slope) < eps) return base >= a && base < b;
    double u0 = (a - base) / slope;
    double u1 = (b - base) / slope;
    if (u0 > u1) std::swap(u0, u1);
    lo = std::max(lo, u0);
    hi = std::min(hi, u1);
    return true;
  };
  if (!clip(t * c, -s, x0, x1)) return 0.0;
  if (!clip(t * s, c, y0, y1)) return 0.0;
  return std::max(0.0, hi - lo);
}

}  // namespace

ImageVector shepp_logan(std::size_t n) {
  if (n < 16) throw ConfigError("shepp_logan: n must be >= 16");
  static const std::vector<Ellipse> kEllipses = {
      {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},       {-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0},
      {-0.2, 0.11, 0.31, 0.22, 0.0, -18.0},   {-0.2, 0.16, 0.41, -0.22, 0.0, 18.0},
      {0.1, 0.21, 0.25, 0.0, 0.35, 0.0},      {0.1, 0.046, 0.046, 0.0, 0.1, 0.0},
      {0.1, 0.046, 0.046, 0.0, -0.1, 0.0},    {0.1, 0.046, 0.023, -0.08, -0.605, 0.0},
      {0.1, 0.023, 0.023, 0.0, -0.606, 0.0},  {0.1, 0.023, 0.046, 0.06, -0.605, 0.0},
  };
  return rasterize(n, kEllipses);
}

ImageVector random_ellipse_phantom(std::size_t n, std::uint64_t seed) {
  if (n < 16) throw ConfigError("random_ellipse_phantom: n must be >= 16");
  std::mt19937_64 rng(seed);
  const auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };

  const double a = uni(0.6, 0.75);
  const double b = uni(0.8, 0.93);
  const double tilt = uni(-10.0, 10.0);
  const double skull = uni(0.04, 0.08);
  std::vector<Ellipse> ellipses = {
      {1.0, a, b, 0.0, 0.0, tilt},
      {-0.8, a - skull, b - skull, 0.0, uni(-0.03, 0.0), tilt},
  };
  const int count = static_cast<int>(uni(4.0, 9.0));
  for (int k = 0; k < count; ++k) {
    const double r = uni(0.0, 0.6);
    const double ang = uni(0.0, 2.0 * std::numbers::pi);
    const double x0 = r * (a - skull) * std::cos(ang);
    const double y0 = r * (b - skull) * std::sin(ang);
    const double sign = uni(0.0, 1.0) < 0.3 ? -1.0 : 1.0;
    ellipses.push_back({sign * uni(0.05, 0.25), uni(0.03, 0.25), uni(0.03, 0.3), x0, y0, uni(-90.0, 90.0)});
  }
  return rasterize(n, ellipses);
}

// ---------------------------------------------------------------- CT

CtGeometry CtGeometry::desk(std::size_t n, std::size_t n_views) {
  CtGeometry g;
  g.n = n;
  g.n_views = n_views;
  g.pixel_pitch = 4.0 / static_cast<double>(n);
  return g;
}

std::size_t CtGeometry::bins() const {
  if (detector_bins > 0) return detector_bins;
  return static_cast<std::size_t>(std::ceil(static_cast<double>(n) * std::numbers::sqrt2 - 1e-9));
}

double CtGeometry::bin_pitch() const { return detector_pitch > 0.0 ? detector_pitch : pixel_pitch; }

std::vector<double> CtGeometry::angles() const {
  std::vector<double> out;
  out.reserve(n_views);
  for (std::size_t k = 0; k < n_views; ++k) {
    const std::size_t idx = k * total_views / n_views;
    out.push_back(static_cast<double>(idx) * std::numbers::pi / static_cast<double>(total_views));
  }
  return out;
}

void CtGeometry::validate() const {
  if (n == 0) throw ConfigError("CtGeometry: empty image");
  if (total_views == 0 || n_views == 0) throw ConfigError("CtGeometry: n_views must be >= 1");
  if (n_views > total_views) throw ConfigError("CtGeometry: n_views exceeds total_views");
  if (!(pixel_pitch > 0.0) || !std::isfinite(pixel_pitch)) throw ConfigError("CtGeometry: pixel pitch must be > 0");
  if (detector_pitch < 0.0 || !std::isfinite(detector_pitch)) throw ConfigError("CtGeometry: bad detector pitch");
  const double coverage = static_cast<double>(bins()) * bin_pitch();
  const double diagonal = static_cast<double>(n) * pixel_pitch * std::numbers::sqrt2;
  if (coverage < diagonal * (1.0 - 1e-12)) throw ConfigError("CtGeometry: detector does not cover the image diagonal");
}

std::shared_ptr<SparseMatrixOperator> build_radon(const CtGeometry& geom) {
  geom.validate();
  const std::size_t n = geom.n;
  const std::size_t bins = geom.bins();
  const double p = geom.pixel_pitch;
  const double dp = geom.bin_pitch();
  const double half = static_cast<double>(n) / 2.0;
  const double centre = (static_cast<double>(bins) - 1.0) / 2.0;
  const auto angles = geom.angles();

  std::vector<Triplet> triplets;
  for (std::size_t v = 0; v < angles.size(); ++v) {
    const double c = std::cos(angles[v]);
    const double s = std::sin(angles[v]);
    const double reach = 0.5 * p * (std::abs(c) + std::abs(s));
    for (std::size_t i = 0; i < n; ++i) {
      const double y0 = (half - static_cast<double>(i) - 1.0) * p;
      const double y1 = y0 + p;
      for (std::size_t j = 0; j < n; ++j) {
        const double x0 = (static_cast<double>(j) - half) * p;
        const double x1 = x0 + p;
        const double proj = 0.5 * (x0 + x1) * c + 0.5 * (y0 + y1) * s;
        const double b_lo = std::ceil((proj - reach) / dp + centre - 1e-9);
        const double b_hi = std::floor((proj + reach) / dp + centre + 1e-9);
        for (double bf = std::max(b_lo, 0.0); bf <= std::min(b_hi, static_cast<double>(bins) - 1.0); bf += 1.0) {
          const double t = (bf - centre) * dp;
          const double len = chord(c, s, t, x0, x1, y0, y1);
          if (len > 1e-12 * p) {
            triplets.push_back({v * bins + static_cast<std::size_t>(bf), i * n + j, len});
          }
        }
      }
    }
  }
  return std::make_shared<SparseMatrixOperator>(angles.size() * bins, n * n, std::move(triplets));
}

double ct_weight(double p, double sigma2) { return p * p / (p + sigma2); }

CtMeasurement simulate_ct(const ImageVector& x, const LinearOperator& a, double incident, double sigma2,
                          std::uint64_t seed, bool noiseless) {
  if (!(incident > 0.0) || !std::isfinite(incident)) throw ConfigError("simulate_ct: incident must be > 0");
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) throw ConfigError("simulate_ct: sigma2 must be >= 0");
  require_dims(x.size(), a.cols(), "simulate_ct");
  const Vec ax = a.forward(x.view());
  CtMeasurement m;
  m.y.resize(ax.size());
  m.weights.resize(ax.size());
  m.counts.resize(ax.size());
  if (noiseless) {
    for (std::size_t i = 0; i < ax.size(); ++i) {
      m.counts[i] = incident * std::exp(-ax[i]);
      m.y[i] = ax[i];
      m.weights[i] = m.counts[i];
    }
    return m;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(sigma2));
  for (std::size_t i = 0; i < ax.size(); ++i) {
    std::poisson_distribution<long long> poisson(incident * std::exp(-ax[i]));
    double p = static_cast<double>(poisson(rng));
    if (sigma2 > 0.0) p += gauss(rng);
    p = std::max(p, 1.0);
    m.counts[i] = p;
    m.y[i] = std::log(incident / p);
    m.weights[i] = ct_weight(p, sigma2);
  }
  return m;
}

ImageVector backprojection_init(const QuadraticDataFit& f, Shape shape) {
  require_dims(shape.size(), f.image_size(), "backprojection_init");
  const DiagonalMajorizer m = diag_majorizer(f);
  Vec wy = f.measurements();
  for (std::size_t i = 0; i < wy.size(); ++i) wy[i] *= f.weights()[i];
  const Vec bp = f.op().adjoint(wy);
  ImageVector out(shape);
  for (std::size_t j = 0; j < bp.size(); ++j) out[j] = std::clamp(bp[j] / m.diag()[j], 0.0, 1.0);
  return out;
}

// ---------------------------------------------------------------- deblurring

std::shared_ptr<CircularConvolutionOperator> build_blur(Shape shape, const Filter2d& kernel) {
  return std::make_shared<CircularConvolutionOperator>(shape, kernel);
}

std::shared_ptr<SparseMatrixOperator> blur_matrix(Shape shape, const Filter2d& kernel) {
  const auto h = static_cast<std::ptrdiff_t>(shape.height);
  const auto w = static_cast<std::ptrdiff_t>(shape.width);
  const std::ptrdiff_t o = kernel.origin();
  std::vector<Triplet> triplets;
  for (std::ptrdiff_t i = 0; i < h; ++i) {
    for (std::ptrdiff_t j = 0; j < w; ++j) {
      for (std::size_t a = 0; a < kernel.size; ++a) {
        for (std::size_t b = 0; b < kernel.size; ++b) {
          const double v = kernel(a, b);
          if (v == 0.0) continue;
          const std::ptrdiff_t si = ((i - (static_cast<std::ptrdiff_t>(a) - o)) % h + h) % h;
          const std::ptrdiff_t sj = ((j - (static_cast<std::ptrdiff_t>(b) - o)) % w + w) % w;
          triplets.push_back({static_cast<std::size_t>(i * w + j), static_cast<std::size_t>(si * w + sj), v});
        }
      }
    }
  }
  return std::make_shared<SparseMatrixOperator>(shape.size(), shape.size(), std::move(triplets));
}

Filter2d gaussian_kernel(std::size_t size, double sigma) {
  if (size % 2 == 0) throw ConfigError("gaussian_kernel: size must be odd");
  if (!(sigma > 0.0)) throw ConfigError("gaussian_kernel: sigma must be > 0");
  Filter2d k = Filter2d::zeros(size);
  const auto o = static_cast<double>(k.origin());
  double total = 0.0;
  for (std::size_t a = 0; a < size; ++a) {
    for (std::size_t b = 0; b < size; ++b) {
      const double da = static_cast<double>(a) - o;
      const double db = static_cast<double>(b) - o;
      const double v = std::exp(-(da * da + db * db) / (2.0 * sigma * sigma));
      k.taps[a * size + b] = v;
      total += v;
    }
  }
  for (double& t : k.taps) t /= total;
  return k;
}

// ---------------------------------------------------------------- metrics

double rmse(const ImageVector& x_star, const ImageVector& x_true, const std::optional<std::vector<bool>>& roi) {
  require_same_shape(x_star, x_true, "rmse");
  if (roi) require_dims(roi->size(), x_true.size(), "rmse mask");
  double s = 0.0;
  std::size_t count = 0;
  for (std::size_t j = 0; j < x_true.size(); ++j) {
    if (roi && !(*roi)[j]) continue;
    const double d = x_star[j] - x_true[j];
    s += d * d;
    ++count;
  }
  if (count == 0) throw ConfigError("rmse: empty region of interest");
  return std::sqrt(s / static_cast<double>(count));
}

double psnr(const ImageVector& x_star, const ImageVector& x_true, double peak) {
  require_same_shape(x_star, x_true, "psnr");
  if (!(peak > 0.0)) throw ConfigError("psnr: peak must be > 0");
  const double mse = squared_distance(x_star.view(), x_true.view()) / static_cast<double>(x_true.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

}  // namespace momnet
