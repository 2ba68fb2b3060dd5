#include "momnet/image.hpp"

#include <cmath>
#include <string>

#include "momnet/error.hpp"

namespace momnet {

ImageVector::ImageVector(Shape shape) : shape_(shape), data_(shape.size(), 0.0) {}

ImageVector::ImageVector(Shape shape, Vec data) : shape_(shape), data_(std::move(data)) {
  require_dims(data_.size(), shape_.size(), "ImageVector");
  if (!momnet::all_finite(data_)) throw NumericError("ImageVector: non-finite entry");
}

ImageVector ImageVector::column(Vec data) {
  const Shape shape{1, data.size()};
  return ImageVector(shape, std::move(data));
}

bool ImageVector::all_finite() const { return momnet::all_finite(data_); }

void require_same_shape(const ImageVector& a, const ImageVector& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(what) + ": shape mismatch (" + std::to_string(a.height()) + "x" +
                         std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                         std::to_string(b.width()) + ")");
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_dims(b.size(), a.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double squared_norm(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(squared_norm(a)); }

double squared_distance(std::span<const double> a, std::span<const double> b) {
  require_dims(b.size(), a.size(), "distance");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

bool all_finite(std::span<const double> a) {
  for (double v : a) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

ImageVector operator+(const ImageVector& a, const ImageVector& b) {
  require_same_shape(a, b, "operator+");
  ImageVector out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

ImageVector operator-(const ImageVector& a, const ImageVector& b) {
  require_same_shape(a, b, "operator-");
  ImageVector out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

ImageVector operator*(double s, const ImageVector& a) {
  ImageVector out = a;
  for (double& v : out.data()) v *= s;
  return out;
}

}  // namespace momnet
