#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace momnet {

using Vec = std::vector<double>;

struct Shape {
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t size() const { return height * width; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

/// Real-valued image stored row-major. Construction checks that the data
/// length matches the shape and that every entry is finite.
class ImageVector {
public:
  ImageVector() = default;
  explicit ImageVector(Shape shape);  // zero-filled
  ImageVector(Shape shape, Vec data);

  /// A 1 x n image; convenient for small vector-valued problems.
  static ImageVector column(Vec data);

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  std::size_t height() const { return shape_.height; }
  std::size_t width() const { return shape_.width; }

  const Vec& data() const { return data_; }
  Vec& data() { return data_; }
  std::span<const double> view() const { return data_; }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double at(std::size_t row, std::size_t col) const { return data_[row * shape_.width + col]; }
  double& at(std::size_t row, std::size_t col) { return data_[row * shape_.width + col]; }

  bool all_finite() const;

  friend bool operator==(const ImageVector&, const ImageVector&) = default;

private:
  Shape shape_;
  Vec data_;
};

void require_same_shape(const ImageVector& a, const ImageVector& b, const char* what);

// Small dense vector kernels shared across modules.
double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);
double norm(std::span<const double> a);
double squared_distance(std::span<const double> a, std::span<const double> b);
double distance(std::span<const double> a, std::span<const double> b);
bool all_finite(std::span<const double> a);

ImageVector operator+(const ImageVector& a, const ImageVector& b);
ImageVector operator-(const ImageVector& a, const ImageVector& b);
ImageVector operator*(double s, const ImageVector& a);

}  // namespace momnet
