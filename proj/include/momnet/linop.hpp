#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "momnet/conv.hpp"
#include "momnet/image.hpp"

namespace momnet {

/// Real linear map A: R^cols -> R^rows with its adjoint. Implementations also
/// expose |A| (entrywise absolute values), which the diagonal majorizer needs.
class LinearOperator {
public:
  virtual ~LinearOperator() = default;

  virtual std::size_t rows() const = 0;
  virtual std::size_t cols() const = 0;

  virtual void apply(std::span<const double> x, std::span<double> out) const = 0;
  virtual void apply_adjoint(std::span<const double> v, std::span<double> out) const = 0;
  virtual void apply_abs(std::span<const double> x, std::span<double> out) const = 0;
  virtual void apply_abs_adjoint(std::span<const double> v, std::span<double> out) const = 0;

  Vec forward(std::span<const double> x) const;
  Vec adjoint(std::span<const double> v) const;

protected:
  void check_forward(std::size_t in, std::size_t out) const;
  void check_adjoint(std::size_t in, std::size_t out) const;
};

using LinearOperatorPtr = std::shared_ptr<const LinearOperator>;

/// Throws DimensionError when x has the wrong length.
Vec apply_forward(const LinearOperator& op, const ImageVector& x);

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Compressed sparse row matrix. Duplicate (row, col) triplets are summed.
class SparseMatrixOperator final : public LinearOperator {
public:
  SparseMatrixOperator(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets);

  std::size_t rows() const override { return rows_; }
  std::size_t cols() const override { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  void apply(std::span<const double> x, std::span<double> out) const override;
  void apply_adjoint(std::span<const double> v, std::span<double> out) const override;
  void apply_abs(std::span<const double> x, std::span<double> out) const override;
  void apply_abs_adjoint(std::span<const double> v, std::span<double> out) const override;

  std::vector<Triplet> triplets() const;
  bool all_nonnegative() const;

private:
  template <bool Abs>
  void multiply(std::span<const double> x, std::span<double> out) const;
  template <bool Abs>
  void multiply_transpose(std::span<const double> v, std::span<double> out) const;

  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> col_idx_;
  Vec values_;
};

/// Row-major dense matrix.
class DenseMatrixOperator final : public LinearOperator {
public:
  DenseMatrixOperator(std::size_t rows, std::size_t cols, Vec values);

  std::size_t rows() const override { return rows_; }
  std::size_t cols() const override { return cols_; }
  double at(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  void apply(std::span<const double> x, std::span<double> out) const override;
  void apply_adjoint(std::span<const double> v, std::span<double> out) const override;
  void apply_abs(std::span<const double> x, std::span<double> out) const override;
  void apply_abs_adjoint(std::span<const double> v, std::span<double> out) const override;

private:
  std::size_t rows_;
  std::size_t cols_;
  Vec values_;
};

/// Circular convolution with a 2-D kernel on a fixed image shape; the adjoint
/// is correlation with the same kernel.
class CircularConvolutionOperator final : public LinearOperator {
public:
  CircularConvolutionOperator(Shape shape, Filter2d kernel);

  std::size_t rows() const override { return shape_.size(); }
  std::size_t cols() const override { return shape_.size(); }
  const Shape& shape() const { return shape_; }
  const Filter2d& kernel() const { return kernel_; }

  void apply(std::span<const double> x, std::span<double> out) const override;
  void apply_adjoint(std::span<const double> v, std::span<double> out) const override;
  void apply_abs(std::span<const double> x, std::span<double> out) const override;
  void apply_abs_adjoint(std::span<const double> v, std::span<double> out) const override;

private:
  Shape shape_;
  Filter2d kernel_;
  Filter2d abs_kernel_;
};

class IdentityOperator final : public LinearOperator {
public:
  explicit IdentityOperator(std::size_t n) : n_(n) {}

  std::size_t rows() const override { return n_; }
  std::size_t cols() const override { return n_; }

  void apply(std::span<const double> x, std::span<double> out) const override;
  void apply_adjoint(std::span<const double> v, std::span<double> out) const override;
  void apply_abs(std::span<const double> x, std::span<double> out) const override;
  void apply_abs_adjoint(std::span<const double> v, std::span<double> out) const override;

private:
  std::size_t n_;
};

/// The zero map R^cols -> R^rows (an empty sparse matrix).
LinearOperatorPtr make_zero_operator(std::size_t rows, std::size_t cols);

/// Materializes op as a dense row-major rows x cols matrix (small instances only).
Vec to_dense(const LinearOperator& op);

}  // namespace momnet
