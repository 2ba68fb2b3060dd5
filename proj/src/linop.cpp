#include "momnet/linop.hpp"

#include <algorithm>
#include <cmath>

#include "momnet/error.hpp"

namespace momnet {

Vec LinearOperator::forward(std::span<const double> x) const {
  Vec out(rows());
  apply(x, out);
  return out;
}

Vec LinearOperator::adjoint(std::span<const double> v) const {
  Vec out(cols());
  apply_adjoint(v, out);
  return out;
}

void LinearOperator::check_forward(std::size_t in, std::size_t out) const {
  require_dims(in, cols(), "operator input");
  require_dims(out, rows(), "operator output");
}

void LinearOperator::check_adjoint(std::size_t in, std::size_t out) const {
  require_dims(in, rows(), "adjoint input");
  require_dims(out, cols(), "adjoint output");
}

Vec apply_forward(const LinearOperator& op, const ImageVector& x) { return op.forward(x.view()); }

// ---------------------------------------------------------------- sparse

SparseMatrixOperator::SparseMatrixOperator(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets)
    : rows_(rows), cols_(cols) {
  for (const auto& t : triplets) {
    if (t.row >= rows || t.col >= cols) throw DimensionError("SparseMatrixOperator: triplet index out of range");
    if (!std::isfinite(t.value)) throw NumericError("SparseMatrixOperator: non-finite entry");
  }
  std::sort(triplets.begin(), triplets.end(),
            [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  row_ptr_.assign(rows + 1, 0);
  for (std::size_t i = 0; i < triplets.size(); ++i) {
    const auto& t = triplets[i];
    if (!col_idx_.empty() && i > 0 && triplets[i - 1].row == t.row && triplets[i - 1].col == t.col) {
      values_.back() += t.value;
      continue;
    }
    col_idx_.push_back(t.col);
    values_.push_back(t.value);
    ++row_ptr_[t.row + 1];
  }
  for (std::size_t r = 0; r < rows; ++r) row_ptr_[r + 1] += row_ptr_[r];
}

template <bool Abs>
void SparseMatrixOperator::multiply(std::span<const double> x, std::span<double> out) const {
  check_forward(x.size(), out.size());
  for (std::size_t r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const double a = Abs ? std::abs(values_[k]) : values_[k];
      s += a * x[col_idx_[k]];
    }
    out[r] = s;
  }
}

template <bool Abs>
void SparseMatrixOperator::multiply_transpose(std::span<const double> v, std::span<double> out) const {
  check_adjoint(v.size(), out.size());
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    const double vr = v[r];
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const double a = Abs ? std::abs(values_[k]) : values_[k];
      out[col_idx_[k]] += a * vr;
    }
  }
}

void SparseMatrixOperator::apply(std::span<const double> x, std::span<double> out) const { multiply<false>(x, out); }
void SparseMatrixOperator::apply_adjoint(std::span<const double> v, std::span<double> out) const {
  multiply_transpose<false>(v, out);
}
void SparseMatrixOperator::apply_abs(std::span<const double> x, std::span<double> out) const {
  multiply<true>(x, out);
}
void SparseMatrixOperator::apply_abs_adjoint(std::span<const double> v, std::span<double> out) const {
  multiply_transpose<true>(v, out);
}

std::vector<Triplet> SparseMatrixOperator::triplets() const {
  std::vector<Triplet> out;
  out.reserve(values_.size());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) out.push_back({r, col_idx_[k], values_[k]});
  }
  return out;
}

bool SparseMatrixOperator::all_nonnegative() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v >= 0.0; });
}

// ---------------------------------------------------------------- dense

DenseMatrixOperator::DenseMatrixOperator(std::size_t rows, std::size_t cols, Vec values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  require_dims(values_.size(), rows * cols, "DenseMatrixOperator");
  if (!all_finite(values_)) throw NumericError("DenseMatrixOperator: non-finite entry");
}

void DenseMatrixOperator::apply(std::span<const double> x, std::span<double> out) const {
  check_forward(x.size(), out.size());
  for (std::size_t r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) s += values_[r * cols_ + c] * x[c];
    out[r] = s;
  }
}

void DenseMatrixOperator::apply_adjoint(std::span<const double> v, std::span<double> out) const {
  check_adjoint(v.size(), out.size());
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) out[c] += values_[r * cols_ + c] * v[r];
  }
}

void DenseMatrixOperator::apply_abs(std::span<const double> x, std::span<double> out) const {
  check_forward(x.size(), out.size());
  for (std::size_t r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) s += std::abs(values_[r * cols_ + c]) * x[c];
    out[r] = s;
  }
}

void DenseMatrixOperator::apply_abs_adjoint(std::span<const double> v, std::span<double> out) const {
  check_adjoint(v.size(), out.size());
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) out[c] += std::abs(values_[r * cols_ + c]) * v[r];
  }
}

// ---------------------------------------------------------------- convolution

CircularConvolutionOperator::CircularConvolutionOperator(Shape shape, Filter2d kernel)
    : shape_(shape), kernel_(std::move(kernel)), abs_kernel_(kernel_) {
  if (!all_finite(kernel_.taps)) throw NumericError("CircularConvolutionOperator: non-finite kernel");
  for (double& t : abs_kernel_.taps) t = std::abs(t);
}

void CircularConvolutionOperator::apply(std::span<const double> x, std::span<double> out) const {
  check_forward(x.size(), out.size());
  convolve(kernel_, x.data(), out.data(), shape_);
}

void CircularConvolutionOperator::apply_adjoint(std::span<const double> v, std::span<double> out) const {
  check_adjoint(v.size(), out.size());
  correlate(kernel_, v.data(), out.data(), shape_);
}

void CircularConvolutionOperator::apply_abs(std::span<const double> x, std::span<double> out) const {
  check_forward(x.size(), out.size());
  convolve(abs_kernel_, x.data(), out.data(), shape_);
}

void CircularConvolutionOperator::apply_abs_adjoint(std::span<const double> v, std::span<double> out) const {
  check_adjoint(v.size(), out.size());
  correlate(abs_kernel_, v.data(), out.data(), shape_);
}

// ---------------------------------------------------------------- identity

void IdentityOperator::apply(std::span<const double> x, std::span<double> out) const {
  check_forward(x.size(), out.size());
  std::copy(x.begin(), x.end(), out.begin());
}
void IdentityOperator::apply_adjoint(std::span<const double> v, std::span<double> out) const { apply(v, out); }
void IdentityOperator::apply_abs(std::span<const double> x, std::span<double> out) const { apply(x, out); }
void IdentityOperator::apply_abs_adjoint(std::span<const double> v, std::span<double> out) const {
  apply(v, out);
}

LinearOperatorPtr make_zero_operator(std::size_t rows, std::size_t cols) {
  return std::make_shared<SparseMatrixOperator>(rows, cols, std::vector<Triplet>{});
}

Vec to_dense(const LinearOperator& op) {
  const std::size_t m = op.rows();
  const std::size_t n = op.cols();
  Vec dense(m * n, 0.0);
  Vec e(n, 0.0);
  Vec col(m);
  for (std::size_t c = 0; c < n; ++c) {
    e[c] = 1.0;
    op.apply(e, col);
    e[c] = 0.0;
    for (std::size_t r = 0; r < m; ++r) dense[r * n + c] = col[r];
  }
  return dense;
}

}  // namespace momnet
