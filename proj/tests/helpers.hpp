#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "momnet/datafit.hpp"
#include "momnet/image.hpp"
#include "momnet/linop.hpp"

namespace testing {

using momnet::Vec;

inline Vec random_vec(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Vec v(n);
  for (double& x : v) x = d(rng);
  return v;
}

inline momnet::ImageVector random_image(momnet::Shape s, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  return momnet::ImageVector(s, random_vec(s.size(), rng, lo, hi));
}

inline Eigen::MatrixXd dense(const momnet::LinearOperator& op) {
  const Vec d = momnet::to_dense(op);
  Eigen::MatrixXd m(op.rows(), op.cols());
  for (std::size_t r = 0; r < op.rows(); ++r)
    for (std::size_t c = 0; c < op.cols(); ++c) m(r, c) = d[r * op.cols() + c];
  return m;
}

inline std::shared_ptr<momnet::DenseMatrixOperator> matrix(std::size_t rows, std::size_t cols, Vec values) {
  return std::make_shared<momnet::DenseMatrixOperator>(rows, cols, std::move(values));
}

// Random sparse nonnegative matrix with the given density.
inline std::shared_ptr<momnet::SparseMatrixOperator> random_sparse(std::size_t rows, std::size_t cols, double density,
                                                                   std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<momnet::Triplet> t;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      if (u(rng) < density) t.push_back({r, c, u(rng)});
  return std::make_shared<momnet::SparseMatrixOperator>(rows, cols, std::move(t));
}

inline double min_eigenvalue(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  return es.eigenvalues().minCoeff();
}

inline double max_eigenvalue(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  return es.eigenvalues().maxCoeff();
}

inline double rel_diff(const Vec& a, const Vec& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

inline double max_abs_diff(const Vec& a, const Vec& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace testing
