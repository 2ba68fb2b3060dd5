#pragma once

#include <cstdint>
#include <cstddef>

#include "momnet/image.hpp"
#include "momnet/linop.hpp"

namespace momnet {

/// f(x; y) = 1/2 ||y - A x||_W^2 with diagonal nonnegative W.
class QuadraticDataFit {
public:
  QuadraticDataFit(LinearOperatorPtr op, Vec weights, Vec measurements);

  const LinearOperator& op() const { return *op_; }
  const LinearOperatorPtr& op_ptr() const { return op_; }
  const Vec& weights() const { return weights_; }
  const Vec& measurements() const { return measurements_; }
  std::size_t image_size() const { return op_->cols(); }

  double value(std::span<const double> x) const;
  /// Both f(x) and A^T W (A x - y) from a single forward projection.
  double value_and_gradient(std::span<const double> x, std::span<double> grad) const;

private:
  LinearOperatorPtr op_;
  Vec weights_;
  Vec measurements_;
};

/// Positive diagonal metric M with scale lambda; scaled() returns lambda * M.
class DiagonalMajorizer {
public:
  explicit DiagonalMajorizer(Vec diag, double lambda = 1.0);

  const Vec& diag() const { return diag_; }
  double lambda() const { return lambda_; }
  std::size_t size() const { return diag_.size(); }
  double min_entry() const;
  double max_entry() const;

  /// M~ = lambda * M, returned as a majorizer with lambda 1.
  DiagonalMajorizer scaled() const;
  DiagonalMajorizer times(double c) const;

private:
  Vec diag_;
  double lambda_;
};

class FeasibleSet {
public:
  enum class Kind { All, NonNegative, Box };

  static FeasibleSet all() { return FeasibleSet(Kind::All, 0.0, 0.0); }
  static FeasibleSet nonnegative() { return FeasibleSet(Kind::NonNegative, 0.0, 0.0); }
  static FeasibleSet box(double lo, double hi);

  Kind kind() const { return kind_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

  double project(double v) const;
  bool contains(double v) const;
  bool contains(std::span<const double> x) const;

private:
  FeasibleSet(Kind kind, double lo, double hi) : kind_(kind), lo_(lo), hi_(hi) {}

  Kind kind_;
  double lo_;
  double hi_;
};

/// F(x; y, z) = f(x; y) + gamma/2 ||x - z||^2 restricted to a feasible set.
struct MbirObjective {
  QuadraticDataFit datafit;
  double gamma;
  ImageVector anchor;
  FeasibleSet feasible;

  MbirObjective(QuadraticDataFit datafit, double gamma, ImageVector anchor, FeasibleSet feasible);

  double value(const ImageVector& x) const;
};

ImageVector datafit_gradient(const QuadraticDataFit& f, const ImageVector& x);

/// M = diag(|A^T| W |A| 1); zero entries are floored at 1e-8 * max entry
/// (or 1e-8 when the whole diagonal vanishes) so that M stays positive definite.
DiagonalMajorizer diag_majorizer(const QuadraticDataFit& f);

/// diag(|A^T| W |A| 1) without the floor; may contain zeros.
Vec raw_diag_majorizer(const QuadraticDataFit& f);

/// Majorizer of grad F: lambda * (diag(|A^T| W |A| 1) + gamma I).
DiagonalMajorizer mbir_majorizer(const QuadraticDataFit& f, double gamma, double lambda = 1.0);

ImageVector mbir_gradient(const MbirObjective& obj, const ImageVector& x);

struct MajorizationReport {
  std::size_t trials = 0;
  std::size_t violations = 0;
  double max_violation = 0.0;  // largest relative excess of lhs over rhs
};

/// rhs - lhs of the quadratic majorization inequality for one pair; >= 0 when
/// the bound holds.
double majorization_gap(const QuadraticDataFit& f, const DiagonalMajorizer& m, std::span<const double> u,
                        std::span<const double> v);

/// Draws random pairs (u, v) and checks
///   f(u) <= f(v) + <grad f(v), u - v> + 1/2 ||u - v||_M^2
/// with relative slack `tolerance` (scaled by the magnitude of the terms).
MajorizationReport verify_majorization(const QuadraticDataFit& f, const DiagonalMajorizer& m, std::size_t trials,
                                       std::uint64_t seed, double tolerance = 1e-10);

}  // namespace momnet
