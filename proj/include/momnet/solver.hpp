#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "momnet/datafit.hpp"
#include "momnet/image.hpp"
#include "momnet/refiner.hpp"

namespace momnet {

/// Momentum coefficients of the accelerated recurrence. theta starts at 1 so
/// that the first two coefficients are zero.
struct MomentumState {
  double theta = 1.0;
  double m = 0.0;
  double delta = 1.0 - 1e-9;
};

/// theta' = (1 + sqrt(1 + 4 theta^2)) / 2,  m' = (theta - 1) / theta'.
/// With `sharp` set, m' is forced to 0.
MomentumState momentum_update(const MomentumState& state, bool sharp = false);

struct MomentumNetConfig {
  std::size_t n_iter = 10;
  double rho = 0.999;
  std::optional<double> gamma;  // used as-is when set
  std::optional<double> chi;    // otherwise gamma = spread(M_f) / chi
  double delta = 1.0 - 1e-9;
  double lambda = 1.0;
  bool convex = true;
  bool extrapolate = true;
  bool sharp_majorizer = false;   // forces every momentum coefficient to 0
  bool track_fixed_point = false; // evaluate the fixed-point residual each iteration
  bool keep_iterates = true;      // store x and z in every record

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

/// gamma from the config: explicit value, or spread-based selection via chi.
double resolve_gamma(const MomentumNetConfig& config, const QuadraticDataFit& datafit);

struct IterationRecord {
  std::size_t iter = 0;  // 1-based index of the produced iterate x^(iter)
  std::optional<ImageVector> x;
  std::optional<ImageVector> z;
  double objective = 0.0;
  double step_residual = 0.0;  // ||x^(i+1) - x^(i)||_2
  double fixed_point_residual = std::numeric_limits<double>::quiet_NaN();
  double epsilon = std::numeric_limits<double>::quiet_NaN();
  double delta = std::numeric_limits<double>::quiet_NaN();
  double kappa = std::numeric_limits<double>::quiet_NaN();
  double wall_ms = 0.0;
};

struct IterateTrace {
  ImageVector x0;
  ImageVector final_x;
  double gamma = 0.0;
  std::vector<IterationRecord> records;
  bool aborted = false;
  std::optional<std::size_t> failed_iteration;  // 1-based
  std::string failure;

  std::size_t iterations() const { return records.size(); }
};

/// Diagonal extrapolation matrix
///   convex:    delta^2 m M_cur^{-1/2} M_prev^{1/2}
///   nonconvex: the same times (lambda - 1) / (2 (lambda + 1)).
Vec extrapolation_matrix(const DiagonalMajorizer& m_prev, const DiagonalMajorizer& m_cur, const MomentumState& state,
                         double lambda, bool convex);

/// E^T M_cur E <= c M_prev entrywise (diagonals), with c = delta^2 (convex) or
/// delta^2 (lambda-1)^2 / (4 (lambda+1)^2) (nonconvex), up to 1e-12 relative slack.
bool check_extrapolation_condition(const Vec& e, const DiagonalMajorizer& m_prev, const DiagonalMajorizer& m_cur,
                                   double delta, double lambda, bool convex);

/// Prox_{I_X}^{M~}(x' - M~^{-1} grad F(x'; y, z)); m_tilde.scaled() is used as M~.
ImageVector mbir_step(const ImageVector& x_acute, const MbirObjective& obj, const DiagonalMajorizer& m_tilde);

/// Runs one problem through the refine / extrapolate / MBIR iteration; the
/// greedy trainer advances training samples with it one step at a time.
class MomentumNetStepper {
public:
  MomentumNetStepper(const MomentumNetConfig& config, QuadraticDataFit datafit, FeasibleSet feasible,
                     ImageVector x0);

  /// Applies one iteration with refiner `r`; throws NumericError on non-finite values.
  IterationRecord step(const Refiner& r);

  const ImageVector& x() const { return x_; }
  const ImageVector& x_prev() const { return x_prev_; }
  const std::optional<ImageVector>& z() const { return z_; }
  const MomentumState& momentum() const { return momentum_; }
  double gamma() const { return gamma_; }
  const DiagonalMajorizer& majorizer() const { return majorizer_; }
  const DiagonalMajorizer& scaled_majorizer() const { return scaled_; }
  const QuadraticDataFit& datafit() const { return datafit_; }
  const FeasibleSet& feasible() const { return feasible_; }
  std::size_t iteration() const { return iteration_; }

private:
  MomentumNetConfig config_;
  QuadraticDataFit datafit_;
  FeasibleSet feasible_;
  double gamma_;
  DiagonalMajorizer majorizer_;  // M = M_f + gamma I
  DiagonalMajorizer scaled_;     // lambda M
  ImageVector x_;
  ImageVector x_prev_;
  std::optional<ImageVector> z_;
  MomentumState momentum_;
  std::size_t iteration_ = 0;
};

/// Momentum-Net; refiners[i] drives iteration i (the last one repeats).
IterateTrace run_momentum_net(const MomentumNetConfig& config, const std::vector<Refiner>& refiners,
                              const QuadraticDataFit& datafit, const FeasibleSet& feasible, const ImageVector& x0);

/// ||x - Prox(x - M~^{-1} grad F(x; y, zbar))|| / max(1, ||x||) with
/// zbar = (1 - rho) x + rho R(x).
double fixed_point_residual(const ImageVector& x, const Refiner& refiner, const MomentumNetConfig& config,
                            const QuadraticDataFit& datafit, const FeasibleSet& feasible,
                            const DiagonalMajorizer& m_tilde);

/// Accelerated projected gradient (FISTA form, non-monotone) on F over the
/// feasible set, preconditioned by the diagonal majorizer of grad F.
ImageVector apg_solve(const MbirObjective& obj, const ImageVector& x0, std::size_t iters);

/// BCD-Net: z = R(x) without relaxation, then `inner_iters` APG iterations on
/// the MBIR problem warm-started at the current iterate.
IterateTrace run_bcd_net(const MomentumNetConfig& config, const std::vector<Refiner>& refiners,
                         const QuadraticDataFit& datafit, const FeasibleSet& feasible, const ImageVector& x0,
                         std::size_t inner_iters);

struct CaolOptions {
  double delta = 1.0 - 1e-9;
  bool extrapolate = true;
  bool keep_iterates = true;
  double tf_tolerance = 1e-8;
};

/// Two-block BPEG-M for the convolutional-regularizer problem
///   min_x f(x) + gamma min_zeta sum_k 1/2 ||h_k ⊛ x - zeta_k||^2 + beta_k ||zeta_k||_1
/// with tight-frame filters. Throws ConfigError if the bank violates the
/// tight-frame identity beyond options.tf_tolerance.
IterateTrace run_caol_bpegm(const QuadraticDataFit& datafit, const FilterBank& tf_filters, const Vec& beta,
                            double gamma, const FeasibleSet& feasible, const ImageVector& x0, std::size_t n_iter,
                            const CaolOptions& options = {});

}  // namespace momnet
