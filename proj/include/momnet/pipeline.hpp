#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "momnet/datafit.hpp"
#include "momnet/imaging.hpp"
#include "momnet/refiner.hpp"
#include "momnet/solver.hpp"
#include "momnet/training.hpp"

namespace momnet {

// ---------------------------------------------------------------- deblurring

struct DeblurConfig {
  std::size_t n = 32;
  std::size_t kernel_size = 5;
  double kernel_sigma = 1.2;
  double noise_std = 0.01;
  std::uint64_t seed = 7;
};

struct DeblurProblem {
  ImageVector truth;
  QuadraticDataFit datafit;
  ImageVector x0;  // the blurred measurement
};

/// Shepp-Logan through a Gaussian blur with additive white noise, W = I.
DeblurProblem make_deblur_problem(const DeblurConfig& cfg);

// ---------------------------------------------------------------- CT

struct CtConfig {
  std::size_t n = 64;
  std::size_t n_views = 23;
  std::size_t total_views = 180;
  double incident = 1e5;
  double sigma2 = 25.0;
  bool noiseless = false;

  CtGeometry geometry() const;
};

struct CtCase {
  ImageVector truth;
  CtMeasurement measurement;
  QuadraticDataFit datafit;
  ImageVector x0;  // back-projection initialization
};

CtCase make_ct_case(const ImageVector& truth, const LinearOperatorPtr& a, const CtConfig& cfg, std::uint64_t seed);

struct CtExperimentConfig {
  CtConfig ct;
  std::size_t train_count = 10;
  std::vector<double> chi_grid{0.1, 0.3, 1.0, 3.0, 10.0};
  ArchitectureSpec arch{"scnn", 25, 5, 4};
  std::size_t n_iter = 10;          // Momentum-Net iterations = trained refiners
  std::size_t tune_iters = 4;       // shorter schedule for the chi sweep
  TrainConfig train{};
  TrainConfig tune_train{};
  double rho = 0.999;
  std::uint64_t seed = 2024;
};

struct CtEvaluation {
  std::string name;
  double gamma = 0.0;
  double rmse_init = 0.0;
  double rmse_baseline = 0.0;  // identity refiner, same gamma and iterations
  double rmse_momentum = 0.0;
  ImageVector reconstruction;
};

struct CtExperimentResult {
  double chi = 0.0;
  std::vector<double> chi_validation_rmse;  // aligned with the chi grid
  GreedyResult training;
  std::vector<CtEvaluation> heldout;
};

/// Training phantoms, validation phantom for the chi sweep, and two held-out
/// cases (the standard Shepp-Logan and an unseen random phantom).
struct CtDataset {
  std::shared_ptr<SparseMatrixOperator> a;
  std::vector<CtCase> train;
  CtCase validation;
  std::vector<CtCase> heldout;
  std::vector<std::string> heldout_names;
};

CtDataset make_ct_dataset(const CtExperimentConfig& cfg);

std::vector<TrainingSample> make_training_samples(const std::vector<CtCase>& cases, double chi);

MomentumNetConfig ct_net_config(const CtExperimentConfig& cfg, double gamma);

/// Reconstructs one case with the trained refiners and with the identity
/// refiner at the same gamma and iteration count.
CtEvaluation evaluate_ct_case(const CtCase& c, const std::vector<Refiner>& refiners, const CtExperimentConfig& cfg,
                              double chi, const std::string& name);

CtExperimentResult run_ct_experiment(const CtExperimentConfig& cfg, const CtDataset& data);

// ---------------------------------------------------------------- diagnostics

struct DiagnosticsConfig {
  std::size_t random_pairs = 8;  // perturbation pairs per iteration besides (x^(i), x^(i-1))
  double perturbation = 1e-2;    // relative to the RMS value of the iterate
  std::uint64_t seed = 0;
};

/// Runs Momentum-Net and fills epsilon, Delta and kappa for every record.
/// kappa uses the refiner of the current iteration; epsilon pairs it with the
/// previous refiner. With fewer than two refiners epsilon and Delta stay NaN.
IterateTrace diagnose_run(const MomentumNetConfig& config, const std::vector<Refiner>& refiners,
                          const QuadraticDataFit& datafit, const FeasibleSet& feasible, const ImageVector& x0,
                          const DiagnosticsConfig& diag);

}  // namespace momnet
