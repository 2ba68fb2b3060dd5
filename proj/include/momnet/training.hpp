#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "momnet/datafit.hpp"
#include "momnet/image.hpp"
#include "momnet/refiner.hpp"
#include "momnet/solver.hpp"

namespace momnet {

/// gamma = spread(M_f) / chi; a spread below 1e-12 max(M_f) (a scaled identity)
/// falls back to max(M_f) / chi.
double select_gamma(const Vec& m_f, double chi);
double select_gamma(const DiagonalMajorizer& m_f, double chi);

/// Ground truth and the refiner input it should be mapped to.
struct TrainingPair {
  ImageVector truth;
  ImageVector input;
};

/// (1 / 2S) sum_s ||truth_s - R(input_s)||^2.
double refining_loss(const Refiner& r, const std::vector<TrainingPair>& pairs);

// ---------------------------------------------------------------- parameters

enum class ParamGroup : std::uint8_t { Filter, Threshold };

/// Flat parameter layout used by the optimizer.
///   scnn:  encoder taps, decoder taps, log thresholds
///   dcnn:  first, middle layers in order, last
///   caol:  filter taps, thresholds
///   scale: the scale factor
Vec get_parameters(const Refiner& r);
void set_parameters(Refiner& r, const Vec& params);
std::vector<ParamGroup> parameter_groups(const Refiner& r);

/// Loss over the selected pairs and its gradient in the flat layout.
/// Subgradients at soft-threshold kinks and ReLU(0) are 0.
double loss_and_gradient(const Refiner& r, const std::vector<TrainingPair>& pairs,
                         const std::vector<std::size_t>& batch, Vec& grad);

// ---------------------------------------------------------------- optimizer

struct TrainConfig {
  std::size_t batch_size = 1;
  std::size_t epochs = 10;
  double lr_filters = 1e-3;
  double lr_thresholds = 1e-1;
  double lr_decay = 0.1;  // fractional decrease applied every `decay_every` epochs
  std::size_t decay_every = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

class AdamOptimizer {
public:
  explicit AdamOptimizer(std::size_t n, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  /// params -= lr_j * mhat / (sqrt(vhat) + eps), with per-parameter rates.
  void step(Vec& params, const Vec& grad, const Vec& lr);
  std::size_t steps() const { return t_; }

private:
  double beta1_, beta2_, eps_;
  Vec m_, v_;
  std::size_t t_ = 0;
};

struct TrainResult {
  Refiner refiner;
  Vec loss_history;  // mean mini-batch loss per epoch
  double final_loss = 0.0;
  bool aborted = false;
  std::string failure;
};

/// Mini-batch Adam on the refining loss. Returns the last finite parameters
/// with aborted = true if the loss becomes non-finite.
TrainResult train_refiner(const Refiner& init, const std::vector<TrainingPair>& pairs, const TrainConfig& config);

// ---------------------------------------------------------------- greedy training

struct TrainingSample {
  ImageVector truth;
  ImageVector initial;  // x^(0)
  QuadraticDataFit datafit;
  DiagonalMajorizer majorizer;  // M~ = lambda (M_f + gamma I)
  double gamma;
  FeasibleSet feasible;

  TrainingSample(ImageVector truth, ImageVector initial, QuadraticDataFit datafit, double gamma,
                 FeasibleSet feasible, double lambda = 1.0);
};

struct ArchitectureSpec {
  std::string type = "scnn";  // scnn | dcnn | caol | scale
  std::size_t channels = 8;   // K
  std::size_t filter_size = 3;  // R = filter_size^2
  std::size_t layers = 4;     // L, dcnn only

  void validate() const;
};

/// Fan-in scaled uniform initialization, thresholds at log(1e-2).
Refiner initialize_refiner(const ArchitectureSpec& arch, std::uint64_t seed);

struct GreedyResult {
  std::vector<Refiner> refiners;
  std::vector<Vec> loss_histories;
  Vec final_losses;
};

/// Trains one refiner per iteration on the current iterates of every sample
/// and advances the samples with it; refiner i+1 is warm-started from i.
/// Throws NumericError if any training run aborts.
GreedyResult greedy_train(const std::vector<TrainingSample>& samples, const ArchitectureSpec& arch,
                          const MomentumNetConfig& net_config, const TrainConfig& train_config);

// ---------------------------------------------------------------- patch bound

struct PatchBoundReport {
  double conv_loss = 0.0;   // (1/2L) sum ||xhat - (1/R) sum_k d_k ⋆ T(e_k ⊛ x)||^2
  double patch_loss = 0.0;  // (1/2LR) sum_n ||P_n xhat - D T(E P_n x)||^2
  bool holds = false;
};

/// Both sides of the convolutional vs patch-based loss inequality for a
/// non-residual sCNN over the given pairs (circular boundary, stride 1).
PatchBoundReport patch_loss_bound_check(const ScnnRefiner& r, const std::vector<TrainingPair>& pairs,
                                        double tolerance = 1e-10);

struct PatchBoundSummary {
  std::size_t trials = 0;
  std::size_t violations = 0;
  double max_excess = 0.0;  // max of conv_loss - patch_loss
};

/// Random filters, thresholds and images; counts draws where the bound fails.
PatchBoundSummary patch_loss_bound_trials(std::size_t trials, std::uint64_t seed, Shape shape, std::size_t channels,
                                          std::size_t filter_size, std::size_t pairs_per_trial = 2);

}  // namespace momnet
