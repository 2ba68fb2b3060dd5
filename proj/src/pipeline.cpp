#include "momnet/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "momnet/error.hpp"

namespace momnet {

DeblurProblem make_deblur_problem(const DeblurConfig& cfg) {
  const ImageVector truth = shepp_logan(cfg.n);
  auto op = build_blur(truth.shape(), gaussian_kernel(cfg.kernel_size, cfg.kernel_sigma));
  Vec y = op->forward(truth.view());
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> noise(0.0, cfg.noise_std);
  if (cfg.noise_std > 0.0) {
    for (double& v : y) v += noise(rng);
  }
  ImageVector x0(truth.shape(), y);
  Vec w(y.size(), 1.0);
  QuadraticDataFit f(op, std::move(w), std::move(y));
  return {truth, std::move(f), std::move(x0)};
}

CtGeometry CtConfig::geometry() const {
  CtGeometry g = CtGeometry::desk(n, n_views);
  g.total_views = total_views;
  return g;
}

CtCase make_ct_case(const ImageVector& truth, const LinearOperatorPtr& a, const CtConfig& cfg, std::uint64_t seed) {
  CtMeasurement m = simulate_ct(truth, *a, cfg.incident, cfg.sigma2, seed, cfg.noiseless);
  QuadraticDataFit f(a, m.weights, m.y);
  ImageVector x0 = backprojection_init(f, truth.shape());
  return {truth, std::move(m), std::move(f), std::move(x0)};
}

CtDataset make_ct_dataset(const CtExperimentConfig& cfg) {
  const std::uint64_t s = cfg.seed;
  auto a = build_radon(cfg.ct.geometry());
  std::vector<CtCase> train;
  for (std::size_t k = 0; k < cfg.train_count; ++k) {
    train.push_back(make_ct_case(random_ellipse_phantom(cfg.ct.n, s + 100 + k), a, cfg.ct, s + 200 + k));
  }
  CtCase validation = make_ct_case(random_ellipse_phantom(cfg.ct.n, s + 300), a, cfg.ct, s + 301);
  std::vector<CtCase> heldout;
  heldout.push_back(make_ct_case(shepp_logan(cfg.ct.n), a, cfg.ct, s + 400));
  heldout.push_back(make_ct_case(random_ellipse_phantom(cfg.ct.n, s + 500), a, cfg.ct, s + 501));
  return {a, std::move(train), std::move(validation), std::move(heldout), {"shepp_logan", "random_phantom"}};
}

std::vector<TrainingSample> make_training_samples(const std::vector<CtCase>& cases, double chi) {
  std::vector<TrainingSample> out;
  out.reserve(cases.size());
  for (const auto& c : cases) {
    const double gamma = select_gamma(raw_diag_majorizer(c.datafit), chi);
    out.emplace_back(c.truth, c.x0, c.datafit, gamma, FeasibleSet::nonnegative());
  }
  return out;
}

MomentumNetConfig ct_net_config(const CtExperimentConfig& cfg, double gamma) {
  MomentumNetConfig net;
  net.n_iter = cfg.n_iter;
  net.rho = cfg.rho;
  net.gamma = gamma;
  net.keep_iterates = false;
  return net;
}

CtEvaluation evaluate_ct_case(const CtCase& c, const std::vector<Refiner>& refiners, const CtExperimentConfig& cfg,
                              double chi, const std::string& name) {
  CtEvaluation ev;
  ev.name = name;
  ev.gamma = select_gamma(raw_diag_majorizer(c.datafit), chi);
  MomentumNetConfig net = ct_net_config(cfg, ev.gamma);
  net.n_iter = refiners.size();
  const FeasibleSet feasible = FeasibleSet::nonnegative();

  const IterateTrace trained = run_momentum_net(net, refiners, c.datafit, feasible, c.x0);
  if (trained.aborted) throw NumericError("evaluate_ct_case: " + trained.failure);
  const IterateTrace base = run_momentum_net(net, {ScaleRefiner{1.0}}, c.datafit, feasible, c.x0);
  if (base.aborted) throw NumericError("evaluate_ct_case: " + base.failure);

  ev.rmse_init = rmse(c.x0, c.truth);
  ev.rmse_baseline = rmse(base.final_x, c.truth);
  ev.rmse_momentum = rmse(trained.final_x, c.truth);
  ev.reconstruction = trained.final_x;
  return ev;
}

CtExperimentResult run_ct_experiment(const CtExperimentConfig& cfg, const CtDataset& data) {
  if (cfg.chi_grid.empty()) throw ConfigError("run_ct_experiment: empty chi grid");
  CtExperimentResult result;

  double best = std::numeric_limits<double>::infinity();
  for (double chi : cfg.chi_grid) {
    CtExperimentConfig tune = cfg;
    tune.n_iter = cfg.tune_iters;
    const auto samples = make_training_samples(data.train, chi);
    MomentumNetConfig net = ct_net_config(tune, 1.0);
    net.gamma.reset();
    const GreedyResult g = greedy_train(samples, cfg.arch, net, cfg.tune_train);
    const double score = evaluate_ct_case(data.validation, g.refiners, tune, chi, "validation").rmse_momentum;
    result.chi_validation_rmse.push_back(score);
    if (score < best) {
      best = score;
      result.chi = chi;
    }
  }

  const auto samples = make_training_samples(data.train, result.chi);
  MomentumNetConfig net = ct_net_config(cfg, 1.0);
  net.gamma.reset();
  result.training = greedy_train(samples, cfg.arch, net, cfg.train);
  for (std::size_t k = 0; k < data.heldout.size(); ++k) {
    result.heldout.push_back(
        evaluate_ct_case(data.heldout[k], result.training.refiners, cfg, result.chi, data.heldout_names[k]));
  }
  return result;
}

IterateTrace diagnose_run(const MomentumNetConfig& config, const std::vector<Refiner>& refiners,
                          const QuadraticDataFit& datafit, const FeasibleSet& feasible, const ImageVector& x0,
                          const DiagnosticsConfig& diag) {
  config.validate();
  if (refiners.empty()) throw ConfigError("diagnose_run: no refiners");
  const bool paired = refiners.size() >= 2;
  MomentumNetStepper stepper(config, datafit, feasible, x0);
  std::mt19937_64 rng(diag.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  IterateTrace trace;
  trace.x0 = x0;
  trace.final_x = x0;
  trace.gamma = stepper.gamma();
  for (std::size_t i = 0; i < config.n_iter; ++i) {
    const Refiner& r = refiners[std::min(i, refiners.size() - 1)];
    const ImageVector& x = stepper.x();
    const double scale = diag.perturbation * std::max(norm(x.view()), 1e-12) /
                         std::sqrt(static_cast<double>(x.size()));
    std::vector<ImagePair> pairs;
    if (i > 0 && distance(x.view(), stepper.x_prev().view()) > 0.0) pairs.emplace_back(x, stepper.x_prev());
    for (std::size_t k = 0; k < diag.random_pairs; ++k) {
      ImageVector u = x;
      ImageVector v = x;
      for (std::size_t j = 0; j < x.size(); ++j) {
        u[j] += scale * normal(rng);
        v[j] += scale * normal(rng);
      }
      pairs.emplace_back(std::move(u), std::move(v));
    }

    IterationRecord rec;
    try {
      const double kappa = pairs.empty() ? std::numeric_limits<double>::quiet_NaN() : lipschitz_estimate(r, pairs);
      double eps = std::numeric_limits<double>::quiet_NaN();
      if (paired && i > 0 && !pairs.empty()) {
        eps = paired_epsilon(r, refiners[std::min(i - 1, refiners.size() - 1)], pairs);
      }
      rec = stepper.step(r);
      rec.kappa = kappa;
      rec.epsilon = eps;
      if (!paired) rec.delta = std::numeric_limits<double>::quiet_NaN();
    } catch (const NumericError& e) {
      trace.aborted = true;
      trace.failed_iteration = i + 1;
      trace.failure = e.what();
      break;
    }
    trace.records.push_back(std::move(rec));
    trace.final_x = stepper.x();
  }
  return trace;
}

}  // namespace momnet
