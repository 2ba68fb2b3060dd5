#include "momnet/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "momnet/error.hpp"
#include "momnet/prox.hpp"
#include "momnet/training.hpp"

namespace momnet {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void require_finite(const ImageVector& v, const char* what) {
  if (!v.all_finite()) throw NumericError(std::string("non-finite ") + what);
}

ImageVector relax(const ImageVector& x, const ImageVector& r, double rho) {
  ImageVector z(x.shape());
  for (std::size_t n = 0; n < x.size(); ++n) z[n] = (1.0 - rho) * x[n] + rho * r[n];
  return z;
}

const Refiner& refiner_at(const std::vector<Refiner>& refiners, std::size_t i) {
  return refiners[std::min(i, refiners.size() - 1)];
}

}  // namespace

MomentumState momentum_update(const MomentumState& state, bool sharp) {
  if (!(state.theta >= 1.0)) throw ConfigError("momentum_update: theta must be >= 1");
  MomentumState next = state;
  next.theta = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * state.theta * state.theta));
  next.m = sharp ? 0.0 : (state.theta - 1.0) / next.theta;
  return next;
}

void MomentumNetConfig::validate() const {
  if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("rho must lie in (0, 1)");
  if (!(delta >= 0.0 && delta < 1.0)) throw ConfigError("delta must lie in [0, 1)");
  if (!(lambda >= 1.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be >= 1");
  if (convex && lambda != 1.0) throw ConfigError("convex mode requires lambda = 1");
  if (!convex && !(lambda > 1.0)) throw ConfigError("nonconvex mode requires lambda > 1");
  if (gamma && (!(*gamma > 0.0) || !std::isfinite(*gamma))) throw ConfigError("gamma must be > 0");
  if (chi && (!(*chi > 0.0) || !std::isfinite(*chi))) throw ConfigError("chi must be > 0");
}

double resolve_gamma(const MomentumNetConfig& config, const QuadraticDataFit& datafit) {
  if (config.gamma) return *config.gamma;
  if (config.chi) return select_gamma(raw_diag_majorizer(datafit), *config.chi);
  throw ConfigError("either gamma or chi must be set");
}

Vec extrapolation_matrix(const DiagonalMajorizer& m_prev, const DiagonalMajorizer& m_cur, const MomentumState& state,
                         double lambda, bool convex) {
  require_dims(m_cur.size(), m_prev.size(), "extrapolation_matrix");
  double c = state.delta * state.delta * state.m;
  if (!convex) c *= (lambda - 1.0) / (2.0 * (lambda + 1.0));
  Vec e(m_prev.size());
  for (std::size_t n = 0; n < e.size(); ++n) e[n] = c * std::sqrt(m_prev.diag()[n] / m_cur.diag()[n]);
  return e;
}

bool check_extrapolation_condition(const Vec& e, const DiagonalMajorizer& m_prev, const DiagonalMajorizer& m_cur,
                                   double delta, double lambda, bool convex) {
  require_dims(e.size(), m_prev.size(), "check_extrapolation_condition");
  require_dims(m_cur.size(), m_prev.size(), "check_extrapolation_condition");
  double c = delta * delta;
  if (!convex) {
    const double q = (lambda - 1.0) / (lambda + 1.0);
    c *= q * q / 4.0;
  }
  for (std::size_t n = 0; n < e.size(); ++n) {
    if (e[n] < 0.0) return false;
    const double lhs = e[n] * e[n] * m_cur.diag()[n];
    const double rhs = c * m_prev.diag()[n];
    if (lhs > rhs + 1e-12 * std::max(rhs, 1.0)) return false;
  }
  return true;
}

ImageVector mbir_step(const ImageVector& x_acute, const MbirObjective& obj, const DiagonalMajorizer& m_tilde) {
  require_dims(m_tilde.size(), x_acute.size(), "mbir_step majorizer");
  const ImageVector g = mbir_gradient(obj, x_acute);
  const double lam = m_tilde.lambda();
  ImageVector out(x_acute.shape());
  for (std::size_t n = 0; n < out.size(); ++n) {
    out[n] = obj.feasible.project(x_acute[n] - g[n] / (lam * m_tilde.diag()[n]));
  }
  return out;
}

// ---------------------------------------------------------------- Momentum-Net

MomentumNetStepper::MomentumNetStepper(const MomentumNetConfig& config, QuadraticDataFit datafit,
                                       FeasibleSet feasible, ImageVector x0)
    : config_(config),
      datafit_(std::move(datafit)),
      feasible_(feasible),
      gamma_(resolve_gamma(config, datafit_)),
      majorizer_(mbir_majorizer(datafit_, gamma_, 1.0)),
      scaled_(majorizer_.times(config.lambda)),
      x_(std::move(x0)),
      x_prev_(x_) {
  config_.validate();
  require_dims(x_.size(), datafit_.image_size(), "MomentumNetStepper x0");
  momentum_.delta = config_.delta;
}

IterationRecord MomentumNetStepper::step(const Refiner& r) {
  const auto start = Clock::now();
  IterationRecord rec;
  rec.iter = iteration_ + 1;

  const ImageVector refined = refine(r, x_);
  require_finite(refined, "refiner output");
  ImageVector z = relax(x_, refined, config_.rho);

  ImageVector x_acute = x_;
  if (config_.extrapolate) {
    const Vec e = extrapolation_matrix(majorizer_, majorizer_, momentum_, config_.lambda, config_.convex);
    for (std::size_t n = 0; n < x_acute.size(); ++n) x_acute[n] += e[n] * (x_[n] - x_prev_[n]);
  }

  const MbirObjective obj(datafit_, gamma_, z, feasible_);
  ImageVector x_next = mbir_step(x_acute, obj, scaled_);
  require_finite(x_next, "iterate");

  rec.objective = obj.value(x_next);
  rec.step_residual = distance(x_next.view(), x_.view());
  if (z_) rec.delta = delta_measure(z, *z_, x_);
  if (config_.track_fixed_point) {
    rec.fixed_point_residual = fixed_point_residual(x_next, r, config_, datafit_, feasible_, scaled_);
  }

  x_prev_ = std::move(x_);
  x_ = std::move(x_next);
  momentum_ = momentum_update(momentum_, config_.sharp_majorizer);
  ++iteration_;

  if (config_.keep_iterates) {
    rec.x = x_;
    rec.z = z;
  }
  z_ = std::move(z);
  rec.wall_ms = elapsed_ms(start);
  return rec;
}

IterateTrace run_momentum_net(const MomentumNetConfig& config, const std::vector<Refiner>& refiners,
                              const QuadraticDataFit& datafit, const FeasibleSet& feasible, const ImageVector& x0) {
  config.validate();
  if (config.n_iter > 0 && refiners.empty()) throw ConfigError("run_momentum_net: no refiners");
  MomentumNetStepper stepper(config, datafit, feasible, x0);
  IterateTrace trace;
  trace.x0 = x0;
  trace.final_x = x0;
  trace.gamma = stepper.gamma();
  for (std::size_t i = 0; i < config.n_iter; ++i) {
    try {
      trace.records.push_back(stepper.step(refiner_at(refiners, i)));
    } catch (const NumericError& e) {
      trace.aborted = true;
      trace.failed_iteration = i + 1;
      trace.failure = e.what();
      break;
    }
    trace.final_x = stepper.x();
  }
  return trace;
}

double fixed_point_residual(const ImageVector& x, const Refiner& refiner, const MomentumNetConfig& config,
                            const QuadraticDataFit& datafit, const FeasibleSet& feasible,
                            const DiagonalMajorizer& m_tilde) {
  require_dims(x.size(), datafit.image_size(), "fixed_point_residual");
  const ImageVector zbar = relax(x, refine(refiner, x), config.rho);
  const MbirObjective obj(datafit, resolve_gamma(config, datafit), zbar, feasible);
  const ImageVector next = mbir_step(x, obj, m_tilde);
  return distance(x.view(), next.view()) / std::max(1.0, norm(x.view()));
}

// ---------------------------------------------------------------- BCD-Net

ImageVector apg_solve(const MbirObjective& obj, const ImageVector& x0, std::size_t iters) {
  if (iters == 0) throw ConfigError("apg_solve: iters must be >= 1");
  require_dims(x0.size(), obj.datafit.image_size(), "apg_solve x0");
  const DiagonalMajorizer m = mbir_majorizer(obj.datafit, obj.gamma);
  ImageVector x = x0;
  ImageVector y = x0;
  double t = 1.0;
  for (std::size_t k = 0; k < iters; ++k) {
    const ImageVector g = mbir_gradient(obj, y);
    ImageVector x_next(x.shape());
    for (std::size_t n = 0; n < x.size(); ++n) x_next[n] = obj.feasible.project(y[n] - g[n] / m.diag()[n]);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double w = (t - 1.0) / t_next;
    for (std::size_t n = 0; n < x.size(); ++n) y[n] = x_next[n] + w * (x_next[n] - x[n]);
    x = std::move(x_next);
    t = t_next;
  }
  return x;
}

IterateTrace run_bcd_net(const MomentumNetConfig& config, const std::vector<Refiner>& refiners,
                         const QuadraticDataFit& datafit, const FeasibleSet& feasible, const ImageVector& x0,
                         std::size_t inner_iters) {
  config.validate();
  if (inner_iters == 0) throw ConfigError("run_bcd_net: inner_iters must be >= 1");
  if (config.n_iter > 0 && refiners.empty()) throw ConfigError("run_bcd_net: no refiners");
  require_dims(x0.size(), datafit.image_size(), "run_bcd_net x0");

  IterateTrace trace;
  trace.x0 = x0;
  trace.final_x = x0;
  trace.gamma = resolve_gamma(config, datafit);
  const DiagonalMajorizer m_tilde = mbir_majorizer(datafit, trace.gamma);
  ImageVector x = x0;
  std::optional<ImageVector> z_prev;
  for (std::size_t i = 0; i < config.n_iter; ++i) {
    const auto start = Clock::now();
    const Refiner& r = refiner_at(refiners, i);
    IterationRecord rec;
    rec.iter = i + 1;
    try {
      ImageVector z = refine(r, x);
      require_finite(z, "refiner output");
      const MbirObjective obj(datafit, trace.gamma, z, feasible);
      ImageVector x_next = apg_solve(obj, x, inner_iters);
      require_finite(x_next, "iterate");
      rec.objective = obj.value(x_next);
      rec.step_residual = distance(x_next.view(), x.view());
      if (z_prev) rec.delta = delta_measure(z, *z_prev, x);
      if (config.track_fixed_point) {
        // BCD-Net has no relaxation; the residual uses rho as configured.
        rec.fixed_point_residual = fixed_point_residual(x_next, r, config, datafit, feasible, m_tilde);
      }
      x = std::move(x_next);
      if (config.keep_iterates) {
        rec.x = x;
        rec.z = z;
      }
      z_prev = std::move(z);
    } catch (const NumericError& e) {
      trace.aborted = true;
      trace.failed_iteration = i + 1;
      trace.failure = e.what();
      break;
    }
    rec.wall_ms = elapsed_ms(start);
    trace.records.push_back(std::move(rec));
    trace.final_x = x;
  }
  return trace;
}

// ---------------------------------------------------------------- CAOL BPEG-M

IterateTrace run_caol_bpegm(const QuadraticDataFit& datafit, const FilterBank& tf_filters, const Vec& beta,
                            double gamma, const FeasibleSet& feasible, const ImageVector& x0, std::size_t n_iter,
                            const CaolOptions& options) {
  if (tf_filters.empty()) throw ConfigError("run_caol_bpegm: empty filter bank");
  require_dims(beta.size(), tf_filters.size(), "run_caol_bpegm thresholds");
  for (double b : beta) {
    if (!(b >= 0.0)) throw ConfigError("run_caol_bpegm: thresholds must be >= 0");
  }
  if (!(gamma > 0.0)) throw ConfigError("run_caol_bpegm: gamma must be > 0");
  require_dims(x0.size(), datafit.image_size(), "run_caol_bpegm x0");
  const Shape shape = x0.shape();
  const double tf_err = tight_frame_error(tf_filters, shape, 4, 0x5eed);
  if (!(tf_err <= options.tf_tolerance)) {
    throw ConfigError("run_caol_bpegm: filters violate the tight-frame condition");
  }

  const std::size_t k_count = tf_filters.size();
  const std::size_t n = x0.size();
  const DiagonalMajorizer m = mbir_majorizer(datafit, gamma);

  IterateTrace trace;
  trace.x0 = x0;
  trace.final_x = x0;
  trace.gamma = gamma;

  ImageVector x = x0;
  ImageVector x_prev = x0;
  std::optional<ImageVector> z_prev;
  std::vector<Vec> zeta(k_count, Vec(n));
  Vec hx(n), grad(n);
  double theta = 1.0;
  double mom = 0.0;

  for (std::size_t i = 0; i < n_iter; ++i) {
    const auto start = Clock::now();
    IterationRecord rec;
    rec.iter = i + 1;

    // Sparse-code block: exact minimizer over each zeta_k.
    ImageVector z(shape);
    for (std::size_t k = 0; k < k_count; ++k) {
      convolve(tf_filters[k], x.data().data(), zeta[k].data(), shape);
      for (double& v : zeta[k]) v = soft_threshold(v, beta[k]);
      correlate_add(tf_filters[k], zeta[k].data(), z.data().data(), shape);
    }

    // Image block: extrapolated majorized gradient step.
    ImageVector x_acute = x;
    if (options.extrapolate) {
      const double e = options.delta * options.delta * mom;
      for (std::size_t j = 0; j < n; ++j) x_acute[j] += e * (x[j] - x_prev[j]);
    }
    datafit.value_and_gradient(x_acute.view(), grad);
    for (std::size_t k = 0; k < k_count; ++k) {
      convolve(tf_filters[k], x_acute.data().data(), hx.data(), shape);
      for (std::size_t j = 0; j < n; ++j) hx[j] = gamma * (hx[j] - zeta[k][j]);
      correlate_add(tf_filters[k], hx.data(), grad.data(), shape);
    }
    ImageVector x_next(shape);
    for (std::size_t j = 0; j < n; ++j) x_next[j] = feasible.project(x_acute[j] - grad[j] / m.diag()[j]);
    if (!x_next.all_finite()) {
      trace.aborted = true;
      trace.failed_iteration = i + 1;
      trace.failure = "non-finite iterate";
      break;
    }

    double reg = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) {
      convolve(tf_filters[k], x_next.data().data(), hx.data(), shape);
      double fit = 0.0;
      double l1 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double d = hx[j] - zeta[k][j];
        fit += d * d;
        l1 += std::abs(zeta[k][j]);
      }
      reg += 0.5 * fit + beta[k] * l1;
    }
    rec.objective = datafit.value(x_next.view()) + gamma * reg;
    rec.step_residual = distance(x_next.view(), x.view());
    if (z_prev) rec.delta = delta_measure(z, *z_prev, x);

    const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    mom = (theta - 1.0) / theta_next;
    theta = theta_next;

    x_prev = std::move(x);
    x = std::move(x_next);
    if (options.keep_iterates) {
      rec.x = x;
      rec.z = z;
    }
    z_prev = std::move(z);
    rec.wall_ms = elapsed_ms(start);
    trace.records.push_back(std::move(rec));
    trace.final_x = x;
  }
  return trace;
}

}  // namespace momnet
