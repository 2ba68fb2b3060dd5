#include "momnet/datafit.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "momnet/error.hpp"

namespace momnet {

QuadraticDataFit::QuadraticDataFit(LinearOperatorPtr op, Vec weights, Vec measurements)
    : op_(std::move(op)), weights_(std::move(weights)), measurements_(std::move(measurements)) {
  if (!op_) throw ConfigError("QuadraticDataFit: null operator");
  require_dims(measurements_.size(), op_->rows(), "QuadraticDataFit measurements");
  require_dims(weights_.size(), op_->rows(), "QuadraticDataFit weights");
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("QuadraticDataFit: weights must be finite and >= 0");
  }
  if (!all_finite(measurements_)) throw NumericError("QuadraticDataFit: non-finite measurement");
}

double QuadraticDataFit::value(std::span<const double> x) const {
  const Vec ax = op_->forward(x);
  double s = 0.0;
  for (std::size_t i = 0; i < ax.size(); ++i) {
    const double r = measurements_[i] - ax[i];
    s += weights_[i] * r * r;
  }
  return 0.5 * s;
}

double QuadraticDataFit::value_and_gradient(std::span<const double> x, std::span<double> grad) const {
  Vec r = op_->forward(x);
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double res = r[i] - measurements_[i];
    s += weights_[i] * res * res;
    r[i] = weights_[i] * res;
  }
  op_->apply_adjoint(r, grad);
  return 0.5 * s;
}

// ---------------------------------------------------------------- majorizer

DiagonalMajorizer::DiagonalMajorizer(Vec diag, double lambda) : diag_(std::move(diag)), lambda_(lambda) {
  if (diag_.empty()) throw ConfigError("DiagonalMajorizer: empty diagonal");
  for (double d : diag_) {
    if (!(d > 0.0) || !std::isfinite(d)) throw ConfigError("DiagonalMajorizer: entries must lie in (0, inf)");
  }
  if (!(lambda_ >= 1.0) || !std::isfinite(lambda_)) throw ConfigError("DiagonalMajorizer: lambda must be >= 1");
}

double DiagonalMajorizer::min_entry() const { return *std::min_element(diag_.begin(), diag_.end()); }
double DiagonalMajorizer::max_entry() const { return *std::max_element(diag_.begin(), diag_.end()); }

DiagonalMajorizer DiagonalMajorizer::scaled() const {
  Vec d = diag_;
  for (double& v : d) v *= lambda_;
  return DiagonalMajorizer(std::move(d));
}

DiagonalMajorizer DiagonalMajorizer::times(double c) const {
  Vec d = diag_;
  for (double& v : d) v *= c;
  return DiagonalMajorizer(std::move(d), lambda_);
}

// ---------------------------------------------------------------- feasible set

FeasibleSet FeasibleSet::box(double lo, double hi) {
  if (!(lo <= hi)) throw ConfigError("FeasibleSet::box requires lo <= hi");
  return FeasibleSet(Kind::Box, lo, hi);
}

double FeasibleSet::project(double v) const {
  switch (kind_) {
    case Kind::All:
      return v;
    case Kind::NonNegative:
      return v < 0.0 ? 0.0 : v;
    case Kind::Box:
      return std::clamp(v, lo_, hi_);
  }
  return v;
}

bool FeasibleSet::contains(double v) const { return project(v) == v; }

bool FeasibleSet::contains(std::span<const double> x) const {
  return std::all_of(x.begin(), x.end(), [this](double v) { return contains(v); });
}

// ---------------------------------------------------------------- objective

MbirObjective::MbirObjective(QuadraticDataFit datafit_, double gamma_, ImageVector anchor_, FeasibleSet feasible_)
    : datafit(std::move(datafit_)), gamma(gamma_), anchor(std::move(anchor_)), feasible(feasible_) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("MbirObjective: gamma must be > 0");
  require_dims(anchor.size(), datafit.image_size(), "MbirObjective anchor");
}

double MbirObjective::value(const ImageVector& x) const {
  require_dims(x.size(), datafit.image_size(), "MbirObjective::value");
  return datafit.value(x.view()) + 0.5 * gamma * squared_distance(x.view(), anchor.view());
}

ImageVector datafit_gradient(const QuadraticDataFit& f, const ImageVector& x) {
  require_dims(x.size(), f.image_size(), "datafit_gradient");
  ImageVector g(x.shape());
  f.value_and_gradient(x.view(), g.data());
  return g;
}

Vec raw_diag_majorizer(const QuadraticDataFit& f) {
  const LinearOperator& a = f.op();
  Vec ones(a.cols(), 1.0);
  Vec col_abs(a.rows());
  a.apply_abs(ones, col_abs);
  for (std::size_t i = 0; i < col_abs.size(); ++i) col_abs[i] *= f.weights()[i];
  Vec diag(a.cols());
  a.apply_abs_adjoint(col_abs, diag);
  return diag;
}

DiagonalMajorizer diag_majorizer(const QuadraticDataFit& f) {
  Vec diag = raw_diag_majorizer(f);
  const double max_entry = *std::max_element(diag.begin(), diag.end());
  const double floor = max_entry > 0.0 ? 1e-8 * max_entry : 1e-8;
  for (double& d : diag) d = std::max(d, floor);
  return DiagonalMajorizer(std::move(diag));
}

DiagonalMajorizer mbir_majorizer(const QuadraticDataFit& f, double gamma, double lambda) {
  if (!(gamma > 0.0)) throw ConfigError("mbir_majorizer: gamma must be > 0");
  Vec diag = raw_diag_majorizer(f);
  for (double& d : diag) d += gamma;
  return DiagonalMajorizer(std::move(diag), lambda);
}

ImageVector mbir_gradient(const MbirObjective& obj, const ImageVector& x) {
  require_dims(x.size(), obj.datafit.image_size(), "mbir_gradient");
  ImageVector g = datafit_gradient(obj.datafit, x);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += obj.gamma * (x[i] - obj.anchor[i]);
  return g;
}

double majorization_gap(const QuadraticDataFit& f, const DiagonalMajorizer& m, std::span<const double> u,
                        std::span<const double> v) {
  const std::size_t n = f.image_size();
  require_dims(u.size(), n, "majorization_gap u");
  require_dims(v.size(), n, "majorization_gap v");
  require_dims(m.size(), n, "majorization_gap majorizer");
  Vec grad(n);
  const double fv = f.value_and_gradient(v, grad);
  double rhs = fv;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = u[i] - v[i];
    rhs += grad[i] * d + 0.5 * m.lambda() * m.diag()[i] * d * d;
  }
  return rhs - f.value(u);
}

MajorizationReport verify_majorization(const QuadraticDataFit& f, const DiagonalMajorizer& m, std::size_t trials,
                                       std::uint64_t seed, double tolerance) {
  if (trials == 0) throw ConfigError("verify_majorization: trials must be >= 1");
  const std::size_t n = f.image_size();
  require_dims(m.size(), n, "verify_majorization majorizer");
  const DiagonalMajorizer mt = m.scaled();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> scale_dist(-3.0, 1.0);

  MajorizationReport report;
  report.trials = trials;
  Vec u(n), v(n), grad(n);
  for (std::size_t t = 0; t < trials; ++t) {
    // Mix step lengths over several decades so both near and far pairs are probed.
    const double spread = std::pow(10.0, scale_dist(rng));
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = normal(rng);
      u[i] = v[i] + spread * normal(rng);
    }
    const double fu = f.value(u);
    const double fv = f.value_and_gradient(v, grad);
    double lin = 0.0;
    double quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = u[i] - v[i];
      lin += grad[i] * d;
      quad += mt.diag()[i] * d * d;
    }
    const double rhs = fv + lin + 0.5 * quad;
    const double scale = std::max({std::abs(fu), std::abs(fv), std::abs(lin), 0.5 * quad, 1e-300});
    const double excess = (fu - rhs) / scale;
    if (excess > tolerance) ++report.violations;
    report.max_violation = std::max(report.max_violation, excess);
  }
  return report;
}

}  // namespace momnet
