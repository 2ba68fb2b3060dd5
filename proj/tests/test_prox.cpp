#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "momnet/error.hpp"
#include "momnet/prox.hpp"

using namespace momnet;

namespace {

// argmin_t 1/2 m (t - z)^2 + beta |t| on a uniform grid of spacing h.
double grid_argmin(double z, double m, double beta, double h) {
  const double lo = -std::abs(z) - 1.0, hi = std::abs(z) + 1.0;
  double best = 0.0, best_val = INFINITY;
  const auto steps = static_cast<long>((hi - lo) / h);
  for (long i = 0; i <= steps; ++i) {
    const double t = lo + i * h;
    const double v = 0.5 * m * (t - z) * (t - z) + beta * std::abs(t);
    if (v < best_val) {
      best_val = v;
      best = t;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("soft_threshold examples") {
  CHECK(soft_threshold(Vec{2.5, -0.5, 1.0}, 1.0) == Vec{1.5, 0.0, 0.0});
  CHECK(soft_threshold(Vec{2.5, -0.5, 1.0}, 0.0) == Vec{2.5, -0.5, 1.0});
  CHECK(soft_threshold(Vec{-3.0}, 1.0) == Vec{-2.0});
  CHECK(soft_threshold(-1.0, 1.0) == 0.0);
  CHECK_THROWS_AS(soft_threshold(Vec{1.0}, -0.1), ConfigError);
}

TEST_CASE("soft_threshold is the scalar l1 proximal point") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> d(-3.0, 3.0), a(0.0, 2.0);
  for (int t = 0; t < 100; ++t) {
    const double u = d(rng), alpha = a(rng);
    CHECK(std::abs(soft_threshold(u, alpha) - grid_argmin(u, 1.0, alpha, 1e-4)) <= 1e-4);
  }
}

TEST_CASE("prox_indicator examples") {
  const DiagonalMajorizer m({1.0, 5.0, 0.2});
  CHECK(prox_indicator(ImageVector::column({-1, 0.5, 2}), m, FeasibleSet::box(0, 1)).data() == Vec{0, 0.5, 1});
  CHECK(prox_indicator(ImageVector::column({0.1, 0.5, 0.9}), m, FeasibleSet::box(0, 1)).data() ==
        Vec{0.1, 0.5, 0.9});
  CHECK(prox_indicator(ImageVector::column({-2, 3}), DiagonalMajorizer({1, 1}), FeasibleSet::nonnegative()).data() ==
        Vec{0, 3});
  CHECK_THROWS_AS(prox_indicator(ImageVector::column({1, 2}), m, FeasibleSet::all()), DimensionError);
}

TEST_CASE("prox_indicator is idempotent and nonexpansive") {
  std::mt19937_64 rng(10);
  const FeasibleSet sets[] = {FeasibleSet::all(), FeasibleSet::nonnegative(), FeasibleSet::box(-0.3, 0.4)};
  const DiagonalMajorizer m(testing::random_vec(20, rng, 0.1, 5.0));
  for (const auto& set : sets) {
    for (int t = 0; t < 50; ++t) {
      const ImageVector u = ImageVector::column(testing::random_vec(20, rng, -2, 2));
      const ImageVector v = ImageVector::column(testing::random_vec(20, rng, -2, 2));
      const ImageVector pu = prox_indicator(u, m, set), pv = prox_indicator(v, m, set);
      CHECK(prox_indicator(pu, m, set) == pu);
      CHECK(distance(pu.view(), pv.view()) <= distance(u.view(), v.view()) + 1e-15);
      CHECK(set.contains(pu.view()));
    }
  }
}

TEST_CASE("prox_l1_metric examples") {
  CHECK(prox_l1_metric(Vec{2.5}, DiagonalMajorizer({1.0}), 1.0) == Vec{1.5});
  const Vec scaled = prox_l1_metric(Vec{2.5}, DiagonalMajorizer({2.0}), 1.0);
  CHECK(scaled == Vec{2.0});
  CHECK(std::abs(scaled[0] - grid_argmin(2.5, 2.0, 1.0, 1e-4)) <= 1e-4);
  CHECK(prox_l1_metric(Vec{2.5, -0.1}, DiagonalMajorizer({3.0, 7.0}), 0.0) == Vec{2.5, -0.1});
  CHECK_THROWS_AS(prox_l1_metric(Vec{1.0}, DiagonalMajorizer({1.0}), -1.0), ConfigError);
}

TEST_CASE("prox_l1_metric matches a grid minimizer per coordinate") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> zd(-3, 3), md(0.2, 5), bd(0, 2);
  for (int t = 0; t < 100; ++t) {
    const double z = zd(rng), m = md(rng), beta = bd(rng);
    const Vec p = prox_l1_metric(Vec{z}, DiagonalMajorizer({m}), beta);
    CHECK(std::abs(p[0] - grid_argmin(z, m, beta, 1e-4)) <= 1e-4);
  }
}
