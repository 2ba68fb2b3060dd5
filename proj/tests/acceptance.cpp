// Acceptance suite: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cli.hpp"
#include "helpers.hpp"
#include "momnet/datafit.hpp"
#include "momnet/imaging.hpp"
#include "momnet/io.hpp"
#include "momnet/pipeline.hpp"
#include "momnet/prox.hpp"
#include "momnet/refiner.hpp"
#include "momnet/solver.hpp"
#include "momnet/training.hpp"

using namespace momnet;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// ---------------------------------------------------------------- 1

Outcome majorizer_validity() {
  std::mt19937_64 rng(101);
  std::vector<QuadraticDataFit> problems;
  const auto random_weights = [&](std::size_t rows) {
    Vec w = testing::random_vec(rows, rng, 0.0, 3.0);
    for (std::size_t i = 0; i < rows; i += 7) w[i] = 0.0;
    return w;
  };
  std::uniform_int_distribution<std::size_t> rows_d(16, 320), cols_d(8, 256);
  for (int t = 0; t < 40; ++t) {
    const std::size_t rows = rows_d(rng), cols = cols_d(rng);
    problems.emplace_back(testing::random_sparse(rows, cols, 0.05 + 0.02 * (t % 10), rng), random_weights(rows),
                          Vec(rows, 0.0));
  }
  for (std::size_t n : {8, 10, 12, 14, 16, 16, 12, 8}) {
    const auto a = build_radon(CtGeometry::desk(n, 4 + n / 2));
    problems.emplace_back(a, random_weights(a->rows()), Vec(a->rows(), 0.0));
  }
  for (std::size_t views : {23, 90}) {
    const auto a = build_radon(CtGeometry::desk(64, views));
    problems.emplace_back(a, random_weights(a->rows()), Vec(a->rows(), 0.0));
  }

  std::size_t eig_checked = 0, eig_failed = 0, violations = 0;
  double worst_eig = 0.0, worst_violation = 0.0;
  for (std::size_t k = 0; k < problems.size(); ++k) {
    const QuadraticDataFit& f = problems[k];
    const DiagonalMajorizer m = diag_majorizer(f);
    if (f.image_size() <= 256) {
      const Eigen::MatrixXd a = testing::dense(f.op());
      const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(f.weights().data(), f.weights().size());
      Eigen::MatrixXd gap = -(a.transpose() * w.asDiagonal() * a);
      for (std::size_t j = 0; j < m.size(); ++j) gap(j, j) += m.diag()[j];
      const double scale = m.max_entry();
      const double rel = testing::min_eigenvalue(gap) / scale;
      worst_eig = std::min(worst_eig, rel);
      ++eig_checked;
      if (rel < -1e-10) ++eig_failed;
    }
    const MajorizationReport rep = verify_majorization(f, m, 1000, 5000 + k, 1e-10);
    violations += rep.violations;
    worst_violation = std::max(worst_violation, rep.max_violation);
  }
  Outcome o;
  o.pass = eig_failed == 0 && violations == 0;
  o.detail = std::to_string(problems.size()) + " operators, " + std::to_string(eig_checked) +
             " eigen-checked (min rel eig " + fmt("%.2e", worst_eig) + "), " + std::to_string(violations) +
             " violations in " + std::to_string(problems.size() * 1000) + " pairs";
  return o;
}

// ---------------------------------------------------------------- 2

double grid_argmin_1d(double z, double m, double beta, double h) {
  const double lo = -std::abs(z) - 1.0;
  const auto steps = static_cast<long>(2.0 * (std::abs(z) + 1.0) / h);
  double best = 0.0, best_val = INFINITY;
  for (long i = 0; i <= steps; ++i) {
    const double t = lo + i * h;
    const double v = 0.5 * m * (t - z) * (t - z) + beta * std::abs(t);
    if (v < best_val) best_val = v, best = t;
  }
  return best;
}

Vec grid_argmin_2d(const MbirObjective& obj, double lo, double hi) {
  const auto eval = [&](double a, double b) { return obj.value(ImageVector::column({a, b})); };
  double ba = lo, bb = lo, best = INFINITY;
  for (double a = lo; a <= hi + 1e-12; a += 1e-2)
    for (double b = lo; b <= hi + 1e-12; b += 1e-2)
      if (const double v = eval(a, b); v < best) best = v, ba = a, bb = b;
  const double ca = ba, cb = bb;
  for (int i = -200; i <= 200; ++i)
    for (int j = -200; j <= 200; ++j) {
      const double a = std::clamp(ca + i * 1e-4, lo, hi), b = std::clamp(cb + j * 1e-4, lo, hi);
      if (const double v = eval(a, b); v < best) best = v, ba = a, bb = b;
    }
  return {ba, bb};
}

Outcome prox_oracles() {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> zd(-3, 3), md(0.2, 5), bd(0, 2);
  double worst_prox = 0.0, worst_apg = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + t % 4;
    Vec z(n), m(n);
    for (std::size_t j = 0; j < n; ++j) z[j] = zd(rng), m[j] = md(rng);
    const double beta = bd(rng);
    const Vec p = prox_l1_metric(z, DiagonalMajorizer(m), beta);
    for (std::size_t j = 0; j < n; ++j) {
      worst_prox = std::max(worst_prox, std::abs(p[j] - grid_argmin_1d(z[j], m[j], beta, 1e-4)));
    }
  }
  for (int t = 0; t < 100; ++t) {
    Vec a = testing::random_vec(4, rng, -0.4, 0.4);
    a[0] += 1.0;
    a[3] += 1.0;
    const QuadraticDataFit f(testing::matrix(2, 2, a), testing::random_vec(2, rng, 0.5, 2.0),
                             testing::random_vec(2, rng, -2, 2));
    const MbirObjective obj(f, 0.5, ImageVector::column(testing::random_vec(2, rng)), FeasibleSet::box(-0.5, 0.5));
    const Vec x = apg_solve(obj, ImageVector::column({0, 0}), 2000).data();
    worst_apg = std::max(worst_apg, testing::max_abs_diff(x, grid_argmin_2d(obj, -0.5, 0.5)));
  }
  return {worst_prox <= 1e-4 && worst_apg <= 1e-4,
          "max |prox - grid| " + fmt("%.2e", worst_prox) + ", max |apg - grid| " + fmt("%.2e", worst_apg) +
              " (tol 1e-4, 100 instances each)"};
}

// ---------------------------------------------------------------- 3

Outcome momentum_recurrence() {
  MomentumState s;
  const MomentumState s1 = momentum_update(s);
  const MomentumState s2 = momentum_update(s1);
  bool increasing = true, in_range = true;
  for (int i = 0; i < 1000; ++i) {
    const MomentumState next = momentum_update(s);
    if (!(next.theta > s.theta)) increasing = false;
    if (!(next.m >= 0.0 && next.m < 1.0)) in_range = false;
    s = next;
  }
  const bool m1_ok = s1.m == 0.0;
  const bool m2_ok = std::abs(s2.m - 0.28174) <= 1e-5;
  return {m1_ok && m2_ok && increasing && in_range,
          "m1 " + fmt("%.1f", s1.m) + ", m2 " + fmt("%.10f", s2.m) + " vs 0.28174 +- 1e-5 (" +
              (m2_ok ? "ok" : "off by " + fmt("%.3e", std::abs(s2.m - 0.28174))) + "), theta increasing " +
              (increasing ? "yes" : "no") + ", m in [0,1) " + (in_range ? "yes" : "no")};
}

// ---------------------------------------------------------------- 4

Outcome extrapolation_condition() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> logd(-3.0, 3.0), unit(0.0, 1.0), lam(1.0, 10.0);
  std::uniform_int_distribution<int> steps(0, 60);
  std::size_t checked = 0, failed = 0;
  for (int t = 0; t < 1000; ++t) {
    Vec prev(32), cur(32);
    for (std::size_t j = 0; j < prev.size(); ++j) {
      prev[j] = std::pow(10.0, logd(rng));
      cur[j] = std::pow(10.0, logd(rng));
    }
    MomentumState s;
    s.delta = unit(rng);
    for (int k = steps(rng); k > 0; --k) s = momentum_update(s);
    const DiagonalMajorizer mp(prev), mc(cur);
    for (bool convex : {true, false}) {
      const double lambda = convex ? 1.0 : lam(rng);
      const Vec e = extrapolation_matrix(mp, mc, s, lambda, convex);
      ++checked;
      if (!check_extrapolation_condition(e, mp, mc, s.delta, lambda, convex)) ++failed;
    }
  }
  return {failed == 0, std::to_string(checked) + " matrices checked, " + std::to_string(failed) + " failures"};
}

// ---------------------------------------------------------------- 5

double caol_gap(const DeblurProblem& p, double gamma, double beta, double rho, std::size_t iters) {
  const FilterBank bank = make_tf_filterbank(4);
  MomentumNetConfig net;
  net.n_iter = iters;
  net.rho = rho;
  net.gamma = gamma;
  const IterateTrace a =
      run_momentum_net(net, {TiedCaolRefiner(bank, Vec(4, beta), true)}, p.datafit, FeasibleSet::all(), p.x0);
  const IterateTrace b = run_caol_bpegm(p.datafit, bank, Vec(4, beta), gamma, FeasibleSet::all(), p.x0, iters);
  double worst = 0.0;
  for (std::size_t i = 0; i < iters; ++i) {
    worst = std::max(worst, distance(a.records[i].x->view(), b.records[i].x->view()) / norm(b.records[i].x->view()));
  }
  return worst;
}

Outcome caol_equivalence() {
  const DeblurProblem p = make_deblur_problem(DeblurConfig{});
  const double gamma = select_gamma(raw_diag_majorizer(p.datafit), 167.64);
  const double gap = caol_gap(p, gamma, 1e-4, 1.0 - 1e-9, 50);
  const double gap_large_beta = caol_gap(p, gamma, 1e-2, 1.0 - 1e-9, 50);
  return {gap <= 1e-12, "32x32, R=K=4, gamma " + fmt("%.6g", gamma) + ", beta 1e-4: max rel gap " + fmt("%.2e", gap) +
                            " (tol 1e-12); beta 1e-2 for reference: " + fmt("%.2e", gap_large_beta)};
}

// ---------------------------------------------------------------- 6, 7

struct ConvexSetup {
  DeblurProblem problem = make_deblur_problem(DeblurConfig{});
  TiedCaolRefiner refiner{make_tf_filterbank(4), Vec(4, 0.02), true};
  MomentumNetConfig net;
  ConvexSetup() {
    net.gamma = 0.1;
    net.rho = 0.999;
    net.keep_iterates = false;
  }
};

Outcome convergence_witness(const ConvexSetup& c) {
  MomentumNetConfig net = c.net;
  net.n_iter = 500;
  const IterateTrace t = run_momentum_net(net, {c.refiner}, c.problem.datafit, FeasibleSet::all(), c.problem.x0);
  long first = -1;
  for (const auto& r : t.records) {
    if (first < 0 && r.step_residual <= 1e-6 * norm(t.final_x.view())) first = static_cast<long>(r.iter);
  }
  const double fpr = fixed_point_residual(t.final_x, c.refiner, net, c.problem.datafit, FeasibleSet::all(),
                                          mbir_majorizer(c.problem.datafit, *net.gamma));
  const double final_step = t.records.back().step_residual / norm(t.final_x.view());
  return {!t.aborted && first > 0 && fpr <= 1e-6,
          "relative step residual <= 1e-6 at iteration " + std::to_string(first) + " (final " +
              fmt("%.2e", final_step) + "), fixed-point residual " + fmt("%.2e", fpr) + " at 500"};
}

Outcome extrapolation_accelerates(const ConvexSetup& c) {
  MomentumNetConfig net = c.net;
  net.n_iter = 2000;
  const IterateTrace with = run_momentum_net(net, {c.refiner}, c.problem.datafit, FeasibleSet::all(), c.problem.x0);
  net.extrapolate = false;
  const IterateTrace without = run_momentum_net(net, {c.refiner}, c.problem.datafit, FeasibleSet::all(), c.problem.x0);
  const double ref = std::min(with.records.back().objective, without.records.back().objective);
  const auto hit = [&](const IterateTrace& t) {
    for (const auto& r : t.records)
      if (r.objective <= ref + 1e-3 * std::abs(ref)) return static_cast<long>(r.iter);
    return -1L;
  };
  const long a = hit(with), b = hit(without);
  return {a > 0 && b > 0 && a <= b, "iterations to 0.1% of F_ref " + fmt("%.6g", ref) + ": with extrapolation " +
                                        std::to_string(a) + ", without " + std::to_string(b)};
}

// ---------------------------------------------------------------- 8

Outcome patch_bound() {
  const PatchBoundSummary a = patch_loss_bound_trials(50, 808, {12, 12}, 4, 3);
  const PatchBoundSummary b = patch_loss_bound_trials(50, 809, {9, 11}, 6, 5);
  const std::size_t v = a.violations + b.violations;
  return {a.trials + b.trials == 100 && v == 0,
          std::to_string(a.trials + b.trials) + " draws, " + std::to_string(v) + " violations, max excess " +
              fmt("%.2e", std::max(a.max_excess, b.max_excess))};
}

// ---------------------------------------------------------------- 9

double gradient_error(const Refiner& r, const std::vector<TrainingPair>& pairs) {
  std::vector<std::size_t> batch(pairs.size());
  for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = i;
  Vec g, unused;
  loss_and_gradient(r, pairs, batch, g);
  const Vec p = get_parameters(r);
  const auto loss_at = [&](std::size_t j, double step) {
    Refiner q = r;
    Vec v = p;
    v[j] += step;
    set_parameters(q, v);
    return loss_and_gradient(q, pairs, batch, unused);
  };
  const double h = 1e-5;
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double c1 = (loss_at(j, h) - loss_at(j, -h)) / (2 * h);
    const double c2 = (loss_at(j, 2 * h) - loss_at(j, -2 * h)) / (4 * h);
    if (std::abs(c1 - c2) > 1e-6 * std::max(1.0, std::abs(c1))) continue;  // kink inside the stencil
    num += (g[j] - c1) * (g[j] - c1);
    den += c1 * c1;
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

Outcome training_sanity() {
  std::mt19937_64 rng(909);
  std::vector<TrainingPair> pairs;
  for (int i = 0; i < 3; ++i) {
    const ImageVector truth = testing::random_image({8, 8}, rng, 0.0, 1.0);
    ImageVector input = truth;
    for (std::size_t j = 0; j < input.size(); ++j) input[j] += 0.2 * testing::random_vec(1, rng)[0];
    pairs.push_back({truth, input});
  }
  ScnnRefiner scnn = std::get<ScnnRefiner>(initialize_refiner({"scnn", 4, 3, 2}, 1));
  for (double& a : scnn.log_thresholds) a = std::log(0.05);
  const std::vector<Refiner> models = {scnn, initialize_refiner({"dcnn", 3, 3, 3}, 2),
                                       TiedCaolRefiner(make_tf_filterbank(4), {0.01, 0.02, 0.03, 0.04}, true),
                                       ScaleRefiner{0.7}};
  double worst_grad = 0.0;
  for (const auto& m : models) worst_grad = std::max(worst_grad, gradient_error(m, pairs));

  TrainConfig full;
  full.epochs = 10;
  full.batch_size = pairs.size();
  full.seed = 5;
  const TrainResult r1 = train_refiner(scnn, pairs, full), r2 = train_refiner(scnn, pairs, full);
  const bool reproducible = get_parameters(r1.refiner) == get_parameters(r2.refiner) && r1.loss_history == r2.loss_history;

  std::vector<TrainingPair> lin;
  for (int i = 0; i < 4; ++i) {
    const ImageVector x = testing::random_image({4, 4}, rng);
    lin.push_back({2.5 * x, x});
  }
  TrainConfig reg;
  reg.epochs = 200;
  reg.batch_size = lin.size();
  reg.lr_filters = 0.05;
  const double reg_loss = train_refiner(ScaleRefiner{1.0}, lin, reg).final_loss;

  return {worst_grad <= 1e-4 && reproducible && reg_loss < 1e-8,
          "max gradient rel error " + fmt("%.2e", worst_grad) + " (tol 1e-4), bit-reproducible " +
              (reproducible ? "yes" : "no") + ", regression loss " + fmt("%.2e", reg_loss)};
}

// ---------------------------------------------------------------- 10, 11

struct CtRun {
  CtExperimentConfig cfg;
  std::optional<CtDataset> data;
  CtExperimentResult result;
};

CtExperimentConfig ct_config() {
  CtExperimentConfig cfg;
  cfg.n_iter = 20;
  cfg.chi_grid = {0.3, 1.0, 3.0, 10.0, 30.0};
  cfg.train.epochs = 40;
  cfg.train.batch_size = 2;
  cfg.tune_iters = 4;
  cfg.tune_train = cfg.train;
  cfg.tune_train.epochs = 10;
  return cfg;
}

Outcome ct_end_to_end(CtRun& run) {
  run.cfg = ct_config();
  run.data = make_ct_dataset(run.cfg);
  run.result = run_ct_experiment(run.cfg, *run.data);
  bool ok = run.result.heldout.size() == 2;
  std::string detail = "chi " + fmt("%g", run.result.chi) + " (validation rmse";
  for (double v : run.result.chi_validation_rmse) detail += " " + fmt("%.4f", v);
  detail += ");";
  for (const auto& e : run.result.heldout) {
    ok = ok && e.rmse_momentum < e.rmse_init && e.rmse_momentum < e.rmse_baseline;
    detail += " " + e.name + ": init " + fmt("%.4f", e.rmse_init) + ", majorized " + fmt("%.4f", e.rmse_baseline) +
              ", momentum-net " + fmt("%.4f", e.rmse_momentum) + ";";
  }
  return {ok, detail};
}

void write_sample(const std::string& dir, const CtCase& c, const SparseMatrixOperator& a) {
  fs::create_directories(dir);
  write_matrix(dir + "/operator.txt", a);
  write_vector_csv(dir + "/measurements.csv", c.measurement.y);
  write_vector_csv(dir + "/weights.csv", c.measurement.weights);
  write_vector_csv(dir + "/initial.csv", c.x0.data());
  write_vector_csv(dir + "/truth.csv", c.truth.data());
  std::ofstream(dir + "/sample.json") << nlohmann::json{{"schema_version", 1},
                                                        {"kind", "ct"},
                                                        {"height", c.truth.height()},
                                                        {"width", c.truth.width()},
                                                        {"feasible", "nonnegative"}}
                                             .dump(2);
}

Outcome diagnostics_pipeline(const CtRun& run) {
  if (run.result.training.refiners.empty()) return {false, "no trained model"};
  const fs::path root = fs::temp_directory_path() / ("momnet_acceptance_" + std::to_string(std::random_device{}()));
  const std::string models = (root / "model").string(), sample = (root / "sample").string(),
                    out = (root / "diag").string();
  fs::create_directories(models);
  for (std::size_t i = 0; i < run.result.training.refiners.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "/refiner_%03zu.txt", i + 1);
    save_refiner_file(models + name, run.result.training.refiners[i]);
  }
  std::ofstream(models + "/training.json") << nlohmann::json{{"chi", run.result.chi}}.dump();
  write_sample(sample, run.data->heldout.front(), *run.data->a);

  std::ostringstream sout, serr;
  const int code = cli::run({"momnet", "diagnose", "--refiners", models, "--input", sample, "--out", out, "--seed",
                             "11"},
                            sout, serr);
  Outcome o;
  if (code != 0) {
    fs::remove_all(root);
    return {false, "diagnose exited with " + std::to_string(code) + ": " + serr.str()};
  }
  std::ifstream is(out + "/diagnostics.csv");
  std::string line;
  std::getline(is, line);
  const bool header_ok = line == "iter,epsilon,delta,kappa";
  std::vector<double> eps, delta, kappa;
  while (std::getline(is, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) v.push_back(cell == "nan" ? NAN : std::stod(cell));
    if (v.size() != 4) continue;
    eps.push_back(v[1]);
    delta.push_back(v[2]);
    kappa.push_back(v[3]);
  }
  fs::remove_all(root);
  const auto window_mean = [](const std::vector<double>& v, std::size_t begin, std::size_t end) {
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t i = begin; i < end && i < v.size(); ++i)
      if (std::isfinite(v[i])) s += v[i], ++n;
    return n ? s / n : NAN;
  };
  const std::size_t n = delta.size();
  const double first = window_mean(delta, 0, 10), last = window_mean(delta, n >= 10 ? n - 10 : 0, n);
  const auto finite = [](const std::vector<double>& v) {
    return std::count_if(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  o.pass = header_ok && n >= 20 && finite(kappa) == static_cast<long>(n) && finite(eps) > 0 && std::isfinite(first) &&
           std::isfinite(last) && last <= first;
  o.detail = std::to_string(n) + " iterations (" + std::to_string(finite(kappa)) + " kappa, " +
             std::to_string(finite(eps)) + " epsilon, " + std::to_string(finite(delta)) +
             " delta values); mean delta first 10 " + fmt("%.3e", first) + ", last 10 " + fmt("%.3e", last) +
             "; kappa range " + fmt("%.3f", *std::min_element(kappa.begin(), kappa.end())) + ".." +
             fmt("%.3f", *std::max_element(kappa.begin(), kappa.end()));
  return o;
}

// ---------------------------------------------------------------- 12

Outcome bcd_baseline() {
  const DeblurProblem p = make_deblur_problem(DeblurConfig{});
  MomentumNetConfig net;
  net.n_iter = 200;
  net.gamma = 0.1;
  net.keep_iterates = false;
  const IterateTrace t = run_bcd_net(net, {ScaleRefiner{0.5}}, p.datafit, FeasibleSet::all(), p.x0, 10);
  double tail = 0.0;
  for (std::size_t i = t.records.size() - 10; i < t.records.size(); ++i) {
    tail = std::max(tail, t.records[i].step_residual);
  }
  long first = -1;
  for (const auto& r : t.records)
    if (first < 0 && r.step_residual <= 1e-8) first = static_cast<long>(r.iter);
  return {!t.aborted && t.records.size() == 200 && tail <= 1e-8,
          "max step residual over last 10 of 200 outer iterations " + fmt("%.2e", tail) + " (first <= 1e-8 at " +
              std::to_string(first) + ")"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;  // 0: no runtime bound
    std::function<Outcome()> run;
  };
  ConvexSetup convex;
  CtRun ct;
  const std::vector<Criterion> criteria = {
      {1, "majorizer validity", 60, majorizer_validity},
      {2, "prox oracles", 30, prox_oracles},
      {3, "momentum recurrence", 0, momentum_recurrence},
      {4, "extrapolation condition", 0, extrapolation_condition},
      {5, "CAOL equivalence", 0, caol_equivalence},
      {6, "convergence witnesses", 60, [&] { return convergence_witness(convex); }},
      {7, "extrapolation accelerates", 0, [&] { return extrapolation_accelerates(convex); }},
      {8, "patch loss bound", 0, patch_bound},
      {9, "training sanity", 0, training_sanity},
      {10, "end-to-end CT", 900, [&] { return ct_end_to_end(ct); }},
      {11, "diagnostics pipeline", 0, [&] { return diagnostics_pipeline(ct); }},
      {12, "BCD-Net baseline", 0, bcd_baseline},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_s > 0 && secs > c.limit_s) {
      o.pass = false;
      o.detail += "; runtime over " + fmt("%.0f", c.limit_s) + " s";
    }
    if (!o.pass) ++failures;
    std::printf("%s criterion %2d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
