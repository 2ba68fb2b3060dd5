#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <ostream>
#include <set>
#include <sstream>

#include "momnet/error.hpp"
#include "momnet/imaging.hpp"
#include "momnet/io.hpp"
#include "momnet/pipeline.hpp"
#include "momnet/refiner.hpp"
#include "momnet/solver.hpp"
#include "momnet/training.hpp"

namespace momnet::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;
constexpr double kDefaultChi = 167.64;

// ---------------------------------------------------------------- config

/// Object view that rejects keys outside an allowed set.
class Section {
public:
  Section() = default;
  Section(const json& j, std::string name, std::set<std::string> allowed) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError("config: '" + name_ + "' must be an object");
    for (const auto& [key, value] : j_.items()) {
      if (!allowed.count(key)) throw ConfigError("config: unknown key '" + key + "' in '" + name_ + "'");
    }
  }

  bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }

  template <class T>
  T get(const std::string& key, T fallback) const {
    if (!has(key)) return fallback;
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config: bad value for '" + name_ + "." + key + "'");
    }
  }

  template <class T>
  std::optional<T> opt(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return get<T>(key, T{});
  }

  const json& raw(const std::string& key) const { return j_.at(key); }

private:
  json j_ = json::object();
  std::string name_;
};

struct Config {
  std::string path;
  Section problem, solver, train, architecture, compare, diagnose;
};

const std::set<std::string> kProblemKeys = {"kind",        "n",         "phantom",      "phantom_seed", "truth",
                                            "operator",    "n_views",   "total_views",  "incident",     "sigma2",
                                            "noiseless",   "kernel_size", "kernel_sigma", "noise_std",  "initial"};
const std::set<std::string> kSolverKeys = {"kind",  "n_iter", "rho",    "gamma",      "chi",
                                           "delta", "lambda", "convex", "extrapolate", "inner_iters"};
const std::set<std::string> kTrainKeys = {"samples",    "validation", "chi",           "chi_grid",
                                          "tune_iters", "tune_epochs", "batch_size",   "epochs",
                                          "lr_filters", "lr_thresholds", "lr_decay",   "decay_every"};
const std::set<std::string> kArchKeys = {"type", "channels", "filter_size", "layers"};
const std::set<std::string> kCompareKeys = {"runs", "threshold"};
const std::set<std::string> kDiagnoseKeys = {"pairs", "perturbation"};

json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

Config load_config(const std::string& path) {
  Config c;
  c.path = path;
  if (path.empty()) return c;
  const json j = read_json_file(path);
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  const std::set<std::string> top = {"schema_version", "problem", "solver", "train", "architecture", "compare",
                                     "diagnose"};
  for (const auto& [key, value] : j.items()) {
    if (!top.count(key)) throw ConfigError("config: unknown key '" + key + "'");
  }
  if (!j.contains("schema_version") || !j["schema_version"].is_number_integer() ||
      j["schema_version"].get<int>() != kSchemaVersion) {
    throw ConfigError("config: schema_version must be " + std::to_string(kSchemaVersion));
  }
  const auto section = [&](const char* name, const std::set<std::string>& keys) {
    return j.contains(name) ? Section(j[name], name, keys) : Section(json::object(), name, keys);
  };
  c.problem = section("problem", kProblemKeys);
  c.solver = section("solver", kSolverKeys);
  c.train = section("train", kTrainKeys);
  c.architecture = section("architecture", kArchKeys);
  c.compare = section("compare", kCompareKeys);
  c.diagnose = section("diagnose", kDiagnoseKeys);
  return c;
}

// ---------------------------------------------------------------- files

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory '" + dir + "'");
}

void write_json(const std::string& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << j.dump(2) << '\n';
  if (!os) throw IoError("write to '" + path + "' failed");
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Manifest {
  std::string command;
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  std::string started = utc_now();
};

void write_manifest(const Manifest& m, const std::string& path, const std::vector<std::string>& artifacts) {
  json files = json::object();
  for (const auto& a : artifacts) files[fs::path(a).filename().string()] = sha256_file(a);
  json j = {{"schema_version", kSchemaVersion},
            {"command", m.command},
            {"config", m.config.empty() ? json(nullptr) : json(m.config)},
            {"seed", m.seed},
            {"out", m.out},
            {"started", m.started},
            {"finished", utc_now()},
            {"artifacts", files}};
  write_json(path, j);
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

// ---------------------------------------------------------------- samples

struct Sample {
  std::string kind;
  Shape shape;
  std::optional<ImageVector> truth;
  QuadraticDataFit datafit;
  ImageVector initial;
  FeasibleSet feasible;
};

Sample load_sample(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError("sample directory '" + dir + "' not found");
  const json meta = read_json_file(join(dir, "sample.json"));
  Shape shape{meta.at("height").get<std::size_t>(), meta.at("width").get<std::size_t>()};
  auto a = read_matrix(join(dir, "operator.txt"));
  Vec y = read_vector_csv(join(dir, "measurements.csv"));
  Vec w = read_vector_csv(join(dir, "weights.csv"));
  QuadraticDataFit f(a, std::move(w), std::move(y));
  ImageVector initial(shape, read_vector_csv(join(dir, "initial.csv")));
  std::optional<ImageVector> truth;
  if (fs::exists(join(dir, "truth.csv"))) truth = ImageVector(shape, read_vector_csv(join(dir, "truth.csv")));
  const std::string feas = meta.value("feasible", "all");
  const FeasibleSet set = feas == "nonnegative" ? FeasibleSet::nonnegative() : FeasibleSet::all();
  return {meta.value("kind", "ct"), shape, std::move(truth), std::move(f), std::move(initial), set};
}

struct RefinerSet {
  std::vector<Refiner> refiners;
  std::optional<double> chi;
};

RefinerSet load_refiners(const std::string& dir) {
  RefinerSet set;
  if (dir.empty()) return set;
  if (!fs::is_directory(dir)) throw IoError("refiner directory '" + dir + "' not found");
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("refiner_", 0) == 0 && entry.path().extension() == ".txt") files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no refiner files in '" + dir + "'");
  for (const auto& f : files) set.refiners.push_back(load_refiner_file(f));
  if (fs::exists(join(dir, "training.json"))) {
    const json t = read_json_file(join(dir, "training.json"));
    if (t.contains("chi")) set.chi = t["chi"].get<double>();
  }
  return set;
}

// ---------------------------------------------------------------- solver options

struct SolverFlags {
  std::string solver;
  std::optional<std::size_t> n_iter;
  std::optional<double> rho;
  std::optional<double> chi;
  std::optional<std::size_t> inner_iters;
  bool no_extrapolation = false;
};

const std::vector<std::string> kSolvers = {"momentum", "momentum-noextrap", "bcd"};

struct SolverSetup {
  std::string kind;
  MomentumNetConfig net;
  std::size_t inner_iters = 10;
};

SolverSetup make_solver(const Section& s, const SolverFlags& flags, const RefinerSet& refiners) {
  SolverSetup out;
  out.kind = !flags.solver.empty() ? flags.solver : s.get<std::string>("kind", "momentum");
  if (std::find(kSolvers.begin(), kSolvers.end(), out.kind) == kSolvers.end()) {
    throw ConfigError("unknown solver '" + out.kind + "'; valid choices: momentum, momentum-noextrap, bcd");
  }
  MomentumNetConfig& net = out.net;
  net.n_iter = flags.n_iter.value_or(s.get<std::size_t>("n_iter", refiners.refiners.empty()
                                                                       ? std::size_t{10}
                                                                       : refiners.refiners.size()));
  net.rho = flags.rho.value_or(s.get<double>("rho", 0.999));
  net.delta = s.get<double>("delta", net.delta);
  net.convex = s.get<bool>("convex", true);
  net.lambda = s.get<double>("lambda", net.convex ? 1.0 : 1.0 + 1e-3);
  net.extrapolate = s.get<bool>("extrapolate", true) && !flags.no_extrapolation && out.kind != "momentum-noextrap";
  if (flags.chi) {
    net.chi = flags.chi;
  } else if (s.has("gamma")) {
    net.gamma = s.get<double>("gamma", 1.0);
  } else if (s.has("chi")) {
    net.chi = s.get<double>("chi", kDefaultChi);
  } else {
    net.chi = refiners.chi.value_or(kDefaultChi);
  }
  out.inner_iters = flags.inner_iters.value_or(s.get<std::size_t>("inner_iters", 10));
  net.keep_iterates = false;
  net.validate();
  return out;
}

IterateTrace run_solver(const SolverSetup& setup, const std::vector<Refiner>& refiners, const Sample& sample,
                        bool fixed_point) {
  MomentumNetConfig net = setup.net;
  net.track_fixed_point = fixed_point;
  const std::vector<Refiner> rs = refiners.empty() ? std::vector<Refiner>{ScaleRefiner{1.0}} : refiners;
  if (setup.kind == "bcd") return run_bcd_net(net, rs, sample.datafit, sample.feasible, sample.initial, setup.inner_iters);
  return run_momentum_net(net, rs, sample.datafit, sample.feasible, sample.initial);
}

void add_solver_flags(CLI::App* cmd, SolverFlags& f) {
  cmd->add_option("--solver", f.solver, "Solver: momentum | momentum-noextrap | bcd");
  cmd->add_option("--n-iter", f.n_iter, "Outer iterations");
  cmd->add_option("--rho", f.rho, "Relaxation parameter in (0,1)");
  cmd->add_option("--chi", f.chi, "Spread-based regularization factor");
  cmd->add_option("--inner-iters", f.inner_iters, "APG iterations per BCD-Net step");
  cmd->add_flag("--no-extrapolation", f.no_extrapolation, "Disable momentum extrapolation");
}

// ---------------------------------------------------------------- commands

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool no_timing = false;
};

int cmd_phantom(std::size_t n, const std::string& kind, const Common& c, std::ostream& out) {
  if (c.out.empty()) throw ConfigError("--out is required");
  Manifest m{"phantom", c.config, c.seed.value_or(0), c.out};
  ImageVector img;
  if (kind == "shepp_logan") {
    img = shepp_logan(n);
  } else if (kind == "random") {
    img = random_ellipse_phantom(n, c.seed.value_or(0));
  } else {
    throw ConfigError("unknown phantom '" + kind + "'; valid choices: shepp_logan, random");
  }
  const fs::path parent = fs::path(c.out).parent_path();
  if (!parent.empty()) ensure_dir(parent.string());
  write_pgm(c.out, img);
  write_manifest(m, c.out + ".manifest.json", {c.out});
  out << "wrote " << c.out << '\n';
  return kOk;
}

int cmd_simulate(const Common& c, bool noiseless_flag, std::ostream& out) {
  if (c.out.empty()) throw ConfigError("--out is required");
  const Config cfg = load_config(c.config);
  const Section& p = cfg.problem;
  const std::uint64_t seed = c.seed.value_or(0);
  Manifest m{"simulate", c.config, seed, c.out};

  const std::string kind = p.get<std::string>("kind", "ct");
  if (kind != "ct" && kind != "deblur") throw ConfigError("unknown problem kind '" + kind + "'; valid: ct, deblur");
  const std::size_t n = p.get<std::size_t>("n", kind == "ct" ? 64 : 32);

  ImageVector truth;
  if (p.has("truth")) {
    truth = read_pgm(p.get<std::string>("truth", ""));
  } else {
    const std::string phantom = p.get<std::string>("phantom", "shepp_logan");
    if (phantom == "shepp_logan") {
      truth = shepp_logan(n);
    } else if (phantom == "random") {
      truth = random_ellipse_phantom(n, p.get<std::uint64_t>("phantom_seed", seed));
    } else {
      throw ConfigError("unknown phantom '" + phantom + "'");
    }
  }
  const Shape shape = truth.shape();

  std::shared_ptr<SparseMatrixOperator> a;
  if (p.has("operator")) {
    a = read_matrix(p.get<std::string>("operator", ""));
  } else if (kind == "ct") {
    if (shape.height != shape.width) throw ConfigError("CT phantoms must be square");
    CtGeometry g = CtGeometry::desk(shape.height, p.get<std::size_t>("n_views", 23));
    g.total_views = p.get<std::size_t>("total_views", 180);
    a = build_radon(g);
  } else {
    a = blur_matrix(shape, gaussian_kernel(p.get<std::size_t>("kernel_size", 5), p.get<double>("kernel_sigma", 1.2)));
  }
  require_dims(a->cols(), shape.size(), "operator columns");

  const bool noiseless = noiseless_flag || p.get<bool>("noiseless", false);
  Vec y, w;
  if (kind == "ct") {
    CtMeasurement meas =
        simulate_ct(truth, *a, p.get<double>("incident", 1e5), p.get<double>("sigma2", 25.0), seed, noiseless);
    y = std::move(meas.y);
    w = std::move(meas.weights);
  } else {
    y = a->forward(truth.view());
    const double sd = noiseless ? 0.0 : p.get<double>("noise_std", 0.01);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    if (sd > 0.0) {
      for (double& v : y) v += sd * noise(rng);
    }
    w.assign(y.size(), 1.0);
  }
  const QuadraticDataFit f(a, w, y);
  const std::string init_kind = p.get<std::string>("initial", kind == "ct" ? "backprojection" : "measurements");
  ImageVector initial;
  if (init_kind == "backprojection") {
    initial = backprojection_init(f, shape);
  } else if (init_kind == "measurements" && a->rows() == shape.size()) {
    initial = ImageVector(shape, y);
  } else if (init_kind == "zero") {
    initial = ImageVector(shape);
  } else {
    throw ConfigError("unsupported initialization '" + init_kind + "'");
  }

  ensure_dir(c.out);
  const std::vector<std::string> files = {join(c.out, "truth.pgm"),        join(c.out, "truth.csv"),
                                          join(c.out, "operator.txt"),     join(c.out, "measurements.csv"),
                                          join(c.out, "weights.csv"),      join(c.out, "initial.csv"),
                                          join(c.out, "sample.json")};
  write_pgm(files[0], truth);
  write_vector_csv(files[1], truth.data());
  write_matrix(files[2], *a);
  write_vector_csv(files[3], y);
  write_vector_csv(files[4], w);
  write_vector_csv(files[5], initial.data());
  write_json(files[6], {{"schema_version", kSchemaVersion},
                        {"kind", kind},
                        {"height", shape.height},
                        {"width", shape.width},
                        {"noiseless", noiseless},
                        {"seed", seed},
                        {"feasible", kind == "ct" ? "nonnegative" : "all"}});
  write_manifest(m, join(c.out, "manifest.json"), files);
  out << "wrote sample to " << c.out << '\n';
  return kOk;
}

TrainConfig train_config(const Section& t, std::uint64_t seed) {
  TrainConfig tc;
  tc.batch_size = t.get<std::size_t>("batch_size", 2);
  tc.epochs = t.get<std::size_t>("epochs", 30);
  tc.lr_filters = t.get<double>("lr_filters", 1e-3);
  tc.lr_thresholds = t.get<double>("lr_thresholds", 1e-1);
  tc.lr_decay = t.get<double>("lr_decay", 0.1);
  tc.decay_every = t.get<std::size_t>("decay_every", 10);
  tc.seed = seed;
  tc.validate();
  return tc;
}

int cmd_train(const Common& c, std::optional<std::size_t> n_iter_flag, std::optional<double> chi_flag,
              std::ostream& out) {
  if (c.config.empty()) throw ConfigError("--config is required");
  if (c.out.empty()) throw ConfigError("--out is required");
  const Config cfg = load_config(c.config);
  const std::uint64_t seed = c.seed.value_or(0);
  Manifest m{"train", c.config, seed, c.out};

  if (!cfg.train.has("samples")) throw ConfigError("train.samples is required");
  const auto dirs = cfg.train.get<std::vector<std::string>>("samples", {});
  if (dirs.empty()) throw ConfigError("train.samples is empty");
  std::vector<Sample> samples;
  for (const auto& d : dirs) samples.push_back(load_sample(d));
  for (const auto& s : samples) {
    if (!s.truth) throw ConfigError("training samples need a ground truth");
    if (!(s.shape == samples.front().shape)) throw DimensionError("training samples differ in shape");
  }

  ArchitectureSpec arch;
  arch.type = cfg.architecture.get<std::string>("type", "scnn");
  arch.channels = cfg.architecture.get<std::size_t>("channels", 8);
  arch.filter_size = cfg.architecture.get<std::size_t>("filter_size", 3);
  arch.layers = cfg.architecture.get<std::size_t>("layers", 4);
  arch.validate();

  MomentumNetConfig net;
  net.n_iter = n_iter_flag.value_or(cfg.solver.get<std::size_t>("n_iter", 10));
  net.rho = cfg.solver.get<double>("rho", 0.999);
  net.delta = cfg.solver.get<double>("delta", net.delta);
  net.extrapolate = cfg.solver.get<bool>("extrapolate", true);
  net.validate();
  const TrainConfig tc = train_config(cfg.train, seed);

  const auto to_training = [&](double chi) {
    std::vector<TrainingSample> ts;
    for (const auto& s : samples) {
      ts.emplace_back(*s.truth, s.initial, s.datafit, select_gamma(raw_diag_majorizer(s.datafit), chi), s.feasible);
    }
    return ts;
  };

  json record = json::object();
  double chi = chi_flag.value_or(cfg.train.get<double>("chi", kDefaultChi));
  if (!chi_flag && cfg.train.has("chi_grid")) {
    const auto grid = cfg.train.get<std::vector<double>>("chi_grid", {});
    if (grid.empty()) throw ConfigError("train.chi_grid is empty");
    if (!cfg.train.has("validation")) throw ConfigError("train.chi_grid requires train.validation");
    const Sample val = load_sample(cfg.train.get<std::string>("validation", ""));
    if (!val.truth) throw ConfigError("validation sample needs a ground truth");
    MomentumNetConfig tune = net;
    tune.n_iter = cfg.train.get<std::size_t>("tune_iters", std::max<std::size_t>(1, net.n_iter / 4));
    TrainConfig ttc = tc;
    ttc.epochs = cfg.train.get<std::size_t>("tune_epochs", std::max<std::size_t>(1, tc.epochs / 3));
    double best = std::numeric_limits<double>::infinity();
    json scores = json::array();
    for (double g : grid) {
      const GreedyResult r = greedy_train(to_training(g), arch, tune, ttc);
      MomentumNetConfig run = tune;
      run.chi = g;
      const IterateTrace tr = run_momentum_net(run, r.refiners, val.datafit, val.feasible, val.initial);
      if (tr.aborted) throw NumericError("validation run: " + tr.failure);
      const double score = rmse(tr.final_x, *val.truth);
      scores.push_back(score);
      if (score < best) {
        best = score;
        chi = g;
      }
    }
    record["chi_grid"] = grid;
    record["validation_rmse"] = scores;
  }

  const auto ts = to_training(chi);
  const GreedyResult result = greedy_train(ts, arch, net, tc);

  ensure_dir(c.out);
  std::vector<std::string> files;
  for (std::size_t i = 0; i < result.refiners.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "%03zu", i + 1);
    files.push_back(join(c.out, std::string("refiner_") + name + ".txt"));
    save_refiner_file(files.back(), result.refiners[i]);
    files.push_back(join(c.out, std::string("loss_") + name + ".csv"));
    write_loss_csv(files.back(), result.loss_histories[i]);
  }
  json gammas = json::array();
  for (const auto& s : ts) gammas.push_back(s.gamma);
  record["schema_version"] = kSchemaVersion;
  record["chi"] = chi;
  record["n_iter"] = net.n_iter;
  record["rho"] = net.rho;
  record["architecture"] = {{"type", arch.type},
                            {"channels", arch.channels},
                            {"filter_size", arch.filter_size},
                            {"layers", arch.layers}};
  record["gammas"] = gammas;
  record["final_losses"] = result.final_losses;
  files.push_back(join(c.out, "training.json"));
  write_json(files.back(), record);
  write_manifest(m, join(c.out, "manifest.json"), files);
  out << "trained " << result.refiners.size() << " refiners (chi " << chi << ") into " << c.out << '\n';
  return kOk;
}

int cmd_reconstruct(const Common& c, const SolverFlags& flags, const std::string& refiner_dir,
                    const std::string& input, std::ostream& out) {
  if (c.out.empty()) throw ConfigError("--out is required");
  if (input.empty()) throw ConfigError("--input is required");
  const Config cfg = load_config(c.config);
  Manifest m{"reconstruct", c.config, c.seed.value_or(0), c.out};
  const RefinerSet rs = load_refiners(refiner_dir);
  const SolverSetup setup = make_solver(cfg.solver, flags, rs);
  const Sample sample = load_sample(input);

  const IterateTrace trace = run_solver(setup, rs.refiners, sample, true);
  ensure_dir(c.out);
  std::vector<std::string> files = {join(c.out, "trace.csv"), join(c.out, "recon.csv"), join(c.out, "recon.pgm"),
                                    join(c.out, "summary.json")};
  write_trace_csv(files[0], trace, !c.no_timing);
  write_vector_csv(files[1], trace.final_x.data());
  write_pgm(files[2], trace.final_x);
  json summary = {{"schema_version", kSchemaVersion},
                  {"solver", setup.kind},
                  {"extrapolate", setup.net.extrapolate},
                  {"gamma", trace.gamma},
                  {"iterations", trace.iterations()},
                  {"aborted", trace.aborted}};
  if (trace.failed_iteration) summary["failed_iteration"] = *trace.failed_iteration;
  if (sample.truth) {
    summary["rmse"] = rmse(trace.final_x, *sample.truth);
    summary["rmse_initial"] = rmse(sample.initial, *sample.truth);
  }
  write_json(files[3], summary);
  write_manifest(m, join(c.out, "manifest.json"), files);
  if (trace.aborted) {
    out << "reconstruction aborted at iteration " << *trace.failed_iteration << ": " << trace.failure << '\n';
    return kNumericError;
  }
  out << "reconstructed " << trace.iterations() << " iterations into " << c.out << '\n';
  return kOk;
}

int cmd_diagnose(const Common& c, const SolverFlags& flags, const std::string& refiner_dir, const std::string& input,
                 std::optional<std::size_t> pairs_flag, std::ostream& out) {
  if (c.out.empty()) throw ConfigError("--out is required");
  if (input.empty()) throw ConfigError("--input is required");
  if (refiner_dir.empty()) throw ConfigError("--refiners is required");
  const Config cfg = load_config(c.config);
  const std::uint64_t seed = c.seed.value_or(0);
  Manifest m{"diagnose", c.config, seed, c.out};
  const RefinerSet rs = load_refiners(refiner_dir);
  SolverSetup setup = make_solver(cfg.solver, flags, rs);
  if (setup.kind == "bcd") throw ConfigError("diagnose runs Momentum-Net; use --solver momentum");
  const Sample sample = load_sample(input);

  DiagnosticsConfig dc;
  dc.random_pairs = pairs_flag.value_or(cfg.diagnose.get<std::size_t>("pairs", dc.random_pairs));
  dc.perturbation = cfg.diagnose.get<double>("perturbation", dc.perturbation);
  dc.seed = seed;
  const IterateTrace trace = diagnose_run(setup.net, rs.refiners, sample.datafit, sample.feasible, sample.initial, dc);

  ensure_dir(c.out);
  const std::string path = join(c.out, "diagnostics.csv");
  {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    const bool paired = rs.refiners.size() >= 2;
    os << (paired ? "iter,epsilon,delta,kappa\n" : "iter,kappa\n");
    for (const auto& r : trace.records) {
      os << r.iter << ',';
      if (paired) os << format_double(r.epsilon) << ',' << format_double(r.delta) << ',';
      os << format_double(r.kappa) << '\n';
    }
    if (!os) throw IoError("write to '" + path + "' failed");
  }
  write_manifest(m, join(c.out, "manifest.json"), {path});
  if (trace.aborted) {
    out << "diagnostics aborted at iteration " << *trace.failed_iteration << '\n';
    return kNumericError;
  }
  out << "wrote " << path << '\n';
  return kOk;
}

int cmd_compare(const Common& c, std::ostream& out) {
  if (c.config.empty()) throw ConfigError("--config is required");
  if (c.out.empty()) throw ConfigError("--out is required");
  const Config cfg = load_config(c.config);
  Manifest m{"compare", c.config, c.seed.value_or(0), c.out};
  if (!cfg.compare.has("runs")) throw ConfigError("compare.runs is required");
  const json& runs = cfg.compare.raw("runs");
  if (!runs.is_array() || runs.empty()) throw ConfigError("compare.runs must be a non-empty array");
  const double threshold = cfg.compare.get<double>("threshold", 1e-3);

  struct Run {
    std::string name;
    std::string solver;
    IterateTrace trace;
    std::optional<double> rmse;
  };
  std::vector<Run> results;
  std::optional<Shape> shape;
  std::set<std::string> names;
  const std::set<std::string> run_keys = {"name", "solver", "refiners", "input", "n_iter", "rho",
                                          "chi",  "gamma",  "inner_iters", "extrapolate"};
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const Section r(runs[k], "compare.runs[" + std::to_string(k) + "]", run_keys);
    const std::string name = r.get<std::string>("name", "run" + std::to_string(k + 1));
    if (!names.insert(name).second) throw ConfigError("duplicate run name '" + name + "'");
    if (!r.has("input")) throw ConfigError("run '" + name + "' needs an input sample");
    const Sample sample = load_sample(r.get<std::string>("input", ""));
    if (shape && !(*shape == sample.shape)) throw DimensionError("compare: runs have mismatched problem shapes");
    shape = sample.shape;
    const RefinerSet rs = load_refiners(r.get<std::string>("refiners", ""));
    SolverFlags flags;
    flags.solver = r.get<std::string>("solver", "momentum");
    json merged = cfg.solver.has("kind") ? json::object() : json::object();
    for (const char* key : {"n_iter", "rho", "chi", "gamma", "inner_iters", "extrapolate"}) {
      if (r.has(key)) merged[key] = r.raw(key);
    }
    const SolverSetup setup = make_solver(Section(merged, "run", kSolverKeys), flags, rs);
    IterateTrace trace = run_solver(setup, rs.refiners, sample, false);
    std::optional<double> err;
    if (sample.truth) err = rmse(trace.final_x, *sample.truth);
    results.push_back({name, setup.kind, std::move(trace), err});
  }

  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : results) {
    if (!r.trace.records.empty()) best = std::min(best, r.trace.records.back().objective);
  }
  ensure_dir(c.out);
  std::vector<std::string> files;
  const std::string summary = join(c.out, "summary.csv");
  {
    std::ofstream os(summary);
    if (!os) throw IoError("cannot open '" + summary + "' for writing");
    os << "name,solver,iterations,final_objective,final_rmse,iters_to_threshold,total_ms\n";
    for (const auto& r : results) {
      long hit = -1;
      double total_ms = 0.0;
      for (const auto& rec : r.trace.records) {
        total_ms += rec.wall_ms;
        if (hit < 0 && rec.objective <= best + threshold * std::abs(best)) hit = static_cast<long>(rec.iter);
      }
      const double fobj = r.trace.records.empty() ? std::numeric_limits<double>::quiet_NaN()
                                                  : r.trace.records.back().objective;
      os << r.name << ',' << r.solver << ',' << r.trace.iterations() << ',' << format_double(fobj) << ','
         << format_double(r.rmse.value_or(std::numeric_limits<double>::quiet_NaN())) << ',' << hit << ','
         << format_double(c.no_timing ? 0.0 : total_ms) << '\n';
    }
    if (!os) throw IoError("write to '" + summary + "' failed");
  }
  files.push_back(summary);
  for (const auto& r : results) {
    files.push_back(join(c.out, "trace_" + r.name + ".csv"));
    write_trace_csv(files.back(), r.trace, !c.no_timing);
  }
  write_manifest(m, join(c.out, "manifest.json"), files);
  const bool aborted = std::any_of(results.begin(), results.end(), [](const Run& r) { return r.trace.aborted; });
  out << "compared " << results.size() << " runs into " << c.out << '\n';
  return aborted ? kNumericError : kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Momentum-Net image reconstruction toolkit"};
  app.require_subcommand(1);

  Common common;
  SolverFlags flags;
  std::size_t phantom_n = 64;
  std::string phantom_kind = "shepp_logan";
  bool noiseless = false;
  std::optional<std::size_t> train_iters;
  std::optional<double> train_chi;
  std::string refiner_dir, input;
  std::optional<std::size_t> pairs;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", common.config, "JSON configuration file");
    cmd->add_option("--out", common.out, "Output path");
    cmd->add_option("--seed", common.seed, "Random seed");
  };

  auto* phantom = app.add_subcommand("phantom", "Write a phantom image");
  add_common(phantom);
  phantom->add_option("--n", phantom_n, "Image size");
  phantom->add_option("--kind", phantom_kind, "shepp_logan | random");

  auto* simulate = app.add_subcommand("simulate", "Simulate measurements for a phantom");
  add_common(simulate);
  simulate->add_flag("--noiseless", noiseless, "Noise-free measurements");

  auto* train = app.add_subcommand("train", "Greedy training of per-iteration refiners");
  add_common(train);
  train->add_option("--n-iter", train_iters, "Number of iterations / refiners");
  train->add_option("--chi", train_chi, "Spread-based regularization factor");

  auto* recon = app.add_subcommand("reconstruct", "Reconstruct a sample");
  add_common(recon);
  add_solver_flags(recon, flags);
  recon->add_option("--refiners", refiner_dir, "Directory of trained refiners");
  recon->add_option("--input", input, "Sample directory");
  recon->add_flag("--no-timing", common.no_timing, "Write zero wall times");

  auto* diag = app.add_subcommand("diagnose", "Estimate refiner diagnostics along a run");
  add_common(diag);
  add_solver_flags(diag, flags);
  diag->add_option("--refiners", refiner_dir, "Directory of trained refiners");
  diag->add_option("--input", input, "Sample directory");
  diag->add_option("--pairs", pairs, "Random perturbation pairs per iteration");

  auto* compare = app.add_subcommand("compare", "Run several solvers and summarize");
  add_common(compare);
  compare->add_flag("--no-timing", common.no_timing, "Write zero wall times");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (phantom->parsed()) return cmd_phantom(phantom_n, phantom_kind, common, out);
    if (simulate->parsed()) return cmd_simulate(common, noiseless, out);
    if (train->parsed()) return cmd_train(common, train_iters, train_chi, out);
    if (recon->parsed()) return cmd_reconstruct(common, flags, refiner_dir, input, out);
    if (diag->parsed()) return cmd_diagnose(common, flags, refiner_dir, input, pairs, out);
    if (compare->parsed()) return cmd_compare(common, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DimensionError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kNumericError;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}

}  // namespace momnet::cli
