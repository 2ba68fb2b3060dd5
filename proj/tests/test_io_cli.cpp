#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "helpers.hpp"
#include "momnet/error.hpp"
#include "momnet/imaging.hpp"
#include "momnet/io.hpp"

using namespace momnet;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("momnet_test_" + tag + "_" + std::to_string(std::random_device{}()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "momnet");
  std::ostringstream out, err;
  return cli::run(args, out, err);
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  os << text;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream is(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::string deblur_config(const TempDir& d, const std::string& extra = "") {
  const std::string path = d / "deblur.json";
  write_text(path, R"({"schema_version": 1, "problem": {"kind": "deblur", "n": 16, "kernel_size": 3,
    "kernel_sigma": 0.8, "phantom": "random"})" + extra + "}");
  return path;
}

}  // namespace

TEST_CASE("io round trips") {
  TempDir d("io");
  std::mt19937_64 rng(1);

  const auto a = testing::random_sparse(7, 5, 0.4, rng);
  write_matrix(d / "a.txt", *a);
  const auto b = read_matrix(d / "a.txt");
  CHECK(testing::dense(*a) == testing::dense(*b));

  const Vec v = testing::random_vec(13, rng, -1e6, 1e6);
  write_vector_csv(d / "v.csv", v);
  CHECK(read_vector_csv(d / "v.csv") == v);

  const ImageVector img = testing::random_image({5, 4}, rng, -0.2, 1.2);
  write_pgm(d / "x.pgm", img);
  const ImageVector back = read_pgm(d / "x.pgm");
  CHECK(back.shape() == img.shape());
  for (std::size_t j = 0; j < img.size(); ++j) {
    CHECK(std::abs(back[j] - std::clamp(img[j], 0.0, 1.0)) <= 0.5 / 65535 + 1e-15);
  }
  CHECK(sha256_file(d / "v.csv").size() == 64);

  write_text(d / "empty.txt", "");
  CHECK_THROWS_AS(read_matrix(d / "missing.txt"), IoError);
  CHECK_THROWS_AS(read_vector_csv(d / "missing.csv"), IoError);
  CHECK_THROWS_AS(read_matrix(d / "empty.txt"), IoError);
  write_text(d / "bad.csv", "1.0\nabc\n");
  CHECK_THROWS_AS(read_vector_csv(d / "bad.csv"), IoError);
}

TEST_CASE("sha256 of known content") {
  TempDir d("sha");
  write_text(d / "abc.txt", "abc");
  CHECK(sha256_file(d / "abc.txt") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("cli phantom") {
  TempDir d("phantom");
  REQUIRE(run({"phantom", "--n", "64", "--out", d / "sl.pgm"}) == cli::kOk);
  const std::string bytes = slurp(d / "sl.pgm");
  CHECK(bytes.rfind("P5 64 64 65535\n", 0) == 0);
  CHECK(bytes.size() == 15 + 64 * 64 * 2);
  REQUIRE(run({"phantom", "--n", "64", "--out", d / "sl2.pgm"}) == cli::kOk);
  CHECK(slurp(d / "sl2.pgm") == bytes);
  CHECK(fs::exists(d / "sl.pgm.manifest.json"));
  CHECK(run({"phantom", "--n", "8", "--out", d / "small.pgm"}) == cli::kConfigError);
  CHECK(run({"phantom", "--kind", "square", "--out", d / "sq.pgm"}) == cli::kConfigError);
  CHECK(run({"phantom", "--n", "64"}) == cli::kConfigError);
  CHECK(run({"bogus"}) == cli::kConfigError);
}

TEST_CASE("cli simulate") {
  TempDir d("simulate");
  const std::string cfg = deblur_config(d);
  REQUIRE(run({"simulate", "--config", cfg, "--out", d / "clean", "--noiseless"}) == cli::kOk);
  const auto a = read_matrix(d / "clean/operator.txt");
  const Vec truth = read_vector_csv(d / "clean/truth.csv");
  const Vec y = read_vector_csv(d / "clean/measurements.csv");
  CHECK(testing::max_abs_diff(a->forward(truth), y) <= 1e-12);
  CHECK(read_vector_csv(d / "clean/weights.csv") == Vec(y.size(), 1.0));

  REQUIRE(run({"simulate", "--config", cfg, "--out", d / "n1", "--seed", "5"}) == cli::kOk);
  REQUIRE(run({"simulate", "--config", cfg, "--out", d / "n2", "--seed", "5"}) == cli::kOk);
  for (const char* f : {"measurements.csv", "weights.csv", "initial.csv", "truth.csv", "operator.txt"}) {
    CHECK(slurp(d / (std::string("n1/") + f)) == slurp(d / (std::string("n2/") + f)));
  }
  const json m1 = json::parse(slurp(d / "n1/manifest.json")), m2 = json::parse(slurp(d / "n2/manifest.json"));
  CHECK(m1["artifacts"] == m2["artifacts"]);
  CHECK(m1["seed"] == 5);
  CHECK(m1["command"] == "simulate");

  REQUIRE(run({"simulate", "--config", cfg, "--out", d / "n3", "--seed", "6"}) == cli::kOk);
  CHECK(slurp(d / "n1/measurements.csv") != slurp(d / "n3/measurements.csv"));

  const std::string ct = d / "ct.json";
  write_text(ct, R"({"schema_version": 1, "problem": {"kind": "ct", "n": 16, "n_views": 6}})");
  REQUIRE(run({"simulate", "--config", ct, "--out", d / "ct", "--noiseless"}) == cli::kOk);
  const auto radon = read_matrix(d / "ct/operator.txt");
  CHECK(testing::max_abs_diff(radon->forward(read_vector_csv(d / "ct/truth.csv")),
                              read_vector_csv(d / "ct/measurements.csv")) <= 1e-12);

  const std::string missing = deblur_config(d, R"(, "operator_": 1)");
  CHECK(run({"simulate", "--config", missing, "--out", d / "x"}) == cli::kConfigError);
  write_text(d / "op.json", R"({"schema_version": 1, "problem": {"kind": "deblur", "n": 16, "operator": ")" +
                                (d / "nope.txt") + R"("}})");
  CHECK(run({"simulate", "--config", d / "op.json", "--out", d / "x"}) == cli::kIoError);
  write_text(d / "v2.json", R"({"schema_version": 2})");
  CHECK(run({"simulate", "--config", d / "v2.json", "--out", d / "x"}) == cli::kConfigError);
  write_text(d / "broken.json", "{");
  CHECK(run({"simulate", "--config", d / "broken.json", "--out", d / "x"}) == cli::kConfigError);
}

TEST_CASE("cli train, reconstruct, diagnose and compare") {
  TempDir d("pipeline");
  const std::string prob = deblur_config(d);
  for (const char* s : {"s1", "s2", "s3"}) {
    REQUIRE(run({"simulate", "--config", prob, "--out", d / s, "--seed", std::to_string(s[1] - '0')}) == cli::kOk);
  }
  const std::string cfg = d / "train.json";
  write_text(cfg, R"({"schema_version": 1,
    "architecture": {"type": "scnn", "channels": 2, "filter_size": 3},
    "solver": {"n_iter": 2},
    "train": {"samples": [")" + (d / "s1") + R"(", ")" + (d / "s2") + R"("], "epochs": 3, "chi": 10}})");

  SUBCASE("train") {
    REQUIRE(run({"train", "--config", cfg, "--out", d / "m1", "--n-iter", "1"}) == cli::kOk);
    CHECK(fs::exists(d / "m1/refiner_001.txt"));
    CHECK_FALSE(fs::exists(d / "m1/refiner_002.txt"));
    const auto loss = read_csv(d / "m1/loss_001.csv");
    CHECK(loss.size() == 4);
    REQUIRE(run({"train", "--config", cfg, "--out", d / "m2", "--n-iter", "1"}) == cli::kOk);
    CHECK(slurp(d / "m1/refiner_001.txt") == slurp(d / "m2/refiner_001.txt"));
    const json t = json::parse(slurp(d / "m1/training.json"));
    CHECK(t["chi"] == 10.0);
  }

  SUBCASE("reconstruct") {
    REQUIRE(run({"train", "--config", cfg, "--out", d / "m"}) == cli::kOk);
    REQUIRE(run({"reconstruct", "--refiners", d / "m", "--input", d / "s3", "--out", d / "r", "--no-timing"}) ==
            cli::kOk);
    const auto trace = read_csv(d / "r/trace.csv");
    REQUIRE(trace.size() == 3);
    CHECK(trace[0] == std::vector<std::string>{"iter", "objective", "step_residual", "fixed_point_residual",
                                                "epsilon", "delta", "kappa", "wall_ms"});
    CHECK(trace[1][7] == "0");
    CHECK(fs::exists(d / "r/recon.pgm"));
    CHECK(read_vector_csv(d / "r/recon.csv").size() == 256);
    REQUIRE(run({"reconstruct", "--refiners", d / "m", "--input", d / "s3", "--out", d / "r2", "--no-timing"}) ==
            cli::kOk);
    CHECK(slurp(d / "r/trace.csv") == slurp(d / "r2/trace.csv"));
    CHECK(run({"reconstruct", "--refiners", d / "m", "--input", d / "s3", "--out", d / "r3", "--solver", "admm"}) ==
          cli::kConfigError);
    CHECK(run({"reconstruct", "--refiners", d / "m", "--input", d / "nope", "--out", d / "r4"}) == cli::kIoError);
    REQUIRE(run({"reconstruct", "--refiners", d / "m", "--input", d / "s3", "--out", d / "r5", "--solver", "bcd",
                 "--inner-iters", "3"}) == cli::kOk);
  }

  SUBCASE("diagnose") {
    fs::create_directories(d.path / "id");
    save_refiner_file(d / "id/refiner_000.txt", ScaleRefiner{1.0});
    save_refiner_file(d / "id/refiner_001.txt", ScaleRefiner{1.0});
    save_refiner_file(d / "id/refiner_002.txt", ScaleRefiner{1.0});
    REQUIRE(run({"diagnose", "--refiners", d / "id", "--input", d / "s3", "--out", d / "g", "--seed", "1"}) ==
            cli::kOk);
    const auto rows = read_csv(d / "g/diagnostics.csv");
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == std::vector<std::string>{"iter", "epsilon", "delta", "kappa"});
    std::size_t finite_eps = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i][1] != "nan") {
        CHECK(std::stod(rows[i][1]) == 0.0);
        ++finite_eps;
      }
      CHECK(std::stod(rows[i][3]) == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(finite_eps >= 2);
    REQUIRE(run({"diagnose", "--refiners", d / "id", "--input", d / "s3", "--out", d / "g2", "--seed", "1"}) ==
            cli::kOk);
    CHECK(slurp(d / "g/diagnostics.csv") == slurp(d / "g2/diagnostics.csv"));

    fs::create_directories(d.path / "one");
    save_refiner_file(d / "one/refiner_000.txt", ScaleRefiner{0.5});
    REQUIRE(run({"diagnose", "--refiners", d / "one", "--input", d / "s3", "--out", d / "g3"}) == cli::kOk);
    const auto single = read_csv(d / "g3/diagnostics.csv");
    CHECK(single[0] == std::vector<std::string>{"iter", "kappa"});
    CHECK(std::stod(single[1][1]) == doctest::Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("compare") {
    fs::create_directories(d.path / "id");
    save_refiner_file(d / "id/refiner_000.txt", ScaleRefiner{1.0});
    const std::string c1 = d / "c1.json";
    write_text(c1, R"({"schema_version": 1, "compare": {"runs": [{"name": "a", "refiners": ")" + (d / "id") +
                       R"(", "input": ")" + (d / "s3") + R"(", "n_iter": 5}]}})");
    REQUIRE(run({"compare", "--config", c1, "--out", d / "cmp", "--no-timing"}) == cli::kOk);
    const auto rows = read_csv(d / "cmp/summary.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == std::vector<std::string>{"name", "solver", "iterations", "final_objective", "final_rmse",
                                               "iters_to_threshold", "total_ms"});
    CHECK(rows[1][0] == "a");
    CHECK(rows[1][1] == "momentum");
    CHECK(rows[1][2] == "5");
    CHECK(fs::exists(d / "cmp/trace_a.csv"));
    CHECK(fs::exists(d / "cmp/manifest.json"));

    const std::string ct = d / "ct.json";
    write_text(ct, R"({"schema_version": 1, "problem": {"kind": "ct", "n": 16, "n_views": 6}})");
    REQUIRE(run({"simulate", "--config", ct, "--out", d / "ct"}) == cli::kOk);
    const std::string c2 = d / "c2.json";
    write_text(c2, R"({"schema_version": 1, "compare": {"runs": [{"name": "a", "input": ")" + (d / "s3") +
                       R"("}, {"name": "b", "input": ")" + (d / "ct") + R"("}]}})");
    CHECK(run({"compare", "--config", c2, "--out", d / "cmp2"}) == cli::kOk);
    write_text(d / "s4.json", R"({"schema_version": 1, "problem": {"kind": "deblur", "n": 20}})");
    REQUIRE(run({"simulate", "--config", d / "s4.json", "--out", d / "s4"}) == cli::kOk);
    write_text(c2, R"({"schema_version": 1, "compare": {"runs": [{"name": "a", "input": ")" + (d / "s3") +
                       R"("}, {"name": "b", "input": ")" + (d / "s4") + R"("}]}})");
    CHECK(run({"compare", "--config", c2, "--out", d / "cmp3"}) == cli::kConfigError);
  }
}
