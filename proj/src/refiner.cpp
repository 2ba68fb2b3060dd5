#include "momnet/refiner.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "momnet/error.hpp"
#include "momnet/prox.hpp"

namespace momnet {
namespace {

void require_uniform_bank(const FilterBank& bank, std::size_t size, const char* what) {
  for (const auto& f : bank) {
    if (f.size != size) throw ConfigError(std::string(what) + ": all filters must share one size");
    if (!all_finite(f.taps)) throw NumericError(std::string(what) + ": non-finite filter tap");
  }
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

ScnnRefiner::ScnnRefiner(FilterBank enc, FilterBank dec, Vec log_th, bool residual_)
    : encoders(std::move(enc)), decoders(std::move(dec)), log_thresholds(std::move(log_th)), residual(residual_) {
  if (encoders.empty()) throw ConfigError("ScnnRefiner: need at least one filter");
  if (decoders.size() != encoders.size() || log_thresholds.size() != encoders.size()) {
    throw ConfigError("ScnnRefiner: encoder, decoder and threshold counts must match");
  }
  require_uniform_bank(encoders, encoders.front().size, "ScnnRefiner");
  require_uniform_bank(decoders, encoders.front().size, "ScnnRefiner");
  for (double a : log_thresholds) {
    if (std::isnan(a) || a == std::numeric_limits<double>::infinity()) {
      throw NumericError("ScnnRefiner: invalid log threshold");
    }
  }
}

double ScnnRefiner::threshold(std::size_t k) const { return std::max(std::exp(log_thresholds[k]), 1e-12); }

DcnnRefiner::DcnnRefiner(FilterBank first_, std::vector<FilterBank> middle_, FilterBank last_)
    : first(std::move(first_)), middle(std::move(middle_)), last(std::move(last_)) {
  if (first.empty()) throw ConfigError("DcnnRefiner: need at least one channel");
  const std::size_t k = first.size();
  const std::size_t s = first.front().size;
  if (last.size() != k) throw ConfigError("DcnnRefiner: last layer must have K filters");
  require_uniform_bank(first, s, "DcnnRefiner");
  require_uniform_bank(last, s, "DcnnRefiner");
  for (const auto& layer : middle) {
    if (layer.size() != k * k) throw ConfigError("DcnnRefiner: middle layers must have K*K filters");
    require_uniform_bank(layer, s, "DcnnRefiner");
  }
}

TiedCaolRefiner::TiedCaolRefiner(FilterBank filters_, Vec thresholds_, bool tight_frame_)
    : filters(std::move(filters_)), thresholds(std::move(thresholds_)), tight_frame(tight_frame_) {
  if (filters.empty()) throw ConfigError("TiedCaolRefiner: need at least one filter");
  if (thresholds.size() != filters.size()) throw ConfigError("TiedCaolRefiner: one threshold per filter");
  require_uniform_bank(filters, filters.front().size, "TiedCaolRefiner");
  for (double b : thresholds) {
    if (!(b >= 0.0)) throw ConfigError("TiedCaolRefiner: thresholds must be >= 0");
  }
}

// ---------------------------------------------------------------- forward

ImageVector scnn_forward(const ScnnRefiner& r, const ImageVector& u) {
  const Shape shape = u.shape();
  ImageVector out = r.residual ? u : ImageVector(shape);
  Vec code(shape.size());
  for (std::size_t k = 0; k < r.channels(); ++k) {
    convolve(r.encoders[k], u.data().data(), code.data(), shape);
    const double t = r.threshold(k);
    for (double& c : code) c = soft_threshold(c, t);
    correlate_add(r.decoders[k], code.data(), out.data().data(), shape);
  }
  return out;
}

ImageVector dcnn_forward(const DcnnRefiner& r, const ImageVector& u) {
  const Shape shape = u.shape();
  const std::size_t n = shape.size();
  const std::size_t kk = r.channels();
  std::vector<Vec> features(kk, Vec(n));
  for (std::size_t k = 0; k < kk; ++k) {
    convolve(r.first[k], u.data().data(), features[k].data(), shape);
    for (double& v : features[k]) v = std::max(v, 0.0);
  }
  for (const auto& layer : r.middle) {
    std::vector<Vec> next(kk, Vec(n, 0.0));
    for (std::size_t k = 0; k < kk; ++k) {
      for (std::size_t kp = 0; kp < kk; ++kp) {
        convolve_add(layer[k * kk + kp], features[kp].data(), next[k].data(), shape);
      }
      for (double& v : next[k]) v = std::max(v, 0.0);
    }
    features = std::move(next);
  }
  Vec residual(n, 0.0);
  for (std::size_t k = 0; k < kk; ++k) convolve_add(r.last[k], features[k].data(), residual.data(), shape);
  ImageVector out = u;
  for (std::size_t i = 0; i < n; ++i) out[i] -= residual[i];
  return out;
}

ImageVector tied_caol_forward(const TiedCaolRefiner& r, const ImageVector& u) {
  const Shape shape = u.shape();
  ImageVector out(shape);
  Vec code(shape.size());
  for (std::size_t k = 0; k < r.filters.size(); ++k) {
    convolve(r.filters[k], u.data().data(), code.data(), shape);
    for (double& c : code) c = soft_threshold(c, r.thresholds[k]);
    correlate_add(r.filters[k], code.data(), out.data().data(), shape);
  }
  return out;
}

ImageVector refine(const Refiner& r, const ImageVector& u) {
  return std::visit(Overloaded{
                        [&](const ScnnRefiner& s) { return scnn_forward(s, u); },
                        [&](const DcnnRefiner& d) { return dcnn_forward(d, u); },
                        [&](const TiedCaolRefiner& t) { return tied_caol_forward(t, u); },
                        [&](const ScaleRefiner& s) { return s.scale * u; },
                    },
                    r);
}

std::string refiner_type_name(const Refiner& r) {
  return std::visit(Overloaded{
                        [](const ScnnRefiner&) { return std::string("scnn"); },
                        [](const DcnnRefiner&) { return std::string("dcnn"); },
                        [](const TiedCaolRefiner&) { return std::string("caol"); },
                        [](const ScaleRefiner&) { return std::string("scale"); },
                    },
                    r);
}

// ---------------------------------------------------------------- tight frames

FilterBank make_tf_filterbank(std::size_t support) {
  const auto s = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(support))));
  if (support == 0 || s * s != support) throw ConfigError("make_tf_filterbank: R must be a perfect square");
  // Orthonormal 1-D DCT-II basis.
  std::vector<Vec> basis(s, Vec(s));
  for (std::size_t k = 0; k < s; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / static_cast<double>(s));
    for (std::size_t n = 0; n < s; ++n) {
      basis[k][n] = scale * std::cos(std::numbers::pi * (2.0 * n + 1.0) * k / (2.0 * s));
    }
  }
  const double norm_factor = 1.0 / std::sqrt(static_cast<double>(support));
  FilterBank bank;
  bank.reserve(support);
  for (std::size_t k1 = 0; k1 < s; ++k1) {
    for (std::size_t k2 = 0; k2 < s; ++k2) {
      Vec taps(support);
      for (std::size_t a = 0; a < s; ++a) {
        for (std::size_t b = 0; b < s; ++b) taps[a * s + b] = norm_factor * basis[k1][a] * basis[k2][b];
      }
      bank.emplace_back(s, std::move(taps));
    }
  }
  return bank;
}

double tight_frame_error(const FilterBank& bank, Shape shape, std::size_t trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  Vec u(shape.size()), code(shape.size());
  for (std::size_t t = 0; t < trials; ++t) {
    for (double& v : u) v = normal(rng);
    double energy = 0.0;
    for (const auto& h : bank) {
      convolve(h, u.data(), code.data(), shape);
      energy += squared_norm(code);
    }
    const double ref = squared_norm(u);
    worst = std::max(worst, std::abs(energy - ref) / ref);
  }
  return worst;
}

// ---------------------------------------------------------------- diagnostics

double paired_epsilon(const Refiner& r_next, const Refiner& r_prev, const std::vector<ImagePair>& pairs) {
  if (pairs.empty()) throw ConfigError("paired_epsilon: need at least one pair");
  double eps = 0.0;
  for (const auto& [u, v] : pairs) {
    require_same_shape(u, v, "paired_epsilon");
    const ImageVector ru = refine(r_next, u);
    const ImageVector rv = refine(r_prev, v);
    eps = std::max(eps, squared_distance(ru.view(), rv.view()) - squared_distance(u.view(), v.view()));
  }
  return std::max(eps, 0.0);
}

double delta_measure(const ImageVector& z_next, const ImageVector& z_prev, const ImageVector& x) {
  require_same_shape(z_next, x, "delta_measure");
  require_same_shape(z_prev, x, "delta_measure");
  return std::max(0.0, squared_distance(z_next.view(), x.view()) - squared_distance(z_prev.view(), x.view()));
}

double lipschitz_estimate(const Refiner& r, const std::vector<ImagePair>& samples) {
  if (samples.empty()) throw ConfigError("lipschitz_estimate: need at least one pair");
  double kappa = 0.0;
  for (const auto& [u, v] : samples) {
    require_same_shape(u, v, "lipschitz_estimate");
    const double d = distance(u.view(), v.view());
    if (d == 0.0) throw ConfigError("lipschitz_estimate: coincident pair");
    const ImageVector ru = refine(r, u);
    const ImageVector rv = refine(r, v);
    kappa = std::max(kappa, distance(ru.view(), rv.view()) / d);
  }
  return kappa;
}

namespace {

double gram_sigma_max(const FilterBank& bank) {
  const std::size_t support = bank.front().support();
  const std::size_t cols = bank.size() + 1;
  Eigen::MatrixXd m(support, cols);
  for (std::size_t k = 0; k < bank.size(); ++k) {
    for (std::size_t r = 0; r < support; ++r) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = bank[k].taps[r];
  }
  const Filter2d delta = Filter2d::delta(bank.front().size);
  for (std::size_t r = 0; r < support; ++r) {
    m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(cols - 1)) = delta.taps[r];
  }
  const Eigen::MatrixXd gram = m.transpose() * m;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

}  // namespace

NonexpansiveReport scnn_nonexpansive_sufficient(const ScnnRefiner& r) {
  NonexpansiveReport report;
  report.bound = 1.0 / static_cast<double>(r.support());
  report.decoder_sigma_max = gram_sigma_max(r.decoders);
  report.encoder_sigma_max = gram_sigma_max(r.encoders);
  // Relative slack absorbs eigen-solver rounding at equality (e.g. R = 1, zero filters).
  const double slack = 1e-12 * std::max(1.0, report.bound);
  report.passes = report.decoder_sigma_max <= report.bound + slack && report.encoder_sigma_max <= report.bound + slack;
  return report;
}

// ---------------------------------------------------------------- persistence

namespace {

constexpr const char* kMagic = "momnet-refiner";
constexpr int kVersion = 1;

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

void write_values(std::ostream& os, const Vec& values) {
  for (std::size_t i = 0; i < values.size(); ++i) os << (i ? " " : "") << hex(values[i]);
  os << '\n';
}

void write_bank(std::ostream& os, const char* tag, const FilterBank& bank) {
  os << tag << ' ' << bank.size() << '\n';
  for (const auto& f : bank) write_values(os, f.taps);
}

std::string next_token(std::istream& is, const char* what) {
  std::string tok;
  if (!(is >> tok)) throw IoError(std::string("refiner file truncated while reading ") + what);
  return tok;
}

void expect(std::istream& is, const std::string& want) {
  const std::string got = next_token(is, want.c_str());
  if (got != want) throw IoError("refiner file: expected '" + want + "', got '" + got + "'");
}

std::size_t read_count(std::istream& is, const char* what) {
  const std::string tok = next_token(is, what);
  char* end = nullptr;
  const unsigned long long v = std::strtoull(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0') throw IoError(std::string("refiner file: bad count for ") + what);
  return static_cast<std::size_t>(v);
}

double read_double(std::istream& is) {
  const std::string tok = next_token(is, "value");
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0') throw IoError("refiner file: bad number '" + tok + "'");
  return v;
}

Vec read_values(std::istream& is, std::size_t n) {
  Vec v(n);
  for (auto& x : v) x = read_double(is);
  return v;
}

FilterBank read_bank(std::istream& is, const char* tag, std::size_t filter_size) {
  expect(is, tag);
  const std::size_t count = read_count(is, tag);
  FilterBank bank;
  bank.reserve(count);
  for (std::size_t k = 0; k < count; ++k) bank.emplace_back(filter_size, read_values(is, filter_size * filter_size));
  return bank;
}

}  // namespace

void save_refiner(std::ostream& os, const Refiner& r) {
  os << kMagic << ' ' << kVersion << '\n';
  std::visit(Overloaded{
                 [&](const ScnnRefiner& s) {
                   os << "type scnn\nK " << s.channels() << " R " << s.support() << " L 1\n";
                   os << "residual " << (s.residual ? 1 : 0) << '\n';
                   write_bank(os, "encoders", s.encoders);
                   write_bank(os, "decoders", s.decoders);
                   os << "log_thresholds\n";
                   write_values(os, s.log_thresholds);
                 },
                 [&](const DcnnRefiner& d) {
                   os << "type dcnn\nK " << d.channels() << " R " << d.first.front().support() << " L "
                      << d.layers() << '\n';
                   write_bank(os, "first", d.first);
                   for (const auto& layer : d.middle) write_bank(os, "middle", layer);
                   write_bank(os, "last", d.last);
                 },
                 [&](const TiedCaolRefiner& t) {
                   os << "type caol\nK " << t.filters.size() << " R " << t.filters.front().support() << " L 1\n";
                   os << "tight_frame " << (t.tight_frame ? 1 : 0) << '\n';
                   write_bank(os, "filters", t.filters);
                   os << "thresholds\n";
                   write_values(os, t.thresholds);
                 },
                 [&](const ScaleRefiner& s) {
                   os << "type scale\nK 0 R 0 L 0\n";
                   os << "scale " << hex(s.scale) << '\n';
                 },
             },
             r);
  if (!os) throw IoError("failed to write refiner");
}

Refiner load_refiner(std::istream& is) {
  expect(is, kMagic);
  const std::size_t version = read_count(is, "version");
  if (version != static_cast<std::size_t>(kVersion)) {
    throw IoError("refiner file: unsupported version " + std::to_string(version));
  }
  expect(is, "type");
  const std::string type = next_token(is, "type");
  expect(is, "K");
  const std::size_t k = read_count(is, "K");
  expect(is, "R");
  const std::size_t support = read_count(is, "R");
  expect(is, "L");
  const std::size_t layers = read_count(is, "L");
  const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(support))));
  if (type != "scale" && side * side != support) throw IoError("refiner file: R must be a perfect square");

  if (type == "scnn") {
    expect(is, "residual");
    const bool residual = read_count(is, "residual") != 0;
    FilterBank enc = read_bank(is, "encoders", side);
    FilterBank dec = read_bank(is, "decoders", side);
    expect(is, "log_thresholds");
    Vec th = read_values(is, k);
    if (enc.size() != k) throw IoError("refiner file: encoder count does not match K");
    return ScnnRefiner(std::move(enc), std::move(dec), std::move(th), residual);
  }
  if (type == "dcnn") {
    if (layers < 2) throw IoError("refiner file: dcnn needs L >= 2");
    FilterBank first = read_bank(is, "first", side);
    std::vector<FilterBank> middle;
    for (std::size_t l = 0; l + 2 < layers; ++l) middle.push_back(read_bank(is, "middle", side));
    FilterBank last = read_bank(is, "last", side);
    if (first.size() != k) throw IoError("refiner file: first-layer count does not match K");
    return DcnnRefiner(std::move(first), std::move(middle), std::move(last));
  }
  if (type == "caol") {
    expect(is, "tight_frame");
    const bool tf = read_count(is, "tight_frame") != 0;
    FilterBank filters = read_bank(is, "filters", side);
    expect(is, "thresholds");
    Vec th = read_values(is, k);
    return TiedCaolRefiner(std::move(filters), std::move(th), tf);
  }
  if (type == "scale") {
    expect(is, "scale");
    return ScaleRefiner{read_double(is)};
  }
  throw IoError("refiner file: unknown type '" + type + "'");
}

void save_refiner_file(const std::string& path, const Refiner& r) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  save_refiner(os, r);
}

Refiner load_refiner_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  return load_refiner(is);
}

}  // namespace momnet
