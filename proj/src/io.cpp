#include "momnet/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "momnet/error.hpp"

namespace momnet {

namespace {

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  return os;
}

std::ifstream open_in(const std::string& path, bool binary = false) {
  std::ifstream is(path, binary ? std::ios::binary : std::ios::in);
  if (!is) throw IoError("cannot open '" + path + "'");
  return is;
}

void finish(std::ostream& os, const std::string& path) {
  os.flush();
  if (!os) throw IoError("write to '" + path + "' failed");
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 40> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

void write_matrix(const std::string& path, const SparseMatrixOperator& a) {
  auto os = open_out(path);
  const auto trip = a.triplets();
  os << a.rows() << ' ' << a.cols() << ' ' << trip.size() << '\n';
  for (const auto& t : trip) os << t.row << ' ' << t.col << ' ' << format_double(t.value) << '\n';
  finish(os, path);
}

std::shared_ptr<SparseMatrixOperator> read_matrix(const std::string& path) {
  auto is = open_in(path);
  std::size_t rows = 0, cols = 0, nnz = 0;
  if (!(is >> rows >> cols >> nnz)) throw IoError("'" + path + "': malformed matrix header");
  std::vector<Triplet> trip;
  trip.reserve(nnz);
  for (std::size_t k = 0; k < nnz; ++k) {
    Triplet t{};
    if (!(is >> t.row >> t.col >> t.value)) throw IoError("'" + path + "': truncated matrix entries");
    if (t.row >= rows || t.col >= cols) throw IoError("'" + path + "': matrix index out of range");
    trip.push_back(t);
  }
  return std::make_shared<SparseMatrixOperator>(rows, cols, std::move(trip));
}

void write_vector_csv(const std::string& path, const Vec& v) {
  auto os = open_out(path);
  for (double x : v) os << format_double(x) << '\n';
  finish(os, path);
}

Vec read_vector_csv(const std::string& path) {
  auto is = open_in(path);
  Vec out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    char* end = nullptr;
    const double v = std::strtod(line.c_str(), &end);
    if (end == line.c_str()) throw IoError("'" + path + "': bad number on line " + std::to_string(lineno));
    out.push_back(v);
  }
  return out;
}

void write_pgm(const std::string& path, const ImageVector& img) {
  auto os = open_out(path, true);
  os << "P5 " << img.width() << ' ' << img.height() << " 65535\n";
  std::vector<unsigned char> bytes(2 * img.size());
  for (std::size_t j = 0; j < img.size(); ++j) {
    const double v = std::isfinite(img[j]) ? std::clamp(img[j], 0.0, 1.0) : 0.0;
    const auto q = static_cast<unsigned>(std::lround(v * 65535.0));
    bytes[2 * j] = static_cast<unsigned char>(q >> 8);
    bytes[2 * j + 1] = static_cast<unsigned char>(q & 0xff);
  }
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  finish(os, path);
}

ImageVector read_pgm(const std::string& path) {
  auto is = open_in(path, true);
  std::string magic;
  std::size_t w = 0, h = 0, maxval = 0;
  if (!(is >> magic >> w >> h >> maxval) || magic != "P5") throw IoError("'" + path + "': not a binary PGM");
  if (maxval == 0 || maxval > 65535) throw IoError("'" + path + "': unsupported maxval");
  is.get();
  const std::size_t bpp = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> bytes(bpp * w * h);
  is.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(is.gcount()) != bytes.size()) throw IoError("'" + path + "': truncated PGM data");
  Vec data(w * h);
  for (std::size_t j = 0; j < data.size(); ++j) {
    const unsigned q = bpp == 2 ? (unsigned(bytes[2 * j]) << 8) | bytes[2 * j + 1] : bytes[j];
    data[j] = static_cast<double>(q) / static_cast<double>(maxval);
  }
  return ImageVector(Shape{h, w}, std::move(data));
}

void write_trace_csv(std::ostream& os, const IterateTrace& trace, bool timing) {
  os << "iter,objective,step_residual,fixed_point_residual,epsilon,delta,kappa,wall_ms\n";
  for (const auto& r : trace.records) {
    os << r.iter << ',' << format_double(r.objective) << ',' << format_double(r.step_residual) << ','
       << format_double(r.fixed_point_residual) << ',' << format_double(r.epsilon) << ','
       << format_double(r.delta) << ',' << format_double(r.kappa) << ','
       << format_double(timing ? r.wall_ms : 0.0) << '\n';
  }
}

void write_trace_csv(const std::string& path, const IterateTrace& trace, bool timing) {
  auto os = open_out(path);
  write_trace_csv(os, trace, timing);
  finish(os, path);
}

void write_loss_csv(const std::string& path, const Vec& history) {
  auto os = open_out(path);
  os << "epoch,loss\n";
  for (std::size_t e = 0; e < history.size(); ++e) os << e + 1 << ',' << format_double(history[e]) << '\n';
  finish(os, path);
}

std::string sha256_file(const std::string& path) {
  auto is = open_in(path, true);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr) throw IoError("sha256: context allocation failed");
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::array<char, 1 << 15> buf{};
  while (is) {
    is.read(buf.data(), buf.size());
    const auto got = is.gcount();
    if (got > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(got));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md.data(), &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  static const char* digits = "0123456789abcdef";
  for (unsigned i = 0; i < len; ++i) hex << digits[md[i] >> 4] << digits[md[i] & 0xf];
  return hex.str();
}

}  // namespace momnet
