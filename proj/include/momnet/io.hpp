#pragma once

#include <iosfwd>
#include <memory>
#include <string>

#include "momnet/image.hpp"
#include "momnet/linop.hpp"
#include "momnet/solver.hpp"

namespace momnet {

/// Sparse matrix text: a "rows cols nnz" header then one "row col value" line
/// per entry, values printed with 17 significant digits.
void write_matrix(const std::string& path, const SparseMatrixOperator& a);
std::shared_ptr<SparseMatrixOperator> read_matrix(const std::string& path);

/// One value per line, 17 significant digits.
void write_vector_csv(const std::string& path, const Vec& v);
Vec read_vector_csv(const std::string& path);

/// Binary PGM, maxval 65535, big-endian samples; values are clipped to [0, 1].
void write_pgm(const std::string& path, const ImageVector& img);
ImageVector read_pgm(const std::string& path);

/// iter, objective, step_residual, fixed_point_residual, epsilon, delta, kappa, wall_ms.
/// Missing diagnostics are written as "nan"; wall time as 0 when `timing` is off.
void write_trace_csv(std::ostream& os, const IterateTrace& trace, bool timing = true);
void write_trace_csv(const std::string& path, const IterateTrace& trace, bool timing = true);

/// epoch, loss.
void write_loss_csv(const std::string& path, const Vec& history);

/// Lower-case hex SHA-256 of a file's contents.
std::string sha256_file(const std::string& path);

std::string format_double(double v);

}  // namespace momnet
