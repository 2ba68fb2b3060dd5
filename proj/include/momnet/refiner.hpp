#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "momnet/conv.hpp"
#include "momnet/image.hpp"

namespace momnet {

/// Residual single-hidden-layer convolutional autoencoder
///   R(u) = sum_k dec_k ⋆ T_{exp(alpha_k)}(enc_k ⊛ u) + u
/// where ⊛ is circular convolution and dec_k ⋆ is its adjoint (correlation),
/// so dec = enc gives the tied autoencoder. Thresholds are stored as logs.
struct ScnnRefiner {
  FilterBank encoders;
  FilterBank decoders;
  Vec log_thresholds;
  bool residual = true;

  ScnnRefiner() = default;
  ScnnRefiner(FilterBank encoders, FilterBank decoders, Vec log_thresholds, bool residual = true);

  std::size_t channels() const { return encoders.size(); }       // K
  std::size_t filter_size() const { return encoders.front().size; }
  std::size_t support() const { return encoders.front().support(); }  // R

  /// exp(alpha_k), clamped below at 1e-12.
  double threshold(std::size_t k) const;

  friend bool operator==(const ScnnRefiner&, const ScnnRefiner&) = default;
};

/// Residual multi-layer CNN with ReLU activations:
///   u_k^1 = ReLU(e_k^1 ⊛ u),  u_k^l = ReLU(sum_k' e_{k,k'}^l ⊛ u_k'^{l-1}),
///   R(u) = u - sum_k e_k^L ⊛ u_k^{L-1}.
struct DcnnRefiner {
  FilterBank first;                    // K filters
  std::vector<FilterBank> middle;      // L-2 layers of K*K filters, index k*K + k'
  FilterBank last;                     // K filters

  DcnnRefiner() = default;
  DcnnRefiner(FilterBank first, std::vector<FilterBank> middle, FilterBank last);

  std::size_t layers() const { return middle.size() + 2; }  // L
  std::size_t channels() const { return first.size(); }
  std::size_t filter_size() const { return first.front().size; }

  friend bool operator==(const DcnnRefiner&, const DcnnRefiner&) = default;
};

/// Tied convolutional autoencoder R(u) = sum_k flip(h_k) ⊛ T_{beta_k}(h_k ⊛ u).
struct TiedCaolRefiner {
  FilterBank filters;
  Vec thresholds;
  bool tight_frame = false;

  TiedCaolRefiner() = default;
  TiedCaolRefiner(FilterBank filters, Vec thresholds, bool tight_frame);

  friend bool operator==(const TiedCaolRefiner&, const TiedCaolRefiner&) = default;
};

/// u -> c u. Covers the identity, zero and contractive maps used as baselines.
struct ScaleRefiner {
  double scale = 1.0;
  friend bool operator==(const ScaleRefiner&, const ScaleRefiner&) = default;
};

using Refiner = std::variant<ScnnRefiner, DcnnRefiner, TiedCaolRefiner, ScaleRefiner>;

ImageVector scnn_forward(const ScnnRefiner& r, const ImageVector& u);
ImageVector dcnn_forward(const DcnnRefiner& r, const ImageVector& u);
ImageVector tied_caol_forward(const TiedCaolRefiner& r, const ImageVector& u);
ImageVector refine(const Refiner& r, const ImageVector& u);

std::string refiner_type_name(const Refiner& r);

/// 2-D DCT-derived bank of R = s^2 filters (s x s), each scaled by 1/sqrt(R),
/// satisfying sum_k ||h_k ⊛ u||^2 = ||u||^2 under circular boundaries.
FilterBank make_tf_filterbank(std::size_t support);

/// max over random u of |sum_k ||h_k ⊛ u||^2 - ||u||^2| / ||u||^2.
double tight_frame_error(const FilterBank& bank, Shape shape, std::size_t trials, std::uint64_t seed);

// ---------------------------------------------------------------- diagnostics

using ImagePair = std::pair<ImageVector, ImageVector>;

/// max over pairs of max(0, ||r_next(u) - r_prev(v)||^2 - ||u - v||^2).
double paired_epsilon(const Refiner& r_next, const Refiner& r_prev, const std::vector<ImagePair>& pairs);

/// max(0, ||z_next - x||^2 - ||z_prev - x||^2).
double delta_measure(const ImageVector& z_next, const ImageVector& z_prev, const ImageVector& x);

/// max over pairs of ||r(u) - r(v)|| / ||u - v||; throws for coincident pairs.
double lipschitz_estimate(const Refiner& r, const std::vector<ImagePair>& samples);

struct NonexpansiveReport {
  double decoder_sigma_max = 0.0;  // sigma_max(Dbar^T Dbar), Dbar = [d_1..d_K, delta]
  double encoder_sigma_max = 0.0;  // sigma_max(Ebar^T Ebar)
  double bound = 0.0;              // 1 / R
  bool passes = false;
};

/// Checks the sufficient condition sigma_max(Dbar^T Dbar) <= 1/R and
/// sigma_max(Ebar^T Ebar) <= 1/R.
NonexpansiveReport scnn_nonexpansive_sufficient(const ScnnRefiner& r);

// ---------------------------------------------------------------- persistence

/// Versioned plain-text container; doubles are written as hex floats so a
/// save/load round trip is bit-exact.
void save_refiner(std::ostream& os, const Refiner& r);
Refiner load_refiner(std::istream& is);
void save_refiner_file(const std::string& path, const Refiner& r);
Refiner load_refiner_file(const std::string& path);

}  // namespace momnet
