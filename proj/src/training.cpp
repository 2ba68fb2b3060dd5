#include "momnet/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "momnet/error.hpp"
#include "momnet/prox.hpp"
#include "momnet/spectral.hpp"

namespace momnet {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kMinThreshold = 1e-12;

void append_bank(Vec& out, const FilterBank& bank) {
  for (const auto& f : bank) out.insert(out.end(), f.taps.begin(), f.taps.end());
}

void read_bank(FilterBank& bank, const Vec& params, std::size_t& pos) {
  for (auto& f : bank) {
    std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(pos), f.taps.size(), f.taps.begin());
    pos += f.taps.size();
  }
}

FilterBank zero_like(const FilterBank& bank) {
  FilterBank out;
  out.reserve(bank.size());
  for (const auto& f : bank) out.push_back(Filter2d::zeros(f.size));
  return out;
}

Refiner zero_like(const Refiner& r) {
  return std::visit(Overloaded{
                        [](const ScnnRefiner& s) -> Refiner {
                          ScnnRefiner g;
                          g.encoders = zero_like(s.encoders);
                          g.decoders = zero_like(s.decoders);
                          g.log_thresholds.assign(s.log_thresholds.size(), 0.0);
                          g.residual = s.residual;
                          return g;
                        },
                        [](const DcnnRefiner& d) -> Refiner {
                          DcnnRefiner g;
                          g.first = zero_like(d.first);
                          for (const auto& layer : d.middle) g.middle.push_back(zero_like(layer));
                          g.last = zero_like(d.last);
                          return g;
                        },
                        [](const TiedCaolRefiner& t) -> Refiner {
                          TiedCaolRefiner g;
                          g.filters = zero_like(t.filters);
                          g.thresholds.assign(t.thresholds.size(), 0.0);
                          return g;
                        },
                        [](const ScaleRefiner&) -> Refiner { return ScaleRefiner{0.0}; },
                    },
                    r);
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Each backward routine adds d loss / d params into `g` for a single image,
// where `gout` is d loss / d R(u).

void scnn_backward(const ScnnRefiner& r, const ImageVector& u, const Vec& gout, ScnnRefiner& g) {
  const Shape shape = u.shape();
  const std::size_t n = shape.size();
  Vec code(n), act(n), gact(n);
  for (std::size_t k = 0; k < r.channels(); ++k) {
    convolve(r.encoders[k], u.data().data(), code.data(), shape);
    const double t = r.threshold(k);
    for (std::size_t j = 0; j < n; ++j) act[j] = soft_threshold(code[j], t);
    correlate_filter_grad(gout.data(), act.data(), shape, g.decoders[k]);
    convolve(r.decoders[k], gout.data(), gact.data(), shape);
    double gt = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(code[j]) > t) {
        gt -= gact[j] * sign(code[j]);
      } else {
        gact[j] = 0.0;
      }
    }
    convolve_filter_grad(gact.data(), u.data().data(), shape, g.encoders[k]);
    if (std::exp(r.log_thresholds[k]) > kMinThreshold) g.log_thresholds[k] += gt * t;
  }
}

void dcnn_backward(const DcnnRefiner& r, const ImageVector& u, const Vec& gout, DcnnRefiner& g) {
  const Shape shape = u.shape();
  const std::size_t n = shape.size();
  const std::size_t kk = r.channels();
  const std::size_t n_mid = r.middle.size();

  // pre[l][k]: pre-activation of layer l (0 = first, n_mid = last hidden).
  std::vector<std::vector<Vec>> pre(n_mid + 1, std::vector<Vec>(kk, Vec(n, 0.0)));
  std::vector<std::vector<Vec>> post(n_mid + 1, std::vector<Vec>(kk, Vec(n, 0.0)));
  for (std::size_t k = 0; k < kk; ++k) {
    convolve(r.first[k], u.data().data(), pre[0][k].data(), shape);
    for (std::size_t j = 0; j < n; ++j) post[0][k][j] = std::max(pre[0][k][j], 0.0);
  }
  for (std::size_t l = 0; l < n_mid; ++l) {
    for (std::size_t k = 0; k < kk; ++k) {
      for (std::size_t kp = 0; kp < kk; ++kp) {
        convolve_add(r.middle[l][k * kk + kp], post[l][kp].data(), pre[l + 1][k].data(), shape);
      }
      for (std::size_t j = 0; j < n; ++j) post[l + 1][k][j] = std::max(pre[l + 1][k][j], 0.0);
    }
  }

  Vec neg(n);
  for (std::size_t j = 0; j < n; ++j) neg[j] = -gout[j];
  std::vector<Vec> gpost(kk, Vec(n, 0.0));
  for (std::size_t k = 0; k < kk; ++k) {
    convolve_filter_grad(neg.data(), post[n_mid][k].data(), shape, g.last[k]);
    correlate(r.last[k], neg.data(), gpost[k].data(), shape);
  }
  for (std::size_t l = n_mid; l-- > 0;) {
    std::vector<Vec> gprev(kk, Vec(n, 0.0));
    for (std::size_t k = 0; k < kk; ++k) {
      for (std::size_t j = 0; j < n; ++j) {
        if (!(pre[l + 1][k][j] > 0.0)) gpost[k][j] = 0.0;
      }
      for (std::size_t kp = 0; kp < kk; ++kp) {
        convolve_filter_grad(gpost[k].data(), post[l][kp].data(), shape, g.middle[l][k * kk + kp]);
        correlate_add(r.middle[l][k * kk + kp], gpost[k].data(), gprev[kp].data(), shape);
      }
    }
    gpost = std::move(gprev);
  }
  for (std::size_t k = 0; k < kk; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!(pre[0][k][j] > 0.0)) gpost[k][j] = 0.0;
    }
    convolve_filter_grad(gpost[k].data(), u.data().data(), shape, g.first[k]);
  }
}

void caol_backward(const TiedCaolRefiner& r, const ImageVector& u, const Vec& gout, TiedCaolRefiner& g) {
  const Shape shape = u.shape();
  const std::size_t n = shape.size();
  Vec code(n), act(n), gact(n);
  for (std::size_t k = 0; k < r.filters.size(); ++k) {
    convolve(r.filters[k], u.data().data(), code.data(), shape);
    const double t = r.thresholds[k];
    for (std::size_t j = 0; j < n; ++j) act[j] = soft_threshold(code[j], t);
    correlate_filter_grad(gout.data(), act.data(), shape, g.filters[k]);
    convolve(r.filters[k], gout.data(), gact.data(), shape);
    double gt = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(code[j]) > t) {
        gt -= gact[j] * sign(code[j]);
      } else {
        gact[j] = 0.0;
      }
    }
    convolve_filter_grad(gact.data(), u.data().data(), shape, g.filters[k]);
    g.thresholds[k] += gt;
  }
}

std::vector<ImageVector> random_images(std::mt19937_64& rng, Shape shape, std::size_t count) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<ImageVector> out;
  for (std::size_t i = 0; i < count; ++i) {
    ImageVector v(shape);
    for (auto& x : v.data()) x = normal(rng);
    out.push_back(std::move(v));
  }
  return out;
}

FilterBank uniform_bank(std::mt19937_64& rng, std::size_t count, std::size_t size, double bound) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  FilterBank bank;
  for (std::size_t k = 0; k < count; ++k) {
    Filter2d f = Filter2d::zeros(size);
    for (auto& t : f.taps) t = dist(rng);
    bank.push_back(std::move(f));
  }
  return bank;
}

}  // namespace

// ---------------------------------------------------------------- gamma

double select_gamma(const Vec& m_f, double chi) {
  if (!(chi > 0.0) || !std::isfinite(chi)) throw ConfigError("select_gamma: chi must be > 0");
  const double spread = spectral_spread(m_f);
  const double top = *std::max_element(m_f.begin(), m_f.end());
  if (!(top > 0.0)) throw ConfigError("select_gamma: data-fit majorizer vanishes");
  // A spread at rounding level means a scaled identity.
  if (spread > 1e-12 * top) return spread / chi;
  return top / chi;
}

double select_gamma(const DiagonalMajorizer& m_f, double chi) { return select_gamma(m_f.diag(), chi); }

// ---------------------------------------------------------------- loss

double refining_loss(const Refiner& r, const std::vector<TrainingPair>& pairs) {
  if (pairs.empty()) throw ConfigError("refining_loss: no pairs");
  double s = 0.0;
  for (const auto& p : pairs) {
    require_same_shape(p.truth, p.input, "refining_loss");
    s += squared_distance(p.truth.view(), refine(r, p.input).view());
  }
  return s / (2.0 * static_cast<double>(pairs.size()));
}

Vec get_parameters(const Refiner& r) {
  Vec out;
  std::visit(Overloaded{
                 [&](const ScnnRefiner& s) {
                   append_bank(out, s.encoders);
                   append_bank(out, s.decoders);
                   out.insert(out.end(), s.log_thresholds.begin(), s.log_thresholds.end());
                 },
                 [&](const DcnnRefiner& d) {
                   append_bank(out, d.first);
                   for (const auto& layer : d.middle) append_bank(out, layer);
                   append_bank(out, d.last);
                 },
                 [&](const TiedCaolRefiner& t) {
                   append_bank(out, t.filters);
                   out.insert(out.end(), t.thresholds.begin(), t.thresholds.end());
                 },
                 [&](const ScaleRefiner& s) { out.push_back(s.scale); },
             },
             r);
  return out;
}

void set_parameters(Refiner& r, const Vec& params) {
  const std::size_t expected = get_parameters(r).size();
  require_dims(params.size(), expected, "set_parameters");
  std::size_t pos = 0;
  std::visit(Overloaded{
                 [&](ScnnRefiner& s) {
                   read_bank(s.encoders, params, pos);
                   read_bank(s.decoders, params, pos);
                   for (auto& a : s.log_thresholds) a = params[pos++];
                 },
                 [&](DcnnRefiner& d) {
                   read_bank(d.first, params, pos);
                   for (auto& layer : d.middle) read_bank(layer, params, pos);
                   read_bank(d.last, params, pos);
                 },
                 [&](TiedCaolRefiner& t) {
                   const FilterBank before = t.filters;
                   read_bank(t.filters, params, pos);
                   for (auto& b : t.thresholds) b = std::max(params[pos++], 0.0);
                   if (t.filters != before) t.tight_frame = false;
                 },
                 [&](ScaleRefiner& s) { s.scale = params[pos++]; },
             },
             r);
}

std::vector<ParamGroup> parameter_groups(const Refiner& r) {
  const std::size_t total = get_parameters(r).size();
  std::size_t thresholds = 0;
  if (const auto* s = std::get_if<ScnnRefiner>(&r)) thresholds = s->log_thresholds.size();
  if (const auto* t = std::get_if<TiedCaolRefiner>(&r)) thresholds = t->thresholds.size();
  std::vector<ParamGroup> groups(total, ParamGroup::Filter);
  std::fill(groups.end() - static_cast<std::ptrdiff_t>(thresholds), groups.end(), ParamGroup::Threshold);
  return groups;
}

double loss_and_gradient(const Refiner& r, const std::vector<TrainingPair>& pairs,
                         const std::vector<std::size_t>& batch, Vec& grad) {
  if (batch.empty()) throw ConfigError("loss_and_gradient: empty batch");
  Refiner g = zero_like(r);
  const double inv = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (std::size_t idx : batch) {
    if (idx >= pairs.size()) throw DimensionError("loss_and_gradient: batch index out of range");
    const TrainingPair& p = pairs[idx];
    require_same_shape(p.truth, p.input, "loss_and_gradient");
    const ImageVector out = refine(r, p.input);
    Vec gout(out.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
      const double d = out[j] - p.truth[j];
      loss += d * d;
      gout[j] = d * inv;
    }
    std::visit(Overloaded{
                   [&](const ScnnRefiner& s) { scnn_backward(s, p.input, gout, std::get<ScnnRefiner>(g)); },
                   [&](const DcnnRefiner& d) { dcnn_backward(d, p.input, gout, std::get<DcnnRefiner>(g)); },
                   [&](const TiedCaolRefiner& t) {
                     caol_backward(t, p.input, gout, std::get<TiedCaolRefiner>(g));
                   },
                   [&](const ScaleRefiner&) { std::get<ScaleRefiner>(g).scale += dot(gout, p.input.view()); },
               },
               r);
  }
  grad = get_parameters(g);
  return 0.5 * loss * inv;
}

// ---------------------------------------------------------------- optimizer

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (epochs == 0) throw ConfigError("epochs must be >= 1");
  if (!(lr_filters >= 0.0) || !std::isfinite(lr_filters)) throw ConfigError("lr_filters must be >= 0");
  if (!(lr_thresholds >= 0.0) || !std::isfinite(lr_thresholds)) throw ConfigError("lr_thresholds must be >= 0");
  if (!(lr_decay >= 0.0 && lr_decay < 1.0)) throw ConfigError("lr_decay must lie in [0, 1)");
  if (decay_every == 0) throw ConfigError("decay_every must be >= 1");
}

AdamOptimizer::AdamOptimizer(std::size_t n, double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

void AdamOptimizer::step(Vec& params, const Vec& grad, const Vec& lr) {
  require_dims(params.size(), m_.size(), "AdamOptimizer params");
  require_dims(grad.size(), m_.size(), "AdamOptimizer grad");
  require_dims(lr.size(), m_.size(), "AdamOptimizer rates");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t j = 0; j < params.size(); ++j) {
    m_[j] = beta1_ * m_[j] + (1.0 - beta1_) * grad[j];
    v_[j] = beta2_ * v_[j] + (1.0 - beta2_) * grad[j] * grad[j];
    params[j] -= lr[j] * (m_[j] / c1) / (std::sqrt(v_[j] / c2) + eps_);
  }
}

TrainResult train_refiner(const Refiner& init, const std::vector<TrainingPair>& pairs, const TrainConfig& config) {
  config.validate();
  if (pairs.empty()) throw ConfigError("train_refiner: no pairs");
  TrainResult result{init, {}, 0.0, false, {}};
  Vec params = get_parameters(init);
  const std::vector<ParamGroup> groups = parameter_groups(init);
  AdamOptimizer adam(params.size());
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  Vec lr(params.size()), grad;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double decay = std::pow(1.0 - config.lr_decay, static_cast<double>(epoch / config.decay_every));
    for (std::size_t j = 0; j < lr.size(); ++j) {
      lr[j] = decay * (groups[j] == ParamGroup::Filter ? config.lr_filters : config.lr_thresholds);
    }
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      const std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                           order.begin() + static_cast<std::ptrdiff_t>(stop));
      const double loss = loss_and_gradient(result.refiner, pairs, batch, grad);
      if (!std::isfinite(loss) || !all_finite(grad)) {
        result.aborted = true;
        result.failure = "non-finite loss at epoch " + std::to_string(epoch + 1);
        result.final_loss = loss;
        return result;
      }
      epoch_loss += loss * static_cast<double>(batch.size());
      Vec trial = params;
      adam.step(trial, grad, lr);
      if (!all_finite(trial)) {
        result.aborted = true;
        result.failure = "non-finite parameters at epoch " + std::to_string(epoch + 1);
        return result;
      }
      params = std::move(trial);
      set_parameters(result.refiner, params);
      params = get_parameters(result.refiner);
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(pairs.size()));
  }
  result.final_loss = refining_loss(result.refiner, pairs);
  if (!std::isfinite(result.final_loss)) {
    result.aborted = true;
    result.failure = "non-finite final loss";
  }
  return result;
}

// ---------------------------------------------------------------- greedy training

TrainingSample::TrainingSample(ImageVector truth_, ImageVector initial_, QuadraticDataFit datafit_, double gamma_,
                               FeasibleSet feasible_, double lambda)
    : truth(std::move(truth_)),
      initial(std::move(initial_)),
      datafit(std::move(datafit_)),
      majorizer(mbir_majorizer(datafit, gamma_, lambda).scaled()),
      gamma(gamma_),
      feasible(feasible_) {
  require_same_shape(truth, initial, "TrainingSample");
  require_dims(truth.size(), datafit.image_size(), "TrainingSample datafit");
}

void ArchitectureSpec::validate() const {
  if (type != "scnn" && type != "dcnn" && type != "caol" && type != "scale") {
    throw ConfigError("unknown refiner type '" + type + "'");
  }
  if (channels == 0) throw ConfigError("channels must be >= 1");
  if (filter_size == 0) throw ConfigError("filter_size must be >= 1");
  if (type == "dcnn" && layers < 2) throw ConfigError("dcnn requires at least 2 layers");
  if (type == "caol" && channels != filter_size * filter_size) {
    throw ConfigError("caol requires channels = filter_size^2");
  }
}

Refiner initialize_refiner(const ArchitectureSpec& arch, std::uint64_t seed) {
  arch.validate();
  std::mt19937_64 rng(seed);
  const std::size_t kk = arch.channels;
  const std::size_t s = arch.filter_size;
  const double r = static_cast<double>(s * s);
  const double first_bound = std::sqrt(6.0 / r);
  const double wide_bound = std::sqrt(6.0 / (static_cast<double>(kk) * r));
  const double log_init = std::log(1e-2);
  if (arch.type == "scnn") {
    FilterBank enc = uniform_bank(rng, kk, s, first_bound);
    FilterBank dec = uniform_bank(rng, kk, s, wide_bound);
    return ScnnRefiner(std::move(enc), std::move(dec), Vec(kk, log_init), true);
  }
  if (arch.type == "dcnn") {
    FilterBank first = uniform_bank(rng, kk, s, first_bound);
    std::vector<FilterBank> middle;
    for (std::size_t l = 0; l + 2 < arch.layers; ++l) middle.push_back(uniform_bank(rng, kk * kk, s, wide_bound));
    FilterBank last = uniform_bank(rng, kk, s, wide_bound);
    return DcnnRefiner(std::move(first), std::move(middle), std::move(last));
  }
  if (arch.type == "caol") {
    return TiedCaolRefiner(make_tf_filterbank(s * s), Vec(kk, 1e-2), true);
  }
  return ScaleRefiner{1.0};
}

GreedyResult greedy_train(const std::vector<TrainingSample>& samples, const ArchitectureSpec& arch,
                          const MomentumNetConfig& net_config, const TrainConfig& train_config) {
  if (net_config.n_iter == 0) throw ConfigError("greedy_train: n_iter must be >= 1");
  if (samples.empty()) throw ConfigError("greedy_train: no samples");
  net_config.validate();
  train_config.validate();

  std::vector<MomentumNetStepper> steppers;
  steppers.reserve(samples.size());
  for (const auto& s : samples) {
    MomentumNetConfig cfg = net_config;
    cfg.gamma = s.gamma;
    cfg.chi.reset();
    cfg.keep_iterates = false;
    cfg.track_fixed_point = false;
    steppers.emplace_back(cfg, s.datafit, s.feasible, s.initial);
  }

  GreedyResult result;
  Refiner current = initialize_refiner(arch, train_config.seed);
  for (std::size_t i = 0; i < net_config.n_iter; ++i) {
    std::vector<TrainingPair> pairs;
    pairs.reserve(samples.size());
    for (std::size_t s = 0; s < samples.size(); ++s) pairs.push_back({samples[s].truth, steppers[s].x()});

    TrainConfig cfg = train_config;
    cfg.seed = train_config.seed + i;
    TrainResult trained = train_refiner(current, pairs, cfg);
    if (trained.aborted) {
      throw NumericError("greedy_train: iteration " + std::to_string(i + 1) + ": " + trained.failure);
    }
    for (auto& st : steppers) st.step(trained.refiner);
    current = trained.refiner;
    result.refiners.push_back(std::move(trained.refiner));
    result.loss_histories.push_back(std::move(trained.loss_history));
    result.final_losses.push_back(trained.final_loss);
  }
  return result;
}

// ---------------------------------------------------------------- patch bound

PatchBoundReport patch_loss_bound_check(const ScnnRefiner& r, const std::vector<TrainingPair>& pairs,
                                        double tolerance) {
  if (pairs.empty()) throw ConfigError("patch_loss_bound_check: no pairs");
  if (r.residual) throw ConfigError("patch_loss_bound_check: refiner must be non-residual");
  const std::size_t kk = r.channels();
  const std::size_t s = r.filter_size();
  const std::size_t rr = s * s;
  const auto o = static_cast<std::ptrdiff_t>((s - 1) / 2);
  const double inv_r = 1.0 / static_cast<double>(rr);

  double conv = 0.0;
  double patch = 0.0;
  for (const auto& p : pairs) {
    require_same_shape(p.truth, p.input, "patch_loss_bound_check");
    const ImageVector out = scnn_forward(r, p.input);
    for (std::size_t j = 0; j < out.size(); ++j) {
      const double d = p.truth[j] - inv_r * out[j];
      conv += d * d;
    }

    const auto h = static_cast<std::ptrdiff_t>(p.truth.height());
    const auto w = static_cast<std::ptrdiff_t>(p.truth.width());
    Vec xpatch(rr), tpatch(rr), code(kk);
    for (std::ptrdiff_t i = 0; i < h; ++i) {
      for (std::ptrdiff_t j = 0; j < w; ++j) {
        for (std::size_t a = 0; a < s; ++a) {
          for (std::size_t b = 0; b < s; ++b) {
            const std::ptrdiff_t pi = ((i - (static_cast<std::ptrdiff_t>(a) - o)) % h + h) % h;
            const std::ptrdiff_t pj = ((j - (static_cast<std::ptrdiff_t>(b) - o)) % w + w) % w;
            xpatch[a * s + b] = p.input.at(static_cast<std::size_t>(pi), static_cast<std::size_t>(pj));
            tpatch[a * s + b] = p.truth.at(static_cast<std::size_t>(pi), static_cast<std::size_t>(pj));
          }
        }
        for (std::size_t k = 0; k < kk; ++k) {
          double c = 0.0;
          for (std::size_t q = 0; q < rr; ++q) c += r.encoders[k].taps[q] * xpatch[q];
          code[k] = soft_threshold(c, r.threshold(k));
        }
        for (std::size_t q = 0; q < rr; ++q) {
          double rec = 0.0;
          for (std::size_t k = 0; k < kk; ++k) rec += r.decoders[k].taps[q] * code[k];
          const double d = tpatch[q] - rec;
          patch += d * d;
        }
      }
    }
  }
  const double l = static_cast<double>(pairs.size());
  PatchBoundReport report;
  report.conv_loss = conv / (2.0 * l);
  report.patch_loss = patch / (2.0 * l * static_cast<double>(rr));
  report.holds = report.conv_loss <= report.patch_loss + tolerance;
  return report;
}

PatchBoundSummary patch_loss_bound_trials(std::size_t trials, std::uint64_t seed, Shape shape, std::size_t channels,
                                          std::size_t filter_size, std::size_t pairs_per_trial) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> log_t(std::log(1e-3), std::log(1.0));
  PatchBoundSummary summary;
  summary.trials = trials;
  summary.max_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < trials; ++t) {
    FilterBank enc = uniform_bank(rng, channels, filter_size, 1.0);
    FilterBank dec = uniform_bank(rng, channels, filter_size, 1.0);
    Vec alphas(channels);
    for (auto& a : alphas) a = log_t(rng);
    const ScnnRefiner r(std::move(enc), std::move(dec), std::move(alphas), false);
    const auto truths = random_images(rng, shape, pairs_per_trial);
    const auto inputs = random_images(rng, shape, pairs_per_trial);
    std::vector<TrainingPair> pairs;
    for (std::size_t s = 0; s < pairs_per_trial; ++s) pairs.push_back({truths[s], inputs[s]});
    const PatchBoundReport rep = patch_loss_bound_check(r, pairs);
    if (!rep.holds) ++summary.violations;
    summary.max_excess = std::max(summary.max_excess, rep.conv_loss - rep.patch_loss);
  }
  return summary;
}

}  // namespace momnet
