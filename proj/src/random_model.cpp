#include "idslab/random_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "idslab/errors.hpp"
#include "idslab/format.hpp"
#include "idslab/hash.hpp"

namespace idslab {

namespace {

constexpr std::int64_t kMaxCoordinate = std::int64_t{1} << 40;
constexpr int kCosineReach = 2;

double cosine_bump_1d(double s) {
  if (std::abs(s) >= 2.0) return 0.0;
  const double c = std::cos(std::numbers::pi * s / 4.0);
  return 0.5 * c * c;
}

void check_window(const ModelConfig& cfg, const Box& window) {
  if (window.dim() != cfg.dim) throw ArgumentError("window dimension does not match model dimension");
  if (window.empty()) throw ArgumentError("window is empty");
  if (window.size() > cfg.max_window_vertices) {
    throw ResourceError("window of " + std::to_string(window.size()) +
                        " vertices exceeds max_window_vertices = " +
                        std::to_string(cfg.max_window_vertices));
  }
  for (int i = 0; i < cfg.dim; ++i) {
    if (std::abs(window.lo()[i]) > kMaxCoordinate || std::abs(window.hi()[i]) > kMaxCoordinate) {
      throw ResourceError("window exceeds the maximum lattice extent");
    }
  }
}

// Evaluates sum_gamma a_gamma b(x - gamma) at points given in half-mesh units
// (P = 2 z for vertices, 2 z + e_axis for edge midpoints). Only integer offsets
// relative to the containing cell enter the floating-point path, so translated
// windows reproduce identical bits.
class BumpSum {
 public:
  BumpSum(const ModelConfig& cfg, const AmplitudeFn& amplitude)
      : cfg_(cfg), amplitude_(amplitude), two_m_(2 * cfg.mesh) {
    if (cfg.bump == BumpProfile::cosine) {
      const int span = 2 * kCosineReach + 1;
      table_.resize(static_cast<std::size_t>(two_m_) * span);
      for (std::int64_t r = 0; r < two_m_; ++r) {
        for (int k = -kCosineReach; k <= kCosineReach; ++k) {
          const double s = static_cast<double>(r - two_m_ * k - cfg.mesh) / static_cast<double>(two_m_);
          table_[static_cast<std::size_t>(r * span + (k + kCosineReach))] = cosine_bump_1d(s);
        }
      }
    }
  }

  double operator()(const Coord& half_units) const {
    Coord cell{};
    Coord rem{};
    for (int i = 0; i < cfg_.dim; ++i) {
      cell[i] = floor_div(half_units[i], two_m_);
      rem[i] = half_units[i] - cell[i] * two_m_;
    }
    if (cfg_.bump == BumpProfile::indicator) return amplitude_(cell);

    const int span = 2 * kCosineReach + 1;
    double total = 0.0;
    std::array<int, kMaxDim> k{};
    for (int i = 0; i < cfg_.dim; ++i) k[i] = -kCosineReach;
    while (true) {
      double weight = 1.0;
      Coord gamma = cell;
      for (int i = 0; i < cfg_.dim; ++i) {
        weight *= table_[static_cast<std::size_t>(rem[i] * span + (k[i] + kCosineReach))];
        gamma[i] += k[i];
      }
      if (weight != 0.0) total += amplitude_(gamma) * weight;
      int axis = cfg_.dim - 1;
      while (axis >= 0 && k[axis] == kCosineReach) {
        k[axis] = -kCosineReach;
        --axis;
      }
      if (axis < 0) break;
      ++k[axis];
    }
    return total;
  }

 private:
  const ModelConfig& cfg_;
  const AmplitudeFn& amplitude_;
  std::int64_t two_m_;
  std::vector<double> table_;
};

MetricField build_metric(const ModelConfig& cfg, const Box& window, const AmplitudeFn& amplitude) {
  cfg.validate();
  check_window(cfg, window);

  MetricField f;
  f.cfg = cfg;
  f.window = window;
  const std::size_t n = window.size();
  const int d = cfg.dim;
  const double h = cfg.h();
  const double hd = std::pow(h, d);
  const double hd2 = std::pow(h, d - 2);
  f.log_density.resize(n);
  f.density.resize(n);
  f.measure.resize(n);
  f.edge_log_density.assign(n * static_cast<std::size_t>(d), std::numeric_limits<double>::quiet_NaN());
  f.conductance.assign(n * static_cast<std::size_t>(d), std::numeric_limits<double>::quiet_NaN());

  const BumpSum phi(cfg, amplitude);
  for (std::size_t v = 0; v < n; ++v) {
    const Coord z = window.point_at(v);
    const double p = phi(scaled(z, 2));
    f.log_density[v] = p;
    f.density[v] = std::exp(-d * p);
    f.measure[v] = hd * std::exp(d * p);
    if (!std::isfinite(f.density[v]) || !std::isfinite(f.measure[v]) || f.measure[v] <= 0.0) {
      throw InternalError("non-finite metric density at " + to_string(z, d));
    }
    for (int axis = 0; axis < d; ++axis) {
      Coord next = z;
      next[axis] += 1;
      if (!window.contains(next)) continue;
      Coord mid = scaled(z, 2);
      mid[axis] += 1;
      const double pm = phi(mid);
      const std::size_t e = v * static_cast<std::size_t>(d) + static_cast<std::size_t>(axis);
      f.edge_log_density[e] = pm;
      f.conductance[e] = hd2 * std::exp((d - 2) * pm);
      if (!std::isfinite(f.conductance[e]) || f.conductance[e] <= 0.0) {
        throw InternalError("non-finite conductance at " + to_string(z, d));
      }
    }
  }
  return f;
}

PotentialField build_potential(const ModelConfig& cfg, const Box& window, const AmplitudeFn& amplitude) {
  cfg.validate();
  check_window(cfg, window);
  PotentialField f;
  f.cfg = cfg;
  f.window = window;
  f.values.resize(window.size());
  const BumpSum field(cfg, amplitude);
  for (std::size_t v = 0; v < f.values.size(); ++v) {
    const double value = field(scaled(window.point_at(v), 2));
    if (!std::isfinite(value)) throw InternalError("non-finite potential value");
    // Nonnegative amplitudes times nonnegative weights; the max() only removes -0.0.
    f.values[v] = std::max(value, 0.0);
  }
  return f;
}

void check_shift(const Realization& omega, const Coord& gamma) {
  for (int i = 0; i < kMaxDim; ++i) {
    if (std::abs(omega.offset[i] + gamma[i]) > kMaxCoordinate) {
      throw ResourceError("shifted realization exceeds the maximum lattice extent");
    }
  }
}

}  // namespace

void ModelConfig::validate() const {
  if (dim < 1 || dim > kMaxDim) throw ArgumentError("dimension must lie in [1, 3]");
  if (mesh < 1) throw ArgumentError("mesh resolution must be >= 1");
  if (!(metric_amplitude >= 0.0) || !std::isfinite(metric_amplitude)) {
    throw ArgumentError("metric amplitude must be finite and >= 0");
  }
  if (!(potential_amplitude >= 0.0) || !std::isfinite(potential_amplitude)) {
    throw ArgumentError("potential amplitude must be finite and >= 0");
  }
}

double ModelConfig::bump_overlap_sum() const { return 1.0; }

double ModelConfig::metric_constant() const {
  return std::exp(2.0 * metric_amplitude * bump_overlap_sum());
}

double ModelConfig::density_gradient_bound() const {
  const double a = metric_amplitude * bump_overlap_sum();
  if (bump == BumpProfile::indicator) {
    return 2.0 * std::sinh(dim * a) * mesh;
  }
  // sup_s sum_k |beta'(s - k)| for beta(s) = cos^2(pi s / 4) / 2.
  const double slope_sum = std::numbers::pi * std::numbers::sqrt2 / 4.0;
  return dim * std::exp(dim * a) * metric_amplitude * slope_sum;
}

std::uint64_t ModelConfig::digest() const {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(dim));
  h = mix64(h ^ static_cast<std::uint64_t>(mesh));
  h = mix64(h ^ std::bit_cast<std::uint64_t>(metric_amplitude));
  h = mix64(h ^ std::bit_cast<std::uint64_t>(potential_amplitude));
  h = mix64(h ^ static_cast<std::uint64_t>(bump));
  return mix64(h ^ seed);
}

double Realization::uniform(std::uint64_t label, const Coord& cell, int dim) const {
  Coord c = cell + offset;
  if (period > 0) {
    for (int i = 0; i < dim; ++i) c[i] = pos_mod(c[i], period);
  }
  return to_unit(hash_cell(derive_stream(seed, label), c, dim));
}

bool MetricField::has_forward_edge(std::size_t vertex, int axis) const {
  return !std::isnan(conductance[vertex * static_cast<std::size_t>(cfg.dim) + static_cast<std::size_t>(axis)]);
}

double MetricField::edge_length(std::size_t vertex, int axis) const {
  return cfg.h() *
         std::exp(edge_log_density[vertex * static_cast<std::size_t>(cfg.dim) + static_cast<std::size_t>(axis)]);
}

MetricField metric_from_amplitudes(const ModelConfig& cfg, const Box& window, const AmplitudeFn& amplitude) {
  return build_metric(cfg, window, amplitude);
}

MetricField sample_metric(const ModelConfig& cfg, const Box& window, const Realization& omega) {
  const double a = cfg.metric_amplitude;
  const int dim = cfg.dim;
  const AmplitudeFn amplitude = [&](const Coord& cell) {
    return a * (2.0 * omega.uniform(kMetricLabel, cell, dim) - 1.0);
  };
  MetricField f = build_metric(cfg, window, amplitude);
  f.realization = omega;
  return f;
}

MetricField sample_metric(const ModelConfig& cfg, const Box& window, std::uint64_t seed) {
  return sample_metric(cfg, window, Realization{seed, {}, 0});
}

PotentialField potential_from_amplitudes(const ModelConfig& cfg, const Box& window,
                                         const AmplitudeFn& amplitude) {
  return build_potential(cfg, window, amplitude);
}

PotentialField sample_potential(const ModelConfig& cfg, const Box& window, const Realization& omega) {
  const double q = cfg.potential_amplitude;
  const int dim = cfg.dim;
  const AmplitudeFn amplitude = [&](const Coord& cell) {
    return q * omega.uniform(kPotentialLabel, cell, dim);
  };
  PotentialField f = build_potential(cfg, window, amplitude);
  f.realization = omega;
  return f;
}

PotentialField sample_potential(const ModelConfig& cfg, const Box& window, std::uint64_t seed) {
  return sample_potential(cfg, window, Realization{seed, {}, 0});
}

MetricField shift_realization(const MetricField& field, const Coord& gamma) {
  check_shift(field.realization, gamma);
  Realization omega = field.realization;
  omega.offset = omega.offset + gamma;
  return sample_metric(field.cfg, field.window, omega);
}

PotentialField shift_realization(const PotentialField& field, const Coord& gamma) {
  check_shift(field.realization, gamma);
  Realization omega = field.realization;
  omega.offset = omega.offset + gamma;
  return sample_potential(field.cfg, field.window, omega);
}

ModelBoundsReport verify_model_bounds(const MetricField& field) {
  const ModelConfig& cfg = field.cfg;
  const int d = cfg.dim;
  ModelBoundsReport r;
  r.metric_constant = cfg.metric_constant();
  r.gradient_bound = cfg.density_gradient_bound();

  const double rho_hi = std::pow(r.metric_constant, d / 2.0);
  const double rho_lo = 1.0 / rho_hi;
  constexpr double slack = 1e-12;
  bool ok = true;
  for (std::size_t v = 0; v < field.density.size(); ++v) {
    const double rho = field.density[v];
    if (!(rho >= rho_lo * (1.0 - slack) && rho <= rho_hi * (1.0 + slack))) ok = false;
    const double spread = std::max(rho, 1.0 / rho);
    r.observed_metric_constant = std::max(r.observed_metric_constant, std::pow(spread, 2.0 / d));
    for (int axis = 0; axis < d; ++axis) {
      if (!field.has_forward_edge(v, axis)) continue;
      Coord next = field.window.point_at(v);
      next[axis] += 1;
      const double g = std::abs(rho - field.density[field.window.index_of(next)]) / cfg.h();
      r.observed_gradient = std::max(r.observed_gradient, g);
    }
  }
  if (r.observed_gradient > r.gradient_bound * (1.0 + slack) + slack) ok = false;
  r.pass = ok;
  return r;
}

void write_vertex_table(std::ostream& os, const MetricField& field) {
  const int d = field.cfg.dim;
  os << "vertex";
  for (int i = 0; i < d; ++i) os << ",x" << i;
  os << ",rho,mu\n";
  for (std::size_t v = 0; v < field.density.size(); ++v) {
    const Coord z = field.window.point_at(v);
    os << v;
    for (int i = 0; i < d; ++i) os << ',' << z[i];
    os << ',' << fmt17(field.density[v]) << ',' << fmt17(field.measure[v]) << '\n';
  }
}

void write_edge_table(std::ostream& os, const MetricField& field) {
  const int d = field.cfg.dim;
  os << "vertex,axis,w\n";
  for (std::size_t v = 0; v < field.density.size(); ++v) {
    for (int axis = 0; axis < d; ++axis) {
      if (!field.has_forward_edge(v, axis)) continue;
      os << v << ',' << axis << ',' << fmt17(field.conductance[v * static_cast<std::size_t>(d) + axis]) << '\n';
    }
  }
}

}  // namespace idslab
