#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "idslab/lattice.hpp"

namespace idslab {

/// Shape of the per-cell bump that spreads a cell amplitude over the mesh.
///
/// cosine:    b(s) = prod_i (1/2) cos^2(pi s_i / 4) for |s_i| < 2, centred at the
///            cell centre. C^1, support radius two cells, and the translates form
///            a partition of unity, so the overlap sum S_b is exactly 1.
/// indicator: b = 1 on the cell itself. S_b = 1.
enum class BumpProfile { cosine, indicator };

struct ModelConfig {
  int dim = 2;
  int mesh = 1;                       ///< vertices per cell edge, h = 1/mesh
  double metric_amplitude = 0.0;      ///< A: log-density amplitudes are uniform in [-A, A]
  double potential_amplitude = 0.0;   ///< Q: potential amplitudes are uniform in [0, Q]
  BumpProfile bump = BumpProfile::cosine;
  std::uint64_t seed = 0;
  std::size_t max_window_vertices = std::size_t{1} << 24;

  void validate() const;

  double h() const { return 1.0 / mesh; }
  /// sup_x sum_gamma |b(x - gamma)|
  double bump_overlap_sum() const;
  /// C_g = exp(2 A S_b): metric comparability constant.
  double metric_constant() const;
  /// Bound on |rho(x) - rho(y)| / h over mesh edges.
  double density_gradient_bound() const;
  /// Stable 64-bit digest of the model parameters.
  std::uint64_t digest() const;
};

/// A point omega of the disorder space, seen through its Z^d action.
///
/// The amplitude attached to cell gamma is hash(seed, gamma + offset); shifting
/// the realization by gamma only moves the offset. A nonzero period makes the
/// amplitudes periodic in every axis (used for torus supercells).
struct Realization {
  std::uint64_t seed = 0;
  Coord offset{};
  std::int64_t period = 0;

  double uniform(std::uint64_t label, const Coord& cell, int dim) const;
  bool operator==(const Realization&) const = default;
};

using AmplitudeFn = std::function<double(const Coord& cell)>;

/// Discrete random conformal metric g = exp(2 phi) g_0 on a window of mesh vertices.
struct MetricField {
  ModelConfig cfg;
  Realization realization;
  Box window;
  std::vector<double> log_density;        ///< phi at vertices
  std::vector<double> density;            ///< rho = exp(-d phi)
  std::vector<double> measure;            ///< mu = h^d exp(d phi)
  std::vector<double> edge_log_density;   ///< phi at forward-edge midpoints, [vertex * dim + axis]
  std::vector<double> conductance;        ///< w = h^(d-2) exp((d-2) phi_mid), same layout

  /// Forward edge (v, v + e_axis) exists iff both ends lie in the window.
  bool has_forward_edge(std::size_t vertex, int axis) const;
  /// Edge length h exp(phi_mid) in the random metric.
  double edge_length(std::size_t vertex, int axis) const;
};

struct PotentialField {
  ModelConfig cfg;
  Realization realization;
  Box window;
  std::vector<double> values;
};

MetricField sample_metric(const ModelConfig& cfg, const Box& window, const Realization& omega);
MetricField sample_metric(const ModelConfig& cfg, const Box& window, std::uint64_t seed);

/// Same construction with caller-supplied cell amplitudes (already scaled).
MetricField metric_from_amplitudes(const ModelConfig& cfg, const Box& window,
                                   const AmplitudeFn& amplitude);

PotentialField sample_potential(const ModelConfig& cfg, const Box& window, const Realization& omega);
PotentialField sample_potential(const ModelConfig& cfg, const Box& window, std::uint64_t seed);
PotentialField potential_from_amplitudes(const ModelConfig& cfg, const Box& window,
                                         const AmplitudeFn& amplitude);

/// Field of the translated realization on the same window:
/// shift(field, gamma)(x) == field(x + gamma * mesh), bit for bit.
MetricField shift_realization(const MetricField& field, const Coord& gamma);
PotentialField shift_realization(const PotentialField& field, const Coord& gamma);

struct ModelBoundsReport {
  double metric_constant = 1.0;            ///< C_g from the configuration
  double gradient_bound = 0.0;             ///< C_rho from the configuration
  double observed_metric_constant = 1.0;   ///< max_x max(rho, 1/rho)^(2/d)
  double observed_gradient = 0.0;          ///< max over edges |rho(x) - rho(y)| / h
  bool pass = false;
};

ModelBoundsReport verify_model_bounds(const MetricField& field);

/// Columnar dumps for external cross-checks (17 significant digits).
/// vertex table: "vertex,x0[,x1[,x2]],rho,mu"; edge table: "vertex,axis,w".
void write_vertex_table(std::ostream& os, const MetricField& field);
void write_edge_table(std::ostream& os, const MetricField& field);

}  // namespace idslab
