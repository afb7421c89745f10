#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "idslab/heat_lab.hpp"

namespace idslab {

enum class IdsProvenance { dirichlet_exhaustion, free_restriction, abstract_quotient };

std::string to_string(IdsProvenance p);

/// Estimate of N(lambda) on a grid. std_error is empty for single-seed estimates.
struct IDSEstimate {
  std::vector<double> lambda;
  std::vector<double> values;
  std::vector<double> std_error;
  IdsProvenance provenance = IdsProvenance::dirichlet_exhaustion;
  std::int64_t radius = 0;
  std::vector<std::uint64_t> seeds;
  std::uint64_t model_digest = 0;
  double volume = 0.0;                  ///< vol_omega(D) for single-seed estimates
  std::vector<std::size_t> counts;      ///< integer counts, single-seed Dirichlet case

  bool monotone() const;
  /// N <= h^-d C_g^{d/2}
  bool within_state_bound(const ModelConfig& cfg) const;
};

/// 200 points on [0, 4 d h^-2 + Q]: Gershgorin bound of the flat operator plus Q.
std::vector<double> default_lambda_grid(const ModelConfig& cfg, std::size_t points = 200);

/// N^j(lambda) = #{eigenvalues of H^D below lambda} / vol(D), by inertia counting.
IDSEstimate counting_ids(const ModelConfig& cfg, std::uint64_t seed, const FolnerBox& box,
                         const std::vector<double>& grid, int threads = 0);

/// N^{j,f}(lambda) = tr(chi_D E_ambient(lambda)) / vol(D); the ambient box is D
/// grown by `margin` cells (margin 0 means the ambient box is D itself).
IDSEstimate free_ids(const ModelConfig& cfg, std::uint64_t seed, const FolnerBox& box,
                     const std::vector<double>& grid, std::int64_t margin, std::size_t ceiling = kDenseCeiling);

struct LaplaceTable {
  std::vector<double> t;
  std::vector<double> values;       ///< tr(exp(-t H^D)) / vol(D), heat-trace route
  std::vector<double> stieltjes;    ///< sum_k exp(-t lambda_k) / vol(D), eigenvalue route
  std::vector<double> bound;        ///< C(t) = flat kernel sup * C_g^d
  bool bound_ok = false;
  double volume = 0.0;
  std::size_t dimension = 0;
};

/// L^j(t) = tr(exp(-t H^j)) / vol(D) over a t-grid. The trace is taken with the
/// matrix-free heat diagonal; when the operator fits under the dense ceiling
/// the Stieltjes sum over the eigenvalues is filled in as a second route.
LaplaceTable laplace_transform(const ModelConfig& cfg, std::uint64_t seed, const FolnerBox& box,
                               const std::vector<double>& t_grid, int threads = 0);

/// int exp(-t lambda) dN, summing over an eigenvalue list.
double stieltjes_laplace(const std::vector<double>& eigenvalues, double volume, double t);

struct TraceGap {
  double value = 0.0;   ///< |tr(chi_D exp(-tH_ambient)) - tr(exp(-tH^D))| / vol(D)
  AmbientProxy proxy;
};

/// Normalized trace gap. margin < 0 picks it by the self-consistency rule,
/// margin 0 makes the ambient box D itself.
TraceGap trace_gap(const ModelConfig& cfg, std::uint64_t seed, const FolnerBox& box, double t,
                   std::int64_t margin = -1, int threads = 0);

/// Value at x = 0 of the polynomial through the points (x_i, y_i) (Neville).
/// With x = 1 / (vertices per side) this removes the leading boundary terms of
/// a per-volume trace, which expand in powers of 1 / side.
double extrapolate_to_zero(const std::vector<double>& x, const std::vector<double>& y);

/// Fundamental cell gamma as a box of mesh vertices.
Box cell_vertices(int dim, int mesh, const Coord& gamma);

struct AbstractEstimate {
  std::vector<double> parameter;   ///< t for heat, lambda for projection
  std::vector<double> values;      ///< E[tr(chi_F f(H))] / E[vol(F)]
  std::vector<double> std_error;   ///< delta-method standard error of the ratio of means
  std::vector<double> numerator;   ///< E[tr(chi_F f(H))]
  double mean_volume = 0.0;        ///< E[vol(F)]
  std::size_t seeds = 0;
};

/// Quotient of expectations over a seed set, using periodic supercells with
/// `side` cells as the proxy for H on the whole space. F is the union of the
/// listed cells (default: the cell at the origin).
AbstractEstimate abstract_ids(const ModelConfig& cfg, const std::vector<std::uint64_t>& seeds, std::int64_t side,
                              SpectralFunction::Kind kind, const std::vector<double>& parameters,
                              const std::vector<Coord>& cells = {Coord{}}, int threads = 0);

/// Every cell of a supercell with `side` cells per axis.
std::vector<Coord> all_cells(int dim, std::int64_t side);

struct ExhaustionLevel {
  std::int64_t radius = 0;
  std::vector<std::vector<double>> curves;   ///< [seed][grid point]
  std::vector<double> mean;
  std::vector<double> stddev;                ///< cross-seed, sample (n - 1)
  std::vector<double> cauchy;                ///< per seed: sup_lambda |N^j - N^{j-1}| (0 at j = 0)
};

struct ExhaustionReport {
  std::vector<double> grid;
  std::vector<ExhaustionLevel> levels;
  std::vector<char> flat_points;           ///< grid points where the largest-j mean curve is locally flat
  double abstract_distance = 0.0;          ///< max over flat points of |mean N^J - N_abstract|
  std::vector<double> abstract_values;     ///< reference curve, empty when not supplied
};

/// Counting IDS along an admissible sequence for every seed.
ExhaustionReport exhaustion_experiment(const ModelConfig& cfg, const std::vector<std::uint64_t>& seeds,
                                       const AdmissibleSequence& seq, const std::vector<double>& grid,
                                       double flat_tolerance, const std::vector<double>& abstract_values = {},
                                       int threads = 0);

/// Grid points whose left and right differences both stay below `tolerance`.
std::vector<char> locally_flat(const std::vector<double>& curve, double tolerance);

enum class Observable { metric_amplitude, potential_amplitude, heat_trace };

Observable parse_observable(const std::string& tag);
std::string to_string(Observable o);

struct ErgodicRow {
  std::int64_t radius = 0;
  std::size_t cells = 0;
  double average = 0.0;
  double expectation = 0.0;   ///< NaN when not known in closed form
  double sigma = 0.0;         ///< standard deviation of one sample (NaN when unknown)
  double z = 0.0;             ///< (average - expectation) sqrt(cells) / sigma
};

/// Birkhoff averages (1/|I_j|) sum_{gamma in I_j} f(T_gamma omega) along the sequence.
/// The heat-trace observable f(omega) = tr(chi_F exp(-tH_omega)) uses equivariance,
/// f(T_gamma omega) = tr(chi_{F+gamma} exp(-tH_omega)), on an ambient proxy.
std::vector<ErgodicRow> ergodic_average(const ModelConfig& cfg, std::uint64_t seed, Observable observable,
                                        const AdmissibleSequence& seq, double t = 1.0, int threads = 0);

struct ShiftIdentity {
  bool pass = false;
  std::size_t mismatches = 0;
};

/// N from H + cI at lambda + c against N from H at lambda, grid point by grid point.
ShiftIdentity shift_identity_check(const ModelConfig& cfg, std::uint64_t seed, const FolnerBox& box, double c,
                                   const std::vector<double>& grid);

}  // namespace idslab
