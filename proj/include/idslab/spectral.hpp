#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "idslab/hamiltonian.hpp"

namespace idslab {

inline constexpr std::size_t kDenseCeiling = 4096;

/// Eigen-data of one (omega, D) pair.
struct SpectralSummary {
  std::vector<double> eigenvalues;   ///< ascending, with multiplicity
  Eigen::MatrixXd eigenvectors;      ///< orthonormal columns; empty when not requested
  double volume = 0.0;               ///< vol_omega(D) = sum of mu

  bool has_vectors() const { return eigenvectors.size() > 0; }
  /// #{i : lambda_i < lambda}
  std::size_t count_below(double lambda) const;
};

/// Full symmetric eigendecomposition (LAPACK divide and conquer).
/// ResourceError above `ceiling`; use count_below for larger operators.
SpectralSummary eigendecompose(const DiscreteHamiltonian& h, bool vectors = true,
                               std::size_t ceiling = kDenseCeiling);
SpectralSummary eigendecompose(const Eigen::MatrixXd& symmetric, bool vectors = true,
                               std::size_t ceiling = kDenseCeiling);

/// Sylvester inertia of A - shift I.
struct Inertia {
  std::size_t negative = 0;
  std::size_t zero = 0;
  std::size_t positive = 0;
  /// Smallest |pivot| (smallest |eigenvalue| of a 2x2 pivot block).
  double min_pivot = 0.0;
  /// True when the symmetric-pivoting dense route produced the result.
  bool pivoted = false;
  /// min_pivot within 1e-9 |A| of zero: the shift may sit on an eigenvalue.
  bool near_boundary = false;
};

/// Unpivoted LDL^T in band storage. Returns false when a zero pivot or element
/// growth above `growth_limit` * |A| makes the computed inertia untrustworthy.
bool banded_inertia(const SymmetricMatrix& a, double shift, Inertia& out, double growth_limit = 1e6);

/// Bunch-Kaufman LDL^T with symmetric pivoting on a dense matrix (overwritten).
Inertia bunch_kaufman_inertia(Eigen::MatrixXd& a);

/// Number of eigenvalues strictly below lambda, from the inertia of H - lambda I.
/// Uses the banded factorization when the band is narrow and well behaved,
/// otherwise the pivoted dense factorization.
Inertia count_below(const DiscreteHamiltonian& h, double lambda);

/// count_below over a grid, grid points processed in parallel.
std::vector<std::size_t> count_sweep(const DiscreteHamiltonian& h, std::span<const double> grid,
                                     int threads = 0);
/// Serial reference for count_sweep.
std::vector<std::size_t> count_sweep_serial(const DiscreteHamiltonian& h, std::span<const double> grid);

enum class HeatMethod {
  uniformized,   ///< Taylor series of t(sI - H) >= 0 with scaling and squaring
  spectral,      ///< V exp(-t Lambda) V^T from the eigendecomposition
};

struct HeatDiagnostics {
  double worst_negative = 0.0;   ///< most negative entry before clamping
  std::size_t clamped = 0;       ///< entries in (-1e-14, 0) set to zero
};

/// exp(-t H) as a dense symmetric matrix. Negative entries of magnitude below
/// 1e-14 are clamped to zero and the worst offender is recorded.
Eigen::MatrixXd heat_operator(const DiscreteHamiltonian& h, double t, HeatMethod method = HeatMethod::uniformized,
                              HeatDiagnostics* diagnostics = nullptr, std::size_t ceiling = kDenseCeiling);

/// In-place v <- exp(-t H) v, matrix-free. H must have nonpositive off-diagonal
/// entries; for v >= 0 every partial sum is nonnegative, so small entries keep
/// full relative accuracy.
void heat_apply(const DiscreteHamiltonian& h, double t, std::span<double> v);

/// Columns exp(-t H) e_j for the requested indices (n x cols.size()), in parallel.
Eigen::MatrixXd heat_columns(const DiscreteHamiltonian& h, double t, std::span<const std::size_t> cols,
                             int threads = 0);
/// Serial reference for heat_columns.
Eigen::MatrixXd heat_columns_serial(const DiscreteHamiltonian& h, double t, std::span<const std::size_t> cols);

/// (exp(-t H))_{xx} for the requested vertices, matrix-free and in parallel.
std::vector<double> heat_diagonal(const DiscreteHamiltonian& h, double t, std::span<const std::size_t> vertices,
                                  int threads = 0);

/// Spectral function tag for restricted traces.
struct SpectralFunction {
  enum class Kind { heat, projection };
  Kind kind = Kind::heat;
  double parameter = 0.0;   ///< t for heat, lambda for projection

  static SpectralFunction heat(double t) { return {Kind::heat, t}; }
  static SpectralFunction projection(double lambda) { return {Kind::projection, lambda}; }
  double operator()(double eigenvalue) const;
};

/// sum_{x in region} |v_k(x)|^2 for every eigenpair k.
std::vector<double> region_weights(const SpectralSummary& s, std::span<const std::size_t> region);

/// tr(chi_region f(H)) from the eigendecomposition. ArgumentError when region
/// indices fall outside the domain or repeat.
double restricted_trace(const SpectralSummary& s, std::span<const std::size_t> region, SpectralFunction f);
double restricted_trace(const DiscreteHamiltonian& h, std::span<const std::size_t> region, SpectralFunction f);

}  // namespace idslab
