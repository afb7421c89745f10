#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "idslab/spectral.hpp"

namespace idslab {

/// mu-weighted heat kernel K(t,x,y) = (exp(-t H))_xy / sqrt(mu(x) mu(y)).
struct KernelMatrix {
  double t = 0.0;
  Box domain;
  BoundaryCondition boundary = BoundaryCondition::dirichlet;
  Eigen::MatrixXd entries;
  std::vector<double> measure;
  double sup = 0.0;                 ///< empirical C_t
  double row_integral_sup = 0.0;    ///< max_x sum_y K(t,x,y) mu(y)

  std::size_t size() const { return measure.size(); }
};

KernelMatrix kernel(const DiscreteHamiltonian& h, double t, HeatMethod method = HeatMethod::uniformized);

/// max_x sum_y K(t,x,y)^a mu(y).
double row_integral(const KernelMatrix& k, double a);

struct MonotonicityReport {
  bool pass = false;
  double worst_excess = 0.0;   ///< max over pairs of (smaller - larger); <= 1e-12 to pass
  double min_gap = 0.0;        ///< min over pairs of (larger - smaller)
  std::size_t entries = 0;
};

inline constexpr double kMonotonicityTolerance = 1e-12;

/// K_{H^D} <= K_{H^D'} on D x D. Both operators must come from the same
/// realization and D must be a sub-box of D'.
MonotonicityReport check_domain_monotonicity(const DiscreteHamiltonian& small, const DiscreteHamiltonian& large,
                                             double t);

/// K_{Delta+V} <= K_{Delta+V'} for V >= V' >= 0 on the same domain and metric.
MonotonicityReport check_potential_monotonicity(const DiscreteHamiltonian& with_v, const DiscreteHamiltonian& with_v_prime,
                                                double t);

/// Full-space proxy around a domain: the box grown by `margin` cells on every side.
struct AmbientProxy {
  Box ambient;
  std::int64_t margin = 0;        ///< in cells
  double self_consistency = 0.0;  ///< max change of the probed kernel values when the margin doubles
};

inline constexpr double kMarginTolerance = 1e-10;

/// Smallest margin in {1, 2, 4, ...} cells (or exactly `requested` when nonzero)
/// for which doubling changes the probed ambient kernel values on `domain` by
/// less than 1e-10. The probe is the outermost vertex layer of the domain,
/// which is closest to the ambient edge and so feels it most. With
/// `diagonal_only` just K(t,x,x) is probed, otherwise whole rows restricted to
/// the domain. A requested margin that fails the test is an ArgumentError;
/// ResourceError when the ambient box would exceed the model's window ceiling.
AmbientProxy choose_margin(const ModelConfig& cfg, const Realization& omega, const Box& domain, double t,
                           std::int64_t requested = 0, bool diagonal_only = false, int threads = 0);

struct NftbRow {
  double thickness = 0.0;
  std::size_t core_vertices = 0;
  double sup_gap = 0.0;     ///< sup over core pairs of K_ambient - K_D (0 for an empty core)
  double min_gap = 0.0;     ///< inf over core pairs; >= -1e-12 by domain monotonicity
  bool empty_core = false;
};

struct NftbResult {
  double t = 0.0;
  AmbientProxy proxy;
  std::vector<NftbRow> rows;
  bool monotone = false;    ///< sup_gap non-increasing along the thickness grid
};

/// Not feeling the boundary: kernel gap between the ambient proxy and the
/// Dirichlet operator on D_L, over the core of each thickness.
NftbResult nftb_experiment(const ModelConfig& cfg, std::uint64_t seed, const FolnerBox& box, double t,
                           const std::vector<double>& thickness, std::int64_t margin = 0, int threads = 0);

/// Shortest-path distances from every vertex, edge lengths h exp(phi_mid).
Eigen::MatrixXd metric_distances(const DiscreteHamiltonian& h);

struct DecayFit {
  double t = 0.0;
  double log_constant = 0.0;   ///< log C_t
  double rate = 0.0;           ///< alpha_t
  double mean_residual = 0.0;  ///< mean of envelope - log K over fitted pairs
  double max_violation = 0.0;  ///< max of log K - envelope (<= ~1e-12 by construction)
  std::size_t pairs = 0;
  bool pass = false;

  double constant() const;
};

inline constexpr double kDecayMinTime = 0.5;

/// Upper envelope log K <= log C - alpha d^2 with the smallest mean gap,
/// i.e. the 100% quantile regression. Pairs with K below 1e-13 sup K are
/// dropped (round-off floor). ArgumentError when t < 0.5, the domain is
/// narrower than 8 mesh steps, or every distance coincides.
DecayFit fit_decay(const KernelMatrix& k, const DiscreteHamiltonian& h);

/// Diagonal of the flat full-lattice kernel, (exp(-2s) I_0(2s))^d / h^d with
/// s = t / h^2; bounds every flat kernel entry.
double flat_kernel_sup(int dim, double mesh_step, double t);

}  // namespace idslab
