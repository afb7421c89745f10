#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "idslab/folner.hpp"
#include "idslab/random_model.hpp"

namespace idslab {

/// Sparse symmetric matrix stored as diagonal plus strict upper triangle (CSR).
/// A full-pattern copy of the off-diagonal part is kept for matrix-vector work.
class SymmetricMatrix {
 public:
  struct Entry {
    std::size_t row;
    std::size_t col;
    double value;
  };

  SymmetricMatrix() = default;
  /// Off-diagonal entries with row < col; duplicates are summed in input order.
  SymmetricMatrix(std::vector<double> diagonal, std::vector<Entry> upper);

  std::size_t size() const { return diag_.size(); }
  const std::vector<double>& diagonal() const { return diag_; }
  const std::vector<std::size_t>& upper_row_ptr() const { return up_ptr_; }
  const std::vector<std::size_t>& upper_cols() const { return up_cols_; }
  const std::vector<double>& upper_values() const { return up_vals_; }
  std::size_t nonzeros_upper() const { return diag_.size() + up_vals_.size(); }

  double entry(std::size_t i, std::size_t j) const;
  Eigen::MatrixXd to_dense() const;
  /// max |i - j| over stored entries.
  std::size_t bandwidth() const { return bandwidth_; }
  /// max row sum of |entries|; bounds the spectral radius.
  double inf_norm() const;

  void multiply(std::span<const double> x, std::span<double> y) const;

  // Full off-diagonal pattern, both triangles.
  const std::vector<std::size_t>& row_ptr() const { return full_ptr_; }
  const std::vector<std::size_t>& cols() const { return full_cols_; }
  const std::vector<double>& values() const { return full_vals_; }

  bool operator==(const SymmetricMatrix& other) const;

 private:
  std::vector<double> diag_;
  std::vector<std::size_t> up_ptr_{0};
  std::vector<std::size_t> up_cols_;
  std::vector<double> up_vals_;
  std::vector<std::size_t> full_ptr_{0};
  std::vector<std::size_t> full_cols_;
  std::vector<double> full_vals_;
  std::size_t bandwidth_ = 0;
};

enum class BoundaryCondition { dirichlet, periodic };

struct Provenance {
  std::uint64_t model_digest = 0;
  Realization realization;
  Box window;
};

/// Undirected edge between two domain vertices with its length in the random metric.
struct GraphEdge {
  std::size_t a;
  std::size_t b;
  double length;
};

/// Symmetrized Schroedinger operator M^{1/2} H M^{-1/2} on a box of mesh vertices,
/// with H f(x) = (1/mu(x)) sum_y w(x,y) (f(x) - f(y)) + V(x) f(x).
struct DiscreteHamiltonian {
  int dim = 1;
  double mesh_step = 1.0;
  Box domain;
  BoundaryCondition boundary = BoundaryCondition::dirichlet;
  SymmetricMatrix matrix;
  std::vector<double> measure;
  std::vector<double> potential;
  std::vector<GraphEdge> edges;
  Provenance provenance;

  std::size_t size() const { return matrix.size(); }
  double volume() const;
  /// H + c I; the potential field is shifted along with it.
  DiscreteHamiltonian shifted(double c) const;
  /// Same metric part with the potential replaced by `values`.
  DiscreteHamiltonian with_potential(std::vector<double> values) const;
  /// Domain indices of the vertices of `region`; ArgumentError unless region is a subset.
  std::vector<std::size_t> indices_of(const Box& region) const;
};

/// Restriction to `domain` with Dirichlet deletion: edges leaving the domain only
/// feed the diagonal. Fields must cover the domain plus one vertex layer.
DiscreteHamiltonian assemble_dirichlet(const MetricField& metric, const PotentialField& potential,
                                       const Box& domain);
DiscreteHamiltonian assemble_dirichlet(const MetricField& metric, const PotentialField& potential,
                                       const FolnerBox& box);

/// Torus operator on (Z / side Z)^d cells. Fields must come from a periodic
/// realization with period `side` sampled on [0, side * mesh]^d.
DiscreteHamiltonian assemble_supercell(const MetricField& metric, const PotentialField& potential,
                                       std::int64_t side);

/// Samples a periodic realization of `seed` (optionally translated by `shift`
/// cells) and assembles the torus operator with `side` cells per axis.
DiscreteHamiltonian make_supercell(const ModelConfig& cfg, std::uint64_t seed, std::int64_t side,
                                   const Coord& shift = {});

/// Samples both fields on box.vertices() grown by one layer and assembles.
DiscreteHamiltonian make_dirichlet(const ModelConfig& cfg, const Realization& omega, const Box& domain);
DiscreteHamiltonian make_dirichlet(const ModelConfig& cfg, std::uint64_t seed, const FolnerBox& box);

struct EquivarianceReport {
  bool pass = false;
  std::size_t mismatched_entries = 0;
};

/// Compares H on D for the realization shifted by gamma against H on D + gamma
/// for the unshifted realization, entry by entry and bit for bit.
EquivarianceReport equivariance_check(const ModelConfig& cfg, std::uint64_t seed, const Coord& gamma,
                                      const FolnerBox& box);

struct FormReport {
  double constant = 1.0;     ///< C_A
  double min_ratio = 1.0;
  double max_ratio = 1.0;
  std::size_t trials = 0;
  bool pass = false;
};

/// C_A for the symmetrized forms, from C_g, C_rho, d and the potential ceiling:
///   upper: 2 c C_g^{d/2} and 1 + d c C_rho^2 C_g^{d/2} / 2 + V_max
///   lower: 2 c C_g^{d/2} and 1 + d C_rho^2 C_g^d / 2
/// with c = C_g^{|d-2|/2} bounding the conductance factor.
double comparability_constant(const ModelConfig& cfg, double potential_max);

/// Ratio (<f, H_w f> + |f|^2) / (<f, H_0 f> + |f|^2) over deterministic random f.
FormReport form_comparability(const DiscreteHamiltonian& flat, const DiscreteHamiltonian& random,
                              std::size_t trials, double constant, std::uint64_t seed = 1);

/// Same ratio for one vector.
double form_ratio(const DiscreteHamiltonian& flat, const DiscreteHamiltonian& random,
                  std::span<const double> f);

/// Coordinate text export: header "%%idslab coordinate symmetric-upper", then
/// "n nnz", then "row col value" (0-based, row <= col, 17 significant digits).
void write_coordinate(std::ostream& os, const DiscreteHamiltonian& h);

}  // namespace idslab
