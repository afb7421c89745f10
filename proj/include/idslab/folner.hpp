#pragma once

#include <cstdint>
#include <vector>

#include "idslab/lattice.hpp"

namespace idslab {

/// Cube of cells I_L = [-L, L]^d and the mesh vertices D_L it tiles.
struct FolnerBox {
  int dim = 1;
  std::int64_t radius = 0;
  int mesh = 1;

  /// I_L as a box of cell indices.
  Box cells() const;
  /// D_L: every mesh vertex of every cell in I_L, i.e. [-L m, (L+1) m - 1]^d.
  Box vertices() const;
  std::size_t cell_count() const { return cells().size(); }
};

/// Finite set of group elements (cells) of Z^d.
using IndexSet = std::vector<Coord>;

IndexSet enumerate(const Box& box);

/// |A B^{-1}| = |{a - b}| by explicit enumeration of all pairs.
std::size_t difference_set_size(const IndexSet& a, const IndexSet& b, int dim);

/// |I_{j+1} I_j^{-1}| / |I_{j+1}| for two cell boxes. Product sets decompose
/// axis by axis, and each axis is still enumerated pairwise.
double temperedness_ratio(const Box& next, const Box& prev);

struct AdmissibleSequence {
  int dim = 1;
  int mesh = 1;
  std::vector<FolnerBox> boxes;
  std::vector<double> ratios;   ///< temperedness ratio for each consecutive pair
  double temperedness = 0.0;    ///< sup of ratios; 0 for a single box
};

/// Throws ArgumentError unless radii are nonempty and strictly increasing.
AdmissibleSequence make_admissible_sequence(int dim, const std::vector<std::int64_t>& radii, int mesh = 1);

/// Default schedule L_j = 2^j, j = first..last.
std::vector<std::int64_t> dyadic_radii(int first, int last);

/// |I delta (I + gamma)| / |I|, by enumeration.
double folner_defect(const IndexSet& set, const Coord& gamma, int dim);

/// Vertices of a domain split by their l-infinity mesh distance to the outside.
///
/// A vertex z of the box [lo, hi] sits at distance h * min_i min(z_i - lo_i + 1,
/// hi_i - z_i + 1) from the nearest vertex outside, which is where Dirichlet data
/// vanish. The outermost layer therefore lies at distance h, the smallest
/// positive thickness resolvable on the mesh.
struct ThickenedBoundary {
  Box domain;
  double thickness = 0.0;
  std::vector<std::size_t> boundary;   ///< indices into domain with distance <= thickness
  std::vector<std::size_t> core;       ///< D_h, the complement
};

ThickenedBoundary thicken(const Box& domain, double mesh_step, double thickness);

struct BoundaryRatio {
  std::size_t boundary_vertices = 0;
  std::size_t domain_vertices = 0;
  double value() const {
    return domain_vertices == 0 ? 0.0 : static_cast<double>(boundary_vertices) / static_cast<double>(domain_vertices);
  }
};

/// vol_0(boundary layer of thickness t_h) / vol_0(D) by vertex counting.
BoundaryRatio isoperimetric_ratio(const FolnerBox& box, double thickness);

}  // namespace idslab
