#include "idslab/folner.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "idslab/errors.hpp"
#include "idslab/hash.hpp"

namespace idslab {

namespace {

struct CoordHash {
  std::size_t operator()(const Coord& c) const {
    return static_cast<std::size_t>(hash_cell(0, c, kMaxDim));
  }
};

using CoordSet = std::unordered_set<Coord, CoordHash>;

std::int64_t layers_for(double mesh_step, double thickness) {
  // Number of vertex layers within distance `thickness`; tolerant of t = k h
  // computed in floating point.
  return static_cast<std::int64_t>(std::floor(thickness / mesh_step + 1e-9));
}

}  // namespace

Box FolnerBox::cells() const { return Box::cube(dim, -radius, radius); }

Box FolnerBox::vertices() const {
  return Box::cube(dim, -radius * mesh, (radius + 1) * mesh - 1);
}

IndexSet enumerate(const Box& box) {
  IndexSet out;
  out.reserve(box.size());
  for (std::size_t i = 0; i < box.size(); ++i) out.push_back(box.point_at(i));
  return out;
}

std::size_t difference_set_size(const IndexSet& a, const IndexSet& b, int dim) {
  CoordSet diff;
  for (const Coord& x : a) {
    for (const Coord& y : b) {
      Coord z = x - y;
      for (int i = dim; i < kMaxDim; ++i) z[i] = 0;
      diff.insert(z);
    }
  }
  return diff.size();
}

double temperedness_ratio(const Box& next, const Box& prev) {
  if (next.dim() != prev.dim()) throw ArgumentError("boxes of different dimension");
  std::size_t count = 1;
  for (int axis = 0; axis < next.dim(); ++axis) {
    const IndexSet a = enumerate(Box(1, {next.lo()[axis]}, {next.hi()[axis]}));
    const IndexSet b = enumerate(Box(1, {prev.lo()[axis]}, {prev.hi()[axis]}));
    count *= difference_set_size(a, b, 1);
  }
  return static_cast<double>(count) / static_cast<double>(next.size());
}

AdmissibleSequence make_admissible_sequence(int dim, const std::vector<std::int64_t>& radii, int mesh) {
  if (dim < 1 || dim > kMaxDim) throw ArgumentError("dimension must lie in [1, 3]");
  if (mesh < 1) throw ArgumentError("mesh must be >= 1");
  if (radii.empty()) throw ArgumentError("admissible sequence needs at least one radius");
  for (std::size_t j = 0; j < radii.size(); ++j) {
    if (radii[j] < 0) throw ArgumentError("radii must be nonnegative");
    if (j > 0 && radii[j] <= radii[j - 1]) throw ArgumentError("radii must be strictly increasing");
  }
  AdmissibleSequence seq;
  seq.dim = dim;
  seq.mesh = mesh;
  for (const auto r : radii) seq.boxes.push_back(FolnerBox{dim, r, mesh});
  for (std::size_t j = 1; j < seq.boxes.size(); ++j) {
    const double ratio = temperedness_ratio(seq.boxes[j].cells(), seq.boxes[j - 1].cells());
    seq.ratios.push_back(ratio);
    seq.temperedness = std::max(seq.temperedness, ratio);
  }
  return seq;
}

std::vector<std::int64_t> dyadic_radii(int first, int last) {
  std::vector<std::int64_t> out;
  for (int j = first; j <= last; ++j) out.push_back(std::int64_t{1} << j);
  return out;
}

double folner_defect(const IndexSet& set, const Coord& gamma, int dim) {
  if (set.empty()) return 0.0;
  CoordSet base(set.begin(), set.end());
  CoordSet moved;
  for (const Coord& c : set) {
    Coord z = c + gamma;
    for (int i = dim; i < kMaxDim; ++i) z[i] = 0;
    moved.insert(z);
  }
  std::size_t sym = 0;
  for (const Coord& c : base) sym += moved.count(c) == 0 ? 1 : 0;
  for (const Coord& c : moved) sym += base.count(c) == 0 ? 1 : 0;
  return static_cast<double>(sym) / static_cast<double>(base.size());
}

ThickenedBoundary thicken(const Box& domain, double mesh_step, double thickness) {
  if (!(thickness > 0.0)) throw ArgumentError("thickness must be positive");
  if (!(mesh_step > 0.0)) throw ArgumentError("mesh step must be positive");
  ThickenedBoundary tb;
  tb.domain = domain;
  tb.thickness = thickness;
  const std::int64_t layers = layers_for(mesh_step, thickness);
  for (std::size_t v = 0; v < domain.size(); ++v) {
    const Coord z = domain.point_at(v);
    std::int64_t dist = std::numeric_limits<std::int64_t>::max();
    for (int i = 0; i < domain.dim(); ++i) {
      dist = std::min({dist, z[i] - domain.lo()[i] + 1, domain.hi()[i] - z[i] + 1});
    }
    (dist <= layers ? tb.boundary : tb.core).push_back(v);
  }
  return tb;
}

BoundaryRatio isoperimetric_ratio(const FolnerBox& box, double thickness) {
  const ThickenedBoundary tb = thicken(box.vertices(), 1.0 / box.mesh, thickness);
  return BoundaryRatio{tb.boundary.size(), tb.domain.size()};
}

}  // namespace idslab
