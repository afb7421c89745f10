#include "idslab/lattice.hpp"

#include "idslab/errors.hpp"

namespace idslab {

Coord operator+(const Coord& a, const Coord& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

Coord operator-(const Coord& a, const Coord& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

Coord scaled(const Coord& a, std::int64_t s) { return {a[0] * s, a[1] * s, a[2] * s}; }

std::string to_string(const Coord& c, int dim) {
  std::string out = "(";
  for (int i = 0; i < dim; ++i) {
    if (i > 0) out += ",";
    out += std::to_string(c[i]);
  }
  return out + ")";
}

Box::Box(int dim, const Coord& lo, const Coord& hi) : dim_(dim), lo_(lo), hi_(hi) {
  if (dim < 1 || dim > kMaxDim) {
    throw ArgumentError("box dimension must lie in [1, " + std::to_string(kMaxDim) + "]");
  }
  for (int i = dim; i < kMaxDim; ++i) {
    lo_[i] = 0;
    hi_[i] = 0;
  }
}

Box Box::cube(int dim, std::int64_t lo, std::int64_t hi) {
  return Box(dim, {lo, lo, lo}, {hi, hi, hi});
}

std::int64_t Box::extent(int axis) const {
  const std::int64_t e = hi_[axis] - lo_[axis] + 1;
  return e > 0 ? e : 0;
}

std::size_t Box::size() const {
  if (dim_ == 0) return 0;
  std::size_t n = 1;
  for (int i = 0; i < dim_; ++i) n *= static_cast<std::size_t>(extent(i));
  return n;
}

std::size_t Box::stride(int axis) const {
  std::size_t s = 1;
  for (int i = dim_ - 1; i > axis; --i) s *= static_cast<std::size_t>(extent(i));
  return s;
}

bool Box::contains(const Coord& p) const {
  for (int i = 0; i < dim_; ++i) {
    if (p[i] < lo_[i] || p[i] > hi_[i]) return false;
  }
  return dim_ > 0;
}

bool Box::contains(const Box& other) const {
  if (other.dim_ != dim_) return false;
  if (other.empty()) return true;
  return contains(other.lo_) && contains(other.hi_);
}

std::size_t Box::index_of(const Coord& p) const {
  std::size_t idx = 0;
  for (int i = 0; i < dim_; ++i) {
    idx = idx * static_cast<std::size_t>(extent(i)) + static_cast<std::size_t>(p[i] - lo_[i]);
  }
  return idx;
}

Coord Box::point_at(std::size_t index) const {
  Coord p{};
  for (int i = dim_ - 1; i >= 0; --i) {
    const auto e = static_cast<std::size_t>(extent(i));
    p[i] = lo_[i] + static_cast<std::int64_t>(index % e);
    index /= e;
  }
  return p;
}

Box Box::translated(const Coord& by) const {
  return Box(dim_, lo_ + by, hi_ + by);
}

Box Box::grown(std::int64_t layers) const {
  const Coord d{layers, layers, layers};
  return Box(dim_, lo_ - d, hi_ + d);
}

}  // namespace idslab
