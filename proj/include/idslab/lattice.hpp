#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>

namespace idslab {

inline constexpr int kMaxDim = 3;

/// Integer lattice point; axes at or beyond the active dimension are kept at 0.
using Coord = std::array<std::int64_t, kMaxDim>;

constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  const std::int64_t q = a / b;
  return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

constexpr std::int64_t pos_mod(std::int64_t a, std::int64_t b) {
  const std::int64_t r = a % b;
  return r < 0 ? r + b : r;
}

Coord operator+(const Coord& a, const Coord& b);
Coord operator-(const Coord& a, const Coord& b);
Coord scaled(const Coord& a, std::int64_t s);
std::string to_string(const Coord& c, int dim);

/// Axis-aligned box of lattice points with inclusive bounds.
///
/// Points are numbered lexicographically with axis 0 varying slowest, so a
/// nearest-neighbour operator on the box has bandwidth equal to stride(0).
class Box {
 public:
  Box() = default;
  Box(int dim, const Coord& lo, const Coord& hi);

  /// [lo, hi]^dim.
  static Box cube(int dim, std::int64_t lo, std::int64_t hi);

  int dim() const { return dim_; }
  const Coord& lo() const { return lo_; }
  const Coord& hi() const { return hi_; }

  std::int64_t extent(int axis) const;
  std::size_t size() const;
  bool empty() const { return size() == 0; }
  std::size_t stride(int axis) const;

  bool contains(const Coord& p) const;
  bool contains(const Box& other) const;

  std::size_t index_of(const Coord& p) const;
  Coord point_at(std::size_t index) const;

  Box translated(const Coord& by) const;
  Box grown(std::int64_t layers) const;

  bool operator==(const Box& other) const = default;

 private:
  int dim_ = 0;
  Coord lo_{};
  Coord hi_{};
};

}  // namespace idslab
