#include <doctest.h>

#include "idslab/lattice.hpp"

using namespace idslab;

TEST_CASE("box indexing round-trips and is lexicographic") {
  const Box b(3, {-1, 0, 2}, {1, 2, 3});
  CHECK(b.size() == 3 * 3 * 2);
  CHECK(b.stride(0) == 6);
  CHECK(b.stride(2) == 1);
  for (std::size_t i = 0; i < b.size(); ++i) CHECK(b.index_of(b.point_at(i)) == i);
  CHECK(b.index_of({-1, 0, 3}) == 1);
}

TEST_CASE("floor division and positive modulus") {
  CHECK(floor_div(-1, 2) == -1);
  CHECK(floor_div(-2, 2) == -1);
  CHECK(floor_div(3, 2) == 1);
  CHECK(pos_mod(-1, 4) == 3);
}

TEST_CASE("box containment and translation") {
  const Box b = Box::cube(2, 0, 3);
  CHECK(b.contains(Box::cube(2, 1, 2)));
  CHECK_FALSE(b.contains(Box::cube(2, 1, 4)));
  CHECK(b.translated({2, 2, 0}) == Box::cube(2, 2, 5));
  CHECK(b.grown(1) == Box::cube(2, -1, 4));
  CHECK(Box(1, {3}, {2}).empty());
}
