#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "idslab/errors.hpp"
#include "idslab/folner.hpp"

using namespace idslab;

TEST_CASE("Folner box geometry") {
  const FolnerBox b{2, 3, 2};
  CHECK(b.cells() == Box::cube(2, -3, 3));
  CHECK(b.vertices() == Box::cube(2, -6, 7));
  CHECK(b.cell_count() == 49);
}

TEST_CASE("difference set of intervals") {
  const IndexSet a = enumerate(Box::cube(1, -2, 2));
  const IndexSet b = enumerate(Box::cube(1, -1, 1));
  CHECK(difference_set_size(a, b, 1) == 7);
}

TEST_CASE("temperedness ratio") {
  CHECK(temperedness_ratio(Box::cube(1, -2, 2), Box::cube(1, -1, 1)) == doctest::Approx(7.0 / 5.0));
  const AdmissibleSequence s = make_admissible_sequence(2, {2, 4, 8});
  REQUIRE(s.ratios.size() == 2);
  for (double r : s.ratios) CHECK(r <= 4.0);
  CHECK(s.temperedness == doctest::Approx(std::max(s.ratios[0], s.ratios[1])));
  CHECK(make_admissible_sequence(1, {5}).temperedness == 0.0);
}

TEST_CASE("admissible sequence validation") {
  CHECK_THROWS_AS(make_admissible_sequence(2, {}), ArgumentError);
  CHECK_THROWS_AS(make_admissible_sequence(2, {4, 4}), ArgumentError);
  CHECK_THROWS_AS(make_admissible_sequence(2, {4, 2}), ArgumentError);
  CHECK(dyadic_radii(1, 3) == std::vector<std::int64_t>{2, 4, 8});
}

TEST_CASE("Folner defect") {
  const IndexSet i10 = enumerate(Box::cube(1, -10, 10));
  CHECK(folner_defect(i10, {1, 0, 0}, 1) == doctest::Approx(0.09523809523809523).epsilon(1e-15));
  double prev = 1e9;
  for (std::int64_t l : {2, 4, 8, 16}) {
    const double d = folner_defect(enumerate(Box::cube(2, -l, l)), {1, 1, 0}, 2);
    CHECK(d < prev);
    prev = d;
  }
  CHECK(folner_defect(i10, {0, 0, 0}, 1) == 0.0);
}

TEST_CASE("thickened boundary") {
  const ThickenedBoundary tb = thicken(Box::cube(1, -3, 3), 1.0, 1.0);
  CHECK(tb.boundary.size() == 2);
  REQUIRE(tb.core.size() == 5);
  CHECK(Box::cube(1, -3, 3).point_at(tb.core.front())[0] == -2);
  CHECK(Box::cube(1, -3, 3).point_at(tb.core.back())[0] == 2);
  CHECK(thicken(Box::cube(1, -3, 3), 1.0, 4.0).core.empty());
}

TEST_CASE("isoperimetric ratio") {
  CHECK(isoperimetric_ratio(FolnerBox{2, 10, 1}, 1.0).value() == doctest::Approx(0.18140589569160998).epsilon(1e-15));
  double prev = 1.0;
  for (std::int64_t l : {4, 8, 16}) {
    const double r = isoperimetric_ratio(FolnerBox{2, l, 1}, 1.0).value();
    CHECK(r < prev);
    prev = r;
  }
  // layer count bound: |boundary| <= 2 d k (side)^(d-1) for k layers
  for (int d = 1; d <= 3; ++d) {
    const FolnerBox b{d, 3, 2};
    const BoundaryRatio r = isoperimetric_ratio(b, 1.0);
    const double side = static_cast<double>(b.vertices().extent(0));
    CHECK(static_cast<double>(r.boundary_vertices) <= 2.0 * d * 2.0 * std::pow(side, d - 1));
  }
}
