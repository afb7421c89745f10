#include <cmath>
#include <random>

#include "doctest.h"
#include "idslab/errors.hpp"
#include "idslab/hash.hpp"
#include "idslab/ids_lab.hpp"

using namespace idslab;

namespace {

ModelConfig config(int dim, int mesh, double a, double q) {
  ModelConfig cfg;
  cfg.dim = dim;
  cfg.mesh = mesh;
  cfg.metric_amplitude = a;
  cfg.potential_amplitude = q;
  return cfg;
}

const ModelConfig kFlat1 = config(1, 1, 0, 0);

}  // namespace

TEST_CASE("counting IDS on the path graph") {
  const IDSEstimate e = counting_ids(kFlat1, 0, FolnerBox{1, 1, 1}, {0.0, 2.0, 10.0});
  CHECK(e.volume == 3.0);
  CHECK(e.values[0] == 0.0);
  CHECK(e.values[1] == doctest::Approx(1.0 / 3.0));
  CHECK(e.values[2] == 1.0);
  CHECK(e.counts == std::vector<std::size_t>{0, 1, 3});
}

TEST_CASE("IDS invariants") {
  const ModelConfig cfg = config(2, 2, 0.3, 1.0);
  const std::vector<double> grid = default_lambda_grid(cfg);
  CHECK(grid.size() == 200);
  CHECK(grid.back() == doctest::Approx(33.0));
  const IDSEstimate e = counting_ids(cfg, 5, FolnerBox{2, 2, 2}, grid);
  CHECK(e.monotone());
  CHECK(e.within_state_bound(cfg));
  CHECK(e.values.front() == 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(e.values[i] * e.volume == doctest::Approx(static_cast<double>(e.counts[i])));
}

TEST_CASE("free IDS") {
  const ModelConfig cfg = config(2, 2, 0.3, 1.0);
  const std::vector<double> grid{-1.0, 2.0, 8.0, 15.0, 40.0};
  const IDSEstimate d = counting_ids(cfg, 3, FolnerBox{2, 1, 2}, grid);
  const IDSEstimate f = free_ids(cfg, 3, FolnerBox{2, 1, 2}, grid, 0);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(f.values[i] == doctest::Approx(d.values[i]).epsilon(1e-12));
  CHECK(f.values[0] == 0.0);

  // Gap between the two curves shrinks with the box.
  const std::vector<double> two{2.0};
  const double g4 = std::abs(free_ids(kFlat1, 0, FolnerBox{1, 4, 1}, two, 8).values[0] -
                             counting_ids(kFlat1, 0, FolnerBox{1, 4, 1}, two).values[0]);
  const double g8 = std::abs(free_ids(kFlat1, 0, FolnerBox{1, 8, 1}, two, 8).values[0] -
                             counting_ids(kFlat1, 0, FolnerBox{1, 8, 1}, two).values[0]);
  CHECK(g8 < g4);
}

TEST_CASE("Laplace transform") {
  const LaplaceTable one = laplace_transform(kFlat1, 0, FolnerBox{1, 0, 1}, {0.0, 1.0});
  CHECK(one.values[0] == 1.0);
  CHECK(one.values[1] == doctest::Approx(0.1353352832366127).epsilon(1e-14));

  const ModelConfig cfg = config(2, 2, 0.3, 1.0);
  const LaplaceTable l = laplace_transform(cfg, 4, FolnerBox{2, 2, 2}, {0.0, 0.5, 1.0, 1.5, 2.0});
  CHECK(l.values[0] == doctest::Approx(static_cast<double>(l.dimension) / l.volume).epsilon(1e-15));
  for (std::size_t i = 1; i < l.values.size(); ++i) {
    CHECK(l.values[i] < l.values[i - 1]);
    CHECK(l.values[i] == doctest::Approx(l.stieltjes[i]).epsilon(1e-10));
  }
  // Equal steps: second differences are positive.
  for (std::size_t i = 1; i + 1 < l.values.size(); ++i) CHECK(l.values[i - 1] + l.values[i + 1] > 2.0 * l.values[i]);
  CHECK(l.bound_ok);
}

TEST_CASE("trace gap") {
  const ModelConfig flat2 = config(2, 1, 0, 0);
  CHECK(trace_gap(flat2, 0, FolnerBox{2, 2, 1}, 1.0, 0).value == 0.0);
  double prev = std::numeric_limits<double>::infinity();
  for (std::int64_t l : {2, 4, 8}) {
    const TraceGap g = trace_gap(flat2, 0, FolnerBox{2, l, 1}, 1.0);
    CHECK(g.value >= 0.0);
    CHECK(g.value < prev);
    CHECK(g.value <= 1.0 * isoperimetric_ratio(FolnerBox{2, l, 1}, 1.0).value());
    prev = g.value;
  }
}

TEST_CASE("abstract IDS") {
  const std::vector<std::uint64_t> one{1};
  const AbstractEstimate heat = abstract_ids(kFlat1, one, 4, SpectralFunction::Kind::heat, {1.0});
  CHECK(heat.values[0] == doctest::Approx(0.3222465513404899).epsilon(1e-13));

  const ModelConfig flat2 = config(2, 2, 0, 0);
  const AbstractEstimate all = abstract_ids(flat2, one, 3, SpectralFunction::Kind::projection, {1e6});
  CHECK(all.values[0] == doctest::Approx(4.0).epsilon(1e-12));

  CHECK_THROWS_AS(abstract_ids(kFlat1, {}, 4, SpectralFunction::Kind::heat, {1.0}), ArgumentError);

  // Which cell plays F does not matter beyond Monte Carlo error.
  const ModelConfig cfg = config(2, 1, 0.3, 1.0);
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 0; s < 24; ++s) seeds.push_back(nth_seed(9, s));
  const AbstractEstimate base = abstract_ids(cfg, seeds, 4, SpectralFunction::Kind::heat, {1.0});
  for (std::int64_t c = 1; c < 8; ++c) {
    const AbstractEstimate other =
        abstract_ids(cfg, seeds, 4, SpectralFunction::Kind::heat, {1.0}, {Coord{c % 4, c / 4, 0}});
    const double se = std::hypot(base.std_error[0], other.std_error[0]);
    CHECK(std::abs(other.values[0] - base.values[0]) <= 4.0 * se);
  }
}

TEST_CASE("extrapolation to zero") {
  // y = 3 - 2x + 5x^2 is reproduced exactly by three points.
  const std::vector<double> x{0.5, 0.25, 0.1};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 - 2.0 * v + 5.0 * v * v);
  CHECK(extrapolate_to_zero(x, y) == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(extrapolate_to_zero({0.3}, {7.0}) == 7.0);
  CHECK_THROWS_AS(extrapolate_to_zero({0.1, 0.1}, {1.0, 2.0}), ArgumentError);

  // Flat chain: the per-vertex heat trace is a + b / n up to exponentially
  // small terms, so two sizes recover exp(-2) I_0(2).
  std::vector<double> inv;
  std::vector<double> lap;
  for (std::int64_t l : {8, 16}) {
    const LaplaceTable t = laplace_transform(kFlat1, 0, FolnerBox{1, l, 1}, {1.0});
    inv.push_back(1.0 / static_cast<double>(2 * l + 1));
    lap.push_back(t.values[0]);
  }
  CHECK(extrapolate_to_zero(inv, lap) == doctest::Approx(0.308508322553671).epsilon(1e-8));
}

TEST_CASE("exhaustion experiment") {
  const ModelConfig flat2 = config(2, 1, 0, 0);
  const AdmissibleSequence seq = make_admissible_sequence(2, {1, 2, 3});
  const std::vector<double> grid = default_lambda_grid(flat2, 30);
  const ExhaustionReport r = exhaustion_experiment(flat2, {1, 2, 3}, seq, grid, 0.01);
  for (const ExhaustionLevel& lvl : r.levels)
    for (double s : lvl.stddev) CHECK(s == 0.0);
  CHECK(r.levels[0].cauchy[0] == 0.0);
  CHECK(r.levels[1].cauchy[0] > 0.0);
}

TEST_CASE("locally flat points") {
  const std::vector<char> f = locally_flat({0.0, 0.0, 1.0, 1.0, 1.0}, 0.1);
  CHECK(f == std::vector<char>{1, 0, 0, 1, 1});
}

TEST_CASE("ergodic averages") {
  const ModelConfig cfg = config(2, 1, 0.3, 1.0);
  const AdmissibleSequence seq = make_admissible_sequence(2, {2, 4, 8, 16});
  const auto a = ergodic_average(cfg, 3, Observable::metric_amplitude, seq);
  CHECK(std::abs(a.back().average) <= 4.0 * 0.3 / std::sqrt(static_cast<double>(a.back().cells)));
  const auto q = ergodic_average(cfg, 3, Observable::potential_amplitude, seq);
  CHECK(std::abs(q.back().z) <= 4.0);
  CHECK(q.back().expectation == 0.5);

  const auto c = ergodic_average(config(2, 1, 0, 0), 3, Observable::metric_amplitude, seq);
  for (const ErgodicRow& row : c) CHECK(row.average == 0.0);
  CHECK_THROWS_AS(parse_observable("nope"), ArgumentError);
  CHECK(parse_observable("heat-trace") == Observable::heat_trace);

  const auto h = ergodic_average(config(1, 1, 0, 0), 0, Observable::heat_trace, make_admissible_sequence(1, {4, 8}));
  // Flat chain far from the boundary: exp(-2) I_0(2).
  CHECK(h.back().average == doctest::Approx(0.308508322553671).epsilon(0.02));
}

TEST_CASE("shift identity") {
  const ModelConfig cfg = config(2, 2, 0.3, 1.0);
  const std::vector<double> grid = default_lambda_grid(cfg, 50);
  CHECK(shift_identity_check(cfg, 1, FolnerBox{2, 1, 2}, 0.0, grid).pass);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int k = 0; k < 20; ++k) CHECK(shift_identity_check(cfg, rng(), FolnerBox{2, 1, 2}, u(rng), grid).pass);
  const std::vector<double> low{-1.0, -0.5};
  CHECK(shift_identity_check(cfg, 1, FolnerBox{2, 1, 2}, 100.0, low).pass);
}
