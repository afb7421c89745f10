#include <cmath>
#include <cstring>
#include <sstream>

#include "doctest.h"
#include "idslab/errors.hpp"
#include "idslab/hash.hpp"
#include "idslab/random_model.hpp"

using namespace idslab;

namespace {

ModelConfig disordered(int dim, int mesh, double a = 0.3, double q = 1.0) {
  ModelConfig cfg;
  cfg.dim = dim;
  cfg.mesh = mesh;
  cfg.metric_amplitude = a;
  cfg.potential_amplitude = q;
  return cfg;
}

// Missing edges are NaN, so compare bit patterns.
bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("zero amplitude gives the flat field") {
  ModelConfig cfg;
  cfg.dim = 2;
  cfg.mesh = 2;
  const Box window = Box::cube(2, -3, 4);
  const MetricField f = sample_metric(cfg, window, 42);
  for (std::size_t v = 0; v < window.size(); ++v) {
    CHECK(f.density[v] == 1.0);
    CHECK(f.measure[v] == doctest::Approx(0.25).epsilon(1e-15));
  }
  const PotentialField p = sample_potential(cfg, window, 42);
  for (double x : p.values) CHECK(x == 0.0);
}

TEST_CASE("sampling is deterministic and seed dependent") {
  const ModelConfig cfg = disordered(2, 2);
  const Box window = Box::cube(2, -2, 5);
  const MetricField a = sample_metric(cfg, window, 7);
  const MetricField b = sample_metric(cfg, window, 7);
  const MetricField c = sample_metric(cfg, window, 8);
  CHECK(a.log_density == b.log_density);
  CHECK(same_bits(a.conductance, b.conductance));
  CHECK(a.log_density != c.log_density);
}

TEST_CASE("indicator bump with a single amplitude") {
  ModelConfig cfg;
  cfg.dim = 2;
  cfg.mesh = 1;
  cfg.bump = BumpProfile::indicator;
  cfg.metric_amplitude = 0.3;
  const Box window = Box::cube(2, -1, 1);
  const MetricField f = metric_from_amplitudes(cfg, window, [](const Coord& c) {
    return (c[0] == 0 && c[1] == 0) ? 0.3 : 0.0;
  });
  CHECK(f.density[window.index_of({0, 0, 0})] == doctest::Approx(0.5488116360940264).epsilon(1e-15));
  CHECK(f.density[window.index_of({1, 0, 0})] == 1.0);
}

TEST_CASE("constant potential amplitude gives a constant potential") {
  ModelConfig cfg;
  cfg.dim = 2;
  cfg.mesh = 2;
  cfg.potential_amplitude = 1.0;
  const Box window = Box::cube(2, -4, 4);
  const PotentialField p = potential_from_amplitudes(cfg, window, [](const Coord&) { return 0.5; });
  for (double x : p.values) CHECK(x == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("shift identity and inverse") {
  const ModelConfig cfg = disordered(2, 2);
  const Box window = Box::cube(2, -3, 3);
  const MetricField f = sample_metric(cfg, window, 11);
  const Coord gamma{2, -1, 0};
  const MetricField s = shift_realization(f, gamma);
  const MetricField moved = sample_metric(cfg, window.translated(scaled(gamma, cfg.mesh)), 11);
  CHECK(s.log_density == moved.log_density);
  CHECK(same_bits(s.conductance, moved.conductance));
  const MetricField back = shift_realization(s, Coord{-2, 1, 0});
  CHECK(back.log_density == f.log_density);
  CHECK(back.density == f.density);

  const PotentialField p = sample_potential(cfg, window, 11);
  CHECK(shift_realization(shift_realization(p, gamma), Coord{-2, 1, 0}).values == p.values);
}

TEST_CASE("overlapping windows agree on their intersection") {
  const ModelConfig cfg = disordered(2, 3);
  const Box a = Box::cube(2, -5, 3);
  const Box b = Box::cube(2, 0, 9);
  const MetricField fa = sample_metric(cfg, a, 5);
  const MetricField fb = sample_metric(cfg, b, 5);
  const Box common = Box::cube(2, 0, 3);
  for (std::size_t i = 0; i < common.size(); ++i) {
    const Coord z = common.point_at(i);
    CHECK(fa.log_density[a.index_of(z)] == fb.log_density[b.index_of(z)]);
  }
}

TEST_CASE("model bounds hold and a corrupted field fails") {
  for (int dim = 1; dim <= 3; ++dim) {
    const ModelConfig cfg = disordered(dim, 2, 0.4);
    const Box window = Box::cube(dim, -4, 4);
    MetricField f = sample_metric(cfg, window, 3);
    const ModelBoundsReport r = verify_model_bounds(f);
    CHECK(r.pass);
    CHECK(r.observed_metric_constant <= r.metric_constant);
    CHECK(r.observed_gradient <= r.gradient_bound);
    f.density[0] *= 10.0;
    CHECK_FALSE(verify_model_bounds(f).pass);
  }
  ModelConfig ind = disordered(2, 2, 0.4);
  ind.bump = BumpProfile::indicator;
  CHECK(verify_model_bounds(sample_metric(ind, Box::cube(2, -4, 4), 9)).pass);
}

TEST_CASE("potential is nonnegative and bounded by Q") {
  const ModelConfig cfg = disordered(2, 2, 0.3, 2.5);
  const PotentialField p = sample_potential(cfg, Box::cube(2, -6, 6), 17);
  for (double x : p.values) {
    CHECK(x >= 0.0);
    CHECK(x <= 2.5 + 1e-12);
  }
}

TEST_CASE("periodic realization wraps") {
  const Realization r{99, {}, 4};
  CHECK(r.uniform(kMetricLabel, {1, 2, 0}, 2) == r.uniform(kMetricLabel, {5, -2, 0}, 2));
}

TEST_CASE("configuration validation and resource limits") {
  ModelConfig cfg;
  cfg.dim = 4;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  cfg.dim = 2;
  cfg.mesh = 0;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  cfg.mesh = 1;
  cfg.metric_amplitude = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  cfg.metric_amplitude = 0.1;
  cfg.max_window_vertices = 10;
  CHECK_THROWS_AS(sample_metric(cfg, Box::cube(2, 0, 9), 1), ResourceError);
}

TEST_CASE("vertex and edge tables") {
  ModelConfig cfg;
  cfg.dim = 1;
  const MetricField f = sample_metric(cfg, Box::cube(1, 0, 2), 1);
  std::ostringstream v, e;
  write_vertex_table(v, f);
  write_edge_table(e, f);
  CHECK(v.str() == "vertex,x0,rho,mu\n0,0,1,1\n1,1,1,1\n2,2,1,1\n");
  CHECK(e.str() == "vertex,axis,w\n0,0,1\n1,0,1\n");
}
