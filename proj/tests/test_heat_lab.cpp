#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "idslab/errors.hpp"
#include "idslab/heat_lab.hpp"

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

}  // namespace

TEST_CASE("single-vertex kernel") {
  const DiscreteHamiltonian h = make_supercell(config(2, 1, 0.3, 1.0), 6, 1);
  REQUIRE(h.size() == 1);
  const KernelMatrix k = kernel(h, 1.3);
  CHECK(k.entries(0, 0) == doctest::Approx(std::exp(-1.3 * h.potential[0]) / h.measure[0]).epsilon(1e-14));
}

TEST_CASE("torus kernel is stochastically complete without potential") {
  const DiscreteHamiltonian h = make_supercell(config(2, 2, 0.3, 0.0), 4, 3);
  const KernelMatrix k = kernel(h, 1.0);
  for (Eigen::Index i = 0; i < k.entries.rows(); ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < k.entries.cols(); ++j) row += k.entries(i, j) * k.measure[static_cast<std::size_t>(j)];
    CHECK(row == doctest::Approx(1.0).epsilon(1e-10));
  }
  CHECK(k.row_integral_sup == doctest::Approx(1.0).epsilon(1e-10));
  CHECK((k.entries - k.entries.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("kernel sup decreases in t") {
  const DiscreteHamiltonian h = make_dirichlet(config(2, 2, 0.3, 1.0), 3, FolnerBox{2, 2, 2});
  double prev = std::numeric_limits<double>::infinity();
  for (double t : {0.5, 1.0, 2.0, 4.0}) {
    const double s = kernel(h, t).sup;
    CHECK(s < prev);
    prev = s;
  }
}

TEST_CASE("domain monotonicity") {
  const ModelConfig flat = config(1, 1, 0, 0);
  const DiscreteHamiltonian p3 = make_dirichlet(flat, 0, FolnerBox{1, 1, 1});
  const DiscreteHamiltonian p5 = make_dirichlet(flat, 0, FolnerBox{1, 2, 1});
  const MonotonicityReport same = check_domain_monotonicity(p3, p3, 1.0);
  CHECK(same.pass);
  CHECK(same.worst_excess == 0.0);
  const MonotonicityReport r = check_domain_monotonicity(p3, p5, 1.0);
  CHECK(r.pass);
  CHECK(r.min_gap > 0.0);
  CHECK(r.min_gap == doctest::Approx(0.0131).epsilon(0.01));
  CHECK_THROWS_AS(check_domain_monotonicity(p5, p3, 1.0), ArgumentError);

  std::mt19937_64 rng(77);
  const ModelConfig cfg = config(2, 2, 0.3, 1.0);
  int passed = 0;
  for (int k = 0; k < 50; ++k) {
    const Realization omega{rng(), {}, 0};
    const std::int64_t lo0 = static_cast<std::int64_t>(rng() % 4), lo1 = static_cast<std::int64_t>(rng() % 4);
    const Box small({2, {lo0, lo1, 0}, {lo0 + 2 + static_cast<std::int64_t>(rng() % 3), lo1 + 3, 0}});
    const Box large = small.grown(1 + static_cast<std::int64_t>(rng() % 3));
    if (check_domain_monotonicity(make_dirichlet(cfg, omega, small), make_dirichlet(cfg, omega, large), 1.0).pass) ++passed;
  }
  CHECK(passed == 50);
}

TEST_CASE("domain monotonicity rejects different realizations") {
  const ModelConfig cfg = config(1, 1, 0.3, 0.0);
  CHECK_THROWS_AS(check_domain_monotonicity(make_dirichlet(cfg, 1, FolnerBox{1, 1, 1}),
                                            make_dirichlet(cfg, 2, FolnerBox{1, 2, 1}), 1.0),
                  ArgumentError);
}

TEST_CASE("potential monotonicity") {
  const DiscreteHamiltonian h = make_dirichlet(config(2, 2, 0.3, 1.0), 5, FolnerBox{2, 1, 2});
  const DiscreteHamiltonian bare = h.with_potential(std::vector<double>(h.size(), 0.0));
  CHECK(check_potential_monotonicity(h, h, 1.0).worst_excess == 0.0);

  const double c = 0.7, t = 1.5;
  const DiscreteHamiltonian lifted = bare.with_potential(std::vector<double>(h.size(), c));
  const KernelMatrix a = kernel(lifted, t), b = kernel(bare, t);
  CHECK((a.entries - std::exp(-c * t) * b.entries).cwiseAbs().maxCoeff() <= 1e-13 * b.sup);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  int passed = 0;
  for (int k = 0; k < 50; ++k) {
    std::vector<double> v(h.size());
    for (double& x : v) x = u(rng);
    if (check_potential_monotonicity(bare.with_potential(v), bare, 1.0).pass) ++passed;
  }
  CHECK(passed == 50);
  CHECK_THROWS_AS(check_potential_monotonicity(bare, h, 1.0), ArgumentError);
}

TEST_CASE("kernel sandwich") {
  const ModelConfig cfg = config(2, 2, 0.3, 1.0);
  const Realization omega{12, {}, 0};
  const DiscreteHamiltonian hd = make_dirichlet(cfg, omega, Box::cube(2, -2, 3));
  const DiscreteHamiltonian ld = hd.with_potential(std::vector<double>(hd.size(), 0.0));
  const DiscreteHamiltonian big = make_dirichlet(cfg, omega, Box::cube(2, -6, 7));
  const DiscreteHamiltonian lbig = big.with_potential(std::vector<double>(big.size(), 0.0));
  CHECK(kernel(hd, 1.0).entries.minCoeff() >= 0.0);
  CHECK(check_potential_monotonicity(hd, ld, 1.0).pass);
  CHECK(check_domain_monotonicity(ld, lbig, 1.0).pass);
}

// Full-space proxy: small Dirichlet boxes are dominated by their boundary.
TEST_CASE("row integrals are stable across seeds") {
  const ModelConfig cfg = config(2, 2, 0.3, 1.0);
  for (double a : {0.5, 1.0, 2.0}) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::uint64_t seed = 0; seed < 16; ++seed) {
      const double b = row_integral(kernel(make_supercell(cfg, seed, 5), 1.0), a);
      lo = std::min(lo, b);
      hi = std::max(hi, b);
    }
    CHECK(std::isfinite(hi));
    CHECK(hi <= 2.0 * lo);
  }
}

TEST_CASE("not feeling the boundary, flat chain") {
  const NftbResult r = nftb_experiment(config(1, 1, 0, 0), 0, FolnerBox{1, 16, 1}, 1.0, {1, 2, 4, 8});
  REQUIRE(r.rows.size() == 4);
  for (std::size_t i = 1; i < 4; ++i) CHECK(r.rows[i].sup_gap < r.rows[i - 1].sup_gap);
  CHECK(r.rows[3].sup_gap <= 1e-6 * r.rows[0].sup_gap);
  for (const NftbRow& row : r.rows) CHECK(row.min_gap >= -1e-12);
  CHECK(r.monotone);
  CHECK(r.proxy.self_consistency < kMarginTolerance);
}

TEST_CASE("not feeling the boundary, empty core and margin checks") {
  const NftbResult r = nftb_experiment(config(1, 1, 0, 0), 0, FolnerBox{1, 2, 1}, 1.0, {1, 3});
  CHECK(r.rows[1].empty_core);
  CHECK(r.rows[1].sup_gap == 0.0);
  CHECK_THROWS_AS(nftb_experiment(config(1, 1, 0, 0), 0, FolnerBox{1, 4, 1}, 4.0, {1}, 1), ArgumentError);
  CHECK_THROWS_AS(nftb_experiment(config(1, 1, 0, 0), 0, FolnerBox{1, 4, 1}, 1.0, {2, 1}), ArgumentError);
}

TEST_CASE("decay fit on the flat torus") {
  const std::int64_t n = 24;
  const DiscreteHamiltonian h = make_supercell(config(1, 1, 0, 0), 0, n);
  double prev_rate = std::numeric_limits<double>::infinity();
  for (double t : {0.5, 1.0, 2.0}) {
    const KernelMatrix k = kernel(h, t);
    // Torus kernel: exp(-2t) sum_w I_{|x-y| + w n}(2t).
    for (std::int64_t r = 0; r < n; ++r) {
      double expect = 0.0;
      for (std::int64_t w = -3; w <= 3; ++w) expect += std::cyl_bessel_i(static_cast<double>(std::abs(r + w * n)), 2.0 * t);
      expect *= std::exp(-2.0 * t);
      CHECK(k.entries(0, r) == doctest::Approx(expect).epsilon(1e-12));
    }
    const DecayFit fit = fit_decay(k, h);
    CHECK(fit.pass);
    CHECK(fit.rate > 0.0);
    CHECK(fit.rate < prev_rate);
    CHECK(fit.max_violation <= 1e-10);
    prev_rate = fit.rate;
  }
  CHECK_THROWS_AS(fit_decay(kernel(h, 0.25), h), ArgumentError);
  const DiscreteHamiltonian tiny = make_dirichlet(config(1, 1, 0, 0), 0, FolnerBox{1, 2, 1});
  CHECK_THROWS_AS(fit_decay(kernel(tiny, 1.0), tiny), ArgumentError);
}

TEST_CASE("flat kernel sup matches the torus diagonal") {
  const DiscreteHamiltonian h = make_supercell(config(2, 2, 0, 0), 0, 16);
  const std::vector<std::size_t> v{0};
  CHECK(heat_diagonal(h, 0.5, v)[0] / h.measure[0] == doctest::Approx(flat_kernel_sup(2, 0.5, 0.5)).epsilon(1e-12));
  CHECK(flat_kernel_sup(1, 1.0, 1e4) == doctest::Approx(1.0 / std::sqrt(4.0 * M_PI * 1e4)).epsilon(1e-4));
}
