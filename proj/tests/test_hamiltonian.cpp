#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "doctest.h"
#include "idslab/errors.hpp"
#include "idslab/hamiltonian.hpp"

using namespace idslab;

namespace {

ModelConfig flat(int dim, int mesh = 1) {
  ModelConfig cfg;
  cfg.dim = dim;
  cfg.mesh = mesh;
  return cfg;
}

ModelConfig disordered(int dim, int mesh, double a = 0.3, double q = 1.0) {
  ModelConfig cfg = flat(dim, mesh);
  cfg.metric_amplitude = a;
  cfg.potential_amplitude = q;
  return cfg;
}

Eigen::VectorXd sorted_eigenvalues(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace

TEST_CASE("flat path graph spectrum") {
  const DiscreteHamiltonian h = make_dirichlet(flat(1), 0, FolnerBox{1, 1, 1});
  REQUIRE(h.size() == 3);
  const Eigen::VectorXd ev = sorted_eigenvalues(h.matrix.to_dense());
  CHECK(ev[0] == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-14));
  CHECK(ev[1] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(ev[2] == doctest::Approx(2.0 + std::sqrt(2.0)).epsilon(1e-14));
  CHECK(h.volume() == 3.0);
  CHECK(h.matrix.bandwidth() == 1);
}

TEST_CASE("constant shift moves every eigenvalue") {
  const DiscreteHamiltonian h = make_dirichlet(disordered(2, 2), 4, FolnerBox{2, 1, 2});
  const DiscreteHamiltonian s = h.shifted(1.75);
  const Eigen::VectorXd a = sorted_eigenvalues(h.matrix.to_dense());
  const Eigen::VectorXd b = sorted_eigenvalues(s.matrix.to_dense());
  for (Eigen::Index i = 0; i < a.size(); ++i) CHECK(b[i] == doctest::Approx(a[i] + 1.75).epsilon(1e-12));
  CHECK(s.potential[0] == h.potential[0] + 1.75);
}

TEST_CASE("Dirichlet sub-box is a principal submatrix") {
  const ModelConfig cfg = disordered(2, 2);
  const Realization omega{21, {}, 0};
  const Box big = Box::cube(2, -6, 7);
  const Box small = Box({2, {-3, -1, 0}, {2, 4, 0}});
  const DiscreteHamiltonian hb = make_dirichlet(cfg, omega, big);
  const DiscreteHamiltonian hs = make_dirichlet(cfg, omega, small);
  const std::vector<std::size_t> idx = hb.indices_of(small);
  REQUIRE(idx.size() == hs.size());
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j)
      if (hs.matrix.entry(i, j) != hb.matrix.entry(idx[i], idx[j])) ++mismatches;
  CHECK(mismatches == 0);
  CHECK_THROWS_AS(hs.indices_of(big), ArgumentError);
}

TEST_CASE("flat 4-vertex torus") {
  const DiscreteHamiltonian h = make_supercell(flat(1), 0, 4);
  REQUIRE(h.size() == 4);
  const Eigen::VectorXd ev = sorted_eigenvalues(h.matrix.to_dense());
  CHECK(ev[0] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(ev[1] == doctest::Approx(2.0));
  CHECK(ev[2] == doctest::Approx(2.0));
  CHECK(ev[3] == doctest::Approx(4.0));
  CHECK(h.boundary == BoundaryCondition::periodic);
}

TEST_CASE("side-2 torus sums the doubled edge and side-1 drops self-loops") {
  const DiscreteHamiltonian two = make_supercell(flat(1), 0, 2);
  CHECK(two.matrix.entry(0, 1) == -2.0);
  CHECK(two.matrix.entry(0, 0) == 2.0);
  const DiscreteHamiltonian one = make_supercell(flat(2), 0, 1);
  CHECK(one.size() == 1);
  CHECK(one.matrix.entry(0, 0) == 0.0);
}

TEST_CASE("torus spectrum is translation invariant") {
  const ModelConfig cfg = disordered(2, 2);
  const DiscreteHamiltonian a = make_supercell(cfg, 13, 3);
  const DiscreteHamiltonian b = make_supercell(cfg, 13, 3, Coord{1, 2, 0});
  const Eigen::VectorXd ea = sorted_eigenvalues(a.matrix.to_dense());
  const Eigen::VectorXd eb = sorted_eigenvalues(b.matrix.to_dense());
  for (Eigen::Index i = 0; i < ea.size(); ++i) CHECK(ea[i] == doctest::Approx(eb[i]).epsilon(1e-12));
}

TEST_CASE("equivariance holds bit for bit") {
  const ModelConfig cfg = disordered(2, 2);
  for (std::uint64_t k = 0; k < 20; ++k) {
    const Coord gamma{static_cast<std::int64_t>(k % 7) - 3, static_cast<std::int64_t>(k % 5) - 2, 0};
    const EquivarianceReport r = equivariance_check(cfg, 1000 + k, gamma, FolnerBox{2, 2, 2});
    CHECK(r.pass);
    CHECK(r.mismatched_entries == 0);
  }
}

TEST_CASE("form comparability") {
  const ModelConfig cfg = disordered(2, 2, 0.3, 1.0);
  const FolnerBox box{2, 2, 2};
  const DiscreteHamiltonian flat_h = make_dirichlet(flat(2, 2), 0, box);
  const DiscreteHamiltonian rnd = make_dirichlet(cfg, 31, box);
  const double ca = comparability_constant(cfg, 1.0);
  CHECK(ca > 1.0);
  const FormReport r = form_comparability(flat_h, rnd, 1000, ca);
  CHECK(r.pass);
  CHECK(r.min_ratio >= 1.0 / ca);
  CHECK(r.max_ratio <= ca);
  CHECK(r.trials == 1000);
}

TEST_CASE("symmetrized and generalized eigenproblems agree") {
  const ModelConfig cfg = disordered(2, 2);
  const Realization omega{8, {}, 0};
  const Box domain = Box::cube(2, -2, 3);
  const Box window = domain.grown(1);
  const MetricField metric = sample_metric(cfg, window, omega);
  const PotentialField pot = sample_potential(cfg, window, omega);
  const DiscreteHamiltonian h = assemble_dirichlet(metric, pot, domain);

  // Stiffness and mass built independently from the fields.
  const std::size_t n = domain.size();
  Eigen::MatrixXd stiff = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const Coord z = domain.point_at(i);
    const std::size_t wi = window.index_of(z);
    mass(i, i) = metric.measure[wi];
    stiff(i, i) += metric.measure[wi] * pot.values[wi];
    for (int axis = 0; axis < 2; ++axis) {
      Coord y = z;
      y[axis] += 1;
      const double w = metric.conductance[wi * 2 + axis];
      stiff(i, i) += w;
      if (domain.contains(y)) {
        const std::size_t j = domain.index_of(y);
        stiff(j, j) += w;
        stiff(i, j) -= w;
        stiff(j, i) -= w;
      }
      Coord x = z;
      x[axis] -= 1;
      if (!domain.contains(x)) stiff(i, i) += metric.conductance[window.index_of(x) * 2 + axis];
    }
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(stiff, mass, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd a = ges.eigenvalues();
  const Eigen::VectorXd b = sorted_eigenvalues(h.matrix.to_dense());
  for (Eigen::Index i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-10 * std::max(1.0, std::abs(b[i])));
}

TEST_CASE("Dirichlet eigenvalues decrease as the domain grows") {
  const ModelConfig cfg = disordered(2, 1);
  const Realization omega{5, {}, 0};
  const Eigen::VectorXd small = sorted_eigenvalues(make_dirichlet(cfg, omega, Box::cube(2, -1, 1)).matrix.to_dense());
  const Eigen::VectorXd big = sorted_eigenvalues(make_dirichlet(cfg, omega, Box::cube(2, -3, 3)).matrix.to_dense());
  for (Eigen::Index k = 0; k < small.size(); ++k) CHECK(big[k] <= small[k] + 1e-12);
}

TEST_CASE("supercell argument checks") {
  const ModelConfig cfg = flat(1);
  const Box window = Box::cube(1, 0, 4);
  const MetricField m = sample_metric(cfg, window, 1);
  const PotentialField p = sample_potential(cfg, window, 1);
  CHECK_THROWS_AS(assemble_supercell(m, p, 4), ArgumentError);  // not periodic
  CHECK_THROWS_AS(assemble_dirichlet(m, p, Box::cube(1, 0, 4)), ArgumentError);  // no margin
}

TEST_CASE("coordinate export") {
  std::ostringstream os;
  write_coordinate(os, make_dirichlet(flat(1), 0, FolnerBox{1, 0, 1}));
  CHECK(os.str() == "%%idslab coordinate symmetric-upper\n1 1\n0 0 2\n");
}
