#include "idslab/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "idslab/errors.hpp"
#include "idslab/format.hpp"
#include "idslab/hash.hpp"

namespace idslab {

SymmetricMatrix::SymmetricMatrix(std::vector<double> diagonal, std::vector<Entry> upper)
    : diag_(std::move(diagonal)) {
  const std::size_t n = diag_.size();
  for (const Entry& e : upper) {
    if (e.row >= e.col || e.col >= n) throw ArgumentError("upper entries need row < col < n");
  }
  std::stable_sort(upper.begin(), upper.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  up_ptr_.assign(n + 1, 0);
  for (std::size_t k = 0; k < upper.size(); ++k) {
    const Entry& e = upper[k];
    if (!up_cols_.empty() && k > 0 && upper[k - 1].row == e.row && upper[k - 1].col == e.col) {
      up_vals_.back() += e.value;
      continue;
    }
    up_cols_.push_back(e.col);
    up_vals_.push_back(e.value);
    up_ptr_[e.row + 1]++;
    bandwidth_ = std::max(bandwidth_, e.col - e.row);
  }
  for (std::size_t i = 0; i < n; ++i) up_ptr_[i + 1] += up_ptr_[i];

  std::vector<std::size_t> counts(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = up_ptr_[i]; k < up_ptr_[i + 1]; ++k) {
      counts[i + 1]++;
      counts[up_cols_[k] + 1]++;
    }
  }
  for (std::size_t i = 0; i < n; ++i) counts[i + 1] += counts[i];
  full_ptr_ = counts;
  full_cols_.resize(counts[n]);
  full_vals_.resize(counts[n]);
  std::vector<std::size_t> fill(counts.begin(), counts.end() - 1);
  // Lower-triangle entries of row i come from earlier rows, so visiting rows in
  // order keeps every row's columns ascending.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = up_ptr_[i]; k < up_ptr_[i + 1]; ++k) {
      const std::size_t j = up_cols_[k];
      full_cols_[fill[j]] = i;
      full_vals_[fill[j]++] = up_vals_[k];
    }
    for (std::size_t k = up_ptr_[i]; k < up_ptr_[i + 1]; ++k) {
      full_cols_[fill[i]] = up_cols_[k];
      full_vals_[fill[i]++] = up_vals_[k];
    }
  }
}

double SymmetricMatrix::entry(std::size_t i, std::size_t j) const {
  if (i == j) return diag_.at(i);
  if (i > j) std::swap(i, j);
  const auto first = up_cols_.begin() + static_cast<std::ptrdiff_t>(up_ptr_[i]);
  const auto last = up_cols_.begin() + static_cast<std::ptrdiff_t>(up_ptr_[i + 1]);
  const auto it = std::lower_bound(first, last, j);
  return (it != last && *it == j) ? up_vals_[static_cast<std::size_t>(it - up_cols_.begin())] : 0.0;
}

Eigen::MatrixXd SymmetricMatrix::to_dense() const {
  const auto n = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < size(); ++i) {
    a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = diag_[i];
    for (std::size_t k = up_ptr_[i]; k < up_ptr_[i + 1]; ++k) {
      const auto r = static_cast<Eigen::Index>(i);
      const auto c = static_cast<Eigen::Index>(up_cols_[k]);
      a(r, c) = up_vals_[k];
      a(c, r) = up_vals_[k];
    }
  }
  return a;
}

double SymmetricMatrix::inf_norm() const {
  double best = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    double s = std::abs(diag_[i]);
    for (std::size_t k = full_ptr_[i]; k < full_ptr_[i + 1]; ++k) s += std::abs(full_vals_[k]);
    best = std::max(best, s);
  }
  return best;
}

void SymmetricMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (std::size_t i = 0; i < size(); ++i) {
    double s = diag_[i] * x[i];
    for (std::size_t k = full_ptr_[i]; k < full_ptr_[i + 1]; ++k) s += full_vals_[k] * x[full_cols_[k]];
    y[i] = s;
  }
}

bool SymmetricMatrix::operator==(const SymmetricMatrix& other) const {
  return diag_ == other.diag_ && up_ptr_ == other.up_ptr_ && up_cols_ == other.up_cols_ &&
         up_vals_ == other.up_vals_;
}

double DiscreteHamiltonian::volume() const {
  double v = 0.0;
  for (const double m : measure) v += m;
  return v;
}

namespace {

std::vector<SymmetricMatrix::Entry> upper_entries(const SymmetricMatrix& m) {
  std::vector<SymmetricMatrix::Entry> upper;
  upper.reserve(m.upper_values().size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t k = m.upper_row_ptr()[i]; k < m.upper_row_ptr()[i + 1]; ++k) {
      upper.push_back({i, m.upper_cols()[k], m.upper_values()[k]});
    }
  }
  return upper;
}

}  // namespace

DiscreteHamiltonian DiscreteHamiltonian::shifted(double c) const {
  DiscreteHamiltonian out = *this;
  std::vector<double> diag = matrix.diagonal();
  for (double& x : diag) x += c;
  out.matrix = SymmetricMatrix(std::move(diag), upper_entries(matrix));
  for (double& v : out.potential) v += c;
  return out;
}

DiscreteHamiltonian DiscreteHamiltonian::with_potential(std::vector<double> values) const {
  if (values.size() != size()) throw ArgumentError("potential size does not match the operator");
  for (double x : values) {
    if (!std::isfinite(x)) throw ArgumentError("potential values must be finite");
  }
  DiscreteHamiltonian out = *this;
  std::vector<double> diag = matrix.diagonal();
  for (std::size_t i = 0; i < diag.size(); ++i) diag[i] += values[i] - potential[i];
  out.matrix = SymmetricMatrix(std::move(diag), upper_entries(matrix));
  out.potential = std::move(values);
  return out;
}

std::vector<std::size_t> DiscreteHamiltonian::indices_of(const Box& region) const {
  if (!domain.contains(region)) throw ArgumentError("region is not a subset of the operator domain");
  std::vector<std::size_t> out;
  out.reserve(region.size());
  for (std::size_t i = 0; i < region.size(); ++i) out.push_back(domain.index_of(region.point_at(i)));
  return out;
}

namespace {

void check_fields(const MetricField& metric, const PotentialField& potential, const Box& needed) {
  if (metric.cfg.dim != needed.dim() || potential.cfg.dim != needed.dim()) {
    throw ArgumentError("field dimension does not match domain dimension");
  }
  if (metric.cfg.mesh != potential.cfg.mesh) throw ArgumentError("metric and potential use different meshes");
  if (!metric.window.contains(needed) || !potential.window.contains(needed)) {
    throw ArgumentError("fields must cover the domain plus one vertex layer");
  }
}

double conductance_at(const MetricField& metric, const Coord& tail, int axis) {
  const std::size_t v = metric.window.index_of(tail);
  return metric.conductance[v * static_cast<std::size_t>(metric.cfg.dim) + static_cast<std::size_t>(axis)];
}

}  // namespace

DiscreteHamiltonian assemble_dirichlet(const MetricField& metric, const PotentialField& potential,
                                       const Box& domain) {
  if (domain.empty()) throw ArgumentError("empty domain");
  check_fields(metric, potential, domain.grown(1));
  const int d = domain.dim();
  const std::size_t n = domain.size();

  DiscreteHamiltonian h;
  h.dim = d;
  h.mesh_step = metric.cfg.h();
  h.domain = domain;
  h.boundary = BoundaryCondition::dirichlet;
  h.measure.resize(n);
  h.potential.resize(n);
  h.provenance = {metric.cfg.digest(), metric.realization, metric.window};

  std::vector<double> diag(n);
  std::vector<SymmetricMatrix::Entry> upper;
  upper.reserve(n * static_cast<std::size_t>(d));
  for (std::size_t v = 0; v < n; ++v) {
    const Coord z = domain.point_at(v);
    const std::size_t mv = metric.window.index_of(z);
    h.measure[v] = metric.measure[mv];
    h.potential[v] = potential.values[potential.window.index_of(z)];
  }
  for (std::size_t v = 0; v < n; ++v) {
    const Coord z = domain.point_at(v);
    // Every incident edge contributes to the diagonal, inside or not, in a fixed
    // per-vertex order: a sub-box matrix is then exactly a principal submatrix.
    double wsum = 0.0;
    for (int axis = 0; axis < d; ++axis) {
      Coord prev = z;
      prev[axis] -= 1;
      wsum += conductance_at(metric, prev, axis);
      wsum += conductance_at(metric, z, axis);
    }
    diag[v] = wsum / h.measure[v] + h.potential[v];
    for (int axis = 0; axis < d; ++axis) {
      Coord next = z;
      next[axis] += 1;
      if (!domain.contains(next)) continue;
      const std::size_t u = domain.index_of(next);
      const double w = conductance_at(metric, z, axis);
      upper.push_back({v, u, -w / std::sqrt(h.measure[v] * h.measure[u])});
      h.edges.push_back({v, u, metric.edge_length(metric.window.index_of(z), axis)});
    }
  }
  h.matrix = SymmetricMatrix(std::move(diag), std::move(upper));
  return h;
}

DiscreteHamiltonian assemble_dirichlet(const MetricField& metric, const PotentialField& potential,
                                       const FolnerBox& box) {
  return assemble_dirichlet(metric, potential, box.vertices());
}

DiscreteHamiltonian assemble_supercell(const MetricField& metric, const PotentialField& potential,
                                       std::int64_t side) {
  if (side < 1) throw ArgumentError("supercell needs at least one cell per side");
  const int d = metric.cfg.dim;
  const std::int64_t nv = side * metric.cfg.mesh;
  const Box torus = Box::cube(d, 0, nv - 1);
  check_fields(metric, potential, Box::cube(d, 0, nv));
  if (metric.realization.period != side || potential.realization.period != side) {
    throw ArgumentError("supercell fields must come from a realization with period equal to the side");
  }
  const std::size_t n = torus.size();

  DiscreteHamiltonian h;
  h.dim = d;
  h.mesh_step = metric.cfg.h();
  h.domain = torus;
  h.boundary = BoundaryCondition::periodic;
  h.measure.resize(n);
  h.potential.resize(n);
  h.provenance = {metric.cfg.digest(), metric.realization, metric.window};

  for (std::size_t v = 0; v < n; ++v) {
    const Coord z = torus.point_at(v);
    h.measure[v] = metric.measure[metric.window.index_of(z)];
    h.potential[v] = potential.values[potential.window.index_of(z)];
  }
  auto wrap = [&](Coord c) {
    for (int i = 0; i < d; ++i) c[i] = pos_mod(c[i], nv);
    return c;
  };

  std::vector<double> diag(n);
  std::vector<SymmetricMatrix::Entry> upper;
  for (std::size_t v = 0; v < n; ++v) {
    const Coord z = torus.point_at(v);
    double wsum = 0.0;
    for (int axis = 0; axis < d; ++axis) {
      Coord prev = z;
      prev[axis] -= 1;
      const Coord tail = wrap(prev);
      Coord next = z;
      next[axis] += 1;
      // A one-vertex cycle is a self-loop and drops out of the form.
      if (torus.index_of(tail) != v) wsum += conductance_at(metric, tail, axis);
      if (torus.index_of(wrap(next)) != v) wsum += conductance_at(metric, z, axis);
    }
    diag[v] = wsum / h.measure[v] + h.potential[v];
    for (int axis = 0; axis < d; ++axis) {
      Coord next = z;
      next[axis] += 1;
      const std::size_t u = torus.index_of(wrap(next));
      if (u == v) continue;
      const double w = conductance_at(metric, z, axis);
      const double value = -w / std::sqrt(h.measure[v] * h.measure[u]);
      upper.push_back({std::min(u, v), std::max(u, v), value});
      h.edges.push_back({v, u, metric.edge_length(metric.window.index_of(z), axis)});
    }
  }
  h.matrix = SymmetricMatrix(std::move(diag), std::move(upper));
  return h;
}

DiscreteHamiltonian make_supercell(const ModelConfig& cfg, std::uint64_t seed, std::int64_t side,
                                   const Coord& shift) {
  if (side < 1) throw ArgumentError("supercell needs at least one cell per side");
  Realization omega{seed, shift, side};
  for (int i = 0; i < cfg.dim; ++i) omega.offset[i] = pos_mod(omega.offset[i], side);
  const Box window = Box::cube(cfg.dim, 0, side * cfg.mesh);
  return assemble_supercell(sample_metric(cfg, window, omega), sample_potential(cfg, window, omega), side);
}

DiscreteHamiltonian make_dirichlet(const ModelConfig& cfg, const Realization& omega, const Box& domain) {
  const Box window = domain.grown(1);
  return assemble_dirichlet(sample_metric(cfg, window, omega), sample_potential(cfg, window, omega), domain);
}

DiscreteHamiltonian make_dirichlet(const ModelConfig& cfg, std::uint64_t seed, const FolnerBox& box) {
  return make_dirichlet(cfg, Realization{seed, {}, 0}, box.vertices());
}

EquivarianceReport equivariance_check(const ModelConfig& cfg, std::uint64_t seed, const Coord& gamma,
                                      const FolnerBox& box) {
  const Box domain = box.vertices();
  const Box window = domain.grown(1);
  const Realization omega{seed, {}, 0};

  const MetricField metric = sample_metric(cfg, window, omega);
  const PotentialField potential = sample_potential(cfg, window, omega);
  const DiscreteHamiltonian shifted_here =
      assemble_dirichlet(shift_realization(metric, gamma), shift_realization(potential, gamma), domain);

  const Coord by = scaled(gamma, cfg.mesh);
  const DiscreteHamiltonian moved = assemble_dirichlet(sample_metric(cfg, window.translated(by), omega),
                                                       sample_potential(cfg, window.translated(by), omega),
                                                       domain.translated(by));

  EquivarianceReport r;
  const SymmetricMatrix& a = shifted_here.matrix;
  const SymmetricMatrix& b = moved.matrix;
  if (a.size() != b.size() || a.upper_cols() != b.upper_cols() || a.upper_row_ptr() != b.upper_row_ptr()) {
    r.mismatched_entries = a.size() + 1;
    return r;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.diagonal()[i] != b.diagonal()[i]) ++r.mismatched_entries;
    if (shifted_here.measure[i] != moved.measure[i]) ++r.mismatched_entries;
  }
  for (std::size_t k = 0; k < a.upper_values().size(); ++k) {
    if (a.upper_values()[k] != b.upper_values()[k]) ++r.mismatched_entries;
  }
  r.pass = r.mismatched_entries == 0;
  return r;
}

double comparability_constant(const ModelConfig& cfg, double potential_max) {
  const int d = cfg.dim;
  const double cg = cfg.metric_constant();
  const double crho = cfg.density_gradient_bound();
  const double c = std::pow(cg, std::abs(d - 2) / 2.0);
  const double cg_half = std::pow(cg, d / 2.0);
  const double gradient_part = 2.0 * c * cg_half;
  const double upper = std::max(gradient_part, 1.0 + d * c * crho * crho * cg_half / 2.0 + potential_max);
  const double lower = std::max(gradient_part, 1.0 + d * crho * crho * std::pow(cg, d) / 2.0);
  return std::max(upper, lower);
}

double form_ratio(const DiscreteHamiltonian& flat, const DiscreteHamiltonian& random, std::span<const double> f) {
  const std::size_t n = flat.size();
  std::vector<double> y(n);
  double norm2 = 0.0;
  for (const double x : f) norm2 += x * x;
  flat.matrix.multiply(f, y);
  double q0 = 0.0;
  for (std::size_t i = 0; i < n; ++i) q0 += f[i] * y[i];
  random.matrix.multiply(f, y);
  double qw = 0.0;
  for (std::size_t i = 0; i < n; ++i) qw += f[i] * y[i];
  return (qw + norm2) / (q0 + norm2);
}

FormReport form_comparability(const DiscreteHamiltonian& flat, const DiscreteHamiltonian& random,
                              std::size_t trials, double constant, std::uint64_t seed) {
  if (flat.size() != random.size() || !(flat.domain == random.domain)) {
    throw ArgumentError("form comparison needs operators on the same domain");
  }
  if (flat.boundary != random.boundary) throw ArgumentError("form comparison needs matching boundary conditions");
  FormReport r;
  r.constant = constant;
  r.trials = trials;
  r.min_ratio = std::numeric_limits<double>::infinity();
  r.max_ratio = -std::numeric_limits<double>::infinity();
  std::vector<double> f(flat.size());
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const std::uint64_t stream = nth_seed(seed, trial);
    for (std::size_t i = 0; i < f.size(); ++i) {
      f[i] = 2.0 * to_unit(mix64(stream ^ mix64(i))) - 1.0;
    }
    const double ratio = form_ratio(flat, random, f);
    r.min_ratio = std::min(r.min_ratio, ratio);
    r.max_ratio = std::max(r.max_ratio, ratio);
  }
  r.pass = trials == 0 || (r.min_ratio >= 1.0 / constant && r.max_ratio <= constant);
  return r;
}

void write_coordinate(std::ostream& os, const DiscreteHamiltonian& h) {
  const SymmetricMatrix& m = h.matrix;
  os << "%%idslab coordinate symmetric-upper\n";
  os << m.size() << ' ' << m.nonzeros_upper() << '\n';
  for (std::size_t i = 0; i < m.size(); ++i) {
    os << i << ' ' << i << ' ' << fmt17(m.diagonal()[i]) << '\n';
    for (std::size_t k = m.upper_row_ptr()[i]; k < m.upper_row_ptr()[i + 1]; ++k) {
      os << i << ' ' << m.upper_cols()[k] << ' ' << fmt17(m.upper_values()[k]) << '\n';
    }
  }
}

}  // namespace idslab
