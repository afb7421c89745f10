#include "idslab/ids_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "idslab/errors.hpp"
#include "idslab/hash.hpp"
#include "idslab/parallel.hpp"

namespace idslab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_grid(const std::vector<double>& grid, const char* what) {
  if (grid.empty()) throw ArgumentError(std::string(what) + " grid is empty");
  for (double x : grid) {
    if (!std::isfinite(x)) throw ArgumentError(std::string(what) + " grid has a non-finite point");
  }
}

double sum_in_order(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

double measure_of(const DiscreteHamiltonian& h, const std::vector<std::size_t>& idx) {
  double v = 0.0;
  for (const std::size_t i : idx) v += h.measure[i];
  return v;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

}  // namespace

std::string to_string(IdsProvenance p) {
  switch (p) {
    case IdsProvenance::dirichlet_exhaustion:
      return "dirichlet-exhaustion";
    case IdsProvenance::free_restriction:
      return "free-restriction";
    case IdsProvenance::abstract_quotient:
      return "abstract-quotient";
  }
  return "unknown";
}

bool IDSEstimate::monotone() const {
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (lambda[i] >= lambda[i - 1] && values[i] < values[i - 1]) return false;
  }
  return true;
}

bool IDSEstimate::within_state_bound(const ModelConfig& cfg) const {
  const double bound = std::pow(static_cast<double>(cfg.mesh), cfg.dim) * std::pow(cfg.metric_constant(), 0.5 * cfg.dim);
  for (double v : values) {
    if (v > bound * (1.0 + 1e-12)) return false;
  }
  return true;
}

std::vector<double> default_lambda_grid(const ModelConfig& cfg, std::size_t points) {
  if (points < 2) throw ArgumentError("lambda grid needs at least two points");
  const double hinv = static_cast<double>(cfg.mesh);
  const double top = 4.0 * cfg.dim * hinv * hinv + cfg.potential_amplitude;
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) grid[i] = top * static_cast<double>(i) / static_cast<double>(points - 1);
  return grid;
}

IDSEstimate counting_ids(const ModelConfig& cfg, std::uint64_t seed, const FolnerBox& box,
                         const std::vector<double>& grid, int threads) {
  require_grid(grid, "lambda");
  const DiscreteHamiltonian h = make_dirichlet(cfg, seed, box);
  IDSEstimate est;
  est.lambda = grid;
  est.provenance = IdsProvenance::dirichlet_exhaustion;
  est.radius = box.radius;
  est.seeds = {seed};
  est.model_digest = cfg.digest();
  est.volume = h.volume();
  est.counts = threads == 1 ? count_sweep_serial(h, grid) : count_sweep(h, grid, threads);
  est.values.reserve(grid.size());
  for (const std::size_t k : est.counts) est.values.push_back(static_cast<double>(k) / est.volume);
  return est;
}

IDSEstimate free_ids(const ModelConfig& cfg, std::uint64_t seed, const FolnerBox& box,
                     const std::vector<double>& grid, std::int64_t margin, std::size_t ceiling) {
  require_grid(grid, "lambda");
  if (margin < 0) throw ArgumentError("ambient margin must be >= 0");
  const Box domain = box.vertices();
  const DiscreteHamiltonian ambient = make_dirichlet(cfg, Realization{seed, {}, 0}, domain.grown(margin * cfg.mesh));
  const std::vector<std::size_t> region = ambient.indices_of(domain);
  const SpectralSummary s = eigendecompose(ambient, true, ceiling);
  const std::vector<double> w = region_weights(s, region);

  IDSEstimate est;
  est.lambda = grid;
  est.provenance = IdsProvenance::free_restriction;
  est.radius = box.radius;
  est.seeds = {seed};
  est.model_digest = cfg.digest();
  est.volume = measure_of(ambient, region);
  for (const double lambda : grid) {
    double acc = 0.0;
    for (std::size_t k = 0; k < w.size() && s.eigenvalues[k] < lambda; ++k) acc += w[k];
    est.values.push_back(acc / est.volume);
  }
  return est;
}

double stieltjes_laplace(const std::vector<double>& eigenvalues, double volume, double t) {
  double acc = 0.0;
  for (const double e : eigenvalues) acc += std::exp(-t * e);
  return acc / volume;
}

LaplaceTable laplace_transform(const ModelConfig& cfg, std::uint64_t seed, const FolnerBox& box,
                               const std::vector<double>& t_grid, int threads) {
  require_grid(t_grid, "t");
  for (double t : t_grid) {
    if (t < 0.0) throw ArgumentError("Laplace times must be >= 0");
  }
  const DiscreteHamiltonian h = make_dirichlet(cfg, seed, box);
  LaplaceTable table;
  table.t = t_grid;
  table.volume = h.volume();
  table.dimension = h.size();
  const std::vector<std::size_t> all = all_indices(h.size());
  std::vector<double> eigenvalues;
  if (h.size() <= kDenseCeiling) eigenvalues = eigendecompose(h, false).eigenvalues;
  table.bound_ok = true;
  const double cg = std::pow(cfg.metric_constant(), cfg.dim);
  for (const double t : t_grid) {
    table.values.push_back(sum_in_order(heat_diagonal(h, t, all, threads)) / table.volume);
    table.stieltjes.push_back(eigenvalues.empty() ? kNaN : stieltjes_laplace(eigenvalues, table.volume, t));
    table.bound.push_back(t > 0.0 ? flat_kernel_sup(cfg.dim, cfg.h(), t) * cg : std::numeric_limits<double>::infinity());
    table.bound_ok = table.bound_ok && table.values.back() <= table.bound.back();
  }
  return table;
}

TraceGap trace_gap(const ModelConfig& cfg, std::uint64_t seed, const FolnerBox& box, double t,
                   std::int64_t margin, int threads) {
  if (!(t > 0.0)) throw ArgumentError("trace gap time must be > 0");
  const Realization omega{seed, {}, 0};
  const Box domain = box.vertices();
  TraceGap gap;
  if (margin == 0) {
    gap.proxy = {domain, 0, 0.0};
  } else {
    gap.proxy = choose_margin(cfg, omega, domain, t, std::max<std::int64_t>(margin, 0), true, threads);
  }
  const DiscreteHamiltonian ambient = make_dirichlet(cfg, omega, gap.proxy.ambient);
  const DiscreteHamiltonian local = make_dirichlet(cfg, omega, domain);
  const double outer = sum_in_order(heat_diagonal(ambient, t, ambient.indices_of(domain), threads));
  const double inner = sum_in_order(heat_diagonal(local, t, all_indices(local.size()), threads));
  gap.value = std::abs(outer - inner) / local.volume();
  return gap;
}

double extrapolate_to_zero(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.empty() || x.size() != y.size()) throw ArgumentError("extrapolation needs matching nonempty samples");
  std::vector<double> p = y;
  for (std::size_t k = 1; k < x.size(); ++k) {
    for (std::size_t i = 0; i + k < x.size(); ++i) {
      const double dx = x[i + k] - x[i];
      if (dx == 0.0) throw ArgumentError("extrapolation needs distinct abscissae");
      p[i] = (x[i + k] * p[i] - x[i] * p[i + 1]) / dx;
    }
  }
  return p[0];
}

Box cell_vertices(int dim, int mesh, const Coord& gamma) {
  const Coord lo = scaled(gamma, mesh);
  Coord hi = lo;
  for (int i = 0; i < dim; ++i) hi[i] += mesh - 1;
  return Box(dim, lo, hi);
}

std::vector<Coord> all_cells(int dim, std::int64_t side) { return enumerate(Box::cube(dim, 0, side - 1)); }

AbstractEstimate abstract_ids(const ModelConfig& cfg, const std::vector<std::uint64_t>& seeds, std::int64_t side,
                              SpectralFunction::Kind kind, const std::vector<double>& parameters,
                              const std::vector<Coord>& cells, int threads) {
  if (seeds.empty()) throw ArgumentError("abstract IDS needs at least one seed");
  if (cells.empty()) throw ArgumentError("abstract IDS needs a nonempty fundamental region");
  require_grid(parameters, kind == SpectralFunction::Kind::heat ? "t" : "lambda");
  const std::size_t n = seeds.size();
  const std::size_t p = parameters.size();
  std::vector<std::vector<double>> traces(n, std::vector<double>(p));
  std::vector<double> volumes(n);

  const auto count = static_cast<std::ptrdiff_t>(n);
  bool failed = false;
  std::string message;
#pragma omp parallel for num_threads(resolve_threads(threads)) schedule(dynamic)
  for (std::ptrdiff_t s = 0; s < count; ++s) {
    try {
      const DiscreteHamiltonian h = make_supercell(cfg, seeds[static_cast<std::size_t>(s)], side);
      std::vector<std::size_t> region;
      std::vector<char> seen(h.size(), 0);
      for (const Coord& c : cells) {
        Coord wrapped = c;
        for (int i = 0; i < cfg.dim; ++i) wrapped[i] = pos_mod(c[i], side);
        for (const std::size_t v : h.indices_of(cell_vertices(cfg.dim, cfg.mesh, wrapped))) {
          if (!seen[v]) region.push_back(v);
          seen[v] = 1;
        }
      }
      const SpectralSummary summary = eigendecompose(h);
      const std::vector<double> w = region_weights(summary, region);
      for (std::size_t j = 0; j < p; ++j) {
        const SpectralFunction f{kind, parameters[j]};
        double acc = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) acc += f(summary.eigenvalues[k]) * w[k];
        traces[static_cast<std::size_t>(s)][j] = acc;
      }
      volumes[static_cast<std::size_t>(s)] = measure_of(h, region);
    } catch (const std::exception& e) {
#pragma omp critical(idslab_abstract_error)
      {
        failed = true;
        message = e.what();
      }
    }
  }
  if (failed) throw ResourceError("abstract IDS failed: " + message);

  AbstractEstimate est;
  est.parameter = parameters;
  est.seeds = n;
  est.mean_volume = sum_in_order(volumes) / static_cast<double>(n);
  for (std::size_t j = 0; j < p; ++j) {
    double num = 0.0;
    for (std::size_t s = 0; s < n; ++s) num += traces[s][j];
    num /= static_cast<double>(n);
    const double ratio = num / est.mean_volume;
    double se = kNaN;
    if (n > 1) {
      double ss = 0.0;
      for (std::size_t s = 0; s < n; ++s) {
        const double r = traces[s][j] - ratio * volumes[s];
        ss += r * r;
      }
      se = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)) / est.mean_volume;
    }
    est.numerator.push_back(num);
    est.values.push_back(ratio);
    est.std_error.push_back(se);
  }
  return est;
}

std::vector<char> locally_flat(const std::vector<double>& curve, double tolerance) {
  std::vector<char> flat(curve.size(), 1);
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (i > 0 && std::abs(curve[i] - curve[i - 1]) > tolerance) flat[i] = 0;
    if (i + 1 < curve.size() && std::abs(curve[i + 1] - curve[i]) > tolerance) flat[i] = 0;
  }
  return flat;
}

ExhaustionReport exhaustion_experiment(const ModelConfig& cfg, const std::vector<std::uint64_t>& seeds,
                                       const AdmissibleSequence& seq, const std::vector<double>& grid,
                                       double flat_tolerance, const std::vector<double>& abstract_values,
                                       int threads) {
  if (seeds.empty()) throw ArgumentError("exhaustion needs at least one seed");
  if (seq.boxes.empty()) throw ArgumentError("exhaustion needs a nonempty sequence");
  if (!abstract_values.empty() && abstract_values.size() != grid.size()) {
    throw ArgumentError("abstract curve does not match the lambda grid");
  }
  require_grid(grid, "lambda");
  ExhaustionReport report;
  report.grid = grid;
  report.abstract_values = abstract_values;
  const std::size_t n = seeds.size();
  const auto count = static_cast<std::ptrdiff_t>(n);

  for (const FolnerBox& box : seq.boxes) {
    ExhaustionLevel level;
    level.radius = box.radius;
    level.curves.assign(n, {});
#pragma omp parallel for num_threads(resolve_threads(threads)) schedule(dynamic)
    for (std::ptrdiff_t s = 0; s < count; ++s) {
      level.curves[static_cast<std::size_t>(s)] = counting_ids(cfg, seeds[static_cast<std::size_t>(s)], box, grid, 1).values;
    }
    level.mean.assign(grid.size(), 0.0);
    level.stddev.assign(grid.size(), 0.0);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      // Centred on the first sample: identical curves give exactly zero spread.
      const double x0 = level.curves[0][g];
      double m = 0.0;
      for (std::size_t s = 0; s < n; ++s) m += level.curves[s][g] - x0;
      m = x0 + m / static_cast<double>(n);
      double ss = 0.0;
      for (std::size_t s = 0; s < n; ++s) ss += (level.curves[s][g] - m) * (level.curves[s][g] - m);
      level.mean[g] = m;
      level.stddev[g] = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    }
    level.cauchy.assign(n, 0.0);
    if (!report.levels.empty()) {
      const ExhaustionLevel& prev = report.levels.back();
      for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t g = 0; g < grid.size(); ++g) {
          level.cauchy[s] = std::max(level.cauchy[s], std::abs(level.curves[s][g] - prev.curves[s][g]));
        }
      }
    }
    report.levels.push_back(std::move(level));
  }
  report.flat_points = locally_flat(report.levels.back().mean, flat_tolerance);
  if (!abstract_values.empty()) {
    for (std::size_t g = 0; g < grid.size(); ++g) {
      if (report.flat_points[g]) {
        report.abstract_distance =
            std::max(report.abstract_distance, std::abs(report.levels.back().mean[g] - abstract_values[g]));
      }
    }
  }
  return report;
}

Observable parse_observable(const std::string& tag) {
  if (tag == "metric-amplitude") return Observable::metric_amplitude;
  if (tag == "potential-amplitude") return Observable::potential_amplitude;
  if (tag == "heat-trace") return Observable::heat_trace;
  throw ArgumentError("unknown observable '" + tag + "' (expected metric-amplitude, potential-amplitude or heat-trace)");
}

std::string to_string(Observable o) {
  switch (o) {
    case Observable::metric_amplitude:
      return "metric-amplitude";
    case Observable::potential_amplitude:
      return "potential-amplitude";
    case Observable::heat_trace:
      return "heat-trace";
  }
  return "unknown";
}

std::vector<ErgodicRow> ergodic_average(const ModelConfig& cfg, std::uint64_t seed, Observable observable,
                                        const AdmissibleSequence& seq, double t, int threads) {
  cfg.validate();
  const Realization omega{seed, {}, 0};
  std::vector<ErgodicRow> rows;
  for (const FolnerBox& box : seq.boxes) {
    ErgodicRow row;
    row.radius = box.radius;
    const Box cells = box.cells();
    row.cells = cells.size();
    double sum = 0.0;
    switch (observable) {
      case Observable::metric_amplitude: {
        const double a = cfg.metric_amplitude;
        for (std::size_t i = 0; i < cells.size(); ++i) {
          sum += a * (2.0 * omega.uniform(kMetricLabel, cells.point_at(i), cfg.dim) - 1.0);
        }
        row.expectation = 0.0;
        row.sigma = a / std::sqrt(3.0);
        break;
      }
      case Observable::potential_amplitude: {
        const double q = cfg.potential_amplitude;
        for (std::size_t i = 0; i < cells.size(); ++i) sum += q * omega.uniform(kPotentialLabel, cells.point_at(i), cfg.dim);
        row.expectation = 0.5 * q;
        row.sigma = q / std::sqrt(12.0);
        break;
      }
      case Observable::heat_trace: {
        const Box domain = box.vertices();
        const AmbientProxy proxy = choose_margin(cfg, omega, domain, t, 0, true, threads);
        const DiscreteHamiltonian h = make_dirichlet(cfg, omega, proxy.ambient);
        sum = sum_in_order(heat_diagonal(h, t, h.indices_of(domain), threads));
        row.expectation = kNaN;
        row.sigma = kNaN;
        break;
      }
    }
    row.average = sum / static_cast<double>(row.cells);
    const double dev = row.average - row.expectation;
    row.z = row.sigma > 0.0 ? dev * std::sqrt(static_cast<double>(row.cells)) / row.sigma : (dev == 0.0 ? 0.0 : kNaN);
    rows.push_back(row);
  }
  return rows;
}

ShiftIdentity shift_identity_check(const ModelConfig& cfg, std::uint64_t seed, const FolnerBox& box, double c,
                                   const std::vector<double>& grid) {
  require_grid(grid, "lambda");
  const DiscreteHamiltonian h = make_dirichlet(cfg, seed, box);
  const DiscreteHamiltonian hc = h.shifted(c);
  std::vector<double> moved(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) moved[i] = grid[i] + c;
  const std::vector<std::size_t> a = count_sweep_serial(h, grid);
  const std::vector<std::size_t> b = count_sweep_serial(hc, moved);
  ShiftIdentity r;
  for (std::size_t i = 0; i < a.size(); ++i) r.mismatches += a[i] != b[i] ? 1 : 0;
  r.pass = r.mismatches == 0;
  return r;
}

}  // namespace idslab
