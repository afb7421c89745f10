#include "idslab/heat_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <string>

#include "idslab/errors.hpp"
#include "idslab/format.hpp"

namespace idslab {

namespace {

Eigen::MatrixXd to_kernel(const Eigen::MatrixXd& e, const std::vector<double>& mu) {
  Eigen::MatrixXd k = e;
  const auto n = static_cast<Eigen::Index>(mu.size());
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      k(i, j) /= std::sqrt(mu[static_cast<std::size_t>(i)] * mu[static_cast<std::size_t>(j)]);
    }
  }
  return k;
}

void require_same_realization(const DiscreteHamiltonian& a, const DiscreteHamiltonian& b) {
  if (a.provenance.model_digest != b.provenance.model_digest || !(a.provenance.realization == b.provenance.realization)) {
    throw ArgumentError("operators come from different models or realizations");
  }
}

MonotonicityReport compare(const Eigen::MatrixXd& smaller, const Eigen::MatrixXd& larger) {
  MonotonicityReport r;
  r.worst_excess = -std::numeric_limits<double>::infinity();
  r.min_gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < smaller.cols(); ++j) {
    for (Eigen::Index i = 0; i < smaller.rows(); ++i) {
      const double diff = larger(i, j) - smaller(i, j);
      r.worst_excess = std::max(r.worst_excess, -diff);
      r.min_gap = std::min(r.min_gap, diff);
    }
  }
  r.entries = static_cast<std::size_t>(smaller.size());
  if (r.entries == 0) r.worst_excess = r.min_gap = 0.0;
  r.pass = r.worst_excess <= kMonotonicityTolerance;
  return r;
}

/// Ambient probe values: diagonal entries or rows restricted to the domain.
std::vector<double> probe_kernel(const ModelConfig& cfg, const Realization& omega, const Box& domain,
                                 std::int64_t margin, double t, bool diagonal_only, int threads) {
  const Box ambient = domain.grown(margin * cfg.mesh);
  if (ambient.grown(1).size() > cfg.max_window_vertices) {
    throw ResourceError("ambient box of margin " + std::to_string(margin) + " cells exceeds the window ceiling (" +
                        std::to_string(cfg.max_window_vertices) + " vertices)");
  }
  const DiscreteHamiltonian h = make_dirichlet(cfg, omega, ambient);
  const ThickenedBoundary outer = thicken(domain, cfg.h(), cfg.h());
  std::vector<std::size_t> probes;
  probes.reserve(outer.boundary.size());
  for (const std::size_t i : outer.boundary) probes.push_back(ambient.index_of(domain.point_at(i)));

  std::vector<double> out;
  if (diagonal_only) {
    out = heat_diagonal(h, t, probes, threads);
    for (std::size_t k = 0; k < probes.size(); ++k) out[k] /= h.measure[probes[k]];
    return out;
  }
  const std::vector<std::size_t> rows = h.indices_of(domain);
  const Eigen::MatrixXd cols = heat_columns(h, t, probes, threads);
  out.reserve(rows.size() * probes.size());
  for (std::size_t c = 0; c < probes.size(); ++c) {
    for (const std::size_t r : rows) {
      out.push_back(cols(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) /
                    std::sqrt(h.measure[r] * h.measure[probes[c]]));
    }
  }
  return out;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

KernelMatrix kernel(const DiscreteHamiltonian& h, double t, HeatMethod method) {
  if (!(t > 0.0)) throw ArgumentError("kernel time must be > 0");
  KernelMatrix k;
  k.t = t;
  k.domain = h.domain;
  k.boundary = h.boundary;
  k.measure = h.measure;
  k.entries = to_kernel(heat_operator(h, t, method), h.measure);
  k.sup = k.entries.size() == 0 ? 0.0 : k.entries.maxCoeff();
  k.row_integral_sup = row_integral(k, 1.0);
  return k;
}

double row_integral(const KernelMatrix& k, double a) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < k.entries.rows(); ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < k.entries.cols(); ++j) {
      acc += std::pow(k.entries(i, j), a) * k.measure[static_cast<std::size_t>(j)];
    }
    best = std::max(best, acc);
  }
  return best;
}

MonotonicityReport check_domain_monotonicity(const DiscreteHamiltonian& small, const DiscreteHamiltonian& large,
                                             double t) {
  require_same_realization(small, large);
  if (small.boundary != BoundaryCondition::dirichlet || large.boundary != BoundaryCondition::dirichlet) {
    throw ArgumentError("domain monotonicity compares Dirichlet operators");
  }
  if (!large.domain.contains(small.domain)) throw ArgumentError("domains are not nested");
  const std::vector<std::size_t> idx = large.indices_of(small.domain);
  const Eigen::MatrixXd ks = to_kernel(heat_operator(small, t), small.measure);
  const Eigen::MatrixXd kl_full = to_kernel(heat_operator(large, t), large.measure);
  Eigen::MatrixXd kl(ks.rows(), ks.cols());
  for (std::size_t j = 0; j < idx.size(); ++j) {
    for (std::size_t i = 0; i < idx.size(); ++i) {
      kl(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          kl_full(static_cast<Eigen::Index>(idx[i]), static_cast<Eigen::Index>(idx[j]));
    }
  }
  return compare(ks, kl);
}

MonotonicityReport check_potential_monotonicity(const DiscreteHamiltonian& with_v, const DiscreteHamiltonian& with_v_prime,
                                                double t) {
  if (!(with_v.domain == with_v_prime.domain) || with_v.measure != with_v_prime.measure ||
      with_v.matrix.upper_values() != with_v_prime.matrix.upper_values() ||
      with_v.matrix.upper_cols() != with_v_prime.matrix.upper_cols()) {
    throw ArgumentError("potential monotonicity needs the same domain and metric");
  }
  for (std::size_t i = 0; i < with_v.size(); ++i) {
    if (!(with_v.potential[i] >= with_v_prime.potential[i]) || !(with_v_prime.potential[i] >= 0.0)) {
      throw ArgumentError("potentials must satisfy V >= V' >= 0 pointwise");
    }
  }
  return compare(to_kernel(heat_operator(with_v, t), with_v.measure),
                 to_kernel(heat_operator(with_v_prime, t), with_v_prime.measure));
}

AmbientProxy choose_margin(const ModelConfig& cfg, const Realization& omega, const Box& domain, double t,
                           std::int64_t requested, bool diagonal_only, int threads) {
  if (requested < 0) throw ArgumentError("ambient margin must be >= 0");
  if (requested > 0) {
    const double change = max_abs_diff(probe_kernel(cfg, omega, domain, requested, t, diagonal_only, threads),
                                       probe_kernel(cfg, omega, domain, 2 * requested, t, diagonal_only, threads));
    if (!(change < kMarginTolerance)) {
      throw ArgumentError("ambient margin of " + std::to_string(requested) + " cells is too small: doubling it moves " +
                          "core kernel values by " + fmt17(change));
    }
    return {domain.grown(requested * cfg.mesh), requested, change};
  }
  std::int64_t margin = 1;
  std::vector<double> current = probe_kernel(cfg, omega, domain, margin, t, diagonal_only, threads);
  for (;;) {
    std::vector<double> doubled = probe_kernel(cfg, omega, domain, 2 * margin, t, diagonal_only, threads);
    const double change = max_abs_diff(current, doubled);
    if (change < kMarginTolerance) return {domain.grown(margin * cfg.mesh), margin, change};
    margin *= 2;
    current = std::move(doubled);
  }
}

NftbResult nftb_experiment(const ModelConfig& cfg, std::uint64_t seed, const FolnerBox& box, double t,
                           const std::vector<double>& thickness, std::int64_t margin, int threads) {
  if (!(t > 0.0)) throw ArgumentError("nftb time must be > 0");
  if (thickness.empty()) throw ArgumentError("thickness grid is empty");
  for (std::size_t i = 0; i < thickness.size(); ++i) {
    if (!(thickness[i] > 0.0) || (i > 0 && !(thickness[i] > thickness[i - 1]))) {
      throw ArgumentError("thickness grid must be positive and strictly increasing");
    }
  }
  const Realization omega{seed, {}, 0};
  const Box domain = box.vertices();
  NftbResult result;
  result.t = t;
  result.proxy = choose_margin(cfg, omega, domain, t, margin, false, threads);

  const DiscreteHamiltonian ambient = make_dirichlet(cfg, omega, result.proxy.ambient);
  const DiscreteHamiltonian local = make_dirichlet(cfg, omega, domain);
  const std::vector<std::size_t> in_ambient = ambient.indices_of(domain);

  // Columns for the widest core; narrower cores are subsets of it.
  const ThickenedBoundary widest = thicken(domain, cfg.h(), thickness.front());
  std::vector<std::size_t> amb_cols;
  for (const std::size_t c : widest.core) amb_cols.push_back(in_ambient[c]);
  const Eigen::MatrixXd ea = heat_columns(ambient, t, amb_cols, threads);
  const Eigen::MatrixXd ed = heat_columns(local, t, widest.core, threads);
  std::vector<std::size_t> column_of(domain.size(), 0);
  for (std::size_t k = 0; k < widest.core.size(); ++k) column_of[widest.core[k]] = k;

  for (const double th : thickness) {
    const ThickenedBoundary tb = thicken(domain, cfg.h(), th);
    NftbRow row;
    row.thickness = th;
    row.core_vertices = tb.core.size();
    row.empty_core = tb.core.empty();
    if (!row.empty_core) {
      row.sup_gap = -std::numeric_limits<double>::infinity();
      row.min_gap = std::numeric_limits<double>::infinity();
      for (const std::size_t y : tb.core) {
        const auto col = static_cast<Eigen::Index>(column_of[y]);
        for (const std::size_t x : tb.core) {
          const double scale = std::sqrt(local.measure[x] * local.measure[y]);
          const double gap = (ea(static_cast<Eigen::Index>(in_ambient[x]), col) - ed(static_cast<Eigen::Index>(x), col)) / scale;
          row.sup_gap = std::max(row.sup_gap, gap);
          row.min_gap = std::min(row.min_gap, gap);
        }
      }
    }
    result.rows.push_back(row);
  }
  result.monotone = true;
  for (std::size_t i = 1; i < result.rows.size(); ++i) {
    result.monotone = result.monotone && result.rows[i].sup_gap <= result.rows[i - 1].sup_gap;
  }
  return result;
}

Eigen::MatrixXd metric_distances(const DiscreteHamiltonian& h) {
  const std::size_t n = h.size();
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
  for (const GraphEdge& e : h.edges) {
    adj[e.a].push_back({e.b, e.length});
    adj[e.b].push_back({e.a, e.length});
  }
  const double inf = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd dist = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n), inf);
  using Item = std::pair<double, std::size_t>;
  for (std::size_t src = 0; src < n; ++src) {
    auto col = dist.col(static_cast<Eigen::Index>(src));
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    col[static_cast<Eigen::Index>(src)] = 0.0;
    queue.push({0.0, src});
    while (!queue.empty()) {
      const auto [d, v] = queue.top();
      queue.pop();
      if (d > col[static_cast<Eigen::Index>(v)]) continue;
      for (const auto& [u, len] : adj[v]) {
        const double nd = d + len;
        if (nd < col[static_cast<Eigen::Index>(u)]) {
          col[static_cast<Eigen::Index>(u)] = nd;
          queue.push({nd, u});
        }
      }
    }
  }
  return dist;
}

double DecayFit::constant() const { return std::exp(log_constant); }

DecayFit fit_decay(const KernelMatrix& k, const DiscreteHamiltonian& h) {
  if (k.t < kDecayMinTime) throw ArgumentError("decay fits need t >= 0.5");
  if (k.size() != h.size() || !(k.domain == h.domain)) throw ArgumentError("kernel and operator domains differ");
  std::int64_t widest = 0;
  for (int i = 0; i < h.dim; ++i) widest = std::max(widest, h.domain.extent(i) - 1);
  if (widest < 8) throw ArgumentError("decay fits need a domain at least 8 mesh steps across");

  const Eigen::MatrixXd dist = metric_distances(h);
  const double floor = 1e-13 * k.sup;
  struct Point {
    double x, y;
  };
  std::vector<Point> pts;
  for (Eigen::Index j = 0; j < k.entries.cols(); ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double v = k.entries(i, j);
      if (v > floor && std::isfinite(dist(i, j))) pts.push_back({dist(i, j) * dist(i, j), std::log(v)});
    }
  }
  double mean_x = 0.0;
  for (const Point& p : pts) mean_x += p.x;
  mean_x /= static_cast<double>(pts.size());

  std::vector<Point> sorted = pts;
  std::sort(sorted.begin(), sorted.end(), [](const Point& a, const Point& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  // Upper hull, monotone chain.
  std::vector<Point> hull;
  for (const Point& p : sorted) {
    while (!hull.empty() && hull.back().x == p.x) hull.pop_back();
    while (hull.size() >= 2) {
      const Point& a = hull[hull.size() - 2];
      const Point& b = hull.back();
      if ((b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x) >= 0.0) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(p);
  }
  if (hull.size() < 2) throw ArgumentError("degenerate decay fit: all distances coincide");

  // The LP optimum is the hull edge above the mean abscissa.
  std::size_t e = 0;
  while (e + 2 < hull.size() && hull[e + 1].x <= mean_x) ++e;
  const double slope = (hull[e + 1].y - hull[e].y) / (hull[e + 1].x - hull[e].x);
  DecayFit fit;
  fit.t = k.t;
  fit.rate = -slope;
  fit.log_constant = hull[e].y - slope * hull[e].x;
  fit.pairs = pts.size();
  fit.max_violation = -std::numeric_limits<double>::infinity();
  double gap_sum = 0.0;
  for (const Point& p : pts) {
    const double env = fit.log_constant - fit.rate * p.x;
    gap_sum += env - p.y;
    fit.max_violation = std::max(fit.max_violation, p.y - env);
  }
  fit.mean_residual = gap_sum / static_cast<double>(pts.size());
  fit.pass = fit.rate > 0.0 && fit.max_violation <= 1e-10;
  return fit;
}

double flat_kernel_sup(int dim, double mesh_step, double t) {
  const double s = t / (mesh_step * mesh_step);
  const double x = 2.0 * s;
  // exp(-x) I_0(x); asymptotic form once I_0 would overflow.
  const double one_axis = x < 600.0 ? std::exp(-x) * std::cyl_bessel_i(0.0, x)
                                    : (1.0 + 1.0 / (8.0 * x) + 9.0 / (128.0 * x * x)) / std::sqrt(2.0 * std::numbers::pi * x);
  return std::pow(one_axis / mesh_step, dim);
}

}  // namespace idslab
