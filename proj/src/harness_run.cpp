#include <algorithm>
#include <chrono>
#include <concepts>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "idslab/errors.hpp"
#include "idslab/format.hpp"
#include "idslab/harness.hpp"
#include "idslab/hash.hpp"
#include "idslab/ids_lab.hpp"

namespace idslab {

using nlohmann::json;

bool ResultRecord::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& kv) { return kv.second; });
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg) {
  if (const char* env = std::getenv("IDSLAB_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
  return cfg.output_dir;
}

namespace {

using Clock = std::chrono::steady_clock;

/// Builds one CSV in memory: header, then rows of 17-digit fields.
class Csv {
 public:
  explicit Csv(const std::string& header) { out_ << header << '\n'; }

  Csv& row() {
    first_ = true;
    return *this;
  }
  Csv& operator<<(double v) { return field(fmt17(v)); }
  Csv& operator<<(bool v) { return field(v ? "1" : "0"); }
  template <std::integral T>
  Csv& operator<<(T v) {
    return field(std::to_string(v));
  }
  Csv& operator<<(const std::string& v) { return field(v); }
  Csv& operator<<(const char* v) { return field(v); }
  Csv& end() {
    out_ << '\n';
    return *this;
  }
  std::string str() const { return out_.str(); }

 private:
  Csv& field(const std::string& s) {
    if (!first_) out_ << ',';
    out_ << s;
    first_ = false;
    return *this;
  }
  std::ostringstream out_;
  bool first_ = true;
};

/// Owns every file write of a run.
class Emitter {
 public:
  explicit Emitter(std::filesystem::path dir) : dir_(std::move(dir)) {}

  ResultRecord& emit(const std::string& kind, const std::string& suite, const std::string& relpath,
                     const std::string& content) {
    const std::filesystem::path full = dir_ / relpath;
    std::filesystem::create_directories(full.parent_path());
    std::ofstream out(full, std::ios::binary);
    out << content;
    if (!out) throw ResourceError("cannot write payload " + full.string());
    ResultRecord rec;
    rec.kind = kind;
    rec.suite = suite;
    rec.payload = relpath;
    rec.sha256 = sha256_hex(content);
    records.push_back(std::move(rec));
    return records.back();
  }

  std::vector<ResultRecord> records;

 private:
  std::filesystem::path dir_;
};

struct Context {
  const ExperimentConfig& cfg;
  AdmissibleSequence seq;
  Emitter& out;

  FolnerBox box(std::int64_t radius) const { return FolnerBox{cfg.model.dim, radius, cfg.model.mesh}; }
  double state_bound() const {
    return std::pow(static_cast<double>(cfg.model.mesh), cfg.model.dim) *
           std::pow(cfg.model.metric_constant(), 0.5 * cfg.model.dim);
  }
};

std::size_t median_index(std::size_t n) { return n / 2; }

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return true;
}

bool nonincreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[i - 1]) return false;
  }
  return true;
}

std::vector<std::size_t> iota_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

ModelConfig flat_model(const ModelConfig& m) {
  ModelConfig f = m;
  f.metric_amplitude = 0.0;
  f.potential_amplitude = 0.0;
  return f;
}

/// Margin in cells for the ambient proxy: the configured one, or the
/// self-consistency choice at the shortest time of the t-grid.
std::int64_t ambient_margin(const Context& c, std::uint64_t seed, const FolnerBox& box) {
  if (c.cfg.ambient_margin > 0) return c.cfg.ambient_margin;
  const double t = *std::min_element(c.cfg.t_grid.begin(), c.cfg.t_grid.end());
  return choose_margin(c.cfg.model, Realization{seed, {}, 0}, box.vertices(), std::max(t, 1e-3), 0, false,
                       c.cfg.threads)
      .margin;
}

// ---------------------------------------------------------------- experiments

void run_exhaustion(Context& c) {
  const ExperimentConfig& cfg = c.cfg;
  const std::int64_t side = cfg.supercell_side;
  const AbstractEstimate abs = abstract_ids(cfg.model, cfg.seeds, side, SpectralFunction::Kind::projection,
                                            cfg.lambda_grid, all_cells(cfg.model.dim, side), cfg.threads);
  const ExhaustionReport r = exhaustion_experiment(cfg.model, cfg.seeds, c.seq, cfg.lambda_grid, cfg.tolerances.flat,
                                                   abs.values, cfg.threads);
  const std::vector<double>& grid = r.grid;

  Csv ids("radius,seed,lambda,N");
  bool monotone = true;
  bool bounded = true;
  const double bound = c.state_bound();
  for (const ExhaustionLevel& lvl : r.levels) {
    for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
      const std::vector<double>& curve = lvl.curves[s];
      for (std::size_t i = 0; i < grid.size(); ++i) {
        ids.row() << lvl.radius << cfg.seeds[s] << grid[i] << curve[i];
        ids.end();
        if (i > 0 && curve[i] < curve[i - 1]) monotone = false;
        if (curve[i] < 0.0 || curve[i] > bound) bounded = false;
      }
    }
  }
  ResultRecord& rec = c.out.emit("ids-exhaustion", "ids-lab", "ids-exhaustion/ids.csv", ids.str());
  rec.checks["monotone"] = monotone;
  rec.checks["state_bound"] = bounded;

  Csv summary("radius,lambda,mean,stddev,abstract,flat");
  for (const ExhaustionLevel& lvl : r.levels) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      summary.row() << lvl.radius << grid[i] << lvl.mean[i] << lvl.stddev[i] << abs.values[i]
                    << static_cast<bool>(r.flat_points[i]);
      summary.end();
    }
  }
  ResultRecord& srec = c.out.emit("ids-exhaustion", "ids-lab", "ids-exhaustion/summary.csv", summary.str());
  const std::size_t mid = median_index(grid.size());
  std::vector<double> spread;
  for (const ExhaustionLevel& lvl : r.levels) {
    spread.push_back(lvl.stddev[mid]);
    srec.summary["stddev_median_L" + std::to_string(lvl.radius)] = lvl.stddev[mid];
  }
  if (cfg.seeds.size() > 1 && r.levels.size() > 1) srec.checks["self_averaging"] = strictly_decreasing(spread);
  const std::size_t flat_count = static_cast<std::size_t>(std::count(r.flat_points.begin(), r.flat_points.end(), 1));
  srec.summary["flat_points"] = static_cast<double>(flat_count);
  srec.summary["abstract_distance"] = r.abstract_distance;
  if (flat_count > 0) srec.checks["abstract_agreement"] = r.abstract_distance <= cfg.tolerances.exhaustion_abstract;

  // The lowest Dirichlet eigenvalue cannot undercut the bottom of the abstract
  // spectrum by more than one grid step.
  const auto first_positive = [&](const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] > 0.0) return i;
    }
    return v.size();
  };
  std::size_t dirichlet_first = grid.size();
  for (const std::vector<double>& curve : r.levels.back().curves) {
    dirichlet_first = std::min(dirichlet_first, first_positive(curve));
  }
  const std::size_t abstract_first = first_positive(abs.values);
  srec.checks["support"] = dirichlet_first + 1 >= abstract_first;

  Csv cauchy("radius,seed,cauchy");
  for (const ExhaustionLevel& lvl : r.levels) {
    for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
      cauchy.row() << lvl.radius << cfg.seeds[s] << lvl.cauchy[s];
      cauchy.end();
    }
  }
  c.out.emit("ids-exhaustion", "ids-lab", "ids-exhaustion/cauchy.csv", cauchy.str());
}

void run_free(Context& c) {
  const ExperimentConfig& cfg = c.cfg;
  const std::vector<double>& grid = cfg.lambda_grid;
  Csv csv("radius,seed,margin,lambda,dirichlet,free,flat");
  std::vector<double> gaps;
  bool monotone = true;
  for (std::int64_t radius : cfg.radii) {
    const FolnerBox box = c.box(radius);
    double gap_sum = 0.0;
    for (std::uint64_t seed : cfg.seeds) {
      const std::int64_t margin = ambient_margin(c, seed, box);
      const IDSEstimate d = counting_ids(cfg.model, seed, box, grid, cfg.threads);
      const IDSEstimate f = free_ids(cfg.model, seed, box, grid, margin, cfg.dense_ceiling);
      monotone = monotone && d.monotone() && f.monotone();
      const std::vector<char> flat = locally_flat(d.values, cfg.tolerances.flat);
      double gap = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        csv.row() << radius << seed << margin << grid[i] << d.values[i] << f.values[i] << static_cast<bool>(flat[i]);
        csv.end();
        if (flat[i]) gap = std::max(gap, std::abs(d.values[i] - f.values[i]));
      }
      gap_sum += gap;
    }
    gaps.push_back(gap_sum / static_cast<double>(cfg.seeds.size()));
  }
  ResultRecord& rec = c.out.emit("ids-free", "ids-lab", "ids-free/free.csv", csv.str());
  rec.checks["monotone"] = monotone;
  for (std::size_t j = 0; j < gaps.size(); ++j) rec.summary["gap_L" + std::to_string(cfg.radii[j])] = gaps[j];
  if (gaps.size() > 1) {
    rec.checks["gap_shrinks"] = strictly_decreasing(gaps);
    rec.summary["shrink_factor"] = gaps.back() > 0.0 ? gaps[gaps.size() - 2] / gaps.back()
                                                     : std::numeric_limits<double>::max();
  }
  rec.checks["dirichlet_free"] = gaps.back() <= cfg.tolerances.dirichlet_free;
}

void run_laplace(Context& c) {
  const ExperimentConfig& cfg = c.cfg;
  Csv csv("radius,seed,t,laplace,stieltjes,bound");
  bool consistent = true;
  bool bounded = true;
  bool decreasing = true;
  double worst = 0.0;
  for (std::int64_t radius : cfg.radii) {
    for (std::uint64_t seed : cfg.seeds) {
      const LaplaceTable l = laplace_transform(cfg.model, seed, c.box(radius), cfg.t_grid, cfg.threads);
      bounded = bounded && l.bound_ok;
      for (std::size_t i = 0; i < l.t.size(); ++i) {
        csv.row() << radius << seed << l.t[i] << l.values[i] << l.stieltjes[i] << l.bound[i];
        csv.end();
        if (std::isfinite(l.stieltjes[i])) {
          const double rel = std::abs(l.values[i] - l.stieltjes[i]) / std::abs(l.stieltjes[i]);
          worst = std::max(worst, rel);
          consistent = consistent && rel <= cfg.tolerances.stieltjes;
        }
      }
      std::vector<double> by_t(l.t.size());
      std::vector<std::size_t> order = iota_indices(l.t.size());
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return l.t[a] < l.t[b]; });
      for (std::size_t i = 0; i < order.size(); ++i) by_t[i] = l.values[order[i]];
      decreasing = decreasing && nonincreasing(by_t);
    }
  }
  ResultRecord& rec = c.out.emit("laplace", "ids-lab", "laplace/laplace.csv", csv.str());
  rec.checks["stieltjes_consistency"] = consistent;
  rec.checks["uniform_bound"] = bounded;
  rec.checks["decreasing_in_t"] = decreasing;
  rec.summary["worst_relative_difference"] = worst;

  // Normalized trace gap along the sequence, against the boundary ratio at
  // the heat-kernel length scale.
  const double thickness = std::max(cfg.model.h(), std::sqrt(cfg.heat_time));
  Csv gap_csv("radius,seed,t,margin,gap,boundary_ratio");
  bool gap_decreasing = true;
  bool gap_nonnegative = true;
  double kappa = 0.0;
  for (std::uint64_t seed : cfg.seeds) {
    std::vector<double> series;
    for (std::int64_t radius : cfg.radii) {
      const FolnerBox box = c.box(radius);
      const TraceGap g =
          trace_gap(cfg.model, seed, box, cfg.heat_time, cfg.ambient_margin > 0 ? cfg.ambient_margin : -1, cfg.threads);
      const double ratio = isoperimetric_ratio(box, thickness).value();
      gap_csv.row() << radius << seed << cfg.heat_time << g.proxy.margin << g.value << ratio;
      gap_csv.end();
      series.push_back(g.value);
      gap_nonnegative = gap_nonnegative && g.value >= 0.0;
      if (ratio > 0.0) kappa = std::max(kappa, g.value / ratio);
    }
    gap_decreasing = gap_decreasing && strictly_decreasing(series);
  }
  ResultRecord& grec = c.out.emit("laplace", "ids-lab", "laplace/trace_gap.csv", gap_csv.str());
  grec.checks["gap_nonnegative"] = gap_nonnegative;
  if (cfg.radii.size() > 1) grec.checks["gap_decreasing"] = gap_decreasing;
  grec.summary["kappa"] = kappa;
}

void run_abstract(Context& c) {
  const ExperimentConfig& cfg = c.cfg;
  const std::vector<Coord> cells = all_cells(cfg.model.dim, cfg.supercell_side);
  const AbstractEstimate heat = abstract_ids(cfg.model, cfg.seeds, cfg.supercell_side, SpectralFunction::Kind::heat,
                                             cfg.t_grid, cells, cfg.threads);
  const AbstractEstimate proj = abstract_ids(cfg.model, cfg.seeds, cfg.supercell_side,
                                             SpectralFunction::Kind::projection, cfg.lambda_grid, cells, cfg.threads);
  Csv csv("function,parameter,value,std_error");
  for (std::size_t i = 0; i < heat.parameter.size(); ++i) {
    csv.row() << "heat" << heat.parameter[i] << heat.values[i] << heat.std_error[i];
    csv.end();
  }
  for (std::size_t i = 0; i < proj.parameter.size(); ++i) {
    csv.row() << "projection" << proj.parameter[i] << proj.values[i] << proj.std_error[i];
    csv.end();
  }
  ResultRecord& rec = c.out.emit("abstract", "ids-lab", "abstract/abstract.csv", csv.str());
  bool monotone = true;
  for (std::size_t i = 1; i < proj.values.size(); ++i) monotone = monotone && proj.values[i] >= proj.values[i - 1];
  bool bounded = true;
  for (double v : proj.values) bounded = bounded && v >= 0.0 && v <= c.state_bound();
  rec.checks["monotone"] = monotone;
  rec.checks["state_bound"] = bounded;
  rec.summary["mean_volume"] = heat.mean_volume;
}

void run_nftb(Context& c) {
  const ExperimentConfig& cfg = c.cfg;
  const FolnerBox box = c.box(cfg.radii.back());
  Csv csv("seed,t,margin,thickness,core_vertices,sup_gap,min_gap,empty_core");
  bool monotone = true;
  double worst_negative = 0.0;
  for (std::uint64_t seed : cfg.seeds) {
    const NftbResult r =
        nftb_experiment(cfg.model, seed, box, cfg.heat_time, cfg.thickness_grid, cfg.ambient_margin, cfg.threads);
    monotone = monotone && r.monotone;
    for (const NftbRow& row : r.rows) {
      csv.row() << seed << r.t << r.proxy.margin << row.thickness << row.core_vertices << row.sup_gap << row.min_gap
                << row.empty_core;
      csv.end();
      worst_negative = std::min(worst_negative, row.min_gap);
    }
  }
  ResultRecord& rec = c.out.emit("nftb", "heat-lab", "nftb/nftb.csv", csv.str());
  rec.checks["gap_nonincreasing"] = monotone;
  rec.checks["domain_monotone"] = worst_negative >= -kMonotonicityTolerance;
  rec.summary["worst_negative_gap"] = worst_negative;
}

void run_decay(Context& c) {
  const ExperimentConfig& cfg = c.cfg;
  // Smallest box of the sequence wide enough for a fit.
  std::int64_t radius = cfg.radii.back();
  for (std::int64_t r : cfg.radii) {
    if ((2 * r + 1) * cfg.model.mesh >= 9) {
      radius = r;
      break;
    }
  }
  const FolnerBox box = c.box(radius);
  const DiscreteHamiltonian flat = make_dirichlet(flat_model(cfg.model), 0, box);
  Csv csv("seed,t,log_constant,rate,mean_residual,max_violation,pairs,flat_rate,uniformity");
  bool pass = true;
  std::size_t fits = 0;
  for (double t : cfg.t_grid) {
    if (t < kDecayMinTime) continue;
    const DecayFit ref = fit_decay(kernel(flat, t), flat);
    for (std::uint64_t seed : cfg.seeds) {
      const DiscreteHamiltonian h = make_dirichlet(cfg.model, seed, box);
      const DecayFit fit = fit_decay(kernel(h, t), h);
      csv.row() << seed << t << fit.log_constant << fit.rate << fit.mean_residual << fit.max_violation << fit.pairs
                << ref.rate << fit.rate / ref.rate;
      csv.end();
      pass = pass && fit.pass;
      ++fits;
    }
  }
  ResultRecord& rec = c.out.emit("decay", "heat-lab", "decay/decay.csv", csv.str());
  rec.checks["envelope"] = pass && fits > 0;
  rec.summary["radius"] = static_cast<double>(radius);
}

void run_monotonicity(Context& c) {
  const ExperimentConfig& cfg = c.cfg;
  // The two smallest boxes keep the dense kernels cheap.
  const std::int64_t r0 = cfg.radii.front();
  const std::int64_t r1 = cfg.radii.size() > 1 ? cfg.radii[1] : r0 + 1;
  Csv csv("seed,pair,entries,worst_excess,min_gap,pass");
  bool domain_ok = true;
  bool potential_ok = true;
  for (std::uint64_t seed : cfg.seeds) {
    const DiscreteHamiltonian small = make_dirichlet(cfg.model, seed, c.box(r0));
    const DiscreteHamiltonian large = make_dirichlet(cfg.model, seed, c.box(r1));
    const MonotonicityReport d = check_domain_monotonicity(small, large, cfg.heat_time);
    csv.row() << seed << "domain" << d.entries << d.worst_excess << d.min_gap << d.pass;
    csv.end();
    domain_ok = domain_ok && d.pass;

    std::vector<double> half = small.potential;
    for (double& v : half) v *= 0.5;
    const MonotonicityReport p = check_potential_monotonicity(small, small.with_potential(std::move(half)), cfg.heat_time);
    csv.row() << seed << "potential" << p.entries << p.worst_excess << p.min_gap << p.pass;
    csv.end();
    potential_ok = potential_ok && p.pass;
  }
  ResultRecord& rec = c.out.emit("monotonicity", "heat-lab", "monotonicity/monotonicity.csv", csv.str());
  rec.checks["domain"] = domain_ok;
  rec.checks["potential"] = potential_ok;
}

void run_ergodic(Context& c) {
  const ExperimentConfig& cfg = c.cfg;
  Csv csv("observable,seed,radius,cells,average,expectation,sigma,z");
  bool inside = true;
  double worst = 0.0;
  for (const std::string& tag : cfg.observables) {
    const Observable obs = parse_observable(tag);
    for (std::uint64_t seed : cfg.seeds) {
      const std::vector<ErgodicRow> rows = ergodic_average(cfg.model, seed, obs, c.seq, cfg.heat_time, cfg.threads);
      for (const ErgodicRow& row : rows) {
        csv.row() << tag << seed << row.radius << row.cells << row.average << row.expectation << row.sigma << row.z;
        csv.end();
      }
      const ErgodicRow& last = rows.back();
      if (std::isfinite(last.z)) {
        worst = std::max(worst, std::abs(last.z));
        inside = inside && std::abs(last.z) <= 4.0;
      }
    }
  }
  ResultRecord& rec = c.out.emit("ergodic", "ids-lab", "ergodic/ergodic.csv", csv.str());
  rec.checks["clt_envelope"] = inside;
  rec.summary["max_abs_z"] = worst;
}

// --------------------------------------------------------------- module suites

void run_random_model_suite(Context& c) {
  const ExperimentConfig& cfg = c.cfg;
  Csv csv("case,seed,value,pass");
  bool bounds = true;
  bool potential = true;
  const Box window = c.box(cfg.radii.back()).vertices().grown(1);
  for (std::uint64_t seed : cfg.seeds) {
    const ModelBoundsReport r = verify_model_bounds(sample_metric(cfg.model, window, seed));
    csv.row() << "metric_constant" << seed << r.observed_metric_constant << r.pass;
    csv.end();
    csv.row() << "gradient" << seed << r.observed_gradient << r.pass;
    csv.end();
    bounds = bounds && r.pass;
    const PotentialField v = sample_potential(cfg.model, window, seed);
    const auto [lo, hi] = std::minmax_element(v.values.begin(), v.values.end());
    const bool ok = *lo >= 0.0 && *hi <= cfg.model.potential_amplitude;
    csv.row() << "potential_max" << seed << *hi << ok;
    csv.end();
    potential = potential && ok;
  }
  ResultRecord& rec = c.out.emit("full-suite", "random-model", "suites/random_model.csv", csv.str());
  rec.checks["metric_bounds"] = bounds;
  rec.checks["potential_range"] = potential;
  rec.summary["metric_constant"] = cfg.model.metric_constant();
  rec.summary["gradient_bound"] = cfg.model.density_gradient_bound();
}

void run_folner_suite(Context& c) {
  const ExperimentConfig& cfg = c.cfg;
  Csv csv("radius,temperedness,defect,boundary_ratio");
  Coord e0{};
  e0[0] = 1;
  std::vector<double> defects;
  std::vector<double> ratios;
  for (std::size_t j = 0; j < c.seq.boxes.size(); ++j) {
    const FolnerBox& b = c.seq.boxes[j];
    const double defect = folner_defect(enumerate(b.cells()), e0, cfg.model.dim);
    const double ratio = isoperimetric_ratio(b, cfg.model.h()).value();
    csv.row() << b.radius << (j == 0 ? 0.0 : c.seq.ratios[j - 1]) << defect << ratio;
    csv.end();
    defects.push_back(defect);
    ratios.push_back(ratio);
  }
  ResultRecord& rec = c.out.emit("full-suite", "folner-geometry", "suites/folner.csv", csv.str());
  rec.checks["defect_decreasing"] = strictly_decreasing(defects);
  rec.checks["boundary_ratio_decreasing"] = strictly_decreasing(ratios);
  // Cubes: |I_{j+1} - I_j| <= 2^d |I_{j+1}|.
  rec.checks["tempered"] = c.seq.temperedness <= std::pow(2.0, cfg.model.dim);
  rec.summary["temperedness"] = c.seq.temperedness;
}

void run_operator_suite(Context& c) {
  const ExperimentConfig& cfg = c.cfg;
  const FolnerBox box = c.box(cfg.radii.front());
  Csv csv("case,seed,value,pass");
  bool equivariant = true;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const std::uint64_t seed = nth_seed(cfg.seeds.front(), i);
    Coord gamma{};
    for (int a = 0; a < cfg.model.dim; ++a) {
      gamma[a] = static_cast<std::int64_t>(mix64(seed + static_cast<std::uint64_t>(a)) % 11) - 5;
    }
    const EquivarianceReport r = equivariance_check(cfg.model, seed, gamma, box);
    csv.row() << "equivariance" << seed << r.mismatched_entries << r.pass;
    csv.end();
    equivariant = equivariant && r.pass;
  }

  const DiscreteHamiltonian flat = make_dirichlet(flat_model(cfg.model), 0, box);
  bool comparable = true;
  bool principal = true;
  for (std::uint64_t seed : cfg.seeds) {
    const DiscreteHamiltonian h = make_dirichlet(cfg.model, seed, box);
    const FormReport f =
        form_comparability(flat, h, 200, comparability_constant(cfg.model, cfg.model.potential_amplitude), seed);
    csv.row() << "form_min_ratio" << seed << f.min_ratio << f.pass;
    csv.end();
    csv.row() << "form_max_ratio" << seed << f.max_ratio << f.pass;
    csv.end();
    comparable = comparable && f.pass;

    // Dirichlet restriction is a principal submatrix of the larger box.
    const DiscreteHamiltonian big = make_dirichlet(cfg.model, seed, c.box(cfg.radii.front() + 1));
    const std::vector<std::size_t> idx = big.indices_of(h.domain);
    std::size_t mismatched = 0;
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (std::size_t b = a; b < idx.size(); ++b) {
        if (h.matrix.entry(a, b) != big.matrix.entry(idx[a], idx[b])) ++mismatched;
      }
    }
    csv.row() << "principal_submatrix" << seed << mismatched << (mismatched == 0);
    csv.end();
    principal = principal && mismatched == 0;
  }
  ResultRecord& rec = c.out.emit("full-suite", "operator-assembly", "suites/operator.csv", csv.str());
  rec.checks["equivariance"] = equivariant;
  rec.checks["form_comparability"] = comparable;
  rec.checks["principal_submatrix"] = principal;
  rec.summary["comparability_constant"] = comparability_constant(cfg.model, cfg.model.potential_amplitude);
}

void run_spectral_suite(Context& c) {
  const ExperimentConfig& cfg = c.cfg;
  const FolnerBox box = c.box(cfg.radii.front());
  Csv csv("case,seed,parameter,value,reference,pass");
  bool counts = true;
  bool traces = true;
  std::size_t cases = 0;
  for (std::uint64_t seed : cfg.seeds) {
    const DiscreteHamiltonian h = make_dirichlet(cfg.model, seed, box);
    const SpectralSummary s = eigendecompose(h, false, cfg.dense_ceiling);
    const double gap = 1e-6 * h.matrix.inf_norm();
    // Midpoints of well-separated consecutive eigenvalues, at most 20 per seed.
    const std::size_t n = s.eigenvalues.size();
    const std::size_t stride = std::max<std::size_t>(1, n / 20);
    for (std::size_t k = 0; k + 1 < n; k += stride) {
      const double lo = s.eigenvalues[k];
      const double hi = s.eigenvalues[k + 1];
      if (hi - lo < 2.0 * gap) continue;
      const double lambda = 0.5 * (lo + hi);
      const std::size_t got = count_below(h, lambda).negative;
      const bool ok = got == k + 1;
      csv.row() << "count_below" << seed << lambda << got << (k + 1) << ok;
      csv.end();
      counts = counts && ok;
      ++cases;
    }
    const std::vector<std::size_t> all = iota_indices(h.size());
    for (double t : cfg.t_grid) {
      const std::vector<double> diag = heat_diagonal(h, t, all, cfg.threads);
      const double trace = std::accumulate(diag.begin(), diag.end(), 0.0);
      double reference = 0.0;
      for (double e : s.eigenvalues) reference += std::exp(-t * e);
      const bool ok = std::abs(trace - reference) <= 1e-9 * reference;
      csv.row() << "heat_trace" << seed << t << trace << reference << ok;
      csv.end();
      traces = traces && ok;
    }
  }
  ResultRecord& rec = c.out.emit("full-suite", "spectral-engine", "suites/spectral.csv", csv.str());
  rec.checks["inertia_matches_eigensolve"] = counts && cases > 0;
  rec.checks["heat_trace_identity"] = traces;
  rec.summary["inertia_cases"] = static_cast<double>(cases);
}

void run_shift_suite(Context& c) {
  const ExperimentConfig& cfg = c.cfg;
  const FolnerBox box = c.box(cfg.radii.front());
  Csv csv("seed,shift,mismatches,pass");
  bool pass = true;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const std::uint64_t seed = nth_seed(cfg.seeds.front() ^ 0x5eedULL, i);
    const double shift = -5.0 + 10.0 * to_unit(mix64(seed));
    const ShiftIdentity r = shift_identity_check(cfg.model, seed, box, shift, cfg.lambda_grid);
    csv.row() << seed << shift << r.mismatches << r.pass;
    csv.end();
    pass = pass && r.pass;
  }
  ResultRecord& rec = c.out.emit("full-suite", "ids-lab", "suites/shift_identity.csv", csv.str());
  rec.checks["shift_identity"] = pass;
}

json record_json(const ResultRecord& r) {
  json checks = json::object();
  for (const auto& [k, v] : r.checks) checks[k] = v;
  json summary = json::object();
  for (const auto& [k, v] : r.summary) summary[k] = v;
  return json{{"kind", r.kind},     {"suite", r.suite},   {"payload", r.payload}, {"sha256", r.sha256},
              {"pass", r.pass()},   {"checks", checks},   {"summary", summary}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw ResourceError("cannot write " + path.string());
}

}  // namespace

RunResult run_experiments(const ExperimentConfig& cfg, const std::filesystem::path& output_dir) {
  std::filesystem::create_directories(output_dir);
  Emitter emitter(output_dir);
  Context c{cfg, make_admissible_sequence(cfg.model.dim, cfg.radii, cfg.model.mesh), emitter};

  using Step = void (*)(Context&);
  std::vector<std::pair<std::string, Step>> steps;
  const auto want = [&](ExperimentKind k) { return cfg.kind == k || cfg.kind == ExperimentKind::full_suite; };
  if (cfg.kind == ExperimentKind::full_suite) {
    steps.push_back({"random-model", run_random_model_suite});
    steps.push_back({"folner-geometry", run_folner_suite});
    steps.push_back({"operator-assembly", run_operator_suite});
    steps.push_back({"spectral-engine", run_spectral_suite});
    steps.push_back({"shift-identity", run_shift_suite});
  }
  if (want(ExperimentKind::monotonicity)) steps.push_back({"monotonicity", run_monotonicity});
  if (want(ExperimentKind::nftb)) steps.push_back({"nftb", run_nftb});
  if (want(ExperimentKind::decay)) steps.push_back({"decay", run_decay});
  if (want(ExperimentKind::ids_exhaustion)) steps.push_back({"ids-exhaustion", run_exhaustion});
  if (want(ExperimentKind::ids_free)) steps.push_back({"ids-free", run_free});
  if (want(ExperimentKind::laplace)) steps.push_back({"laplace", run_laplace});
  if (want(ExperimentKind::abstract)) steps.push_back({"abstract", run_abstract});
  if (want(ExperimentKind::ergodic)) steps.push_back({"ergodic", run_ergodic});

  json timings = json::array();
  for (const auto& [name, step] : steps) {
    const std::size_t before = emitter.records.size();
    const auto start = Clock::now();
    step(c);
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    for (std::size_t i = before; i < emitter.records.size(); ++i) {
      emitter.records[i].wall_seconds = seconds / static_cast<double>(emitter.records.size() - before);
    }
    timings.push_back(json{{"step", name}, {"seconds", seconds}});
  }

  RunResult result;
  result.config_hash = cfg.hash();
  result.output_dir = output_dir;
  result.records = std::move(emitter.records);
  result.pass = std::all_of(result.records.begin(), result.records.end(), [](const ResultRecord& r) { return r.pass(); });

  json records = json::array();
  for (const ResultRecord& r : result.records) records.push_back(record_json(r));
  const json manifest{{"tool", "idslab"},
                      {"version", kVersion},
                      {"config_hash", result.config_hash},
                      {"config", cfg.canonical()},
                      {"experiment", to_string(cfg.kind)},
                      {"threads", cfg.threads},
                      {"records", records},
                      {"pass", result.pass}};
  result.manifest = output_dir / "manifest.json";
  write_text(result.manifest, manifest.dump(2) + "\n");
  write_text(output_dir / "timings.json", json{{"config_hash", result.config_hash}, {"steps", timings}}.dump(2) + "\n");
  return result;
}

}  // namespace idslab
