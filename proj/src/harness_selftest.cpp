#include <cmath>
#include <functional>
#include <ostream>

#include "idslab/harness.hpp"
#include "idslab/ids_lab.hpp"

namespace idslab {

namespace {

ModelConfig model(int dim, int mesh, double a = 0.0, double q = 0.0) {
  ModelConfig cfg;
  cfg.dim = dim;
  cfg.mesh = mesh;
  cfg.metric_amplitude = a;
  cfg.potential_amplitude = q;
  return cfg;
}

bool close(double x, double y, double rel) { return std::abs(x - y) <= rel * std::max(1.0, std::abs(y)); }

struct Example {
  const char* name;
  std::function<bool()> check;
};

std::vector<Example> examples() {
  const ModelConfig flat1 = model(1, 1);
  return {
      {"indicator bump density exp(-0.6)",
       [] {
         ModelConfig cfg = model(2, 1, 0.3);
         cfg.bump = BumpProfile::indicator;
         const Box w = Box::cube(2, -1, 1);
         const MetricField f = metric_from_amplitudes(cfg, w, [](const Coord& c) { return c == Coord{} ? 0.3 : 0.0; });
         return close(f.density[w.index_of({0, 0, 0})], std::exp(-0.6), 1e-15);
       }},
      {"temperedness ratio 7/5", [] { return close(temperedness_ratio(Box::cube(1, -2, 2), Box::cube(1, -1, 1)), 1.4, 1e-15); }},
      {"Folner defect 2/21", [] { return close(folner_defect(enumerate(Box::cube(1, -10, 10)), {1, 0, 0}, 1), 2.0 / 21.0, 1e-15); }},
      {"path eigenvalues 2, 2 +- sqrt 2",
       [flat1] {
         const SpectralSummary s = eigendecompose(make_dirichlet(flat1, 0, FolnerBox{1, 1, 1}), false);
         return close(s.eigenvalues[0], 2.0 - std::sqrt(2.0), 1e-14) && close(s.eigenvalues[1], 2.0, 1e-14) &&
                close(s.eigenvalues[2], 2.0 + std::sqrt(2.0), 1e-14);
       }},
      {"4-vertex torus spectrum {0, 2, 2, 4}",
       [flat1] {
         const SpectralSummary s = eigendecompose(make_supercell(flat1, 0, 4), false);
         return std::abs(s.eigenvalues[0]) < 1e-14 && close(s.eigenvalues[1], 2.0, 1e-14) &&
                close(s.eigenvalues[2], 2.0, 1e-14) && close(s.eigenvalues[3], 4.0, 1e-14);
       }},
      {"path count_below(2) = 1", [flat1] { return count_below(make_dirichlet(flat1, 0, FolnerBox{1, 1, 1}), 2.0).negative == 1; }},
      {"middle-vertex heat trace",
       [flat1] {
         const std::vector<std::size_t> mid{1};
         return close(restricted_trace(make_dirichlet(flat1, 0, FolnerBox{1, 1, 1}), mid, SpectralFunction::heat(1.0)),
                      0.29478508857495317, 1e-13);
       }},
      {"counting IDS on the path {0, 1/3, 1}",
       [flat1] {
         const IDSEstimate e = counting_ids(flat1, 0, FolnerBox{1, 1, 1}, {0.0, 2.0, 10.0}, 1);
         return e.values[0] == 0.0 && close(e.values[1], 1.0 / 3.0, 1e-15) && e.values[2] == 1.0;
       }},
      {"free IDS with margin 0 equals counting",
       [] {
         const ModelConfig cfg = model(2, 2, 0.3, 1.0);
         const std::vector<double> grid{-1.0, 2.0, 8.0, 15.0, 40.0};
         const IDSEstimate d = counting_ids(cfg, 3, FolnerBox{2, 1, 2}, grid, 1);
         const IDSEstimate f = free_ids(cfg, 3, FolnerBox{2, 1, 2}, grid, 0);
         for (std::size_t i = 0; i < grid.size(); ++i) {
           if (!close(f.values[i], d.values[i], 1e-12)) return false;
         }
         return true;
       }},
      {"single-vertex Laplace transform exp(-2)",
       [flat1] {
         const LaplaceTable l = laplace_transform(flat1, 0, FolnerBox{1, 0, 1}, {0.0, 1.0}, 1);
         return l.values[0] == 1.0 && close(l.values[1], std::exp(-2.0), 1e-14);
       }},
      {"trace gap with margin 0 is 0", [] { return trace_gap(model(2, 1), 0, FolnerBox{2, 2, 1}, 1.0, 0, 1).value == 0.0; }},
      {"abstract IDS on the 4-vertex torus",
       [flat1] {
         const AbstractEstimate a = abstract_ids(flat1, {1}, 4, SpectralFunction::Kind::heat, {1.0}, {Coord{}}, 1);
         return close(a.values[0], 0.25 * (1.0 + 2.0 * std::exp(-2.0) + std::exp(-4.0)), 1e-13);
       }},
      {"abstract projection counts h^-d states",
       [] {
         const AbstractEstimate a = abstract_ids(model(2, 2), {1}, 3, SpectralFunction::Kind::projection, {1e6}, {Coord{}}, 1);
         return close(a.values[0], 4.0, 1e-12);
       }},
      {"not feeling the boundary, flat chain",
       [flat1] {
         const NftbResult r = nftb_experiment(flat1, 0, FolnerBox{1, 16, 1}, 1.0, {1, 2, 4, 8}, 0, 1);
         for (std::size_t i = 1; i < r.rows.size(); ++i) {
           if (!(r.rows[i].sup_gap < r.rows[i - 1].sup_gap)) return false;
         }
         return r.rows.back().sup_gap <= 1e-3 * r.rows.front().sup_gap;
       }},
      {"zero disorder: identical curves across seeds",
       [] {
         const ModelConfig flat2 = model(2, 1);
         const ExhaustionReport r = exhaustion_experiment(flat2, {1, 2, 3}, make_admissible_sequence(2, {1, 2}),
                                                          default_lambda_grid(flat2, 20), 0.01, {}, 1);
         for (const ExhaustionLevel& lvl : r.levels) {
           for (double s : lvl.stddev) {
             if (s != 0.0) return false;
           }
         }
         return true;
       }},
      {"constant observable averages exactly",
       [] {
         const auto rows = ergodic_average(model(2, 1), 3, Observable::metric_amplitude,
                                           make_admissible_sequence(2, {2, 4}), 1.0, 1);
         return rows.back().average == 0.0;
       }},
      {"shift identity, c = 0 and c above the grid",
       [] {
         const ModelConfig cfg = model(2, 2, 0.3, 1.0);
         return shift_identity_check(cfg, 1, FolnerBox{2, 1, 2}, 0.0, default_lambda_grid(cfg, 50)).pass &&
                shift_identity_check(cfg, 1, FolnerBox{2, 1, 2}, 100.0, {-1.0, -0.5}).pass;
       }},
      {"config hash ignores key order",
       [] {
         using nlohmann::json;
         const json a = json::parse(R"({"model": {"dim": 1, "mesh": 2}, "seeds": [1, 2], "experiment": "laplace"})");
         const json b = json::parse(R"({"experiment": "laplace", "seeds": [1, 2], "model": {"mesh": 2, "dim": 1}})");
         return parse_config(a).hash() == parse_config(b).hash();
       }},
  };
}

}  // namespace

bool run_selftest(std::ostream& os) {
  bool all = true;
  for (const Example& e : examples()) {
    bool ok = false;
    try {
      ok = e.check();
    } catch (const std::exception& ex) {
      os << "  error: " << ex.what() << '\n';
    }
    os << (ok ? "PASS " : "FAIL ") << e.name << '\n';
    all = all && ok;
  }
  return all;
}

}  // namespace idslab
