#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "idslab/random_model.hpp"

namespace idslab {

inline constexpr const char* kVersion = "0.1.0";

enum class ExperimentKind {
  ids_exhaustion,
  ids_free,
  laplace,
  abstract,
  nftb,
  decay,
  monotonicity,
  ergodic,
  full_suite,
};

std::string to_string(ExperimentKind k);
ExperimentKind parse_experiment_kind(const std::string& s);

/// Defaults calibrated on the zero-disorder benchmark (d = 2, m = 2, radii
/// {2, 4, 8}, 200-point grid): flat is 1.25x the largest grid increment of the
/// exact lattice IDS, the two agreement tolerances 1.5x the zero-disorder
/// distances at the largest box (0.155 and 0.0323).
struct Tolerances {
  double flat = 0.08;                 ///< jump detection: left/right grid differences below this
  double stieltjes = 1e-10;           ///< relative, Laplace vs Stieltjes sum
  double dirichlet_free = 0.05;       ///< |N^j - N^{j,f}| at flat points, largest j
  double exhaustion_abstract = 0.24;  ///< |N^J - N_abstract| at flat points
};

struct ExperimentConfig {
  ModelConfig model;
  ExperimentKind kind = ExperimentKind::full_suite;
  std::vector<std::int64_t> radii{2, 4, 8};
  std::vector<std::uint64_t> seeds;
  std::vector<double> lambda_grid;     ///< filled from the default rule when not given
  std::vector<double> t_grid{0.5, 1.0, 2.0};
  std::vector<double> thickness_grid{0.5, 1.0, 2.0, 4.0};
  double heat_time = 1.0;
  Tolerances tolerances;
  std::int64_t ambient_margin = 0;     ///< cells; 0 selects it by the self-consistency rule
  std::int64_t supercell_side = 8;
  std::size_t dense_ceiling = 4096;
  std::vector<std::string> observables{"metric-amplitude", "potential-amplitude"};
  int threads = 1;
  std::string output_dir = "results";

  /// Every field with defaults filled in, keys sorted; output_dir excluded.
  nlohmann::json canonical() const;
  /// sha256 of canonical().dump().
  std::string hash() const;
};

/// Parses and validates a config tree. Unknown keys and type errors raise
/// UsageError naming the field path (e.g. "model.metric_amplitude").
ExperimentConfig parse_config(const nlohmann::json& tree);
ExperimentConfig load_config(const std::filesystem::path& path);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

/// One emitted payload with its invariant checks.
struct ResultRecord {
  std::string kind;
  std::string suite;
  std::string payload;                  ///< path relative to the output directory
  std::string sha256;
  std::map<std::string, bool> checks;
  std::map<std::string, double> summary;
  double wall_seconds = 0.0;            ///< kept out of the manifest

  bool pass() const;
};

struct RunResult {
  std::string config_hash;
  std::filesystem::path output_dir;
  std::filesystem::path manifest;
  std::vector<ResultRecord> records;
  bool pass = false;
};

/// Output directory: IDSLAB_OUTPUT_DIR when set, otherwise the config's.
std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg);

/// Runs the configured experiments, writes payloads, manifest.json and
/// timings.json into `output_dir`.
RunResult run_experiments(const ExperimentConfig& cfg, const std::filesystem::path& output_dir);

/// Prints a plain-text summary of a manifest. IntegrityError when a payload
/// is missing or its digest does not match.
void write_report(const std::filesystem::path& manifest, std::ostream& os);

/// Runs the built-in example checks; returns true when all pass.
bool run_selftest(std::ostream& os);

}  // namespace idslab
