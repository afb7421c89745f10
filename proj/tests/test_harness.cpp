#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "idslab/errors.hpp"
#include "idslab/harness.hpp"
#include "idslab/hash.hpp"

using namespace idslab;
using nlohmann::json;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const std::filesystem::path p = std::filesystem::temp_directory_path() / ("idslab_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

const json kMinimal = json::parse(R"({
  "experiment": "ids-exhaustion",
  "model": {"dim": 1, "mesh": 1},
  "radii": [1],
  "seeds": [0],
  "grids": {"lambda": [0.0, 2.0, 10.0]},
  "supercell_side": 4
})");

std::string usage_message(const json& tree) {
  try {
    parse_config(tree);
  } catch (const UsageError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("sha256") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("config validation names the field") {
  json t = kMinimal;
  t["model"]["metric_amplitde"] = 0.3;
  CHECK(usage_message(t).find("model.metric_amplitde") != std::string::npos);
  CHECK(usage_message(t).find("unknown key") != std::string::npos);

  t = kMinimal;
  t["tolerances"] = {{"flat", -1.0}};
  CHECK(usage_message(t).find("tolerances.flat") != std::string::npos);

  t = kMinimal;
  t["grids"]["t"] = json::array();
  CHECK(usage_message(t).find("grids.t") != std::string::npos);

  t = kMinimal;
  t["seeds"] = {{"base", 1}, {"count", 0}};
  CHECK(usage_message(t).find("seeds.count") != std::string::npos);

  t = kMinimal;
  t["radii"] = {4, 2};
  CHECK(usage_message(t).find("radii") != std::string::npos);

  t = kMinimal;
  t["experiment"] = "everything";
  CHECK(usage_message(t).find("experiment") != std::string::npos);

  t = kMinimal;
  t["model"]["dim"] = "two";
  CHECK(usage_message(t).find("model.dim") != std::string::npos);

  t = kMinimal;
  t["observables"] = {"heat-trace", "entropy"};
  CHECK(usage_message(t).find("observables[1]") != std::string::npos);
}

TEST_CASE("config defaults and seed expansion") {
  json t = kMinimal;
  t["seeds"] = {{"base", 5}, {"count", 3}};
  const ExperimentConfig cfg = parse_config(t);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{nth_seed(5, 0), nth_seed(5, 1), nth_seed(5, 2)});
  CHECK(cfg.kind == ExperimentKind::ids_exhaustion);
  CHECK(cfg.lambda_grid.size() == 3);

  const ExperimentConfig d = parse_config(json::object());
  CHECK(d.seeds.size() == 16);
  CHECK(d.lambda_grid.size() == 200);
  CHECK(d.kind == ExperimentKind::full_suite);

  json listed = kMinimal;
  listed["seeds"] = {nth_seed(5, 0), nth_seed(5, 1), nth_seed(5, 2)};
  CHECK(parse_config(listed).hash() == cfg.hash());
}

TEST_CASE("config hash is canonical") {
  const json a = json::parse(R"({"model": {"mesh": 2, "dim": 1}, "radii": [1, 2], "experiment": "laplace"})");
  const json b = json::parse(R"({"experiment": "laplace", "radii": [1, 2], "model": {"dim": 1, "mesh": 2}})");
  CHECK(parse_config(a).hash() == parse_config(b).hash());

  json c = a;
  c["output_dir"] = "elsewhere";
  CHECK(parse_config(c).hash() == parse_config(a).hash());

  json d = a;
  d["threads"] = 2;
  CHECK(parse_config(d).hash() != parse_config(a).hash());
  d = a;
  d["model"]["metric_amplitude"] = 0.1;
  CHECK(parse_config(d).hash() != parse_config(a).hash());
}

TEST_CASE("minimal run writes one three-row IDS table") {
  const std::filesystem::path dir = scratch("minimal");
  const RunResult r = run_experiments(parse_config(kMinimal), dir);
  CHECK(r.pass);
  const std::string ids = slurp(dir / "ids-exhaustion/ids.csv");
  CHECK(line_count(ids) == 4);
  CHECK(ids.rfind("radius,seed,lambda,N\n", 0) == 0);
  CHECK(ids.find("1,0,2,0.33333333333333331\n") != std::string::npos);
  const json manifest = json::parse(slurp(r.manifest));
  CHECK(manifest["config_hash"] == parse_config(kMinimal).hash());
  CHECK(manifest["threads"] == 1);
  CHECK(std::filesystem::exists(dir / "timings.json"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("runs are byte-identical") {
  json t = kMinimal;
  t["experiment"] = "full-suite";
  t["model"] = {{"dim", 1}, {"mesh", 2}, {"metric_amplitude", 0.3}, {"potential_amplitude", 1.0}};
  t["radii"] = {4, 8, 12};
  t["seeds"] = {{"base", 2}, {"count", 3}};
  t["grids"] = {{"lambda", {{"points", 30}}}, {"thickness", {1.0, 2.0}}};
  const ExperimentConfig cfg = parse_config(t);
  const std::filesystem::path a = scratch("det_a");
  const std::filesystem::path b = scratch("det_b");
  const RunResult ra = run_experiments(cfg, a);
  const RunResult rb = run_experiments(cfg, b);
  CHECK(slurp(ra.manifest) == slurp(rb.manifest));
  REQUIRE(ra.records.size() == rb.records.size());
  for (const ResultRecord& rec : ra.records) CHECK(slurp(a / rec.payload) == slurp(b / rec.payload));
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

TEST_CASE("report") {
  const std::filesystem::path dir = scratch("report");
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "manifest.json") << R"({"records": []})";
    std::ostringstream os;
    write_report(dir / "manifest.json", os);
    CHECK(line_count(os.str()) == 3);
  }

  json t = kMinimal;
  t["radii"] = {1, 2, 3};
  t["seeds"] = {0, 1};
  const RunResult r = run_experiments(parse_config(t), dir);
  std::ostringstream os;
  write_report(r.manifest, os);
  const std::string text = os.str();
  const std::size_t table = text.find("exhaustion: N^j at lambda quantiles");
  REQUIRE(table != std::string::npos);
  // Title, column header, then one row per (j, quantile).
  CHECK(line_count(text.substr(table)) == 2 + 3 * 5);

  std::ofstream(dir / "ids-exhaustion/ids.csv", std::ios::app) << "tampered\n";
  std::ostringstream sink;
  CHECK_THROWS_AS(write_report(r.manifest, sink), IntegrityError);
  std::filesystem::remove(dir / "ids-exhaustion/ids.csv");
  CHECK_THROWS_AS(write_report(r.manifest, sink), IntegrityError);
  CHECK_THROWS_AS(write_report(dir / "nope.json", sink), IntegrityError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("output directory override") {
  ExperimentConfig cfg;
  cfg.output_dir = "from-config";
  ::unsetenv("IDSLAB_OUTPUT_DIR");
  CHECK(resolve_output_dir(cfg) == "from-config");
  ::setenv("IDSLAB_OUTPUT_DIR", "/tmp/from-env", 1);
  CHECK(resolve_output_dir(cfg) == "/tmp/from-env");
  ::unsetenv("IDSLAB_OUTPUT_DIR");
}

TEST_CASE("selftest passes") {
  std::ostringstream os;
  CHECK(run_selftest(os));
  CHECK(os.str().find("FAIL") == std::string::npos);
}
