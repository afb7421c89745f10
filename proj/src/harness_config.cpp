#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "idslab/errors.hpp"
#include "idslab/harness.hpp"
#include "idslab/hash.hpp"
#include "idslab/ids_lab.hpp"

namespace idslab {

using nlohmann::json;

namespace {

const std::vector<std::pair<ExperimentKind, const char*>> kKinds = {
    {ExperimentKind::ids_exhaustion, "ids-exhaustion"}, {ExperimentKind::ids_free, "ids-free"},
    {ExperimentKind::laplace, "laplace"},               {ExperimentKind::abstract, "abstract"},
    {ExperimentKind::nftb, "nftb"},                     {ExperimentKind::decay, "decay"},
    {ExperimentKind::monotonicity, "monotonicity"},     {ExperimentKind::ergodic, "ergodic"},
    {ExperimentKind::full_suite, "full-suite"},
};

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw UsageError("config field '" + path + "': " + what);
}

void only_keys(const json& node, const std::string& path, const std::set<std::string>& allowed) {
  if (!node.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
  for (auto it = node.begin(); it != node.end(); ++it) {
    if (!allowed.count(it.key())) fail(join(path, it.key()), "unknown key");
  }
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(path, "expected a finite number");
  return x;
}

std::int64_t integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<std::int64_t>();
}

std::vector<double> number_list(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
  if (out.empty()) fail(path, "must not be empty");
  return out;
}

double positive(const json& v, const std::string& path) {
  const double x = number(v, path);
  if (!(x > 0.0)) fail(path, "must be > 0");
  return x;
}

void parse_model(const json& node, const std::string& path, ModelConfig& m) {
  only_keys(node, path, {"dim", "mesh", "metric_amplitude", "potential_amplitude", "bump", "max_window_vertices"});
  if (node.contains("dim")) m.dim = static_cast<int>(integer(node["dim"], join(path, "dim")));
  if (node.contains("mesh")) m.mesh = static_cast<int>(integer(node["mesh"], join(path, "mesh")));
  if (node.contains("metric_amplitude")) m.metric_amplitude = number(node["metric_amplitude"], join(path, "metric_amplitude"));
  if (node.contains("potential_amplitude")) {
    m.potential_amplitude = number(node["potential_amplitude"], join(path, "potential_amplitude"));
  }
  if (node.contains("bump")) {
    const json& b = node["bump"];
    if (!b.is_string()) fail(join(path, "bump"), "expected \"cosine\" or \"indicator\"");
    const std::string s = b.get<std::string>();
    if (s == "cosine") {
      m.bump = BumpProfile::cosine;
    } else if (s == "indicator") {
      m.bump = BumpProfile::indicator;
    } else {
      fail(join(path, "bump"), "expected \"cosine\" or \"indicator\"");
    }
  }
  if (node.contains("max_window_vertices")) {
    const std::int64_t v = integer(node["max_window_vertices"], join(path, "max_window_vertices"));
    if (v < 1) fail(join(path, "max_window_vertices"), "must be >= 1");
    m.max_window_vertices = static_cast<std::size_t>(v);
  }
  try {
    m.validate();
  } catch (const ArgumentError& e) {
    fail(path, e.what());
  }
}

std::vector<std::uint64_t> parse_seeds(const json& v, const std::string& path) {
  std::vector<std::uint64_t> seeds;
  if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string p = path + "[" + std::to_string(i) + "]";
      if (!v[i].is_number_unsigned() && !(v[i].is_number_integer() && v[i].get<std::int64_t>() >= 0)) {
        fail(p, "expected a nonnegative integer");
      }
      seeds.push_back(v[i].get<std::uint64_t>());
    }
  } else if (v.is_object()) {
    only_keys(v, path, {"base", "count"});
    if (!v.contains("base") || !v.contains("count")) fail(path, "needs both 'base' and 'count'");
    const std::int64_t base = integer(v["base"], join(path, "base"));
    const std::int64_t count = integer(v["count"], join(path, "count"));
    if (base < 0) fail(join(path, "base"), "must be >= 0");
    if (count < 1) fail(join(path, "count"), "must be >= 1");
    for (std::int64_t i = 0; i < count; ++i) {
      seeds.push_back(nth_seed(static_cast<std::uint64_t>(base), static_cast<std::uint64_t>(i)));
    }
  } else {
    fail(path, "expected a list of seeds or {\"base\", \"count\"}");
  }
  if (seeds.empty()) fail(path, "needs at least one seed");
  return seeds;
}

}  // namespace

std::string to_string(ExperimentKind k) {
  for (const auto& [kind, name] : kKinds) {
    if (kind == k) return name;
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& s) {
  for (const auto& [kind, name] : kKinds) {
    if (s == name) return kind;
  }
  throw UsageError("unknown experiment kind '" + s + "'");
}

ExperimentConfig parse_config(const json& tree) {
  only_keys(tree, "", {"experiment", "model", "radii", "seeds", "grids", "heat_time", "tolerances", "ambient_margin",
                       "supercell_side", "dense_ceiling", "observables", "threads", "output_dir"});
  ExperimentConfig cfg;
  if (tree.contains("experiment")) {
    if (!tree["experiment"].is_string()) fail("experiment", "expected a string");
    try {
      cfg.kind = parse_experiment_kind(tree["experiment"].get<std::string>());
    } catch (const UsageError&) {
      fail("experiment", "unknown experiment kind '" + tree["experiment"].get<std::string>() + "'");
    }
  }
  if (tree.contains("model")) parse_model(tree["model"], "model", cfg.model);
  if (tree.contains("radii")) {
    const json& r = tree["radii"];
    if (!r.is_array() || r.empty()) fail("radii", "expected a nonempty array of integers");
    cfg.radii.clear();
    for (std::size_t i = 0; i < r.size(); ++i) {
      const std::int64_t v = integer(r[i], "radii[" + std::to_string(i) + "]");
      if (v < 0 || (i > 0 && v <= cfg.radii.back())) fail("radii", "must be nonnegative and strictly increasing");
      cfg.radii.push_back(v);
    }
  }
  cfg.seeds = tree.contains("seeds") ? parse_seeds(tree["seeds"], "seeds") : parse_seeds(json{{"base", 1}, {"count", 16}}, "seeds");
  bool lambda_given = false;
  std::size_t lambda_points = 200;
  if (tree.contains("grids")) {
    const json& g = tree["grids"];
    only_keys(g, "grids", {"lambda", "t", "thickness"});
    if (g.contains("lambda")) {
      const json& l = g["lambda"];
      if (l.is_object()) {
        only_keys(l, "grids.lambda", {"points"});
        if (l.contains("points")) {
          const std::int64_t p = integer(l["points"], "grids.lambda.points");
          if (p < 2) fail("grids.lambda.points", "must be >= 2");
          lambda_points = static_cast<std::size_t>(p);
        }
      } else {
        cfg.lambda_grid = number_list(l, "grids.lambda");
        lambda_given = true;
      }
    }
    if (g.contains("t")) {
      cfg.t_grid = number_list(g["t"], "grids.t");
      for (double t : cfg.t_grid) {
        if (!(t >= 0.0)) fail("grids.t", "times must be >= 0");
      }
    }
    if (g.contains("thickness")) {
      cfg.thickness_grid = number_list(g["thickness"], "grids.thickness");
      for (std::size_t i = 0; i < cfg.thickness_grid.size(); ++i) {
        if (!(cfg.thickness_grid[i] > 0.0) || (i > 0 && !(cfg.thickness_grid[i] > cfg.thickness_grid[i - 1]))) {
          fail("grids.thickness", "must be positive and strictly increasing");
        }
      }
    }
  }
  if (!lambda_given) cfg.lambda_grid = default_lambda_grid(cfg.model, lambda_points);
  if (tree.contains("heat_time")) cfg.heat_time = positive(tree["heat_time"], "heat_time");
  if (tree.contains("tolerances")) {
    const json& t = tree["tolerances"];
    only_keys(t, "tolerances", {"flat", "stieltjes", "dirichlet_free", "exhaustion_abstract"});
    if (t.contains("flat")) cfg.tolerances.flat = positive(t["flat"], "tolerances.flat");
    if (t.contains("stieltjes")) cfg.tolerances.stieltjes = positive(t["stieltjes"], "tolerances.stieltjes");
    if (t.contains("dirichlet_free")) cfg.tolerances.dirichlet_free = positive(t["dirichlet_free"], "tolerances.dirichlet_free");
    if (t.contains("exhaustion_abstract")) {
      cfg.tolerances.exhaustion_abstract = positive(t["exhaustion_abstract"], "tolerances.exhaustion_abstract");
    }
  }
  if (tree.contains("ambient_margin")) {
    cfg.ambient_margin = integer(tree["ambient_margin"], "ambient_margin");
    if (cfg.ambient_margin < 0) fail("ambient_margin", "must be >= 0");
  }
  if (tree.contains("supercell_side")) {
    cfg.supercell_side = integer(tree["supercell_side"], "supercell_side");
    if (cfg.supercell_side < 1) fail("supercell_side", "must be >= 1");
  }
  if (tree.contains("dense_ceiling")) {
    const std::int64_t c = integer(tree["dense_ceiling"], "dense_ceiling");
    if (c < 1) fail("dense_ceiling", "must be >= 1");
    cfg.dense_ceiling = static_cast<std::size_t>(c);
  }
  if (tree.contains("observables")) {
    const json& o = tree["observables"];
    if (!o.is_array() || o.empty()) fail("observables", "expected a nonempty array of strings");
    cfg.observables.clear();
    for (std::size_t i = 0; i < o.size(); ++i) {
      const std::string p = "observables[" + std::to_string(i) + "]";
      if (!o[i].is_string()) fail(p, "expected a string");
      try {
        parse_observable(o[i].get<std::string>());
      } catch (const ArgumentError& e) {
        fail(p, e.what());
      }
      cfg.observables.push_back(o[i].get<std::string>());
    }
  }
  if (tree.contains("threads")) {
    const std::int64_t n = integer(tree["threads"], "threads");
    if (n < 1) fail("threads", "must be >= 1");
    cfg.threads = static_cast<int>(n);
  }
  if (tree.contains("output_dir")) {
    if (!tree["output_dir"].is_string() || tree["output_dir"].get<std::string>().empty()) {
      fail("output_dir", "expected a nonempty string");
    }
    cfg.output_dir = tree["output_dir"].get<std::string>();
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path.string());
  json tree;
  try {
    tree = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(tree);
}

json ExperimentConfig::canonical() const {
  const char* bump = model.bump == BumpProfile::cosine ? "cosine" : "indicator";
  return json{
      {"experiment", to_string(kind)},
      {"model",
       {{"dim", model.dim},
        {"mesh", model.mesh},
        {"metric_amplitude", model.metric_amplitude},
        {"potential_amplitude", model.potential_amplitude},
        {"bump", bump},
        {"max_window_vertices", model.max_window_vertices}}},
      {"radii", radii},
      {"seeds", seeds},
      {"grids", {{"lambda", lambda_grid}, {"t", t_grid}, {"thickness", thickness_grid}}},
      {"heat_time", heat_time},
      {"tolerances",
       {{"flat", tolerances.flat},
        {"stieltjes", tolerances.stieltjes},
        {"dirichlet_free", tolerances.dirichlet_free},
        {"exhaustion_abstract", tolerances.exhaustion_abstract}}},
      {"ambient_margin", ambient_margin},
      {"supercell_side", supercell_side},
      {"dense_ceiling", dense_ceiling},
      {"observables", observables},
      {"threads", threads},
  };
}

std::string ExperimentConfig::hash() const { return sha256_hex(canonical().dump()); }

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw InternalError("sha256 failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return os.str();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IntegrityError("payload " + path.string() + " is missing");
  std::ostringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

}  // namespace idslab
