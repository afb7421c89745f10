#include <iostream>

#include "CLI11.hpp"
#include "idslab/errors.hpp"
#include "idslab/harness.hpp"

namespace {

enum Exit : int {
  kOk = 0,
  kInvariantFailure = 1,
  kUsage = 2,
  kResource = 3,
  kIntegrity = 4,
  kArgument = 5,
  kInternal = 70,
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Integrated density of states laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_override;
  auto* run = app.add_subcommand("run", "run the experiments of a config file");
  run->add_option("config", config_path, "config file (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output", output_override, "output directory (overrides config and environment)");

  std::string manifest_path;
  auto* report = app.add_subcommand("report", "print a summary of a run manifest");
  report->add_option("manifest", manifest_path, "manifest.json of a run")->required();

  app.add_subcommand("selftest", "run the built-in example checks");
  app.add_subcommand("version", "print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (app.got_subcommand("version")) {
      std::cout << "idslab " << idslab::kVersion << '\n';
      return kOk;
    }
    if (app.got_subcommand("selftest")) return idslab::run_selftest(std::cout) ? kOk : kInvariantFailure;
    if (app.got_subcommand("report")) {
      idslab::write_report(manifest_path, std::cout);
      return kOk;
    }
    const idslab::ExperimentConfig cfg = idslab::load_config(config_path);
    const std::filesystem::path dir = output_override.empty() ? idslab::resolve_output_dir(cfg) : std::filesystem::path(output_override);
    const idslab::RunResult result = idslab::run_experiments(cfg, dir);
    std::cout << "config " << result.config_hash << '\n';
    for (const auto& r : result.records) {
      std::cout << (r.pass() ? "pass " : "FAIL ") << r.kind << ' ' << r.suite << ' ' << r.payload << '\n';
    }
    std::cout << "manifest " << result.manifest.string() << '\n';
    return result.pass ? kOk : kInvariantFailure;
  } catch (const idslab::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const idslab::ResourceError& e) {
    std::cerr << "resource error: " << e.what() << '\n';
    return kResource;
  } catch (const idslab::IntegrityError& e) {
    std::cerr << "integrity error: " << e.what() << '\n';
    return kIntegrity;
  } catch (const idslab::InternalError& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  } catch (const std::invalid_argument& e) {
    std::cerr << "argument error: " << e.what() << '\n';
    return kArgument;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kArgument;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}
