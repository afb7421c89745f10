#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "idslab/errors.hpp"
#include "idslab/harness.hpp"

namespace idslab {

using nlohmann::json;

namespace {

std::string padded(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

constexpr double kQuantiles[] = {0.1, 0.25, 0.5, 0.75, 0.9};

/// N vs j at a few lambda quantiles of the grid, from the exhaustion summary.
void exhaustion_table(const std::filesystem::path& csv, std::ostream& os) {
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  // radius -> rows of (lambda, mean, stddev, abstract)
  std::map<long long, std::vector<std::vector<std::string>>> by_radius;
  while (std::getline(in, line)) {
    const std::vector<std::string> f = split(line);
    if (f.size() < 6) throw IntegrityError("malformed row in " + csv.string());
    by_radius[std::stoll(f[0])].push_back(f);
  }
  os << "\nexhaustion: N^j at lambda quantiles\n";
  os << padded("j", 4) << padded("radius", 8) << padded("quantile", 10) << padded("lambda", 14) << padded("mean N", 14)
     << padded("stddev", 14) << "abstract\n";
  std::size_t j = 0;
  for (const auto& [radius, rows] : by_radius) {
    for (double q : kQuantiles) {
      const std::size_t i = std::min(rows.size() - 1, static_cast<std::size_t>(q * static_cast<double>(rows.size())));
      const std::vector<std::string>& f = rows[i];
      os << padded(std::to_string(j), 4) << padded(std::to_string(radius), 8) << padded(num(q), 10)
         << padded(num(std::stod(f[1])), 14) << padded(num(std::stod(f[2])), 14) << padded(num(std::stod(f[3])), 14)
         << num(std::stod(f[4])) << '\n';
    }
    ++j;
  }
}

}  // namespace

void write_report(const std::filesystem::path& manifest_path, std::ostream& os) {
  std::ifstream in(manifest_path);
  if (!in) throw IntegrityError("manifest " + manifest_path.string() + " is missing");
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::parse_error& e) {
    throw IntegrityError("manifest " + manifest_path.string() + " is not valid JSON: " + e.what());
  }
  const std::filesystem::path dir = manifest_path.parent_path();

  os << "idslab report\n";
  os << "config " << manifest.value("config_hash", std::string("-")) << "  experiment "
     << manifest.value("experiment", std::string("-")) << "  threads " << manifest.value("threads", 0) << '\n';
  os << padded("kind", 16) << padded("suite", 20) << padded("pass", 6) << padded("payload", 36) << "summary\n";

  const json records = manifest.value("records", json::array());
  std::vector<std::filesystem::path> exhaustion;
  for (const json& r : records) {
    const std::string payload = r.at("payload").get<std::string>();
    const std::filesystem::path full = dir / payload;
    if (sha256_file(full) != r.at("sha256").get<std::string>()) {
      throw IntegrityError("payload " + payload + " does not match its recorded digest");
    }
    const json values = r.value("summary", json::object());
    const json checks = r.value("checks", json::object());
    std::string summary;
    for (const auto& [k, v] : values.items()) {
      if (!summary.empty()) summary += "  ";
      summary += k + "=" + (v.is_number() ? num(v.get<double>()) : v.dump());
    }
    for (const auto& [k, v] : checks.items()) {
      if (!v.get<bool>()) summary += (summary.empty() ? "" : "  ") + std::string("FAILED:") + k;
    }
    os << padded(r.at("kind").get<std::string>(), 16) << padded(r.at("suite").get<std::string>(), 20)
       << padded(r.at("pass").get<bool>() ? "yes" : "no", 6) << padded(payload, 36) << summary << '\n';
    if (payload.ends_with("ids-exhaustion/summary.csv")) exhaustion.push_back(full);
  }
  for (const auto& p : exhaustion) exhaustion_table(p, os);
}

}  // namespace idslab
