#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "bvm/report.hpp"
#include "bvm/version.hpp"
#include "json.hpp"

namespace bvm {

std::uint64_t fnv64(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void ExperimentReport::stamp(const std::string& config_text) {
  config = config_text;
  config_hash = fnv64(config_text);
}

const MetricRow* ExperimentReport::find(const std::string& metric,
                                        const std::string& cell) const {
  for (const auto& r : rows)
    if (r.metric == metric && (cell.empty() || r.cell == cell)) return &r;
  return nullptr;
}

bool ExperimentReport::all_pass() const {
  for (const auto& r : rows)
    if (!r.pass) return false;
  return true;
}

std::uint64_t ExperimentReport::content_hash() const {
  std::string acc = name + "|" + std::to_string(config_hash) + "|" + std::to_string(seed);
  for (const auto& r : rows) {
    acc += "|" + r.cell + ";" + r.metric + ";" + num(r.value) + ";" + num(r.mc_err) +
           ";" + std::to_string(r.seed) + ";" + (r.pass ? "1" : "0") + ";" + r.note;
  }
  return fnv64(acc);
}

std::string ExperimentReport::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["content_hash"] = content_hash();
  for (const auto& [mod, ver] : module_versions()) j["versions"][mod] = ver;
  if (!config.empty()) {
    nlohmann::json cfg = nlohmann::json::parse(config, nullptr, false);
    j["config"] = cfg.is_discarded() ? nlohmann::json(config) : cfg;
  }
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json row;
    row["cell"] = r.cell;
    row["metric"] = r.metric;
    row["value"] = r.value;
    row["mc_err"] = r.mc_err;
    row["seed"] = r.seed;
    row["pass"] = r.pass;
    if (!r.note.empty()) row["note"] = r.note;
    j["rows"].push_back(row);
  }
  return j.dump(2) + "\n";
}

std::string ExperimentReport::to_csv() const {
  std::string out = "cell,metric,value,mc_err,seed,pass,note\n";
  for (const auto& r : rows) {
    out += "\"" + r.cell + "\"," + r.metric + "," + num(r.value) + "," + num(r.mc_err) +
           "," + std::to_string(r.seed) + "," + (r.pass ? "1" : "0") + ",\"" + r.note +
           "\"\n";
  }
  return out;
}

std::string ExperimentReport::timings_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["config_hash"] = config_hash;
  j["total_runtime_s"] = total_runtime_s;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rows)
    j["rows"].push_back({{"cell", r.cell}, {"metric", r.metric}, {"runtime_s", r.runtime_s}});
  return j.dump(2) + "\n";
}

void save_report(const ExperimentReport& rep, const std::string& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& file, const std::string& text) {
    std::ofstream out(std::filesystem::path(dir) / file);
    if (!out) throw std::runtime_error("save_report: cannot open " + file + " in " + dir);
    out << text;
  };
  write(rep.name + ".json", rep.to_json());
  write(rep.name + ".csv", rep.to_csv());
  write(rep.name + ".timings.json", rep.timings_json());
}

}  // namespace bvm
