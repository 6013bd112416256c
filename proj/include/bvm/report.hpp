#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bvm {

std::uint64_t fnv64(const std::string& text);

struct MetricRow {
  std::string cell;     // grid coordinates, e.g. "N=250 psi=k1 rep=0"
  std::string metric;
  double value = 0.0;
  double mc_err = 0.0;  // replication / batching error bar
  std::uint64_t seed = 0;
  double runtime_s = 0.0;
  bool pass = true;
  std::string note;
};

// Deterministic experiment summary: the json/csv serializations depend only
// on config, seeds and computed numbers.  Wall times live in a sidecar so
// identical (config, seed) runs emit byte-identical reports.
struct ExperimentReport {
  std::string name;
  std::string config;  // canonical echo
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  double total_runtime_s = 0.0;
  std::vector<MetricRow> rows;

  void stamp(const std::string& config_text);
  const MetricRow* find(const std::string& metric, const std::string& cell = "") const;
  bool all_pass() const;
  std::uint64_t content_hash() const;
  std::string to_json() const;
  std::string to_csv() const;
  std::string timings_json() const;
};

// writes <dir>/<name>.json, .csv and <name>.timings.json
void save_report(const ExperimentReport& rep, const std::string& dir);

}  // namespace bvm
