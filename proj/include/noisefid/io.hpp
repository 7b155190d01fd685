#pragma once
// Small I/O helpers shared by serialization and the experiment harness.
//
// All floating-point output goes through format_double (shortest round-trip
// representation), so emitted files are byte-identical across runs and thread
// counts, and replayed values parse back to the exact same doubles.

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include <json.hpp>

namespace noisefid {

std::string format_double(double v);

// In-memory numeric table; the common currency between experiments and writers.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(std::initializer_list<double> vals);
  std::vector<double> column(const std::string& name) const;
};

// Writes the table as CSV (header + shortest-round-trip values) and a
// "<path>.meta.json" sidecar carrying provenance (config hash, seed, columns).
void write_table_csv(const Table& t, const std::string& path, const nlohmann::json& meta);

Table read_table_csv(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);
void ensure_dir(const std::string& path);

// Worker-count resolution: explicit request > NOISEFID_THREADS env > OpenMP default.
int resolve_threads(int requested);
void apply_threads(int requested);

}  // namespace noisefid
