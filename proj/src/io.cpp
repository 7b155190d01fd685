#include "noisefid/io.hpp"

#include <omp.h>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace noisefid {

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void Table::add_row(std::initializer_list<double> vals) {
  if (vals.size() != columns.size())
    throw std::invalid_argument("Table::add_row: arity mismatch");
  rows.emplace_back(vals);
}

std::vector<double> Table::column(const std::string& name) const {
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] == name) {
      std::vector<double> out;
      out.reserve(rows.size());
      for (const auto& r : rows) out.push_back(r[c]);
      return out;
    }
  }
  throw std::invalid_argument("Table: no column named '" + name + "'");
}

void write_table_csv(const Table& t, const std::string& path, const nlohmann::json& meta) {
  std::ostringstream os;
  for (std::size_t c = 0; c < t.columns.size(); ++c)
    os << (c ? "," : "") << t.columns[c];
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c)
      os << (c ? "," : "") << format_double(row[c]);
    os << "\n";
  }
  write_file(path, os.str());

  nlohmann::json side = meta;
  side["columns"] = t.columns;
  side["rows"] = t.rows.size();
  write_file(path + ".meta.json", side.dump(2) + "\n");
}

Table read_table_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open table: " + path);
  Table t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ls(line);
    std::string cell;
    if (!have_header) {
      while (std::getline(ls, cell, ',')) t.columns.push_back(cell);
      have_header = true;
      continue;
    }
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) {
      double v = 0;
      auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc{})
        throw std::invalid_argument("bad numeric cell '" + cell + "' in " + path);
      row.push_back(v);
    }
    if (row.size() != t.columns.size())
      throw std::invalid_argument("ragged row in " + path);
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw std::invalid_argument("empty table: " + path);
  return t;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

void ensure_dir(const std::string& path) { std::filesystem::create_directories(path); }

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("NOISEFID_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return omp_get_max_threads();
}

void apply_threads(int requested) { omp_set_num_threads(resolve_threads(requested)); }

}  // namespace noisefid
