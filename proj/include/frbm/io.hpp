#pragma once

#include <Eigen/Dense>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include "frbm/common.hpp"

namespace frbm {

/// %.17g round-trips a double exactly; %.6g is the report precision.
inline std::string fmt_sig(double v, int sig) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", sig, v);
  return buf;
}

inline std::string fmt17(double v) { return fmt_sig(v, 17); }
inline std::string fmt6(double v) { return fmt_sig(v, 6); }

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline void write_table_csv(const std::string& path, const Table& table) {
  std::ofstream out(path);
  if (!out) throw IoError("write_table_csv: cannot open " + path);
  auto emit = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << '\n';
  };
  emit(table.header);
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size())
      throw IoError("write_table_csv: ragged row in " + path);
    emit(row);
  }
  if (!out) throw IoError("write_table_csv: write failed for " + path);
}

inline void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw IoError("write_matrix_csv: cannot open " + path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << fmt17(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("write_matrix_csv: write failed for " + path);
}

inline Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("read_matrix_csv: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    const char* p = line.c_str();
    while (true) {
      char* end = nullptr;
      double v = std::strtod(p, &end);
      if (end == p) throw IoError("read_matrix_csv: bad number in " + path);
      row.push_back(v);
      p = end;
      if (*p == ',') {
        ++p;
      } else if (*p == '\0' || *p == '\r') {
        break;
      } else {
        throw IoError("read_matrix_csv: unexpected character in " + path);
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError("read_matrix_csv: ragged rows in " + path);
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

inline void write_vector_csv(const std::string& path, const Eigen::VectorXd& v) {
  write_matrix_csv(path, v);
}

inline Eigen::VectorXd read_vector_csv(const std::string& path) {
  Eigen::MatrixXd m = read_matrix_csv(path);
  if (m.size() == 0) return Eigen::VectorXd();
  if (m.cols() != 1) throw IoError("read_vector_csv: expected one column in " + path);
  return m.col(0);
}

/// Coordinate-format Matrix Market file listing every entry (1-based indices).
inline void write_matrix_market(const std::string& path,
                                const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw IoError("write_matrix_market: cannot open " + path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << ' ' << m.cols() << ' ' << m.rows() * m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      out << (i + 1) << ' ' << (j + 1) << ' ' << fmt17(m(i, j)) << '\n';
  if (!out) throw IoError("write_matrix_market: write failed for " + path);
}

/// Key=value manifest, one pair per line. Order preserved on write.
inline void write_manifest(const std::string& path,
                           const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ofstream out(path);
  if (!out) throw IoError("write_manifest: cannot open " + path);
  for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
  if (!out) throw IoError("write_manifest: write failed for " + path);
}

inline std::vector<std::pair<std::string, std::string>> read_manifest(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("read_manifest: cannot open " + path);
  std::vector<std::pair<std::string, std::string>> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw IoError("read_manifest: missing '=' in " + path);
    kv.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return kv;
}

inline std::string manifest_get(
    const std::vector<std::pair<std::string, std::string>>& kv,
    const std::string& key) {
  for (const auto& [k, v] : kv)
    if (k == key) return v;
  throw IoError("manifest: missing key '" + key + "'");
}

}  // namespace frbm
