#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "wavesource/core_model.hpp"
#include "wavesource/simulate.hpp"

namespace wavesource {

/// Shortest representation with 17 significant digits; re-parsing a
/// printed double recovers it exactly.
inline std::string format17(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

/// source.csv: x, f_true, f_hat
inline void write_source_csv(const std::filesystem::path& path, const Grid& grid,
                             const SourceField& f_true, const SourceField& f_hat) {
  if (f_true.size() != grid.n_x || f_hat.size() != grid.n_x)
    throw DimensionError("write_source_csv: source length mismatch");
  auto out = open_output(path);
  out << "x,f_true,f_hat\n";
  for (int i = 0; i < grid.n_x; ++i)
    out << format17(grid.node_coord(i)) << ',' << format17(f_true.f[i]) << ','
        << format17(f_hat.f[i]) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

/// state_error.csv: t, err_norm
inline void write_state_error_csv(const std::filesystem::path& path, const Grid& grid,
                                  const std::vector<double>& err_norms) {
  auto out = open_output(path);
  out << "t,err_norm\n";
  for (std::size_t j = 0; j < err_norms.size(); ++j)
    out << format17(j * grid.dt) << ',' << format17(err_norms[j]) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

/// sweep.csv: m, cond_W, rank_W
struct SweepRow {
  int m{0};
  double cond_w{0.0};
  int rank_w{0};
};

inline void write_sweep_csv(const std::filesystem::path& path,
                            const std::vector<SweepRow>& rows) {
  auto out = open_output(path);
  out << "m,cond_W,rank_W\n";
  for (const auto& row : rows)
    out << row.m << ',' << format17(row.cond_w) << ',' << row.rank_w << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

/// measurements.csv: t, then one column per measured node (z_<node>).
inline void write_measurements_csv(const std::filesystem::path& path, const Grid& grid,
                                   const std::vector<int>& nodes,
                                   const std::vector<Vector>& measurements) {
  auto out = open_output(path);
  out << "t";
  for (int node : nodes) out << ",z_" << node;
  out << '\n';
  for (std::size_t j = 0; j < measurements.size(); ++j) {
    if (measurements[j].size() != static_cast<Eigen::Index>(nodes.size()))
      throw DimensionError("write_measurements_csv: column count mismatch");
    out << format17(j * grid.dt);
    for (Eigen::Index c = 0; c < measurements[j].size(); ++c)
      out << ',' << format17(measurements[j][c]);
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

/// states.csv: t, v_1..v_n, w_1..w_n (interior nodes, 1-based labels).
inline void write_states_csv(const std::filesystem::path& path, const Grid& grid,
                             const std::vector<Vector>& states) {
  auto out = open_output(path);
  out << "t";
  for (int i = 1; i <= grid.n_x; ++i) out << ",v_" << i;
  for (int i = 1; i <= grid.n_x; ++i) out << ",w_" << i;
  out << '\n';
  for (std::size_t j = 0; j < states.size(); ++j) {
    if (states[j].size() != 2 * grid.n_x)
      throw DimensionError("write_states_csv: state dimension mismatch");
    out << format17(j * grid.dt);
    for (Eigen::Index c = 0; c < states[j].size(); ++c)
      out << ',' << format17(states[j][c]);
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

/// Gain fixtures as (row, col, value) triplets with a header line.
inline void save_gain_csv(const std::filesystem::path& path, const Matrix& L) {
  auto out = open_output(path);
  out << "row,col,value\n";
  for (int r = 0; r < L.rows(); ++r)
    for (int c = 0; c < L.cols(); ++c)
      if (L(r, c) != 0.0)
        out << r << ',' << c << ',' << format17(L(r, c)) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

inline Matrix load_gain_csv(const std::filesystem::path& path, int rows, int cols) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open gain file: " + path.string());
  Matrix L = Matrix::Zero(rows, cols);
  std::string line;
  if (!std::getline(in, line) || line != "row,col,value")
    throw IoError("gain file missing 'row,col,value' header: " + path.string());
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    int r = 0, c = 0;
    double value = 0.0;
    char comma1 = 0, comma2 = 0;
    if (!(ss >> r >> comma1 >> c >> comma2 >> value) || comma1 != ',' || comma2 != ',')
      throw IoError("gain file parse error at line " + std::to_string(lineno));
    if (r < 0 || r >= rows || c < 0 || c >= cols)
      throw DimensionError("gain file index out of range at line " +
                           std::to_string(lineno));
    L(r, c) = value;
  }
  return L;
}

}  // namespace wavesource
