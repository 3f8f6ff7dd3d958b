#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fedsim/errors.hpp"

namespace fedsim {

// Fixed formatting so that identical doubles always produce identical bytes.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::string(buf);
}

inline void write_csv_row(std::ostream& os, const std::vector<std::string>& cells) {
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) os << ',';
    os << cells[i];
  }
  os << '\n';
}

// Row-major matrix CSV with a header row of device ids (0..n-1).
inline void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m) {
  for (int j = 0; j < m.cols(); ++j) {
    if (j) os << ',';
    os << j;
  }
  os << '\n';
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      os << fmt_double(m(i, j));
    }
    os << '\n';
  }
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open output file: " + path);
  return os;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open input file: " + path);
  return is;
}

}  // namespace fedsim
