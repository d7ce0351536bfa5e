#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "chebgd/linalg.hpp"

namespace testsup {

inline std::string tmp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "chebgd_tests";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline chebgd::linalg::QuadraticProblem diag_problem(const std::vector<double>& d) {
  chebgd::linalg::Matrix a(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) a(i, i) = d[i];
  return chebgd::linalg::QuadraticProblem::from_matrix(std::move(a));
}

/// Least-squares slope of y against t.
inline double ls_slope(const std::vector<double>& t, const std::vector<double>& y) {
  const double n = static_cast<double>(t.size());
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    st += t[i];
    sy += y[i];
    stt += t[i] * t[i];
    sty += t[i] * y[i];
  }
  return (n * sty - st * sy) / (n * stt - st * st);
}

}  // namespace testsup
