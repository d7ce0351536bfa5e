#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "chebgd/errors.hpp"
#include "chebgd/linalg.hpp"

namespace chebgd {
namespace data {

/// Design matrix plus response extracted from a CSV file, with the
/// preprocessing decisions logged.
struct Dataset {
  linalg::Matrix h;  // m x n design matrix
  Vector y;          // m-vector response
  std::string source;
  std::vector<std::string> log;

  std::size_t m() const { return h.rows; }
  std::size_t n() const { return h.cols; }
};

enum class MissingPolicy { drop_columns, drop_rows };

struct LoadOptions {
  std::string response_column = "last";  // "last", 0-based index, or header name
  std::string missing_marker = "?";
  MissingPolicy policy = MissingPolicy::drop_columns;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, ',')) out.push_back(trim(cur));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline bool parse_double(const std::string& tok, double& out) {
  if (tok.empty()) return false;
  char* end = nullptr;
  out = std::strtod(tok.c_str(), &end);
  return end == tok.c_str() + tok.size();
}

}  // namespace detail

/// Loads a CSV file into a ridge-ready (H, y) pair.
///
/// Column-drop policy (the default) removes every feature column containing
/// the missing marker plus every non-numeric column; row-drop instead removes
/// rows containing the marker. A header row is detected automatically (any
/// token that is neither numeric nor the marker). Column decisions depend
/// only on column contents, never on row order.
inline Dataset load_dataset(const std::string& path, LoadOptions opts = {}) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot open " + path);

  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    rows.push_back(detail::split_csv_line(line));
  }
  if (rows.empty()) throw ParseError(path + ": no rows");

  // header detection: a token in row 1 that is neither numeric nor a marker
  std::vector<std::string> header;
  bool has_header = false;
  for (const auto& tok : rows.front()) {
    double v;
    if (tok != opts.missing_marker && !detail::parse_double(tok, v)) {
      has_header = true;
      break;
    }
  }
  if (has_header) {
    header = rows.front();
    rows.erase(rows.begin());
    if (rows.empty()) throw ParseError(path + ": header but no data rows");
  }

  const std::size_t ncols = rows.front().size();
  for (std::size_t r = 0; r < rows.size(); ++r)
    if (rows[r].size() != ncols)
      throw ParseError(path + ": row " + std::to_string(r + 1) + " has " +
                       std::to_string(rows[r].size()) + " columns, expected " +
                       std::to_string(ncols));

  // resolve the response column
  std::size_t response = ncols - 1;
  if (opts.response_column != "last") {
    bool resolved = false;
    if (has_header) {
      for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == opts.response_column) {
          response = j;
          resolved = true;
          break;
        }
    }
    if (!resolved) {
      double idx;
      if (detail::parse_double(opts.response_column, idx) && idx >= 0 &&
          idx < static_cast<double>(ncols)) {
        response = static_cast<std::size_t>(idx);
      } else {
        throw InvalidParams("response column '" + opts.response_column +
                            "' not found");
      }
    }
  }

  Dataset ds;
  ds.source = path;

  // row-drop policy first, so column decisions see the surviving rows
  if (opts.policy == MissingPolicy::drop_rows) {
    std::size_t before = rows.size();
    rows.erase(std::remove_if(rows.begin(), rows.end(),
                              [&](const std::vector<std::string>& r) {
                                return std::find(r.begin(), r.end(),
                                                 opts.missing_marker) != r.end();
                              }),
               rows.end());
    ds.log.push_back("dropped " + std::to_string(before - rows.size()) +
                     " rows containing '" + opts.missing_marker + "'");
    if (rows.empty()) throw EmptyAfterCleaning(path + ": all rows had missing values");
  }

  std::vector<std::size_t> kept;
  for (std::size_t j = 0; j < ncols; ++j) {
    if (j == response) continue;
    bool missing = false, non_numeric = false;
    for (const auto& r : rows) {
      if (r[j] == opts.missing_marker) {
        missing = true;
        continue;
      }
      double v;
      if (!detail::parse_double(r[j], v)) {
        non_numeric = true;
        break;
      }
    }
    const std::string name = has_header ? header[j] : "col" + std::to_string(j);
    if (non_numeric) {
      ds.log.push_back("dropped " + name + " (non-numeric)");
    } else if (missing) {
      ds.log.push_back("dropped " + name + " (contains '" + opts.missing_marker + "')");
    } else {
      kept.push_back(j);
    }
  }
  if (kept.empty()) throw EmptyAfterCleaning(path + ": no usable feature columns");

  ds.h = linalg::Matrix(rows.size(), kept.size());
  ds.y.resize(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::string& tok = rows[r][response];
    if (tok == opts.missing_marker)
      throw ParseError(path + ": response has missing value at data row " +
                       std::to_string(r + 1) + " (use row-drop policy)");
    if (!detail::parse_double(tok, ds.y[r]))
      throw ParseError(path + ": non-numeric response '" + tok + "' at data row " +
                       std::to_string(r + 1));
    for (std::size_t k = 0; k < kept.size(); ++k) {
      if (!detail::parse_double(rows[r][kept[k]], ds.h(r, k)))
        throw ParseError(path + ": bad value at data row " + std::to_string(r + 1) +
                         ", column " + std::to_string(kept[k] + 1));
    }
  }
  ds.log.push_back("kept " + std::to_string(kept.size()) + " of " +
                   std::to_string(ncols - 1) + " feature columns; m = " +
                   std::to_string(rows.size()));
  return ds;
}

/// Column z-scoring of the features (response untouched). Zero-variance
/// columns are recentered to zero and logged.
inline void standardize_features(Dataset& ds) {
  const std::size_t m = ds.m(), n = ds.n();
  for (std::size_t j = 0; j < n; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) mean += ds.h(i, j);
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double d = ds.h(i, j) - mean;
      var += d * d;
    }
    var /= static_cast<double>(m);
    const double sd = std::sqrt(var);
    if (sd == 0.0) {
      for (std::size_t i = 0; i < m; ++i) ds.h(i, j) = 0.0;
      ds.log.push_back("column " + std::to_string(j) + " had zero variance");
      continue;
    }
    for (std::size_t i = 0; i < m; ++i) ds.h(i, j) = (ds.h(i, j) - mean) / sd;
  }
  ds.log.push_back("standardized " + std::to_string(n) + " feature columns");
}

}  // namespace data
}  // namespace chebgd
