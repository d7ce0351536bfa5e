#pragma once

#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "chebgd/errors.hpp"
#include "chebgd/linalg.hpp"

namespace chebgd {
namespace cli {

struct PlotSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;  // (t, value)
};

/// Gnuplot-ready data blocks: one whitespace-separated block per series with
/// a `# series:` header, blank lines between blocks. Values <= 0 are clamped
/// to 1e-300 (with a footnote row) so log-scale plots stay usable.
inline void emit_plot_data(const std::string& path,
                           const std::vector<PlotSeries>& series) {
  std::ofstream out(path);
  if (!out) throw IOError("cannot open " + path + " for writing");
  if (series.empty()) {
    out << "# no series\n";
    return;
  }
  bool first = true;
  for (const auto& s : series) {
    if (!first) out << '\n';
    first = false;
    out << "# series: " << s.name << '\n';
    std::size_t clamped = 0;
    for (const auto& [t, v] : s.points) {
      const double y = v > 0.0 ? v : 1e-300;
      if (v <= 0.0) ++clamped;
      out << linalg::format_double(t) << ' ' << linalg::format_double(y) << '\n';
    }
    if (clamped > 0)
      out << "# note: " << clamped << " nonpositive value(s) clamped to 1e-300\n";
  }
  if (!out) throw IOError("write failed for " + path);
}

}  // namespace cli
}  // namespace chebgd
