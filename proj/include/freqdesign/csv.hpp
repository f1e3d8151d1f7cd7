#pragma once

#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "freqdesign/sim.hpp"

namespace freqdesign {

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Header "t,<labels...>", then one row per sample, 17 significant digits.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << 't';
  for (const auto& l : traj.labels) os << ',' << l;
  os << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    os << format_g17(traj.times[k]);
    for (Eigen::Index c = 0; c < traj.states.cols(); ++c)
      os << ',' << format_g17(traj.states(static_cast<Eigen::Index>(k), c));
    os << '\n';
  }
}

/// Columns of equal length under the given header names.
inline void write_columns_csv(std::ostream& os, std::span<const std::string> header,
                              std::span<const std::vector<double>> columns) {
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  const std::size_t n = columns.empty() ? 0 : columns.front().size();
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << format_g17(columns[c][k]);
    os << '\n';
  }
}

}  // namespace freqdesign
