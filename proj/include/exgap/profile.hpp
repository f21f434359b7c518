// Copyright (c) 2026 The exgap Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "exgap/error.hpp"

namespace exgap {

/// Dolan-More profile. T[p][s] is the metric of solver s on problem p; a
/// non-finite or nonpositive entry marks a failure (ratio +inf).
struct ProfileTable {
  std::vector<double> tau;
  std::vector<std::vector<double>> rho;  // rho[s][t]
};

inline ProfileTable performance_profile(const std::vector<std::vector<double>>& T, const std::vector<double>& tau_grid) {
  if (T.empty() || T[0].empty()) throw Error("no-data", "profile needs at least one problem and one solver");
  const std::size_t np = T.size(), ns = T[0].size();
  for (const auto& row : T)
    if (row.size() != ns) throw Error("shape", "every problem row needs one entry per solver");
  auto ok = [](double v) { return std::isfinite(v) && v > 0; };
  std::vector<std::vector<double>> log_ratio(np, std::vector<double>(ns, kInf));
  for (std::size_t p = 0; p < np; ++p) {
    double best = kInf;
    for (double v : T[p])
      if (ok(v)) best = std::min(best, v);
    if (!std::isfinite(best)) continue;
    for (std::size_t s = 0; s < ns; ++s)
      if (ok(T[p][s])) log_ratio[p][s] = std::log2(T[p][s] / best);
  }
  ProfileTable out;
  out.tau = tau_grid;
  out.rho.assign(ns, std::vector<double>(tau_grid.size(), 0.0));
  for (std::size_t s = 0; s < ns; ++s)
    for (std::size_t t = 0; t < tau_grid.size(); ++t) {
      std::size_t cnt = 0;
      for (std::size_t p = 0; p < np; ++p)
        if (log_ratio[p][s] <= tau_grid[t]) ++cnt;
      out.rho[s][t] = double(cnt) / double(np);
    }
  return out;
}

inline std::string profile_csv(const ProfileTable& t, const std::vector<std::string>& names) {
  std::string out = "tau";
  for (const auto& n : names) out += "," + n;
  out += '\n';
  for (std::size_t i = 0; i < t.tau.size(); ++i) {
    out += std::to_string(t.tau[i]);
    for (const auto& r : t.rho) out += "," + std::to_string(r[i]);
    out += '\n';
  }
  return out;
}

}  // namespace exgap
