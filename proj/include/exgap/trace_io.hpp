// Copyright (c) 2026 The exgap Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "exgap/schemes.hpp"

namespace exgap {

inline constexpr const char* kTraceHeader =
    "k,f_val,obj_residual,feas_abs,feas_rel,gamma,beta,tau,psi,inner_iters,wall_ns,feas_bound,obj_upper,obj_lower,"
    "smoothed_gap";

namespace detail {

template <class T>
void put_num(std::string& out, T v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

template <class T>
T get_num(std::string_view s, int line) {
  T v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw Error("bad-trace", "line " + std::to_string(line) + ": cannot parse '" + std::string(s) + "'");
  return v;
}

// from_chars rejects the sign on "-nan" on some libraries; NaN sign is not data.
inline double get_double(std::string_view s, int line) {
  if (s == "nan" || s == "-nan") return kNaN;
  return get_num<double>(s, line);
}

}  // namespace detail

/// Shortest round-trip decimal, one record per line in field order.
inline std::string trace_csv_line(const IterationRecord& r, bool wall_clock = true) {
  std::string out;
  auto d = [&](double v) {
    out.push_back(',');
    detail::put_num(out, v);
  };
  detail::put_num(out, r.k);
  d(r.f_val);
  d(r.obj_residual);
  d(r.feas_abs);
  d(r.feas_rel);
  d(r.gamma);
  d(r.beta);
  d(r.tau);
  d(r.psi);
  out.push_back(',');
  detail::put_num(out, r.inner_iters);
  out.push_back(',');
  detail::put_num(out, wall_clock ? r.wall_ns : 0LL);
  d(r.feas_bound);
  d(r.obj_upper);
  d(r.obj_lower);
  d(r.smoothed_gap);
  return out;
}

/// wall_clock = false writes 0 in the wall_ns column so that equal runs give
/// equal files.
inline void write_trace_csv(std::ostream& out, const std::vector<IterationRecord>& records, bool wall_clock = true) {
  out << kTraceHeader << '\n';
  for (const auto& r : records) out << trace_csv_line(r, wall_clock) << '\n';
}

inline std::vector<IterationRecord> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) throw Error("bad-trace", "missing or unexpected header row");
  std::vector<IterationRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest(line);
    for (;;) {
      auto c = rest.find(',');
      f.push_back(rest.substr(0, c));
      if (c == std::string_view::npos) break;
      rest.remove_prefix(c + 1);
    }
    if (f.size() != 15) throw Error("bad-trace", "line " + std::to_string(lineno) + ": expected 15 fields");
    IterationRecord r;
    r.k = detail::get_num<int>(f[0], lineno);
    double* dst[] = {&r.f_val, &r.obj_residual, &r.feas_abs, &r.feas_rel, &r.gamma, &r.beta, &r.tau, &r.psi};
    for (int i = 0; i < 8; ++i) *dst[i] = detail::get_double(f[1 + i], lineno);
    r.inner_iters = detail::get_num<long>(f[9], lineno);
    r.wall_ns = detail::get_num<long long>(f[10], lineno);
    r.feas_bound = detail::get_double(f[11], lineno);
    r.obj_upper = detail::get_double(f[12], lineno);
    r.obj_lower = detail::get_double(f[13], lineno);
    r.smoothed_gap = detail::get_double(f[14], lineno);
    if (!out.empty() && r.k <= out.back().k)
      throw Error("bad-trace", "line " + std::to_string(lineno) + ": k is not increasing");
    out.push_back(r);
  }
  return out;
}

}  // namespace exgap
