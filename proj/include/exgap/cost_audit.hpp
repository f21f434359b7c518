// Copyright (c) 2026 The exgap Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "exgap/schemes.hpp"

namespace exgap {

/// Per-iteration operation counts of one run.
struct CostRow {
  std::string scheme;
  long prox = 0, A = 0, At = 0;
  bool uniform = true;  // every step had the same counts
  long steps = 0;
};

inline CostRow cost_audit(const Trace& tr) {
  if (tr.step_ops.empty()) throw Error("no-counters", "trace has no per-step counters");
  CostRow row;
  row.scheme = to_string(tr.scheme);
  const Counters& first = tr.step_ops.front();
  row.prox = first.prox;
  row.A = first.A;
  row.At = first.At;
  row.steps = long(tr.step_ops.size());
  for (const Counters& c : tr.step_ops)
    if (c.prox != first.prox || c.A != first.A || c.At != first.At) row.uniform = false;
  return row;
}

/// Expected per-iteration counts of the basic schemes; nullopt elsewhere.
inline std::optional<Counters> expected_cost(Scheme s, bool certify) {
  switch (s) {
    case Scheme::TwoP1D: return Counters{2, 2, 1};
    case Scheme::OneP2D: return certify ? Counters{2, 2, 2} : Counters{1, 1, 1};
    default: return std::nullopt;
  }
}

inline std::string cost_table(const std::vector<CostRow>& rows) {
  std::string out = "| scheme | prox | A | A^T |\n|---|---|---|---|\n";
  for (const auto& r : rows)
    out += "| " + r.scheme + " | " + std::to_string(r.prox) + " | " + std::to_string(r.A) + " | " +
           std::to_string(r.At) + " |\n";
  return out;
}

}  // namespace exgap
