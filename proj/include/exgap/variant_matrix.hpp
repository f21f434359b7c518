// Copyright (c) 2026 The exgap Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "exgap/schemes.hpp"

namespace exgap {

struct VariantRow {
  std::string scheme, smoother, accepted, certificate;
};

/// Whitespace-separated rows; '#' starts a comment.
inline std::vector<VariantRow> parse_variant_matrix(std::istream& in) {
  std::vector<VariantRow> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::istringstream ls(line);
    VariantRow r;
    if (!(ls >> r.scheme)) continue;
    if (!(ls >> r.smoother >> r.accepted >> r.certificate))
      throw Error("bad-matrix", "variant matrix line " + std::to_string(lineno) + " has fewer than 4 columns");
    if (r.accepted != "yes" && r.accepted != "no" && r.accepted != "ignored")
      throw Error("bad-matrix", "variant matrix line " + std::to_string(lineno) + ": accepted must be yes|no|ignored");
    rows.push_back(r);
  }
  return rows;
}

inline std::vector<VariantRow> load_variant_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("bad-matrix", "cannot open " + path);
  return parse_variant_matrix(in);
}

/// Throws "scheme-smoother" when the matrix rejects the pair, "bad-matrix"
/// when the pair is missing.
inline void check_variant(const std::vector<VariantRow>& rows, Scheme s, SmootherKind k) {
  for (const auto& r : rows)
    if (r.scheme == to_string(s) && r.smoother == to_string(k)) {
      if (r.accepted == "no")
        throw Error("scheme-smoother", std::string(to_string(s)) + " does not accept the " + to_string(k) + " smoother");
      return;
    }
  throw Error("bad-matrix", std::string("no matrix row for ") + to_string(s) + "/" + to_string(k));
}

}  // namespace exgap
