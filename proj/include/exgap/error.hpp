// Copyright (c) 2026 The exgap Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace exgap {

/// Error carrying a short machine-readable code ("shape", "no-prox-rule", ...)
/// and an optional numeric payload (e.g. the last norm estimate).
class Error : public std::runtime_error {
 public:
  explicit Error(std::string code, const std::string& detail = {},
                 double value = std::numeric_limits<double>::quiet_NaN())
      : std::runtime_error(detail.empty() ? code : code + ": " + detail),
        code_(std::move(code)),
        value_(value) {}

  const std::string& code() const noexcept { return code_; }
  double value() const noexcept { return value_; }

 private:
  std::string code_;
  double value_;
};

inline void require(bool ok, const char* code, const std::string& detail = {}) {
  if (!ok) throw Error(code, detail);
}

}  // namespace exgap
