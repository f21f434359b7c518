// Copyright (c) 2026 The exgap Authors.
// SPDX-License-Identifier: Apache-2.0

// Random small instances shared by the unit tests and the acceptance binary.

#pragma once

#include "exgap/problems.hpp"

namespace exgap::testing {

/// Random problem with a bounded box containing 0 and a feasible b. The
/// objective kind cycles with the seed through L1, group-L2, squared-L2,
/// zero and hinge.
inline ConstrainedProblem random_bounded(std::uint64_t seed, Index n, Index m, bool inequality = false) {
  Rng rng(seed + 7919);
  Mat a = gaussian_matrix(rng, m, n);
  Vec lo(n), hi(n);
  for (Index i = 0; i < n; ++i) {
    lo[i] = -0.5 - rng.uniform();
    hi[i] = 0.5 + rng.uniform();
  }
  FeasibleSet set = FeasibleSet::box(lo, hi);
  FunctionSpec f;
  switch (seed % 5) {
    case 0: {
      Vec w(n);
      for (Index i = 0; i < n; ++i) w[i] = 0.2 + rng.uniform();
      f = l1_fn(w);
      break;
    }
    case 1: {
      Index ng = std::max<Index>(1, n / 3);
      f = group_l2_fn(random_groups(rng, n, ng), Vec::Constant(ng, 0.7));
      break;
    }
    case 2: {
      Vec c(n);
      for (Index i = 0; i < n; ++i) c[i] = rng.normal();
      f = squared_l2_fn(0.5 + rng.uniform(), c);
      break;
    }
    case 3: f = zero_fn(); break;
    default: {
      Vec lab(n);
      for (Index i = 0; i < n; ++i) lab[i] = rng.uniform() < 0.5 ? -1.0 : 1.0;
      f = hinge_sum_fn(lab, 0.5);
    }
  }
  Vec x0(n);
  for (Index i = 0; i < n; ++i) x0[i] = lo[i] + (hi[i] - lo[i]) * rng.uniform();
  Vec b = a * x0;
  if (inequality)
    for (Index j = 0; j < m; ++j) b[j] += rng.uniform();
  ConstrainedProblem p({Block{f, set, LinearMap::dense(a)}}, b,
                       inequality ? ConstraintSense::Inequality : ConstraintSense::Equality);
  p.meta.family = "random_bounded";
  p.meta.seed = seed;
  return p;
}

}  // namespace exgap::testing
