// Copyright (c) 2026 The exgap Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "exgap/cost_audit.hpp"
#include "exgap/variant_matrix.hpp"

using namespace exgap;

namespace {

std::string book() {
  std::ifstream in(EXGAP_DOCS_DIR "/book.md");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const Scheme kSchemes[] = {Scheme::TwoP1D, Scheme::OneP2D, Scheme::TwoP1D_SC, Scheme::OneP2D_SC, Scheme::OneP2D_LG,
                           Scheme::I1P2D, Scheme::I2P1D, Scheme::ADMM_New, Scheme::PADMM_New};

const char* kDecisionIds[] = {
    "linop-power-safety",     "linop-dense-only",       "linop-power-start",     "prox-group-box",
    "prox-infeasible-tol",    "prox-hinge",             "smoothing-euclidean",   "smoothing-dual-quadratic",
    "smoothing-g-oracle",     "smoothing-da-interval",  "subsolver-certified-stop", "subsolver-budget",
    "subsolver-warm-start",   "schedule-lg-shift",      "schedule-fp-guard",     "schedule-kick",
    "schemes-certify-opt-in", "schemes-tuned-disable",  "schemes-al-2p1d",       "schemes-admm-center",
    "schemes-center-policy",  "bounds-fstar-provenance", "bounds-rel-slack",     "problems-prng",
    "problems-correlation",   "problems-noise",         "cli-config-format",     "cli-wall-clock",
    "cli-no-plotting",        "docs-matrix-source"};

std::map<std::string, int> markers(const std::string& text, const std::string& kind) {
  std::map<std::string, int> count;
  std::regex re("<!-- " + kind + ":([a-z0-9-]+) -->");
  for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it)
    ++count[(*it)[1].str()];
  return count;
}

}  // namespace

TEST(Docs, VariantMatrixMatchesLibrary) {
  auto rows = load_variant_matrix(EXGAP_VARIANT_MATRIX);
  EXPECT_EQ(rows.size(), 18u);
  for (Scheme s : kSchemes)
    for (SmootherKind k : {SmootherKind::Bregman, SmootherKind::AugLag}) {
      const VariantRow* row = nullptr;
      for (const auto& r : rows)
        if (r.scheme == to_string(s) && r.smoother == to_string(k)) row = &r;
      ASSERT_NE(row, nullptr) << to_string(s) << "/" << to_string(k);
      if (!uses_smoother(s)) {
        EXPECT_EQ(row->accepted, "ignored") << to_string(s);
      } else {
        EXPECT_EQ(row->accepted == "yes", scheme_accepts_smoother(s, k)) << to_string(s) << "/" << to_string(k);
        if (row->accepted == "yes") EXPECT_NO_THROW(check_variant(rows, s, k));
        else EXPECT_THROW(check_variant(rows, s, k), Error);
      }
    }
}

TEST(Docs, VariantMatrixParser) {
  std::istringstream ok("# comment\n\ntwo_p1d bregman yes x  # trailing\n");
  auto rows = parse_variant_matrix(ok);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].certificate, "x");
  std::istringstream short_row("two_p1d bregman yes\n");
  EXPECT_THROW(parse_variant_matrix(short_row), Error);
  std::istringstream bad_flag("two_p1d bregman maybe x\n");
  EXPECT_THROW(parse_variant_matrix(bad_flag), Error);
  try {
    check_variant(rows, Scheme::OneP2D, SmootherKind::Bregman);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "bad-matrix");
  }
  EXPECT_THROW(load_variant_matrix("/nonexistent/matrix.txt"), Error);
}

TEST(Docs, EveryDecisionMarkerOnce) {
  auto found = markers(book(), "dd");
  std::set<std::string> known(std::begin(kDecisionIds), std::end(kDecisionIds));
  for (const auto& id : known) EXPECT_EQ(found[id], 1) << id;
  for (const auto& [id, n] : found) EXPECT_TRUE(known.count(id)) << "unknown decision marker " << id;
}

TEST(Docs, GapAndScopeMarkers) {
  std::string text = book();
  auto gaps = markers(text, "gap");
  for (const char* id : {"psi-recursion", "final-k", "dual-first-start", "sc-constant", "sc-lagged-beta"})
    EXPECT_EQ(gaps[id], 1) << id;
  EXPECT_EQ(markers(text, "scope")["not-reproduced"], 1);
}

TEST(Docs, CostTableMatchesExpectedCounts) {
  std::string text = book();
  auto row = [](const std::string& name, const Counters& c) {
    return "| " + name + " | " + std::to_string(c.prox) + " | " + std::to_string(c.A) + " | " + std::to_string(c.At) +
           " |";
  };
  EXPECT_NE(text.find(row("two_p1d", *expected_cost(Scheme::TwoP1D, false))), std::string::npos);
  EXPECT_NE(text.find(row("one_p2d", *expected_cost(Scheme::OneP2D, false))), std::string::npos);
  EXPECT_NE(text.find(row("one_p2d (certification mode)", *expected_cost(Scheme::OneP2D, true))), std::string::npos);
  EXPECT_FALSE(expected_cost(Scheme::ADMM_New, false));
}

TEST(Docs, CostAudit) {
  Trace tr;
  try {
    cost_audit(tr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "no-counters");
  }
  tr.scheme = Scheme::TwoP1D;
  tr.step_ops = {{2, 2, 1}, {2, 2, 1}, {2, 3, 1}};
  CostRow r = cost_audit(tr);
  EXPECT_FALSE(r.uniform);
  EXPECT_EQ(r.steps, 3);
  EXPECT_EQ(cost_table({r}), "| scheme | prox | A | A^T |\n|---|---|---|---|\n| two_p1d | 2 | 2 | 1 |\n");
}
