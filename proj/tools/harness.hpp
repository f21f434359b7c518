// Copyright (c) 2026 The exgap Authors.
// SPDX-License-Identifier: Apache-2.0

// Command implementations behind the exgap CLI. Each command returns its exit
// code and writes single-line JSON diagnostics to `err`.

#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "exgap/bounds.hpp"
#include "exgap/cost_audit.hpp"
#include "exgap/problems.hpp"
#include "exgap/profile.hpp"
#include "exgap/trace_io.hpp"
#include "exgap/variant_matrix.hpp"
#include "json.hpp"

namespace exgap::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ptree = boost::property_tree::ptree;

enum ExitCode { kOk = 0, kFailure = 1, kMaxIter = 2, kCertFailed = 3, kConfigError = 64 };

inline void diagnostic(std::ostream& err, const std::string& code, const std::string& message) {
  err << json{{"error", code}, {"message", message}}.dump() << '\n';
}

// ---------------------------------------------------------------------------
// Config

struct ProblemCfg {
  std::string family = "basis_pursuit";
  std::uint64_t seed = 1;
  Index m = 24, n = 64, s = 5, groups = 16;
  double sigma = 0.1;
  std::optional<double> lambda;
  std::string box = "tight";
  bool slack = false;
  double correlation = 0.0, noise = 0.0;
  std::string file;
  bool reference = true;
};

struct OutputCfg {
  std::string dir = ".";
  std::string trace = "trace.csv";
  std::string summary = "summary.json";
  bool wall_clock = false;
  bool bounds = true;
};

struct RunConfig {
  ProblemCfg problem;
  SolverConfig solver;
  OutputCfg output;
  ptree raw;
};

namespace detail {

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "yes" || v == "1") return true;
  if (v == "off" || v == "false" || v == "no" || v == "0") return false;
  throw Error("bad-config", key + ": expected on/off, got '" + v + "'");
}

inline double parse_double(const std::string& key, const std::string& v) {
  double out;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw Error("bad-config", key + ": expected a number, got '" + v + "'");
  return out;
}

inline long long parse_int(const std::string& key, const std::string& v) {
  long long out;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw Error("bad-config", key + ": expected an integer, got '" + v + "'");
  return out;
}

inline SmootherKind smoother_from_string(const std::string& s) {
  if (s == "bregman") return SmootherKind::Bregman;
  if (s == "auglag") return SmootherKind::AugLag;
  throw Error("bad-config", "smoother must be bregman or auglag, got '" + s + "'");
}

template <class E>
E pick(const std::string& key, const std::string& v, std::initializer_list<std::pair<const char*, E>> opts) {
  std::string names;
  for (auto& [n, e] : opts) {
    if (v == n) return e;
    names += (names.empty() ? "" : "|") + std::string(n);
  }
  throw Error("bad-config", key + ": expected " + names + ", got '" + v + "'");
}

}  // namespace detail

/// INI with [problem], [solver] and [output] sections. Unknown sections and
/// keys are errors.
inline RunConfig parse_run_config(std::istream& in) {
  RunConfig rc;
  try {
    boost::property_tree::ini_parser::read_ini(in, rc.raw);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error("bad-config", e.message() + " at line " + std::to_string(e.line()));
  }
  using namespace detail;
  for (auto& [section, body] : rc.raw) {
    for (auto& [key, node] : body) {
      const std::string v = node.get_value<std::string>();
      const std::string k = section + "." + key;
      if (section == "problem") {
        auto& p = rc.problem;
        if (key == "family") p.family = v;
        else if (key == "seed") p.seed = std::uint64_t(parse_int(k, v));
        else if (key == "m") p.m = Index(parse_int(k, v));
        else if (key == "n") p.n = Index(parse_int(k, v));
        else if (key == "s") p.s = Index(parse_int(k, v));
        else if (key == "groups") p.groups = Index(parse_int(k, v));
        else if (key == "sigma") p.sigma = parse_double(k, v);
        else if (key == "lambda") p.lambda = parse_double(k, v);
        else if (key == "box") p.box = v;
        else if (key == "slack") p.slack = parse_bool(k, v);
        else if (key == "correlation") p.correlation = parse_double(k, v);
        else if (key == "noise") p.noise = parse_double(k, v);
        else if (key == "file") p.file = v;
        else if (key == "reference") p.reference = parse_bool(k, v);
        else throw Error("bad-config", "unknown key " + k);
      } else if (section == "solver") {
        auto& s = rc.solver;
        if (key == "scheme") s.scheme = scheme_from_string(v);
        else if (key == "smoother") s.smoother = smoother_from_string(v);
        else if (key == "gamma0") s.gamma0 = v == "auto" ? std::nullopt : std::optional<double>(parse_double(k, v));
        else if (key == "c") s.c_policy.c = parse_double(k, v);
        else if (key == "c_policy")
          s.c_policy.kind = pick<CPolicy::Kind>(k, v, {{"const", CPolicy::Kind::Const},
                                                       {"kick", CPolicy::Kind::Kick},
                                                       {"decrease", CPolicy::Kind::DecreaseByDiameter}});
        else if (key == "kick_s") s.c_policy.s = parse_double(k, v);
        else if (key == "kick_mult") s.c_policy.mult = parse_double(k, v);
        else if (key == "kick_cadence") s.c_policy.cadence = int(parse_int(k, v));
        else if (key == "K") s.K_total = int(parse_int(k, v));
        else if (key == "max_iter") s.max_iter = int(parse_int(k, v));
        else if (key == "eps_f") s.eps_f = parse_double(k, v);
        else if (key == "eps_x") s.eps_x = parse_double(k, v);
        else if (key == "stop_on_tolerance") s.stop_on_tolerance = parse_bool(k, v);
        else if (key == "delta0") s.delta0 = parse_double(k, v);
        else if (key == "delta_policy")
          s.delta_policy = pick<DeltaPolicy>(k, v, {{"fixed", DeltaPolicy::Fixed}, {"q_budget", DeltaPolicy::QBudget}});
        else if (key == "inner_max_iter") s.inner_max_iter = int(parse_int(k, v));
        else if (key == "certify") s.certify = parse_bool(k, v);
        else if (key == "start")
          s.start = pick<StartVariant>(k, v, {{"primal_first", StartVariant::PrimalFirst},
                                              {"dual_first", StartVariant::DualFirst}});
        else if (key == "center_policy")
          s.center_policy = pick<CenterPolicy>(k, v, {{"fixed", CenterPolicy::Fixed},
                                                      {"previous_argmin", CenterPolicy::PreviousArgmin}});
        else throw Error("bad-config", "unknown key " + k);
      } else if (section == "output") {
        auto& o = rc.output;
        if (key == "dir") o.dir = v;
        else if (key == "trace") o.trace = v;
        else if (key == "summary") o.summary = v;
        else if (key == "wall_clock") o.wall_clock = parse_bool(k, v);
        else if (key == "bounds") o.bounds = parse_bool(k, v);
        else throw Error("bad-config", "unknown key " + k);
      } else {
        throw Error("bad-config", "unknown section [" + section + "]");
      }
    }
  }
  return rc;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("bad-config", "cannot open " + path);
  return parse_run_config(in);
}

// ---------------------------------------------------------------------------
// Instance files

namespace detail {

inline json vec_json(const Vec& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(std::isfinite(v[i]) ? json(v[i]) : json(nullptr));
  return a;
}

inline Vec json_vec(const json& a, double missing = kNaN) {
  Vec v(Index(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[Index(i)] = a[i].is_null() ? missing : a[i].get<double>();
  return v;
}

inline FuncKind func_kind_from_string(const std::string& s) {
  for (FuncKind k : {FuncKind::Zero, FuncKind::L1, FuncKind::GroupL2, FuncKind::SquaredL2, FuncKind::L2Norm,
                     FuncKind::HingeSum, FuncKind::IndicatorZero})
    if (s == to_string(k)) return k;
  throw Error("bad-instance", "unknown function kind '" + s + "'");
}

}  // namespace detail

inline json problem_to_json(const ConstrainedProblem& p) {
  using detail::vec_json;
  json j;
  j["schema"] = "instance/1";
  j["sense"] = p.sense() == ConstraintSense::Equality ? "equality" : "inequality";
  j["b"] = vec_json(p.b());
  json blocks = json::array();
  for (const auto& blk : p.blocks()) {
    json f{{"kind", to_string(blk.f.kind)},
           {"weights", vec_json(blk.f.weights)},
           {"group_of", blk.f.group_of},
           {"scale", blk.f.scale},
           {"labels", vec_json(blk.f.labels)},
           {"quad_sigma", blk.f.quad_sigma},
           {"quad_center", vec_json(blk.f.quad_center)},
           {"quad_const", blk.f.quad_const},
           {"sigma_f", blk.f.sigma_f}};
    json set{{"kind", blk.set.kind == SetKind::All ? "all" : blk.set.kind == SetKind::Box ? "box" : "nonneg"}};
    if (blk.set.kind == SetKind::Box) {
      set["lo"] = vec_json(blk.set.lo);
      set["hi"] = vec_json(blk.set.hi);
    }
    Mat a = blk.A.to_dense();
    json rows = json::array();
    for (Index i = 0; i < a.rows(); ++i) rows.push_back(vec_json(a.row(i).transpose()));
    blocks.push_back({{"f", f}, {"set", set}, {"A", rows}});
  }
  j["blocks"] = blocks;
  j["meta"] = {{"family", p.meta.family}, {"seed", p.meta.seed}, {"s", p.meta.s}, {"noise", p.meta.noise},
               {"notes", p.meta.notes}};
  if (p.meta.planted.size()) j["meta"]["planted"] = vec_json(p.meta.planted);
  if (p.reference)
    j["reference"] = {{"x", vec_json(p.reference->x)},
                      {"y", vec_json(p.reference->y)},
                      {"f_star", p.reference->f_star},
                      {"provenance", p.reference->provenance}};
  return j;
}

inline ConstrainedProblem problem_from_json(const json& j) {
  using detail::json_vec;
  try {
    if (j.at("schema") != "instance/1") throw Error("bad-instance", "unsupported instance schema");
    std::vector<Block> blocks;
    for (const auto& jb : j.at("blocks")) {
      const json& jf = jb.at("f");
      FunctionSpec f;
      f.kind = detail::func_kind_from_string(jf.at("kind"));
      f.weights = json_vec(jf.at("weights"));
      f.group_of = jf.at("group_of").get<std::vector<int>>();
      f.scale = jf.at("scale");
      f.labels = json_vec(jf.at("labels"));
      f.quad_sigma = jf.at("quad_sigma");
      f.quad_center = json_vec(jf.at("quad_center"));
      f.quad_const = jf.at("quad_const");
      f.sigma_f = jf.at("sigma_f");
      const json& js = jb.at("set");
      FeasibleSet set;
      std::string sk = js.at("kind");
      if (sk == "box") set = FeasibleSet::box(json_vec(js.at("lo"), -kInf), json_vec(js.at("hi"), kInf));
      else if (sk == "nonneg") set = FeasibleSet::nonneg();
      else if (sk != "all") throw Error("bad-instance", "unknown set kind '" + sk + "'");
      const json& ja = jb.at("A");
      Index rows = Index(ja.size()), cols = rows ? Index(ja[0].size()) : 0;
      Mat a(rows, cols);
      for (Index i = 0; i < rows; ++i) {
        if (Index(ja[i].size()) != cols) throw Error("bad-instance", "ragged matrix");
        for (Index c = 0; c < cols; ++c) a(i, c) = ja[i][c].get<double>();
      }
      blocks.push_back(Block{f, set, LinearMap::dense(a)});
    }
    ConstraintSense sense = j.at("sense") == "inequality" ? ConstraintSense::Inequality : ConstraintSense::Equality;
    ConstrainedProblem p(std::move(blocks), json_vec(j.at("b")), sense);
    if (j.contains("meta")) {
      const json& m = j["meta"];
      p.meta.family = m.value("family", "");
      p.meta.seed = m.value("seed", std::uint64_t(0));
      p.meta.s = m.value("s", Index(0));
      p.meta.noise = m.value("noise", 0.0);
      p.meta.notes = m.value("notes", "");
      if (m.contains("planted")) p.meta.planted = json_vec(m["planted"]);
    }
    if (j.contains("reference")) {
      const json& r = j["reference"];
      p.reference = Reference{json_vec(r.at("x")), json_vec(r.at("y")), r.at("f_star"), r.value("provenance", "")};
    }
    return p;
  } catch (const json::exception& e) {
    throw Error("bad-instance", e.what());
  }
}

// ---------------------------------------------------------------------------
// Problems and bounds

inline std::optional<Reference> reference_for(const ConstrainedProblem& p, const std::string& family) {
  if (family == "basis_pursuit") return p.n() <= 12 ? reference_solve_lp(p) : reference_l1_self_solve(p, 1e-10);
  if (family == "elastic_net") return reference_elastic_net(p);
  if (p.sense() == ConstraintSense::Equality) return reference_self_solve(p);
  return std::nullopt;
}

inline ConstrainedProblem build_problem(const ProblemCfg& c) {
  DataOptions opt{c.correlation, c.noise};
  ConstrainedProblem p;
  if (c.family == "file") {
    std::ifstream in(c.file);
    if (!in) throw Error("bad-config", "cannot open instance file " + c.file);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw Error("bad-instance", e.what());
    }
    p = problem_from_json(j);
    if (!c.reference) p.reference.reset();
    else if (!p.reference) p.reference = reference_for(p, p.meta.family);
    return c.slack ? slack_reformulation(p) : p;
  }
  GroupBox box = detail::pick<GroupBox>("problem.box", c.box, {{"tight", GroupBox::Tight}, {"none", GroupBox::None}});
  if (c.family == "basis_pursuit") p = make_basis_pursuit(c.seed, c.m, c.n, c.s, opt);
  else if (c.family == "group_bp") p = make_group_bp(c.seed, c.m, c.n, c.groups, box, opt);
  else if (c.family == "elastic_net") p = make_elastic_net(c.seed, c.m, c.n, c.s, c.sigma, opt);
  else if (c.family == "sqrt_lasso") p = make_sqrt_lasso(c.seed, c.m, c.n, c.s, c.lambda, opt);
  else throw Error("bad-config", "unknown problem family '" + c.family + "'");
  if (c.reference) p.reference = reference_for(p, c.family);
  return c.slack ? slack_reformulation(p) : p;
}

struct BoundChoice {
  std::optional<BoundSet> set;
  std::string reason;  // why there is no set
};

/// The bound set matching the scheme, with constants from the reference and
/// the diameter estimates.
inline BoundChoice default_bounds(const ConstrainedProblem& p, const SolverConfig& cfg, const Trace& tr) {
  if (!p.reference) return {std::nullopt, "no reference solution"};
  if (!tr.certifiable) return {std::nullopt, tr.disabled_reason};
  BoundConstants c;
  c.D_Y = p.reference->y.norm();
  c.L_bar = tr.L_bar;
  const Scheme s = cfg.scheme;
  try {
    if ((s == Scheme::TwoP1D || s == Scheme::OneP2D) && cfg.smoother == SmootherKind::AugLag)
      return {bounds_thm41('a', c), ""};
    if (s == Scheme::TwoP1D || s == Scheme::OneP2D || s == Scheme::OneP2D_LG) {
      auto d = estimate_diameters(p, bregman_smoother(p, cfg.xc));
      if (!std::isfinite(d.D_X_S)) return {std::nullopt, "unbounded prox-diameter"};
      c.D_X = d.D_X_S;
      if (s == Scheme::OneP2D_LG) return {bounds_cor52(c), ""};
      if (s == Scheme::TwoP1D) return {bounds_thm41('b', c), ""};
      c.K = *cfg.K_total;
      return {bounds_thm41('c', c), ""};
    }
    if (is_sc(s)) return {bounds_cor51(std::sqrt(p.norm_sq()), p.sigma_f(), *c.D_Y), ""};
    if (s == Scheme::I1P2D) {
      c.q0 = tr.q0;
      c.delta0 = cfg.delta0;
      return {bounds_thm53(c), ""};
    }
    if (s == Scheme::ADMM_New) {
      SolverContext ctx = make_context(p, cfg);
      return {bounds_cor61(cor61_constants(p, ctx.sm.xc, *c.D_Y)), ""};
    }
  } catch (const Error& e) {
    return {std::nullopt, e.what()};
  }
  return {std::nullopt, "no certificate for this variant"};
}

inline json report_json(const CertificateReport& r) {
  json j{{"variant", r.variant}, {"disabled", r.disabled}, {"checked", r.checked}};
  if (r.disabled) j["reason"] = r.reason;
  else {
    j["passed"] = r.passed();
    j["worst_margin"] = std::isfinite(r.worst_margin) ? json(r.worst_margin) : json(nullptr);
    if (r.first_failure >= 0) j["first_failure"] = r.first_failure;
  }
  return j;
}

inline json constants_json(const BoundSet& bs) {
  json j{{"variant", to_string(bs.variant())}};
  const auto& c = bs.constants();
  auto put = [&](const char* n, const std::optional<double>& v) {
    if (v) j[n] = *v;
  };
  put("L_bar", c.L_bar);
  put("D_X_S", c.D_X);
  put("D_Y_star", c.D_Y);
  put("sigma_f", c.sigma_f);
  put("A_norm", c.A_norm);
  put("K", c.K);
  put("q0", c.q0);
  put("delta0", c.delta0);
  put("D1", c.D1);
  put("DA", c.DA);
  return j;
}

/// Writes `text` to `path` through a temporary file and a rename.
inline void write_atomic(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("io", "cannot write " + tmp.string());
    out << text;
    if (!out) throw Error("io", "write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes the bounds INI that `certify` reads back.
inline std::string bounds_ini(const BoundSet& bs, double f_star) {
  std::string out = "[bounds]\nvariant = " + std::string(to_string(bs.variant())) + "\n";
  auto put = [&](const char* n, std::optional<double> v) {
    if (!v) return;
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, *v);
    out += std::string(n) + " = " + std::string(buf, r.ptr) + "\n";
  };
  const auto& c = bs.constants();
  put("f_star", f_star);
  put("L_bar", c.L_bar);
  put("D_X_S", c.D_X);
  put("D_Y_star", c.D_Y);
  put("sigma_f", c.sigma_f);
  put("A_norm", c.A_norm);
  put("K", c.K);
  put("q0", c.q0);
  put("delta0", c.delta0);
  put("D1", c.D1);
  put("DA", c.DA);
  return out;
}

// ---------------------------------------------------------------------------
// Commands

struct RunOverrides {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<bool> certify;
  std::optional<int> max_iter;
  std::string matrix_path = EXGAP_VARIANT_MATRIX;
};

inline void apply_overrides(RunConfig& rc, const RunOverrides& o) {
  if (o.out_dir) rc.output.dir = *o.out_dir;
  if (o.seed) rc.problem.seed = *o.seed;
  if (o.certify) rc.solver.certify = *o.certify;
  if (o.max_iter) rc.solver.max_iter = *o.max_iter;
}

inline json config_echo(const RunConfig& rc) {
  json j = json::object();
  for (auto& [section, body] : rc.raw)
    for (auto& [key, node] : body) j[section][key] = node.get_value<std::string>();
  return j;
}

inline int exit_for(Status s) {
  switch (s) {
    case Status::Converged: return kOk;
    case Status::CertificateFailed: return kCertFailed;
    default: return kMaxIter;
  }
}

inline int cmd_run(RunConfig rc, const RunOverrides& o, std::ostream& err) {
  apply_overrides(rc, o);
  ConstrainedProblem p;
  try {
    check_variant(load_variant_matrix(o.matrix_path), rc.solver.scheme, rc.solver.smoother);
    p = build_problem(rc.problem);
    validate_config(p, rc.solver);
  } catch (const Error& e) {
    diagnostic(err, e.code(), e.what());
    return kConfigError;
  }
  try {
    Trace tr = solve(p, rc.solver);
    BoundChoice bc = rc.output.bounds ? default_bounds(p, rc.solver, tr) : BoundChoice{std::nullopt, "disabled"};
    CertificateReport rep = disabled_report(bc.reason);
    if (bc.set) {
      attach_bounds(tr, *bc.set);
      rep = certify(tr, *bc.set, p.reference->f_star);
    }
    fs::path dir(rc.output.dir);
    fs::create_directories(dir);
    std::ostringstream csv;
    write_trace_csv(csv, tr.records, rc.output.wall_clock);
    write_atomic(dir / rc.output.trace, csv.str());

    const auto& last = tr.records.back();
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    json summary{{"schema", "trace-summary/1"},
                 {"status", to_string(tr.status)},
                 {"iterations", last.k},
                 {"final",
                  {{"f_val", num(last.f_val)},
                   {"obj_residual", num(last.obj_residual)},
                   {"feas_abs", num(last.feas_abs)},
                   {"feas_rel", num(last.feas_rel)}}},
                 {"certificate", report_json(rep)},
                 {"certifiable", tr.certifiable},
                 {"config", config_echo(rc)},
                 {"seed", rc.problem.seed},
                 {"problem", {{"family", p.meta.family}, {"m", p.m()}, {"n", p.n()}, {"blocks", p.num_blocks()}}},
                 {"schedule", {{"gamma0", num(tr.gamma0)}, {"beta0", num(tr.beta0)}, {"L_bar", num(tr.L_bar)}}},
                 {"events", tr.events}};
    if (!tr.certifiable) summary["disabled_reason"] = tr.disabled_reason;
    if (!tr.schedule_note.empty()) summary["schedule_note"] = tr.schedule_note;
    if (p.reference) summary["f_star"] = p.reference->f_star;
    if (bc.set) summary["bounds"] = constants_json(*bc.set);
    if (!tr.step_ops.empty()) {
      CostRow row = cost_audit(tr);
      summary["cost"] = {{"prox", row.prox}, {"A", row.A}, {"At", row.At}, {"uniform", row.uniform}};
    }
    write_atomic(dir / rc.output.summary, summary.dump(2) + "\n");
    if (bc.set) write_atomic(dir / "bounds.ini", bounds_ini(*bc.set, p.reference->f_star));
    if (rep.first_failure >= 0) return kCertFailed;
    return exit_for(tr.status);
  } catch (const Error& e) {
    diagnostic(err, e.code(), e.what());
    return kFailure;
  }
}

inline int cmd_gen(RunConfig rc, const RunOverrides& o, const std::string& out_path, std::ostream& err) {
  apply_overrides(rc, o);
  try {
    ConstrainedProblem p = build_problem(rc.problem);
    fs::path path(out_path);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_atomic(path, problem_to_json(p).dump() + "\n");
    return kOk;
  } catch (const Error& e) {
    diagnostic(err, e.code(), e.what());
    return e.code() == "io" ? kFailure : kConfigError;
  }
}

/// Metric CSV: header "problem,<solver>,..." then one row per problem.
/// Empty cells, "fail", "inf" and "nan" are failures.
inline void read_metrics(std::istream& in, std::vector<std::string>& names, std::vector<std::vector<double>>& T) {
  std::string line;
  if (!std::getline(in, line)) return;
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  header.erase(header.begin());
  if (names.empty()) names = header;
  else if (names != header) throw Error("shape", "metric files list different solvers");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.push_back("");
    if (cells.size() != names.size() + 1) throw Error("shape", "row '" + cells[0] + "' has the wrong number of cells");
    std::vector<double> row;
    for (std::size_t i = 1; i < cells.size(); ++i) {
      const std::string& c = cells[i];
      if (c.empty() || c == "fail" || c == "inf" || c == "nan") row.push_back(kInf);
      else row.push_back(detail::parse_double("metric", c));
    }
    T.push_back(row);
  }
}

inline int cmd_profile(const std::vector<std::string>& files, const std::vector<double>& tau, std::ostream& out,
                       std::ostream& err) {
  try {
    std::vector<std::string> names;
    std::vector<std::vector<double>> T;
    for (const auto& f : files) {
      std::ifstream in(f);
      if (!in) throw Error("io", "cannot open " + f);
      read_metrics(in, names, T);
    }
    if (T.empty() || names.empty()) throw Error("no-data", "no problems or no solvers in the metric files");
    out << profile_csv(performance_profile(T, tau), names);
    return kOk;
  } catch (const Error& e) {
    diagnostic(err, e.code(), e.what());
    return e.code() == "io" ? kFailure : kConfigError;
  }
}

/// Bounds INI: [bounds] variant = ..., constants by name, optional f_star
/// and tol.
inline int cmd_certify(const std::string& trace_path, const std::string& bounds_path,
                       const std::optional<std::string>& summary_path, const std::optional<std::string>& out_path,
                       std::ostream& out, std::ostream& err) {
  try {
    std::ifstream tin(trace_path);
    if (!tin) throw Error("io", "cannot open " + trace_path);
    std::vector<IterationRecord> records = read_trace_csv(tin);
    ptree bt;
    try {
      boost::property_tree::ini_parser::read_ini(bounds_path, bt);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw Error("bad-config", e.message());
    }
    json rep_j;
    auto emit = [&](const json& j) {
      if (out_path) write_atomic(*out_path, j.dump(2) + "\n");
      else out << j.dump() << '\n';
    };
    std::string summary_file;
    if (summary_path) summary_file = *summary_path;
    else if (auto s = fs::path(trace_path).parent_path() / "summary.json"; fs::exists(s)) summary_file = s.string();
    if (!summary_file.empty()) {
      json sj = json::parse(read_file(summary_file));
      if (!sj.value("certifiable", true)) {
        CertificateReport r = disabled_report(sj.value("disabled_reason", "not certifiable"));
        rep_j = report_json(r);
        rep_j["warning"] = "run outside the certificate hypotheses: " + r.reason;
        emit(rep_j);
        return kOk;
      }
    }
    const ptree& b = bt.get_child("bounds", ptree());
    BoundConstants c;
    auto get = [&](const char* name) -> std::optional<double> {
      auto v = b.get_optional<std::string>(name);
      if (!v) return std::nullopt;
      return detail::parse_double(std::string("bounds.") + name, *v);
    };
    c.L_bar = get("L_bar");
    c.D_X = get("D_X_S");
    c.D_Y = get("D_Y_star");
    c.sigma_f = get("sigma_f");
    c.A_norm = get("A_norm");
    c.K = get("K");
    c.q0 = get("q0");
    c.delta0 = get("delta0");
    c.D1 = get("D1");
    c.DA = get("DA");
    double tol = get("tol").value_or(1e-6);
    BoundVariant v = bound_variant_from_string(b.get<std::string>("variant", ""));
    std::optional<double> f_star = get("f_star");
    if (!f_star && !records.empty() && std::isfinite(records[0].obj_residual))
      f_star = records[0].f_val - records[0].obj_residual;
    std::optional<BoundSet> bs;
    std::string missing;
    try {
      bs.emplace(v, c);
    } catch (const Error& e) {
      if (e.code() != "missing-constant") throw;
      missing = e.what();
    }
    if (!f_star) missing += std::string(missing.empty() ? "" : "; ") + "f_star";
    if (!bs || !f_star) {
      rep_j = report_json(disabled_report("missing constants"));
      rep_j["variant"] = to_string(v);
      rep_j["warning"] = missing;
      emit(rep_j);
      return kOk;
    }
    CertificateReport rep = certify(records, *bs, *f_star, tol);
    rep_j = report_json(rep);
    rep_j["note"] = "iterate-distance bounds are not checked offline";
    emit(rep_j);
    return rep.passed() ? kOk : kCertFailed;
  } catch (const Error& e) {
    diagnostic(err, e.code(), e.what());
    return e.code() == "io" ? kFailure : kConfigError;
  } catch (const json::exception& e) {
    diagnostic(err, "bad-summary", e.what());
    return kConfigError;
  }
}

}  // namespace exgap::cli
