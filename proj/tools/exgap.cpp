// Copyright (c) 2026 The exgap Authors.
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "harness.hpp"

using namespace exgap;
using namespace exgap::cli;

namespace {

std::vector<double> tau_grid(const std::string& spec) {
  // "lo:step:hi"
  double lo = 0, step = 0.25, hi = 4;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &lo, &step, &hi) != 3 || !(step > 0) || hi < lo)
    throw Error("bad-config", "tau grid must be lo:step:hi with step > 0");
  std::vector<double> out;
  for (int i = 0; lo + i * step <= hi + 1e-12; ++i) out.push_back(lo + i * step);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exgap: primal-dual first-order solvers with rate certificates"};
  app.require_subcommand(1);

  RunOverrides ov;
  std::string config, certify_flag;
  std::uint64_t seed = 0;
  int max_iter = 0;
  std::string out_dir;

  auto* run = app.add_subcommand("run", "solve one configured problem and write trace.csv and summary.json");
  run->add_option("--config", config, "run config (INI)")->required();
  run->add_option("--out", out_dir, "output directory (overrides [output] dir)");
  run->add_option("--seed", seed, "problem seed (overrides [problem] seed)");
  run->add_option("--certify", certify_flag, "certification mode on|off")->check(CLI::IsMember({"on", "off"}));
  run->add_option("--max-iter", max_iter, "iteration cap (overrides [solver] max_iter)");
  run->add_option("--matrix", ov.matrix_path, "variant matrix file");

  std::string gen_out = "instance.json";
  auto* gen = app.add_subcommand("gen", "write a problem instance file");
  gen->add_option("--config", config, "run config (INI); only [problem] is used")->required();
  gen->add_option("--out", gen_out, "instance path");
  gen->add_option("--seed", seed, "problem seed");

  std::vector<std::string> metrics;
  std::string tau = "0:0.25:4";
  auto* prof = app.add_subcommand("profile", "performance profile from metric tables");
  prof->add_option("metrics", metrics, "metric CSV files (problem,<solver>...)")->required();
  prof->add_option("--tau", tau, "tau grid lo:step:hi");

  std::string trace_path, bounds_path, summary_path, report_path;
  auto* cert = app.add_subcommand("certify", "re-check a stored trace against a bound set");
  cert->add_option("--trace", trace_path, "trace CSV")->required();
  cert->add_option("--bounds", bounds_path, "bounds INI")->required();
  cert->add_option("--summary", summary_path, "run summary (default: summary.json next to the trace)");
  cert->add_option("--out", report_path, "report path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    diagnostic(std::cerr, "usage", e.what());
    return kConfigError;
  }

  if (!out_dir.empty()) ov.out_dir = out_dir;
  if (seed) ov.seed = seed;
  if (!certify_flag.empty()) ov.certify = certify_flag == "on";
  if (run->count("--max-iter")) ov.max_iter = max_iter;

  if (*run || *gen) {
    RunConfig rc;
    try {
      rc = load_run_config(config);
    } catch (const Error& e) {
      diagnostic(std::cerr, e.code(), e.what());
      return kConfigError;
    }
    if (*run) return cmd_run(rc, ov, std::cerr);
    return cmd_gen(rc, ov, gen_out, std::cerr);
  }
  if (*prof) {
    std::vector<double> grid;
    try {
      grid = tau_grid(tau);
    } catch (const Error& e) {
      diagnostic(std::cerr, e.code(), e.what());
      return kConfigError;
    }
    return cmd_profile(metrics, grid, std::cout, std::cerr);
  }
  auto opt = [](const std::string& s) { return s.empty() ? std::nullopt : std::optional<std::string>(s); };
  return cmd_certify(trace_path, bounds_path, opt(summary_path), opt(report_path), std::cout, std::cerr);
}
