/*
 * Copyright 2026 The cranuad Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "cranuad/checks.hpp"
#include "cranuad/harness.hpp"
#include "cranuad/oracle.hpp"
#include "cranuad/rng.hpp"

namespace {

using namespace cranuad;

struct CommonArgs {
  std::string config_path;
  std::uint64_t seed = 0;
  int trials = 0;
  int workers = 0;
  std::string out_path;
  bool seed_set = false, trials_set = false, workers_set = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required) {
  auto* opt = cmd->add_option("--config", args.config_path,
                              "experiment config file (key = value lines)");
  if (config_required) opt->required();
  cmd->add_option("--seed", args.seed, "master seed override")
      ->each([&](const std::string&) { args.seed_set = true; });
  cmd->add_option("--trials", args.trials, "trial count override")
      ->each([&](const std::string&) { args.trials_set = true; });
  cmd->add_option("--workers", args.workers, "worker thread count override")
      ->each([&](const std::string&) { args.workers_set = true; });
  cmd->add_option("--out", args.out_path, "output path override");
}

ExperimentConfig resolve_config(const CommonArgs& args) {
  ExperimentConfig cfg = load_config(args.config_path);
  if (args.seed_set) cfg.seed = args.seed;
  if (args.trials_set) cfg.trials = args.trials;
  if (args.workers_set) cfg.workers = args.workers;
  if (!args.out_path.empty()) cfg.out_path = args.out_path;
  return cfg;
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot write output file " + path);
  return file;
}

int cmd_roc(const CommonArgs& args) {
  const ExperimentConfig cfg = resolve_config(args);
  const std::vector<RocCurve> curves = run_experiment(cfg);
  std::ofstream file;
  std::ostream& os = open_out(file, cfg.out_path);
  emit_csv(curves, os);
  int failures = 0, total = 0;
  for (const auto& c : curves) {
    failures += c.failures;
    total += c.trials_total;
  }
  std::cerr << "roc: " << curves.size() << " cells, " << total
            << " cell-trials, " << failures << " divergences\n";
  return 0;
}

int cmd_simulate(const CommonArgs& args, const std::string& scheme_str, int b,
                 int r, const std::string& scenario_path) {
  ExperimentConfig cfg = resolve_config(args);
  if (!args.trials_set) cfg.trials = 1;
  const Scheme scheme = scheme_str == "dtf" ? Scheme::DtF : Scheme::QF;
  const int use_r = r > 0 ? r : cfg.r_grid.front();
  const int use_b = b > 0 ? b : cfg.b_grid.front();
  const SystemConfig sys = cfg.system_for(use_r);

  QuantizerSpec llr_quant;
  if (scheme == Scheme::DtF) {
    cfg.schemes = {Scheme::DtF};
    llr_quant = design_llr_quantizer(dtf_llr_levels(cfg.M, use_b, cfg.N),
                                     collect_dtf_calibration(cfg, use_r));
  }

  std::ofstream file;
  std::ostream& os = open_out(file, cfg.out_path);
  os << "trial,scheme,R,b,ue,lambda,llr\n";
  for (int t = 0; t < cfg.trials; ++t) {
    auto rng = make_rng(cfg.seed, SeedStream::Scenario,
                        static_cast<std::uint64_t>(t));
    const Scenario sc = draw_scenario(sys, rng);
    Vec llr;
    if (scheme == Scheme::QF) {
      llr = qf_detect(sc, sys, use_b, cfg.gamp).llr;
    } else {
      llr = dtf_fuse(dtf_local_all(sc, sys, cfg.gamp), llr_quant);
    }
    for (int n = 0; n < cfg.N; ++n) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%d,%s,%d,%d,%d,%d,%.10g\n", t,
                    scheme_name(scheme), use_r, use_b, n, sc.lambda[n],
                    llr[n]);
      os << buf;
    }
    if (!scenario_path.empty() && t + 1 == cfg.trials) {
      std::ofstream dump(scenario_path);
      if (!dump) {
        throw std::runtime_error("cannot write scenario file " +
                                 scenario_path);
      }
      dump_scenario(sc, dump);
    }
  }
  return 0;
}

int cmd_calibrate(const CommonArgs& args) {
  const ExperimentConfig cfg = resolve_config(args);
  std::ofstream file;
  std::ostream& os = open_out(file, cfg.out_path);
  os << "R,b,levels,lo,step\n";
  for (int r : cfg.r_grid) {
    const std::vector<double> samples = collect_dtf_calibration(cfg, r);
    for (int b : cfg.b_grid) {
      const QuantizerSpec spec =
          design_llr_quantizer(dtf_llr_levels(cfg.M, b, cfg.N), samples);
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%d,%d,%d,%.10g,%.10g\n", r, b,
                    spec.levels, spec.lo, spec.step);
      os << buf;
    }
  }
  return 0;
}

int cmd_oracle_check(int points, int instances, std::uint64_t seed) {
  const auto results = run_oracle_checks(points, instances, seed);
  int failed = 0;
  for (const auto& r : results) {
    std::cout << (r.pass ? "PASS  " : "FAIL  ") << r.name << ": " << r.detail
              << '\n';
    if (!r.pass) ++failed;
  }
  std::cout << (failed == 0 ? "all oracle checks passed\n"
                            : "oracle checks FAILED\n");
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"C-RAN user activity detection simulator"};
  app.require_subcommand(1);

  CommonArgs roc_args;
  auto* roc = app.add_subcommand(
      "roc", "run the Monte Carlo experiment and emit the ROC table");
  add_common(roc, roc_args, true);

  CommonArgs sim_args;
  std::string sim_scheme = "qf";
  int sim_b = 0, sim_r = 0;
  std::string sim_scenario;
  auto* sim = app.add_subcommand(
      "simulate", "run single trials and dump per-UE activity LLRs");
  add_common(sim, sim_args, true);
  sim->add_option("--scheme", sim_scheme, "qf or dtf")
      ->check(CLI::IsMember({"qf", "dtf"}));
  sim->add_option("--b", sim_b, "fronthaul bits per complex sample");
  sim->add_option("--r", sim_r, "number of radio heads");
  sim->add_option("--dump-scenario", sim_scenario,
                  "write the last scenario as a text table");

  CommonArgs cal_args;
  auto* cal = app.add_subcommand(
      "calibrate", "calibrate the DtF LLR quantizers and print their specs");
  add_common(cal, cal_args, true);

  int oc_points = 2000, oc_instances = 40;
  std::uint64_t oc_seed = 7;
  auto* oc = app.add_subcommand(
      "oracle-check", "compare the engine against its brute-force references");
  oc->add_option("--points", oc_points, "grid points per scalar check");
  oc->add_option("--instances", oc_instances, "enumeration instances");
  oc->add_option("--seed", oc_seed, "seed for the randomized grids");

  CLI11_PARSE(app, argc, argv);

  try {
    if (roc->parsed()) return cmd_roc(roc_args);
    if (sim->parsed()) {
      return cmd_simulate(sim_args, sim_scheme, sim_b, sim_r, sim_scenario);
    }
    if (cal->parsed()) return cmd_calibrate(cal_args);
    if (oc->parsed()) return cmd_oracle_check(oc_points, oc_instances, oc_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
