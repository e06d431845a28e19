// Command-line driver: orbit search, index-theorem verification, CZ paths,
// spectral flow, and figure data emission. JSON config in, JSON/CSV out.
// Exit codes: 0 pass, 1 verification failure, 2 config error, 3 numerics error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>

#include <CLI11.hpp>

#include "geodex/errors.hpp"
#include "geodex/framing.hpp"
#include "geodex/harness.hpp"
#include "geodex/jacobi.hpp"
#include "geodex/maslov.hpp"
#include "geodex/specflow.hpp"
#include "geodex/symplectic.hpp"

namespace {

using namespace geodex;

struct CommonArgs {
  std::string config_path;
  int time_steps = 0;
  int morse_grid = 0;
  int lambda_steps = 0;
};

harness::RunConfig load_config(const CommonArgs& args) {
  harness::RunConfig config = harness::RunConfig::from_json_file(args.config_path);
  if (args.time_steps > 0) config.solver.time_steps = args.time_steps;
  if (args.morse_grid > 0) config.solver.morse_grid = args.morse_grid;
  if (args.lambda_steps > 0) config.solver.lambda_steps = args.lambda_steps;
  return config;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("-c,--config", args.config_path, "JSON run configuration")->required();
  cmd->add_option("--time-steps", args.time_steps, "override solver.time_steps");
  cmd->add_option("--morse-grid", args.morse_grid, "override solver.morse_grid");
  cmd->add_option("--lambda-steps", args.lambda_steps, "override solver.lambda_steps");
}

int run_find_orbits(const harness::RunConfig& config) {
  const auto found = harness::find_orbits(config);
  std::printf("%-24s %6s %14s %14s %8s\n", "id", "seed", "action", "residual", "gap");
  for (const auto& f : found) {
    std::printf("%-24s %6d %14.8f %14.3e %8.2e\n", f.id.c_str(), f.seed_index, f.orbit.action,
                f.orbit.residual, f.orbit.monodromy.nondegeneracy_gap);
  }
  std::printf("%zu orbit(s) found from %zu seed(s)\n", found.size(), config.seeds.size());
  return 0;
}

int run_verify(const harness::RunConfig& config) {
  const harness::VerifyResult result = harness::verify_index_theorem(config);
  for (const auto& r : result.reports) {
    std::printf("%-8s %-24s sigma=%d Ind=%d Null=%d mu_CZ=%s residual=%d %s\n", r.status.c_str(),
                r.id.c_str(), r.sigma, r.ind, r.null_dim, r.mu_cz.str().c_str(), r.residual,
                r.reason.c_str());
  }
  std::printf("summary: %d passed, %d failed, %d skipped\n", result.summary.passed,
              result.summary.failed, result.summary.skipped);
  if (!config.report_path.empty()) {
    std::ofstream out(config.report_path);
    if (!out) throw ConfigError("cannot open report path: " + config.report_path);
    out << harness::report_to_json(result);
    std::printf("report written to %s\n", config.report_path.c_str());
  }
  return result.summary.failed == 0 ? 0 : 1;
}

int run_cz_path(const harness::RunConfig& config, const std::string& csv_path) {
  const auto found = harness::find_orbits(config);
  if (found.empty()) {
    std::printf("no nondegenerate orbits found\n");
    return 1;
  }
  for (const auto& f : found) {
    const framing::ClosedFrame frame =
        framing::build_closed_frame(config.model, config.potential, f.orbit);
    const framing::SymmetricFamily su = framing::assemble_SU(frame);
    sp::PathOptions popts;
    popts.steps = config.solver.time_steps;
    const sp::SymplecticPath psi = sp::fundamental_solution(su.value, popts);
    const int mu = maslov::cz_index(psi);
    std::printf("%-24s sigma=%d mu_CZ=%d defect=%.2e\n", f.id.c_str(), frame.sigma, mu,
                psi.defect());
    if (!csv_path.empty() && config.model.dim() == 1) {
      std::ofstream out(csv_path);
      if (!out) throw ConfigError("cannot open csv path: " + csv_path);
      sp::write_path_csv(out, psi);
      std::printf("path CSV written to %s\n", csv_path.c_str());
      break;  // one CSV per invocation
    }
  }
  return 0;
}

int run_spectral_flow(const harness::RunConfig& config, double muhat_arg) {
  const auto found = harness::find_orbits(config);
  if (found.empty()) {
    std::printf("no nondegenerate orbits found\n");
    return 1;
  }
  int failures = 0;
  for (const auto& f : found) {
    const framing::ClosedFrame frame =
        framing::build_closed_frame(config.model, config.potential, f.orbit);
    const jacobi::SpectralCount count = jacobi::morse_index(frame);
    const Real lambda_min = jacobi::smallest_eigenvalue(frame, count.grid);
    Real muhat = muhat_arg;
    if (muhat == 0.0)
      muhat = std::min(-std::numbers::pi * std::numbers::pi, 1.5 * lambda_min - 1.0);
    specflow::FlowOptions fopts;
    fopts.lambda_steps = config.solver.lambda_steps;
    fopts.grid = config.solver.morse_grid;
    specflow::ProofFamilies fams;
    const specflow::SpectralFlowResult flow_a =
        specflow::proof_family_flow(frame, muhat, fopts, &fams);
    const specflow::SpectralFlowResult flow_b = specflow::spectral_flow(fams.family_b, fopts);
    const int cz0 = maslov::cz_index(
        specflow::family_endpoint_path(fams.family_a, 0.0, config.solver.time_steps));
    const int cz1 = maslov::cz_index(
        specflow::family_endpoint_path(fams.family_a, 1.0, config.solver.time_steps));
    const bool ok = (flow_a.flow == count.ind) && (flow_b.flow == 0) &&
                    (flow_a.flow == cz1 - cz0);
    if (!ok) ++failures;
    std::printf("%-24s Ind=%d flowA=%d flowB=%d czA(0)=%d czA(1)=%d muhat=%.4f %s\n",
                f.id.c_str(), count.ind, flow_a.flow, flow_b.flow, cz0, cz1, muhat,
                ok ? "OK" : "MISMATCH");
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geodex: Morse and Conley-Zehnder indices of perturbed closed geodesics"};
  app.require_subcommand(1);

  CommonArgs find_args, verify_args, cz_args, flow_args, fig_args;
  std::string cz_csv, fig_which = "gamma1", fig_out = "figure.csv";
  double flow_muhat = 0.0;
  double fig_muhat = -std::numbers::pi * std::numbers::pi;
  int fig_steps = 2048;

  CLI::App* find_cmd = app.add_subcommand("find-orbits", "Newton orbit search from seeds");
  add_common(find_cmd, find_args);

  CLI::App* verify_cmd =
      app.add_subcommand("verify", "verify mu_CZ = -Ind + sigma by two pipelines");
  add_common(verify_cmd, verify_args);

  CLI::App* cz_cmd = app.add_subcommand("cz-path", "Conley-Zehnder index of orbit paths");
  add_common(cz_cmd, cz_args);
  cz_cmd->add_option("--csv", cz_csv, "write solid-torus path CSV (1-dimensional models)");

  CLI::App* flow_cmd =
      app.add_subcommand("spectral-flow", "spectral flow of the deformation families");
  add_common(flow_cmd, flow_args);
  flow_cmd->add_option("--muhat", flow_muhat, "level shift (default: from the spectrum)");

  CLI::App* fig_cmd = app.add_subcommand("emit-figure", "CSV data for Sp(2) path figures");
  fig_cmd->add_option("-c,--config", fig_args.config_path,
                      "JSON run configuration (orbit-path only)");
  fig_cmd->add_option("--which", fig_which, "gamma1 | gamma2 | orbit-path")->required();
  fig_cmd->add_option("--out", fig_out, "output CSV path")->required();
  fig_cmd->add_option("--muhat", fig_muhat, "gamma2 parameter (needs muhat < -pi)");
  fig_cmd->add_option("--steps", fig_steps, "sample count minus one");

  CLI11_PARSE(app, argc, argv);

  try {
    if (find_cmd->parsed()) return run_find_orbits(load_config(find_args));
    if (verify_cmd->parsed()) return run_verify(load_config(verify_args));
    if (cz_cmd->parsed()) return run_cz_path(load_config(cz_args), cz_csv);
    if (flow_cmd->parsed()) return run_spectral_flow(load_config(flow_args), flow_muhat);
    if (fig_cmd->parsed()) {
      harness::RunConfig config;
      if (!fig_args.config_path.empty()) config = harness::RunConfig::from_json_file(fig_args.config_path);
      harness::FigureParams params;
      params.muhat = fig_muhat;
      params.steps = fig_steps;
      harness::FigureKind kind;
      if (fig_which == "gamma1") kind = harness::FigureKind::Gamma1;
      else if (fig_which == "gamma2") kind = harness::FigureKind::Gamma2;
      else if (fig_which == "orbit-path") kind = harness::FigureKind::OrbitPath;
      else throw ConfigError("unknown figure kind: " + fig_which);
      const int rows = harness::emit_figure_data(config, kind, params, fig_out);
      std::printf("%d rows written to %s\n", rows, fig_out.c_str());
      return 0;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "numerics error: %s\n", e.what());
    return 3;
  }
  return 0;
}
