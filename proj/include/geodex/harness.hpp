#pragma once

#include <optional>
#include <string>
#include <vector>

#include "geodex/geometry.hpp"
#include "geodex/orbits.hpp"
#include "geodex/types.hpp"

namespace geodex::harness {

struct SeedSpec {
  VecX x;
  VecX y;
  std::vector<int> deck;  // generator indices, composed left to right
};

struct SolverParams {
  int time_steps = 2048;
  Real newton_tol = 1e-10;
  int newton_max_iterations = 50;
  int morse_grid = 128;
  int max_morse_grid = 2048;
  int lambda_steps = 64;
  Real symplectic_tol = 1e-8;
  Real dedup_distance = 1e-6;
  bool check_grid_doubling = false;
};

struct RunConfig {
  geom::ManifoldModel model = geom::ManifoldModel::flat_torus(2);
  geom::Potential potential = geom::Potential::zero(2);
  std::vector<SeedSpec> seeds;
  SolverParams solver;
  std::string report_path;

  static RunConfig from_json_file(const std::string& path);
  static RunConfig from_json_text(const std::string& text);
};

struct IndexReport {
  std::string id;
  int seed_index = -1;
  std::string status;  // "PASS", "FAIL", "SKIPPED"
  std::string reason;
  Real action = 0.0;
  int sigma = 0;
  int ind = 0;
  int null_dim = 0;
  HalfInteger mu_cz;
  int residual = 0;  // mu_cz + ind - sigma

  struct Diagnostics {
    Real newton_residual = 0.0;
    Real monodromy_defect = 0.0;
    Real psi_defect = 0.0;
    Real null_gap = 0.0;
    Real det_one_minus_psi1 = 0.0;
    int morse_grid = 0;
    int time_steps = 0;
    bool doubling_stable = true;
  } diag;
};

struct VerifySummary {
  int passed = 0;
  int failed = 0;
  int skipped = 0;
};

struct VerifyResult {
  std::vector<IndexReport> reports;
  VerifySummary summary;
};

/// Full two-pipeline verification for every configured seed; degenerate
/// orbits become SKIPPED entries. Parallel up to the GEODEX_THREADS cap.
VerifyResult verify_index_theorem(const RunConfig& config);

/// Orbit search only: converged orbits after dedup, sorted by action.
struct FoundOrbit {
  std::string id;
  int seed_index;
  orbits::PerturbedOrbit orbit;
};
std::vector<FoundOrbit> find_orbits(const RunConfig& config);

/// Serializes reports (sorted by orbit id) as a deterministic JSON document.
std::string report_to_json(const VerifyResult& result);

enum class FigureKind { Gamma1, Gamma2, OrbitPath };

struct FigureParams {
  Real muhat = -9.8696044010893586;  // -pi^2
  int steps = 2048;
  int orbit_seed_index = 0;
};

/// Writes the CSV behind the Sp(2) path figures; returns the row count.
int emit_figure_data(const RunConfig& config, FigureKind which, const FigureParams& params,
                     const std::string& out_path);

/// Thread cap from GEODEX_THREADS (>= 1).
int thread_cap();

}  // namespace geodex::harness
