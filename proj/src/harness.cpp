#include "geodex/harness.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "geodex/errors.hpp"
#include "geodex/framing.hpp"
#include "geodex/jacobi.hpp"
#include "geodex/maslov.hpp"
#include "geodex/symplectic.hpp"

namespace geodex::harness {

namespace {

using nlohmann::json;

VecX vec_from_json(const json& j) {
  if (!j.is_array()) throw ConfigError("expected a JSON array of numbers");
  VecX v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = j[i].get<Real>();
  return v;
}

geom::ManifoldModel model_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "flat_torus") return geom::ManifoldModel::flat_torus(j.at("dim").get<int>());
  if (kind == "flat_klein_bottle") return geom::ManifoldModel::flat_klein_bottle();
  if (kind == "sphere2")
    return geom::ManifoldModel::sphere2(j.at("radius").get<Real>(),
                                        j.value("pole_margin", 0.05));
  throw ConfigError("unknown manifold kind: " + kind);
}

geom::Potential potential_from_json(const json& j, int n) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "zero") return geom::Potential::zero(n);
  if (kind == "cosine_lattice") {
    const VecX eps = vec_from_json(j.at("amplitudes"));
    if (eps.size() != n) throw ConfigError("cosine lattice amplitude count != dimension");
    return geom::Potential::cosine_lattice(eps);
  }
  if (kind == "plane_waves") {
    std::vector<geom::PlaneWaveTerm> terms;
    for (const json& tj : j.at("terms")) {
      geom::PlaneWaveTerm term;
      term.amplitude = tj.at("amplitude").get<Real>();
      term.wave = vec_from_json(tj.at("wave"));
      term.frequency = tj.value("frequency", 0.0);
      term.phase = tj.value("phase", 0.0);
      terms.push_back(std::move(term));
    }
    return geom::Potential::plane_waves(n, terms);
  }
  throw ConfigError("unknown potential kind: " + kind);
}

json diagnostics_to_json(const IndexReport::Diagnostics& d) {
  return json{{"newton_residual", d.newton_residual},
              {"monodromy_defect", d.monodromy_defect},
              {"psi_defect", d.psi_defect},
              {"null_gap", d.null_gap},
              {"det_one_minus_psi1", d.det_one_minus_psi1},
              {"morse_grid", d.morse_grid},
              {"time_steps", d.time_steps},
              {"doubling_stable", d.doubling_stable}};
}

/// Stable orbit label from the deck-reduced initial condition.
std::string orbit_label(const geom::ManifoldModel& model, const orbits::PerturbedOrbit& orbit) {
  VecX x0 = orbit.x_at(0);
  if (model.is_flat())
    for (int i = 0; i < x0.size(); ++i) x0(i) -= std::floor(x0(i) + 1e-9);
  std::ostringstream os;
  os << "orbit";
  for (int i = 0; i < x0.size(); ++i) {
    const long rounded = std::lround(x0(i) * 1e6);
    os << "_" << rounded;
  }
  return os.str();
}

IndexReport verify_one(const RunConfig& config, int seed_index) {
  const auto& model = config.model;
  const auto& pot = config.potential;
  const auto& seed = config.seeds[seed_index];
  const auto& sp_ = config.solver;

  IndexReport report;
  report.seed_index = seed_index;
  report.diag.time_steps = sp_.time_steps;

  orbits::NewtonOptions nopts;
  nopts.steps = sp_.time_steps;
  nopts.tol = sp_.newton_tol;
  nopts.max_iterations = sp_.newton_max_iterations;
  nopts.symplectic_tol = sp_.symplectic_tol;

  VecX z0(2 * model.dim());
  z0 << seed.x, seed.y;
  const geom::DeckTransform deck = model.compose_deck(seed.deck);

  orbits::PerturbedOrbit orbit;
  try {
    orbit = orbits::find_orbit(model, pot, z0, deck, nopts);
  } catch (const DegeneracyError& e) {
    report.id = "seed_" + std::to_string(seed_index);
    report.status = "SKIPPED";
    report.reason = e.what();
    return report;
  }
  report.id = orbit_label(model, orbit);
  report.action = orbit.action;
  report.diag.newton_residual = orbit.residual;
  report.diag.monodromy_defect = orbit.monodromy.symplectic_defect;

  framing::ClosedFrame frame;
  try {
    frame = framing::build_closed_frame(model, pot, orbit);
  } catch (const Error& e) {
    report.status = "SKIPPED";
    report.reason = std::string("frame: ") + e.what();
    return report;
  }
  report.sigma = frame.sigma;

  jacobi::MorseOptions mopts;
  mopts.initial_grid = sp_.morse_grid;
  mopts.max_grid = sp_.max_morse_grid;
  jacobi::SpectralCount count;
  try {
    count = jacobi::morse_index(frame, mopts);
  } catch (const DegeneracyError& e) {
    report.status = "SKIPPED";
    report.reason = std::string("degenerate: ") + e.what();
    return report;
  }
  report.ind = count.ind;
  report.null_dim = count.null_dim;
  report.diag.null_gap = count.gap;
  report.diag.morse_grid = count.grid;

  const auto cz_at_steps = [&](int steps, int morse_check_grid) {
    const framing::SymmetricFamily su = framing::assemble_SU(frame);
    sp::PathOptions popts;
    popts.steps = steps;
    const sp::SymplecticPath psi = sp::fundamental_solution(su.value, popts);
    report.diag.psi_defect = std::max(report.diag.psi_defect, psi.defect());
    report.diag.det_one_minus_psi1 =
        (MatX::Identity(2 * frame.n, 2 * frame.n) - psi.samples().back()).determinant();
    (void)morse_check_grid;
    return maslov::cz_index(psi);
  };

  int mu;
  try {
    mu = cz_at_steps(sp_.time_steps, 0);
    if (sp_.check_grid_doubling) {
      const int mu2 = cz_at_steps(2 * sp_.time_steps, 0);
      jacobi::MorseOptions m2 = mopts;
      m2.initial_grid = 2 * count.grid;
      m2.max_grid = std::max(2 * count.grid, mopts.max_grid);
      const jacobi::SpectralCount c2 = jacobi::morse_index(frame, m2);
      report.diag.doubling_stable = (mu2 == mu && c2.ind == count.ind);
    }
  } catch (const Error& e) {
    report.status = "FAIL";
    report.reason = std::string("symplectic pipeline: ") + e.what();
    return report;
  }
  report.mu_cz = HalfInteger::whole(mu);
  report.residual = mu + report.ind - report.sigma;
  const bool pass =
      report.residual == 0 && report.null_dim == 0 && report.diag.doubling_stable;
  report.status = pass ? "PASS" : "FAIL";
  if (!pass) report.reason = "index theorem residual nonzero";
  return report;
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  RunConfig config;
  try {
    config.model = model_from_json(j.at("manifold"));
    config.potential = potential_from_json(j.at("potential"), config.model.dim());
    for (const json& sj : j.value("seeds", json::array())) {
      SeedSpec seed;
      seed.x = vec_from_json(sj.at("x"));
      seed.y = vec_from_json(sj.at("y"));
      if (seed.x.size() != config.model.dim() || seed.y.size() != config.model.dim())
        throw ConfigError("seed dimension mismatch");
      for (const json& d : sj.value("deck", json::array())) seed.deck.push_back(d.get<int>());
      config.seeds.push_back(std::move(seed));
    }
    if (j.contains("solver")) {
      const json& s = j["solver"];
      config.solver.time_steps = s.value("time_steps", config.solver.time_steps);
      config.solver.newton_tol = s.value("newton_tol", config.solver.newton_tol);
      config.solver.newton_max_iterations =
          s.value("newton_max_iterations", config.solver.newton_max_iterations);
      config.solver.morse_grid = s.value("morse_grid", config.solver.morse_grid);
      config.solver.max_morse_grid = s.value("max_morse_grid", config.solver.max_morse_grid);
      config.solver.lambda_steps = s.value("lambda_steps", config.solver.lambda_steps);
      config.solver.symplectic_tol = s.value("symplectic_tol", config.solver.symplectic_tol);
      config.solver.dedup_distance = s.value("dedup_distance", config.solver.dedup_distance);
      config.solver.check_grid_doubling =
          s.value("check_grid_doubling", config.solver.check_grid_doubling);
    }
    if (j.contains("output")) config.report_path = j["output"].value("report", "");
    if (config.solver.newton_tol <= 0 || config.solver.symplectic_tol <= 0)
      throw ConfigError("tolerances must be positive");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config schema error: ") + e.what());
  }
  return config;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

int thread_cap() {
  const char* env = std::getenv("GEODEX_THREADS");
  if (env != nullptr) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return std::max(1u, std::min(hw, 8u));
}

VerifyResult verify_index_theorem(const RunConfig& config) {
  const int count = static_cast<int>(config.seeds.size());
  std::vector<IndexReport> reports(count);
  const int cap = thread_cap();

  int next = 0;
  while (next < count) {
    const int batch = std::min(cap, count - next);
    std::vector<std::future<IndexReport>> futures;
    futures.reserve(batch);
    for (int i = 0; i < batch; ++i) {
      const int idx = next + i;
      futures.push_back(
          std::async(std::launch::async, [&config, idx] { return verify_one(config, idx); }));
    }
    for (int i = 0; i < batch; ++i) reports[next + i] = futures[i].get();
    next += batch;
  }

  std::stable_sort(reports.begin(), reports.end(),
                   [](const IndexReport& a, const IndexReport& b) { return a.id < b.id; });
  VerifyResult out;
  out.reports = std::move(reports);
  for (const IndexReport& r : out.reports) {
    if (r.status == "PASS") ++out.summary.passed;
    else if (r.status == "FAIL") ++out.summary.failed;
    else ++out.summary.skipped;
  }
  return out;
}

std::vector<FoundOrbit> find_orbits(const RunConfig& config) {
  std::vector<FoundOrbit> found;
  for (int i = 0; i < static_cast<int>(config.seeds.size()); ++i) {
    const SeedSpec& seed = config.seeds[i];
    VecX z0(2 * config.model.dim());
    z0 << seed.x, seed.y;
    orbits::NewtonOptions nopts;
    nopts.steps = config.solver.time_steps;
    nopts.tol = config.solver.newton_tol;
    try {
      orbits::PerturbedOrbit orbit = orbits::find_orbit(
          config.model, config.potential, z0, config.model.compose_deck(seed.deck), nopts);
      bool duplicate = false;
      for (const FoundOrbit& f : found) {
        if (orbits::quotient_distance(config.model, f.orbit.z_at(0), orbit.z_at(0)) <
            config.solver.dedup_distance) {
          duplicate = true;
          break;
        }
      }
      if (!duplicate) found.push_back({orbit_label(config.model, orbit), i, std::move(orbit)});
    } catch (const DegeneracyError&) {
      continue;
    } catch (const AccuracyError&) {
      continue;
    }
  }
  std::stable_sort(found.begin(), found.end(), [](const FoundOrbit& a, const FoundOrbit& b) {
    return a.orbit.action != b.orbit.action ? a.orbit.action < b.orbit.action : a.id < b.id;
  });
  return found;
}

std::string report_to_json(const VerifyResult& result) {
  json rows = json::array();
  for (const IndexReport& r : result.reports) {
    json row{{"id", r.id},
             {"seed_index", r.seed_index},
             {"status", r.status},
             {"action", r.action},
             {"sigma", r.sigma},
             {"ind", r.ind},
             {"null", r.null_dim},
             {"mu_cz_twice", r.mu_cz.twice()},
             {"mu_cz", r.mu_cz.str()},
             {"residual", r.residual},
             {"diagnostics", diagnostics_to_json(r.diag)}};
    if (!r.reason.empty()) row["reason"] = r.reason;
    rows.push_back(std::move(row));
  }
  const json doc{{"orbits", rows},
                 {"summary",
                  {{"passed", result.summary.passed},
                   {"failed", result.summary.failed},
                   {"skipped", result.summary.skipped}}}};
  return doc.dump(2) + "\n";
}

int emit_figure_data(const RunConfig& config, FigureKind which, const FigureParams& params,
                     const std::string& out_path) {
  std::ofstream out(out_path);
  if (!out) throw ConfigError("cannot open figure output: " + out_path);
  sp::SymplecticPath path = [&]() -> sp::SymplecticPath {
    switch (which) {
      case FigureKind::Gamma1:
        return sp::gamma1_path(params.steps);
      case FigureKind::Gamma2:
        return sp::gamma2_path(params.muhat, params.steps);
      case FigureKind::OrbitPath: {
        if (config.model.dim() != 1)
          throw ConfigError("orbit-path figures need a 1-dimensional model (Sp(2) paths)");
        if (config.seeds.empty()) throw ConfigError("orbit-path figure needs a seed");
        const SeedSpec& seed = config.seeds[params.orbit_seed_index];
        VecX z0(2);
        z0 << seed.x, seed.y;
        orbits::NewtonOptions nopts;
        nopts.steps = params.steps;
        const orbits::PerturbedOrbit orbit = orbits::find_orbit(
            config.model, config.potential, z0, config.model.compose_deck(seed.deck), nopts);
        const framing::ClosedFrame frame =
            framing::build_closed_frame(config.model, config.potential, orbit);
        const framing::SymmetricFamily su = framing::assemble_SU(frame);
        sp::PathOptions popts;
        popts.steps = params.steps;
        return sp::fundamental_solution(su.value, popts);
      }
    }
    throw ConfigError("unknown figure kind");
  }();
  sp::write_path_csv(out, path);
  return path.steps() + 1;
}

}  // namespace geodex::harness
