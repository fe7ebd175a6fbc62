#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>

#include "hfnet/hfnmcf.hpp"
#include "hfnet/model_io.hpp"
#include "hfnet/oracle.hpp"
#include "hfnet/state_space.hpp"
#include "hfnet/validate.hpp"

#ifndef HFNET_MODEL_DIR
#define HFNET_MODEL_DIR "models"
#endif

namespace hfnet {

/// Bundled model directory; the HFNET_FIXTURES environment variable overrides it.
inline std::filesystem::path fixture_dir() {
  if (const char* env = std::getenv("HFNET_FIXTURES"); env && *env) return env;
  return HFNET_MODEL_DIR;
}

/// Accepts a path, or a bare fixture name such as "electrical" or
/// "bondgraph/thermal", resolved against fixture_dir().
inline std::filesystem::path resolve_model_path(const std::string& spec) {
  namespace fs = std::filesystem;
  if (fs::exists(spec)) return spec;
  const auto dir = fixture_dir();
  for (const fs::path& candidate : {dir / spec, dir / (spec + ".json"), dir / "lineargraph" / (spec + ".json")})
    if (fs::exists(candidate)) return candidate;
  throw Error(ErrorCode::Io, "model '" + spec + "' not found (looked in " + dir.string() + ")", {spec});
}

/// Grid from explicit settings, falling back to the model file's defaults.
inline TimeGrid choose_grid(const LoadedModel& lm, std::optional<double> dt, std::optional<std::size_t> steps) {
  const double h = dt ? *dt : (lm.grid ? lm.grid->dt : 0.0);
  if (!(h > 0)) throw Error(ErrorCode::InvalidGrid, "no time step given and the model declares no default grid");
  if (steps) return TimeGrid(h, *steps);
  if (!lm.grid) throw Error(ErrorCode::InvalidGrid, "no step count given and the model declares no default grid");
  return TimeGrid::from_horizon(h, lm.grid->horizon);
}

/// Both solution paths on one model and grid.
struct EquivalenceRun {
  EngineeringSystemNet net;
  NormalTree tree;
  StateSpace ss;
  Trajectories hfnmcf;
  Trajectories euler;
  ComparisonReport report;
};

inline EquivalenceRun run_equivalence(const SystemModel& m, const TimeGrid& grid, const InitialConditions& ic = {},
                                      double tol = 1e-6) {
  EquivalenceRun r;
  r.net = build_esn(m);
  r.tree = build_normal_tree(m);
  r.ss = derive_state_space(m, r.tree);
  r.hfnmcf = solve(assemble(m, r.net, grid, ic));
  r.euler = euler_integrate(make_run(r.ss, grid, ic));
  r.report = compare(r.hfnmcf, r.euler, tol);
  return r;
}

}  // namespace hfnet
