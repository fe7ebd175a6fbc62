// hfnet — command-line front end for the modeling pipeline.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "hfnet/hfnet.hpp"

namespace fs = std::filesystem;
using namespace hfnet;

namespace {

enum Exit { kOk = 0, kInvalid = 1, kSolver = 2, kIo = 3, kCompareFailed = 4 };

struct RunConfig {
  std::string command;
  std::string model;
  std::optional<double> dt;
  std::optional<std::size_t> steps;
  std::vector<std::string> ic;
  std::string out = ".";
  bool dump_system = false;
  double tol = 1e-6;
  bool all_fixtures = false;
};

InitialConditions parse_ic(const std::vector<std::string>& items) {
  InitialConditions ic;
  for (const auto& s : items) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw Error(ErrorCode::Parse, "--ic expects name=value, got '" + s + "'");
    try {
      ic[s.substr(0, eq)] = std::stod(s.substr(eq + 1));
    } catch (const std::exception&) {
      throw Error(ErrorCode::Parse, "--ic value is not a number: '" + s + "'");
    }
  }
  return ic;
}

template <class F>
void write_file(const fs::path& path, F&& fill) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'", {path.string()});
  fill(os);
  if (!os) throw Error(ErrorCode::Io, "write failed for '" + path.string() + "'", {path.string()});
}

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::Io:
    case ErrorCode::Parse: return kIo;
    case ErrorCode::Underdetermined:
    case ErrorCode::Inconsistent: return kSolver;
    default: return kInvalid;
  }
}

/// Runs one command on one model, writing into `out`. Messages go to `log`.
int run(const RunConfig& cfg, const std::string& model_spec, const fs::path& out, std::ostream& log) {
  const auto lm = load_model(resolve_model_path(model_spec));
  const auto& m = lm.model;
  const auto report = validate_model(m);
  if (cfg.command == "validate") {
    log << report.to_string();
    return report.ok() ? kOk : kInvalid;
  }
  if (!report.ok()) {
    log << report.to_string();
    return kInvalid;
  }
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create output directory '" + out.string() + "'", {out.string()});

  const auto net = build_esn(m);
  if (cfg.command == "net") {
    const auto rows = net.buffer_ids(), cols = net.capability_ids();
    const Eigen::MatrixXd Mr = reduced_incidence(net);
    const std::pair<const char*, Eigen::MatrixXd> mats[] = {{"M_plus", net.M_plus}, {"M_minus", net.M_minus}, {"M", net.M()}};
    for (const auto& [name, M] : mats) {
      write_file(out / (std::string(name) + ".csv"), [&](std::ostream& os) { write_matrix_csv(os, M, rows, cols); });
      write_file(out / (std::string(name) + ".triplets"), [&](std::ostream& os) { write_matrix_triplets(os, M); });
    }
    write_file(out / "M_reduced.csv", [&](std::ostream& os) { write_matrix_csv(os, Mr, net.buffer_ids(false), cols); });
    write_file(out / "M_reduced.triplets", [&](std::ostream& os) { write_matrix_triplets(os, Mr); });
    log << net.buffers.size() << " buffers, " << net.capabilities.size() << " capabilities; reduced incidence "
        << Mr.rows() << "x" << Mr.cols() << '\n';
    return kOk;
  }

  const auto tree = build_normal_tree(m);
  if (cfg.command == "tree") {
    const auto [t, l] = canonical_listing(m, tree);
    std::vector<std::string> states;
    for (const auto& s : tree.state_variables) states.push_back(s.name);
    log << "tree: " << detail::join(t) << "; links: " << detail::join(l) << '\n';
    log << "states: " << detail::join(states) << '\n';
    if (tree.dependent_storage) log << "dependent storage: " << detail::join(tree.dependent_elements) << '\n';
    write_file(out / "tree.csv", [&](std::ostream& os) {
      os << "branch,membership\n";
      for (const auto& b : tree.tree_elements) os << b << ",tree\n";
      for (const auto& b : tree.link_elements) os << b << ",link\n";
    });
    write_file(out / "states.csv", [&](std::ostream& os) {
      os << "state,element,variable\n";
      for (const auto& s : tree.state_variables)
        os << s.name << ',' << s.element << ','
           << (s.variable == StateVar::Variable::AcrossOfATypeInTree ? "across" : "through") << '\n';
    });
    return kOk;
  }

  if (cfg.command == "derive") {
    const auto ss = derive_state_space(m, tree);
    write_file(out / "A.csv", [&](std::ostream& os) { write_matrix_csv(os, ss.A, ss.state_names, ss.state_names); });
    write_file(out / "B.csv", [&](std::ostream& os) { write_matrix_csv(os, ss.B, ss.state_names, ss.input_names); });
    const auto laws = law_listing(m, tree);
    write_file(out / "laws.txt", [&](std::ostream& os) {
      for (const auto& l : laws) os << l << '\n';
    });
    for (const auto& l : laws) log << l << '\n';
    log << "states: " << detail::join(ss.state_names) << "; inputs: " << detail::join(ss.input_names) << '\n';
    return kOk;
  }

  const auto grid = choose_grid(lm, cfg.dt, cfg.steps);
  const auto ic = parse_ic(cfg.ic);
  const bool want_hfnmcf = cfg.command == "solve" || cfg.command == "compare" || cfg.command == "all";
  const bool want_oracle = cfg.command == "simulate" || cfg.command == "compare" || cfg.command == "all";
  if (!want_hfnmcf && !want_oracle) throw Error(ErrorCode::Parse, "unknown command '" + cfg.command + "'");

  Trajectories hf, eu;
  if (want_hfnmcf) {
    const auto cs = assemble(m, net, grid, ic);
    if (cfg.dump_system) write_file(out / "system.triplets", [&](std::ostream& os) { cs.write(os); });
    hf = solve(cs);
    write_file(out / "hfnmcf.csv", [&](std::ostream& os) { hf.write_csv(os); });
    log << "hfnmcf: " << cs.rows() << " rows x " << cs.unknowns() << " unknowns, residual " << detail::fmt_short(hf.residual) << '\n';
  }
  if (want_oracle) {
    const auto ss = derive_state_space(m, tree);
    const auto run = make_run(ss, grid, ic);
    eu = euler_integrate(run);
    write_file(out / "euler.csv", [&](std::ostream& os) { eu.write_csv(os); });
    write_file(out / "rk4.csv", [&](std::ostream& os) { rk4_integrate(run).write_csv(os); });
    log << "oracle: " << ss.n() << " states, K = " << grid.K << ", dT = " << detail::fmt_short(grid.dT) << '\n';
  }
  if (want_hfnmcf && want_oracle) {
    const auto rep = compare(hf, eu, cfg.tol);
    write_file(out / "compare.csv", [&](std::ostream& os) { rep.write(os); });
    log << "compare: max relative deviation " << detail::fmt_short(rep.max_rel) << " (tol " << detail::fmt_short(cfg.tol)
        << ") " << (rep.pass ? "PASS" : "FAIL") << '\n';
    if (!rep.pass) {
      if (rep.max_rel > 1e-3) log << "hint: a diverging forward-Euler run usually means dT is too large for the fastest mode\n";
      return kCompareFailed;
    }
  }
  return kOk;
}

int guarded_run(const RunConfig& cfg, const std::string& model, const fs::path& out, std::ostream& log) {
  try {
    return run(cfg, model, out, log);
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kIo;
  }
}

std::vector<std::string> bundled_fixtures() {
  std::vector<std::string> out;
  const auto dir = fixture_dir() / "lineargraph";
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec))
    if (entry.path().extension() == ".json") out.push_back(entry.path().string());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hfnet: linear-graph state-space derivation and HFNMCF solving"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_common = [&](CLI::App* sub, bool timed) {
    sub->add_option("model", cfg.model, "model file, or bundled fixture name");
    sub->add_option("--out", cfg.out, "output directory")->capture_default_str();
    if (timed) {
      sub->add_option("--dt", cfg.dt, "time step (defaults to the model's grid)");
      sub->add_option("--steps", cfg.steps, "number of grid points K (defaults to horizon/dt)");
      sub->add_option("--ic", cfg.ic, "initial condition override name=value (repeatable)");
      sub->add_flag("--dump-system", cfg.dump_system, "write the assembled sparse system as triplets");
      sub->add_option("--tol", cfg.tol, "relative tolerance for compare")->capture_default_str();
    }
  };
  struct Cmd {
    const char* name;
    const char* help;
    bool timed;
  };
  const Cmd cmds[] = {
      {"validate", "check model invariants", false},
      {"net", "write incidence matrices of the engineering system net", false},
      {"tree", "build the normal tree and list state variables", false},
      {"derive", "write state-space matrices A, B and the law listing", false},
      {"solve", "solve the HFNMCF constraint system", true},
      {"simulate", "integrate the state-space model (Euler and RK4)", true},
      {"compare", "solve, simulate and compare", true},
      {"all", "solve, simulate and compare (optionally over every bundled fixture)", true},
  };
  for (const auto& c : cmds) {
    auto* sub = app.add_subcommand(c.name, c.help);
    add_common(sub, c.timed);
    if (std::string(c.name) == "all") sub->add_flag("--fixtures", cfg.all_fixtures, "run every bundled fixture in parallel");
    sub->callback([&cfg, name = std::string(c.name)] { cfg.command = name; });
  }
  CLI11_PARSE(app, argc, argv);

  if (cfg.steps && *cfg.steps < 2) {
    std::cerr << "error: --steps must be at least 2\n";
    return kInvalid;
  }
  if (cfg.dt && !(*cfg.dt > 0)) {
    std::cerr << "error: --dt must be positive\n";
    return kInvalid;
  }

  if (cfg.command == "all" && cfg.all_fixtures) {
    const auto models = bundled_fixtures();
    if (models.empty()) {
      std::cerr << "error: no fixtures found in " << (fixture_dir() / "lineargraph").string() << '\n';
      return kIo;
    }
    std::vector<std::future<std::pair<int, std::string>>> jobs;
    for (const auto& path : models)
      jobs.push_back(std::async(std::launch::async, [&cfg, path] {
        std::ostringstream log;
        const auto name = fs::path(path).stem().string();
        const int rc = guarded_run(cfg, path, fs::path(cfg.out) / name, log);
        return std::pair{rc, "== " + name + "\n" + log.str()};
      }));
    int worst = kOk;
    for (auto& j : jobs) {
      auto [rc, text] = j.get();
      std::cout << text;
      worst = std::max(worst, rc);
    }
    return worst;
  }

  if (cfg.model.empty()) {
    std::cerr << "error: a model file is required\n";
    return kIo;
  }
  std::ostringstream log;
  const int rc = guarded_run(cfg, cfg.model, cfg.out, log);
  (rc == kOk ? std::cout : std::cerr) << log.str();
  return rc;
}
