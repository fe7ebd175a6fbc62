#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "support.hpp"

using namespace hfnet;
using namespace hfnet::testing;

namespace {

/// Random ladder: a source at n0, then per section a series R or L to the
/// next node and a shunt R or C to ground.
SystemModel random_ladder(std::mt19937& rng, int sections) {
  std::uniform_real_distribution<double> R(10, 100), L(0.1, 1), C(1e-4, 1e-3), amp(-2, 2);
  std::bernoulli_distribution coin;
  ModelBuilder b;
  b.name = "ladder";
  b.ground("g");
  b.node("n0");
  if (coin(rng)) {
    b.el("V", ElementKind::AcrossSource, 0, "g", "n0", amp(rng));
  } else {
    b.el("I", ElementKind::ThroughSource, 0, "g", "n0", amp(rng) / 50);
    b.el("Rin", ElementKind::DType, R(rng), "n0", "g");
  }
  for (int s = 0; s < sections; ++s) {
    const auto from = "n" + std::to_string(s), to = "n" + std::to_string(s + 1), id = std::to_string(s + 1);
    b.node(to);
    if (coin(rng)) b.el("Rs" + id, ElementKind::DType, R(rng), from, to);
    else b.el("Ls" + id, ElementKind::TType, L(rng), from, to);
    if (coin(rng)) b.el("Rp" + id, ElementKind::DType, R(rng), to, "g");
    else b.el("Cp" + id, ElementKind::AType, C(rng), to, "g");
  }
  return b.build();
}

SystemModel shuffled(const SystemModel& m, std::mt19937& rng) {
  auto els = m.elements();
  auto nodes = m.nodes();
  std::shuffle(els.begin(), els.end(), rng);
  std::shuffle(nodes.begin(), nodes.end(), rng);
  return SystemModel(m.name(), nodes, els);
}

}  // namespace

TEST(Properties, RandomLaddersSatisfyEquivalenceAndBalances) {
  std::mt19937 rng(2024);
  const TimeGrid g(1e-4, 200);
  for (int trial = 0; trial < 40; ++trial) {
    const auto m = random_ladder(rng, 1 + trial % 6);
    ASSERT_TRUE(validate_model(m).ok()) << validate_model(m).to_string();
    const auto run = run_equivalence(m, g, {}, 1e-8);
    EXPECT_TRUE(run.report.pass) << "trial " << trial << " max_rel " << run.report.max_rel << "\n" << to_json(m).dump();
    const auto cs = assemble(m, run.net, g);
    EXPECT_EQ(cs.rows(), cs.unknowns()) << trial;
    const Eigen::MatrixXd Mr = reduced_incidence(run.net);
    EXPECT_LE((Mr * run.hfnmcf.U.transpose()).cwiseAbs().maxCoeff(), 1e-10) << trial;
    EXPECT_LE(tellegen_power(run.net, run.hfnmcf).cwiseAbs().maxCoeff(), 1e-9) << trial;
    // Tree size is |nodes| − |grounds| and the state count is the number of independent stores.
    EXPECT_EQ(run.tree.tree_branches.size(), m.nodes().size() - 1) << trial;
  }
}

TEST(Properties, TrajectoriesIndependentOfDeclarationOrder) {
  std::mt19937 rng(99);
  for (const auto& name : fixture_names()) {
    const auto lm = load_fixture(name);
    const auto grid = TimeGrid(lm.grid->dt, 60);
    const auto ref = solve(assemble(lm.model, build_esn(lm.model), grid));
    for (int trial = 0; trial < 3; ++trial) {
      const auto p = shuffled(lm.model, rng);
      const auto tr = solve(assemble(p, build_esn(p), grid));
      for (const auto& label : ref.labels()) {
        const Eigen::VectorXd a = ref.series(label), b = tr.series(label);
        const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LE((a - b).cwiseAbs().maxCoeff() / scale, 1e-9) << name << " " << label;
      }
    }
  }
}

TEST(Properties, SolutionIsLinearInTheInput) {
  // Doubling every source doubles every trajectory (zero initial state).
  for (const auto& name : fixture_names()) {
    const auto lm = load_fixture(name);
    auto els = lm.model.elements();
    for (auto& e : els)
      if (is_source(e.kind)) e.signal = SourceSignal::step(2 * e.signal.amplitude);
    const SystemModel doubled(lm.model.name(), lm.model.nodes(), els);
    const TimeGrid g(lm.grid->dt, 40);
    const auto a = solve(assemble(lm.model, build_esn(lm.model), g));
    const auto b = solve(assemble(doubled, build_esn(doubled), g));
    const double scale = std::max(a.U.cwiseAbs().maxCoeff(), a.y.cwiseAbs().maxCoeff());
    EXPECT_LE((2 * a.U - b.U).cwiseAbs().maxCoeff(), 1e-10 * scale) << name;
    EXPECT_LE((2 * a.y - b.y).cwiseAbs().maxCoeff(), 1e-10 * scale) << name;
  }
}

TEST(Properties, DeterministicAssembly) {
  for (const auto& name : fixture_names()) {
    const auto lm = load_fixture(name);
    const TimeGrid g(lm.grid->dt, 10);
    std::ostringstream a, b;
    assemble(lm.model, build_esn(lm.model), g).write(a);
    assemble(lm.model, build_esn(lm.model), g).write(b);
    EXPECT_EQ(a.str(), b.str()) << name;
  }
}
