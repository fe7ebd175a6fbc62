#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "support.hpp"

using namespace hfnet;
using namespace hfnet::testing;

namespace {

using Names = std::vector<std::string>;

std::set<std::string> as_set(const Names& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST(NormalTree, PublishedTreesAndStates) {
  struct Case {
    std::string name;
    Names tree, links, states;
  };
  const Case cases[] = {
      {"electrical", {"V_s", "C1", "R1", "R2"}, {"L1", "L2", "R3"}, {"V_C1", "i_L1", "i_L2"}},
      {"translational", {"m1", "m2", "b2"}, {"F_s", "b1", "k1", "k2"}, {"v_m1", "v_m2", "F_k1", "F_k2"}},
      {"rotational", {"J"}, {"K", "b", "tau_s"}, {"w_J", "tau_K"}},
      {"fluidic", {"C1", "C2", "R1"}, {"I", "R2", "V_f"}, {"P_C1", "P_C2", "Q_I"}},
      {"thermal", {"C_h", "C_i"}, {"Q_s", "R_h", "R_i"}, {"T_C_i", "T_C_h"}},
      {"electromechanical", {"V_s", "J", "m:a", "R"}, {"B", "L", "m:b"}, {"w_J", "i_L"}},
  };
  for (const auto& c : cases) {
    const auto m = load_fixture(c.name).model;
    const auto t = build_normal_tree(m);
    const auto [tree, links] = canonical_listing(m, t);
    EXPECT_EQ(tree, c.tree) << c.name;
    EXPECT_EQ(links, c.links) << c.name;
    Names states;
    for (const auto& s : t.state_variables) states.push_back(s.name);
    EXPECT_EQ(as_set(states), as_set(c.states)) << c.name;
    EXPECT_FALSE(t.dependent_storage) << c.name;
    EXPECT_FALSE(t.derivative_feedthrough) << c.name;
  }
}

TEST(NormalTree, SizeAndPartitionInvariants) {
  for (const auto& name : fixture_names()) {
    const auto m = load_fixture(name).model;
    const auto t = build_normal_tree(m);
    EXPECT_EQ(t.tree_branches.size(), m.nodes().size() - m.ground_count()) << name;
    const auto all = detail::branches(m);
    EXPECT_EQ(t.tree_branches.size() + t.link_branches.size(), all.size()) << name;
    auto ids = t.tree_elements;
    ids.insert(ids.end(), t.link_elements.begin(), t.link_elements.end());
    std::set<std::string> unique(ids.begin(), ids.end());
    EXPECT_EQ(unique.size(), all.size()) << name;  // disjoint and covering
    // The tree is acyclic and spans every node of each grounded subnet.
    DisjointSets d(m.nodes().size());
    for (const auto& b : t.tree_branches) EXPECT_TRUE(d.unite(b.u, b.v)) << name << " " << b.id;
    for (const auto& b : t.link_branches) EXPECT_TRUE(d.same(b.u, b.v)) << name << " " << b.id;
  }
}

TEST(NormalTree, AcrossSourceLoopThrows) {
  const auto m = load_model(malformed("across_source_loop")).model;
  try {
    build_normal_tree(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AcrossSourceLoop);
    EXPECT_EQ(e.subjects(), Names{"V2"});
  }
}

TEST(NormalTree, ThroughSourceCutsetThrows) {
  const auto m = load_model(malformed("through_source_cutset")).model;
  try {
    build_normal_tree(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ThroughSourceCutset);
  }
}

TEST(NormalTree, TransformerTakesOneSide) {
  // Source drives side a; side b feeds a resistor. One side is redundant.
  const auto m = ModelBuilder()
                     .node("a").ground("g").node("b").ground("h")
                     .el("V", ElementKind::AcrossSource, 0, "g", "a")
                     .two_port("T", ElementKind::Transformer, 2, {"a", "g"}, {"h", "b"})
                     .el("R", ElementKind::DType, 1, "b", "h")
                     .build();
  const auto t = build_normal_tree(m);
  EXPECT_EQ(t.tree_elements, (Names{"V", "T:b"}));
  EXPECT_EQ(as_set(t.link_elements), as_set({"T:a", "R"}));
  // With the source elsewhere, side a enters first.
  const auto m2 = ModelBuilder()
                      .node("a").ground("g").node("b").ground("h")
                      .el("I", ElementKind::ThroughSource, 0, "g", "a")
                      .el("Ra", ElementKind::DType, 1, "a", "g")
                      .two_port("T", ElementKind::Transformer, 2, {"a", "g"}, {"h", "b"})
                      .el("R", ElementKind::DType, 1, "b", "h")
                      .build();
  const auto t2 = build_normal_tree(m2);
  EXPECT_EQ(t2.tree_elements, (Names{"T:a", "R"}));
  EXPECT_FALSE(t2.in_tree("T:b"));
}

TEST(NormalTree, GyratorBothSidesOrNeither) {
  auto build = [](bool cap_on_b) {
    ModelBuilder b;
    b.node("a").ground("g").node("b").ground("h").el("V", ElementKind::AcrossSource, 0, "g", "a").el("R", ElementKind::DType, 1, "a", "x");
    b.node("x");
    b.two_port("G", ElementKind::Gyrator, 2, {"x", "g"}, {"b", "h"});
    if (cap_on_b) b.el("C", ElementKind::AType, 1, "b", "h");
    else b.el("L", ElementKind::TType, 1, "b", "h");
    return build_normal_tree(b.build());
  };
  const auto with_c = build(true);  // C takes side b's place, so neither side fits
  EXPECT_FALSE(with_c.in_tree("G:a"));
  EXPECT_FALSE(with_c.in_tree("G:b"));
  const auto with_l = build(false);  // both sides enter together
  EXPECT_TRUE(with_l.in_tree("G:a"));
  EXPECT_TRUE(with_l.in_tree("G:b"));
  EXPECT_FALSE(with_l.in_tree("L"));
}

TEST(NormalTree, DependentStorageFlags) {
  // Two capacitors in parallel: one must be a link.
  const auto cc = ModelBuilder()
                      .node("a").node("b").ground("g")
                      .el("V", ElementKind::AcrossSource, 0, "g", "a")
                      .el("R", ElementKind::DType, 1, "a", "b")
                      .el("C1", ElementKind::AType, 1, "b", "g")
                      .el("C2", ElementKind::AType, 2, "b", "g")
                      .build();
  const auto t = build_normal_tree(cc);
  EXPECT_TRUE(t.dependent_storage);
  EXPECT_FALSE(t.derivative_feedthrough);
  EXPECT_EQ(t.dependent_elements, Names{"C2"});

  // Capacitor directly across a voltage source.
  const auto cv = ModelBuilder().node("a").ground("g").el("V", ElementKind::AcrossSource, 0, "g", "a").el("C", ElementKind::AType, 1, "a", "g").build();
  const auto t2 = build_normal_tree(cv);
  EXPECT_TRUE(t2.dependent_storage);
  EXPECT_TRUE(t2.derivative_feedthrough);
  EXPECT_EQ(t2.feedthrough_elements, Names{"C"});

  // Inductor in series with a current source.
  const auto li = ModelBuilder()
                      .node("a").node("b").ground("g")
                      .el("I", ElementKind::ThroughSource, 0, "g", "a")
                      .el("L", ElementKind::TType, 1, "a", "b")
                      .el("R", ElementKind::DType, 1, "b", "g")
                      .build();
  const auto t3 = build_normal_tree(li);
  EXPECT_TRUE(t3.dependent_storage);
  EXPECT_TRUE(t3.derivative_feedthrough);
  EXPECT_EQ(t3.feedthrough_elements, Names{"L"});
}

TEST(NormalTree, TreeSetIndependentOfDeclarationOrderWithinPriority) {
  std::mt19937 rng(11);
  for (const auto& name : fixture_names()) {
    const auto m = load_fixture(name).model;
    const auto ref = canonical_listing(m, build_normal_tree(m));
    for (int trial = 0; trial < 5; ++trial) {
      auto els = m.elements();
      std::shuffle(els.begin(), els.end(), rng);
      auto nodes = m.nodes();
      std::shuffle(nodes.begin(), nodes.end(), rng);
      const SystemModel p(m.name(), nodes, els);
      const auto t = build_normal_tree(p);
      EXPECT_EQ(t.tree_branches.size(), ref.first.size()) << name;
      EXPECT_EQ(t.state_variables.size(), build_normal_tree(m).state_variables.size()) << name;
    }
  }
}
