#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "hfnet/model.hpp"

namespace hfnet {

enum class BondElementKind { EffortSource, FlowSource, R, C, I, TF, GY };

inline std::optional<BondElementKind> parse_bond_element_kind(std::string_view s) {
  if (s == "Se") return BondElementKind::EffortSource;
  if (s == "Sf") return BondElementKind::FlowSource;
  if (s == "R") return BondElementKind::R;
  if (s == "C") return BondElementKind::C;
  if (s == "I") return BondElementKind::I;
  if (s == "TF") return BondElementKind::TF;
  if (s == "GY") return BondElementKind::GY;
  return std::nullopt;
}

struct BondElement {
  std::string id;
  BondElementKind kind = BondElementKind::R;
  double parameter = 0.0;  // R, C (compliance), I (inertance), TF modulus, GY modulus
  SourceSignal signal = SourceSignal::step(1.0);
};

struct Junction {
  enum class Type { Zero, One };
  std::string id;
  Type type = Type::Zero;
  std::optional<PhysicalDomain> domain;
};

/// Directed power bond; `from`/`to` name an element or a junction. `hi`/`lo`
/// optionally name the linear-graph nodes at the bond's two terminals.
struct Bond {
  std::string from;
  std::string to;
  std::optional<std::string> hi;
  std::optional<std::string> lo;
};

struct BondGraphModel {
  std::string name;
  std::vector<BondElement> elements;
  std::vector<Junction> junctions;
  std::vector<Bond> bonds;
  /// Optional node naming, ordering and ground designation for the result.
  std::vector<Node> nodes;
};

namespace detail {

inline Error topology_error(const std::string& msg, std::vector<std::string> subjects = {}) {
  return Error(ErrorCode::UnsupportedJunctionTopology, msg, std::move(subjects));
}

}  // namespace detail

/// Converts a bond graph into the equivalent linear graph.
///
/// Every bond is treated as a port with two terminals (hi, lo) whose across
/// difference is the bond's across-analog variable. Node-type junctions
/// (0 in Eulerian domains, 1 in Lagrangian domains) share their across value
/// and so merge all hi terminals and all lo terminals; the other junction type
/// shares the through value and chains its bonds into one series loop, in bond
/// declaration order. The merged terminal classes become nodes.
inline SystemModel bondgraph_to_lineargraph(const BondGraphModel& bg) {
  std::map<std::string, std::size_t> elem_idx, junc_idx;
  for (std::size_t i = 0; i < bg.elements.size(); ++i)
    if (!elem_idx.emplace(bg.elements[i].id, i).second)
      throw Error(ErrorCode::InvalidModel, "duplicate bond-graph element '" + bg.elements[i].id + "'", {bg.elements[i].id});
  for (std::size_t i = 0; i < bg.junctions.size(); ++i) {
    const auto& j = bg.junctions[i];
    if (elem_idx.count(j.id) || !junc_idx.emplace(j.id, i).second)
      throw Error(ErrorCode::InvalidModel, "duplicate junction id '" + j.id + "'", {j.id});
    if (!j.domain) throw Error(ErrorCode::UnknownDomain, "junction '" + j.id + "' has no physical domain", {j.id});
  }

  // Per-element bond bookkeeping.
  struct Attach {
    std::vector<std::size_t> in, out;  // bonds pointing into / out of the element
  };
  std::vector<Attach> attach(bg.elements.size());
  std::vector<std::vector<std::size_t>> junction_bonds(bg.junctions.size());
  std::vector<std::optional<PhysicalDomain>> bond_domain(bg.bonds.size());

  for (std::size_t b = 0; b < bg.bonds.size(); ++b) {
    const auto& bond = bg.bonds[b];
    const bool fe = elem_idx.count(bond.from), te = elem_idx.count(bond.to);
    const bool fj = junc_idx.count(bond.from), tj = junc_idx.count(bond.to);
    if (!(fe || fj) || !(te || tj))
      throw Error(ErrorCode::InvalidModel, "bond " + std::to_string(b) + " references unknown endpoint '" + (fe || fj ? bond.to : bond.from) + "'");
    if (fe && te) throw detail::topology_error("bond " + std::to_string(b) + " joins two elements without a junction", {bond.from, bond.to});
    if (fj) {
      auto j = junc_idx[bond.from];
      junction_bonds[j].push_back(b);
      bond_domain[b] = bg.junctions[j].domain;
    }
    if (tj) {
      auto j = junc_idx[bond.to];
      junction_bonds[j].push_back(b);
      if (bond_domain[b] && *bond_domain[b] != *bg.junctions[j].domain)
        throw detail::topology_error("bond " + std::to_string(b) + " joins junctions of different domains", {bond.from, bond.to});
      bond_domain[b] = bg.junctions[j].domain;
    }
    if (fe) attach[elem_idx[bond.from]].out.push_back(b);
    if (te) attach[elem_idx[bond.to]].in.push_back(b);
  }

  // Terminal slots: 2b = hi, 2b+1 = lo.
  auto hi = [](std::size_t b) { return 2 * b; };
  auto lo = [](std::size_t b) { return 2 * b + 1; };
  DisjointSets dsu(2 * bg.bonds.size());

  for (std::size_t j = 0; j < bg.junctions.size(); ++j) {
    const auto& jn = bg.junctions[j];
    const auto& bonds = junction_bonds[j];
    if (bonds.empty()) continue;
    const bool parallel = (jn.type == Junction::Type::Zero) == (domain_view(*jn.domain) == View::Eulerian);
    if (parallel) {
      for (auto b : bonds) {
        dsu.unite(hi(bonds.front()), hi(b));
        dsu.unite(lo(bonds.front()), lo(b));
      }
    } else {
      // Series loop: bonds leaving the junction are traversed hi → lo,
      // bonds entering it lo → hi.
      auto start = [&](std::size_t b) { return bg.bonds[b].from == jn.id ? hi(b) : lo(b); };
      auto end = [&](std::size_t b) { return bg.bonds[b].from == jn.id ? lo(b) : hi(b); };
      for (std::size_t i = 0; i + 1 < bonds.size(); ++i) dsu.unite(end(bonds[i]), start(bonds[i + 1]));
      dsu.unite(end(bonds.back()), start(bonds.front()));
    }
  }

  // Elements: terminals and linear-graph kind.
  struct Pending {
    Element el;
    std::size_t a_from, a_to, a_lo;
    std::optional<std::pair<std::size_t, std::size_t>> b_slots;
    PhysicalDomain domain;
  };
  std::vector<Pending> pending;
  for (std::size_t e = 0; e < bg.elements.size(); ++e) {
    const auto& be = bg.elements[e];
    const auto& at = attach[e];
    const bool two_port = be.kind == BondElementKind::TF || be.kind == BondElementKind::GY;
    // Element terminals: power-absorbing bonds map to (hi, lo), power-delivering to (lo, hi).
    auto slots = [&](std::size_t b, bool absorbing) {
      return absorbing ? std::pair{hi(b), lo(b)} : std::pair{lo(b), hi(b)};
    };
    Pending p{};
    p.el.id = be.id;
    p.el.signal = be.signal;
    if (!two_port) {
      if (at.in.size() + at.out.size() != 1)
        throw detail::topology_error("element '" + be.id + "' must attach to exactly one bond", {be.id});
      const bool absorbing = at.in.size() == 1;
      const std::size_t b = absorbing ? at.in[0] : at.out[0];
      if (!bond_domain[b]) throw Error(ErrorCode::UnknownDomain, "element '" + be.id + "' is not attached to a junction", {be.id});
      std::tie(p.a_from, p.a_to) = slots(b, absorbing);
      p.a_lo = lo(b);
      p.domain = *bond_domain[b];
      const bool euler = domain_view(p.domain) == View::Eulerian;
      switch (be.kind) {
        case BondElementKind::EffortSource:
          p.el.kind = euler ? ElementKind::AcrossSource : ElementKind::ThroughSource;
          break;
        case BondElementKind::FlowSource:
          p.el.kind = euler ? ElementKind::ThroughSource : ElementKind::AcrossSource;
          break;
        case BondElementKind::R:
          p.el.kind = ElementKind::DType;
          p.el.parameter = euler ? be.parameter : 1.0 / be.parameter;
          break;
        case BondElementKind::C:
          p.el.kind = euler ? ElementKind::AType : ElementKind::TType;
          p.el.parameter = be.parameter;
          break;
        case BondElementKind::I:
          p.el.kind = euler ? ElementKind::TType : ElementKind::AType;
          p.el.parameter = be.parameter;
          break;
        default: break;
      }
    } else {
      if (at.in.size() != 1 || at.out.size() != 1)
        throw detail::topology_error("two-port '" + be.id + "' needs exactly one incoming and one outgoing bond", {be.id});
      const std::size_t ba = at.in[0], bb = at.out[0];
      if (!bond_domain[ba] || !bond_domain[bb])
        throw Error(ErrorCode::UnknownDomain, "two-port '" + be.id + "' is not attached to junctions on both sides", {be.id});
      std::tie(p.a_from, p.a_to) = slots(ba, true);
      p.a_lo = lo(ba);
      p.b_slots = slots(bb, false);
      p.domain = *bond_domain[ba];
      const bool ea = domain_view(*bond_domain[ba]) == View::Eulerian;
      const bool eb = domain_view(*bond_domain[bb]) == View::Eulerian;
      const double n = be.parameter;
      // A side in the Lagrangian view swaps the roles of effort and flow, which
      // turns a transforming coupling into a gyrating one and vice versa.
      const bool same_view = ea == eb;
      const bool transformer = (be.kind == BondElementKind::TF) == same_view;
      p.el.kind = transformer ? ElementKind::Transformer : ElementKind::Gyrator;
      p.el.parameter = ea ? n : 1.0 / n;
    }
    pending.push_back(std::move(p));
  }

  // Nodes: terminal classes touched by at least one element.
  std::map<std::size_t, std::string> class_name;  // root -> name
  std::map<std::size_t, PhysicalDomain> class_domain;
  std::vector<std::size_t> class_order;            // first appearance
  auto touch = [&](std::size_t slot, PhysicalDomain d) {
    const auto root = dsu.find(slot);
    if (class_domain.emplace(root, d).second) class_order.push_back(root);
  };
  for (const auto& p : pending) {
    touch(p.a_from, p.domain);
    touch(p.a_to, p.domain);
    if (p.b_slots) {
      const auto d = *bond_domain[attach[elem_idx[p.el.id]].out[0]];
      touch(p.b_slots->first, d);
      touch(p.b_slots->second, d);
    }
  }
  for (std::size_t b = 0; b < bg.bonds.size(); ++b) {
    auto label = [&](std::size_t slot, const std::optional<std::string>& name) {
      if (!name) return;
      const auto root = dsu.find(slot);
      if (!class_domain.count(root)) return;
      auto [it, fresh] = class_name.emplace(root, *name);
      if (!fresh && it->second != *name)
        throw detail::topology_error("node labels '" + it->second + "' and '" + *name + "' name the same junction node", {it->second, *name});
    };
    label(hi(b), bg.bonds[b].hi);
    label(lo(b), bg.bonds[b].lo);
  }
  std::set<std::string> used_names;
  for (const auto& [root, nm] : class_name)
    if (!used_names.insert(nm).second)
      throw detail::topology_error("node label '" + nm + "' names two distinct junction nodes", {nm});
  std::size_t auto_id = 0;
  for (auto root : class_order)
    if (!class_name.count(root)) {
      std::string nm;
      do nm = "n" + std::to_string(++auto_id);
      while (used_names.count(nm));
      used_names.insert(nm);
      class_name[root] = nm;
    }

  // Node order: declared nodes first (in declaration order), then the rest in
  // order of first appearance.
  std::map<std::string, std::size_t> root_of;
  for (const auto& [root, nm] : class_name) root_of[nm] = root;
  std::vector<Node> nodes;
  std::set<std::size_t> placed;
  for (const auto& decl : bg.nodes) {
    auto it = root_of.find(decl.id);
    if (it == root_of.end()) throw Error(ErrorCode::InvalidModel, "declared node '" + decl.id + "' does not appear in the bond graph", {decl.id});
    if (decl.domain != class_domain[it->second])
      throw Error(ErrorCode::InvalidModel, "declared node '" + decl.id + "' has the wrong domain", {decl.id});
    nodes.push_back(decl);
    placed.insert(it->second);
  }
  for (auto root : class_order)
    if (!placed.count(root)) nodes.push_back({class_name[root], class_domain[root], false});

  // Default ground: lo terminal of the first element in each ungrounded subnet.
  {
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < nodes.size(); ++i) pos[nodes[i].id] = i;
    DisjointSets net(nodes.size());
    auto idx = [&](std::size_t slot) { return pos[class_name[dsu.find(slot)]]; };
    for (const auto& p : pending) {
      net.unite(idx(p.a_from), idx(p.a_to));
      if (p.b_slots) net.unite(idx(p.b_slots->first), idx(p.b_slots->second));
    }
    std::set<std::size_t> grounded;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].is_ground) grounded.insert(net.find(i));
    for (const auto& p : pending) {
      const auto i = idx(p.a_lo);
      if (grounded.insert(net.find(i)).second) nodes[i].is_ground = true;
      if (p.b_slots) {
        const auto j = idx(p.b_slots->first);
        if (grounded.insert(net.find(j)).second) nodes[j].is_ground = true;
      }
    }
  }

  std::vector<Element> elements;
  for (auto& p : pending) {
    auto name = [&](std::size_t slot) { return class_name[dsu.find(slot)]; };
    p.el.port = {name(p.a_from), name(p.a_to)};
    if (p.b_slots) p.el.side_b = Port{name(p.b_slots->first), name(p.b_slots->second)};
    elements.push_back(std::move(p.el));
  }
  return SystemModel(bg.name, std::move(nodes), std::move(elements));
}

}  // namespace hfnet
