#pragma once

#include <algorithm>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "hfnet/model.hpp"

namespace hfnet {

/// One graph edge: a one-port element, or one side of a two-port.
struct Branch {
  std::size_t element = 0;
  int side = 0;  // 0: one-port or side a; 1: side b
  std::string id;  // element id, suffixed ":a"/":b" for two-port sides
  std::size_t u = 0, v = 0;  // node indices
};

struct StateVar {
  enum class Variable { AcrossOfATypeInTree, ThroughOfTTypeInCotree };
  std::string element;
  std::size_t element_index = 0;
  Variable variable = Variable::AcrossOfATypeInTree;
  std::string name;
};

struct NormalTree {
  std::vector<std::string> tree_elements;  // insertion order
  std::vector<std::string> link_elements;  // declaration order
  std::vector<StateVar> state_variables;
  std::vector<Branch> tree_branches;
  std::vector<Branch> link_branches;

  /// Set when an A-type had to be left out of the tree or a T-type had to be
  /// put in: storage elements whose states are not independent.
  bool dependent_storage = false;
  std::vector<std::string> dependent_elements;
  /// Subset of the above where the dependency runs through a source, so the
  /// state equation would need the derivative of an input.
  bool derivative_feedthrough = false;
  std::vector<std::string> feedthrough_elements;

  bool in_tree(std::string_view branch_id) const {
    return std::find(tree_elements.begin(), tree_elements.end(), branch_id) != tree_elements.end();
  }
};

namespace detail {

inline std::vector<Branch> branches(const SystemModel& m) {
  std::vector<Branch> out;
  for (std::size_t e = 0; e < m.elements().size(); ++e) {
    const auto& el = m.elements()[e];
    if (is_two_port(el.kind)) {
      out.push_back({e, 0, el.id + ":a", m.node_index(el.port.from), m.node_index(el.port.to)});
      out.push_back({e, 1, el.id + ":b", m.node_index(el.side_b->from), m.node_index(el.side_b->to)});
    } else {
      out.push_back({e, 0, el.id, m.node_index(el.port.from), m.node_index(el.port.to)});
    }
  }
  return out;
}

inline std::string state_name(const SystemModel& m, const Element& el, bool across) {
  const auto q = quantities(m.element_domain(el));
  return std::string(across ? q.across_symbol : q.through_symbol) + "_" + el.id;
}

/// Branches on the tree path between nodes a and b (empty if a == b or no path).
inline std::vector<const Branch*> tree_path(std::size_t n_nodes, const std::vector<Branch>& tree, std::size_t a, std::size_t b) {
  std::vector<std::vector<const Branch*>> adj(n_nodes);
  for (const auto& br : tree) {
    adj[br.u].push_back(&br);
    adj[br.v].push_back(&br);
  }
  std::vector<const Branch*> via(n_nodes, nullptr);
  std::vector<bool> seen(n_nodes, false);
  std::deque<std::size_t> q{a};
  seen[a] = true;
  while (!q.empty()) {
    auto x = q.front();
    q.pop_front();
    if (x == b) break;
    for (const auto* br : adj[x]) {
      auto y = br->u == x ? br->v : br->u;
      if (!seen[y]) {
        seen[y] = true;
        via[y] = br;
        q.push_back(y);
      }
    }
  }
  std::vector<const Branch*> path;
  if (!seen[b]) return path;
  for (auto x = b; x != a;) {
    path.push_back(via[x]);
    x = via[x]->u == x ? via[x]->v : via[x]->u;
  }
  return path;
}

}  // namespace detail

/// Greedy normal-tree construction. Priority: across sources, A-types,
/// transformers (one side) and gyrators (both sides or neither), D-types,
/// T-types, through sources; ties broken by declaration order. Any branch
/// that would close a loop goes to the cotree.
inline NormalTree build_normal_tree(const SystemModel& m) {
  const auto all = detail::branches(m);
  const auto& els = m.elements();
  DisjointSets dsu(m.nodes().size());
  std::vector<bool> in_tree(all.size(), false);
  NormalTree t;

  auto add = [&](std::size_t i) {
    in_tree[i] = true;
    dsu.unite(all[i].u, all[i].v);
    t.tree_elements.push_back(all[i].id);
    t.tree_branches.push_back(all[i]);
  };
  auto fits = [&](std::size_t i) { return !dsu.same(all[i].u, all[i].v); };
  auto each = [&](ElementKind k, auto&& f) {
    for (std::size_t i = 0; i < all.size(); ++i)
      if (els[all[i].element].kind == k) f(i);
  };

  each(ElementKind::AcrossSource, [&](std::size_t i) {
    if (!fits(i))
      throw Error(ErrorCode::AcrossSourceLoop, "across source '" + all[i].id + "' closes a loop of across sources", {all[i].id});
    add(i);
  });
  each(ElementKind::AType, [&](std::size_t i) {
    if (fits(i)) add(i);
  });
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto kind = els[all[i].element].kind;
    if (all[i].side != 0 || !is_two_port(kind)) continue;
    const std::size_t a = i, b = i + 1;
    if (kind == ElementKind::Transformer) {
      if (fits(a)) add(a);
      else if (fits(b)) add(b);
    } else if (fits(a)) {
      // Both sides or neither: side b must still fit once side a is in.
      DisjointSets probe = dsu;
      probe.unite(all[a].u, all[a].v);
      if (!probe.same(all[b].u, all[b].v)) {
        add(a);
        add(b);
      }
    }
  }
  each(ElementKind::DType, [&](std::size_t i) {
    if (fits(i)) add(i);
  });
  each(ElementKind::TType, [&](std::size_t i) {
    if (fits(i)) add(i);
  });
  each(ElementKind::ThroughSource, [&](std::size_t i) {
    if (fits(i))
      throw Error(ErrorCode::ThroughSourceCutset,
                  "through source '" + all[i].id + "' is forced into the normal tree (it forms a cutset of through sources)",
                  {all[i].id});
  });

  for (std::size_t i = 0; i < all.size(); ++i)
    if (!in_tree[i]) {
      t.link_elements.push_back(all[i].id);
      t.link_branches.push_back(all[i]);
    }

  // State variables: tree A-types first (tree order), then cotree T-types.
  for (const auto& br : t.tree_branches)
    if (els[br.element].kind == ElementKind::AType)
      t.state_variables.push_back({els[br.element].id, br.element, StateVar::Variable::AcrossOfATypeInTree,
                                   detail::state_name(m, els[br.element], true)});
  for (const auto& br : t.link_branches)
    if (els[br.element].kind == ElementKind::TType)
      t.state_variables.push_back({els[br.element].id, br.element, StateVar::Variable::ThroughOfTTypeInCotree,
                                   detail::state_name(m, els[br.element], false)});

  // Dependent storage and whether it is tied to a source.
  const auto n = m.nodes().size();
  for (const auto& br : t.link_branches)
    if (els[br.element].kind == ElementKind::AType) {
      t.dependent_storage = true;
      t.dependent_elements.push_back(br.id);
      for (const auto* p : detail::tree_path(n, t.tree_branches, br.u, br.v))
        if (els[p->element].kind == ElementKind::AcrossSource) {
          t.derivative_feedthrough = true;
          t.feedthrough_elements.push_back(br.id);
          break;
        }
    }
  for (const auto& br : t.tree_branches)
    if (els[br.element].kind == ElementKind::TType) {
      t.dependent_storage = true;
      t.dependent_elements.push_back(br.id);
    }
  for (const auto& br : t.link_branches)
    if (els[br.element].kind == ElementKind::ThroughSource)
      for (const auto* p : detail::tree_path(n, t.tree_branches, br.u, br.v))
        if (els[p->element].kind == ElementKind::TType) {
          t.derivative_feedthrough = true;
          t.feedthrough_elements.push_back(p->id);
        }
  return t;
}

/// Tree members ordered by priority class then id, links by id: a stable
/// presentation independent of declaration order.
inline std::pair<std::vector<std::string>, std::vector<std::string>> canonical_listing(const SystemModel& m, const NormalTree& t) {
  auto rank = [&](const Branch& b) {
    switch (m.elements()[b.element].kind) {
      case ElementKind::AcrossSource: return 0;
      case ElementKind::AType: return 1;
      case ElementKind::Transformer:
      case ElementKind::Gyrator: return 2;
      case ElementKind::DType: return 3;
      case ElementKind::TType: return 4;
      case ElementKind::ThroughSource: return 5;
    }
    return 6;
  };
  auto tree = t.tree_branches;
  std::stable_sort(tree.begin(), tree.end(), [&](const Branch& a, const Branch& b) {
    return std::pair(rank(a), a.id) < std::pair(rank(b), b.id);
  });
  std::vector<std::string> tree_ids, link_ids = t.link_elements;
  for (const auto& b : tree) tree_ids.push_back(b.id);
  std::sort(link_ids.begin(), link_ids.end());
  return {tree_ids, link_ids};
}

}  // namespace hfnet
