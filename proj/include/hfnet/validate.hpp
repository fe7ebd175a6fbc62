#pragma once

#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hfnet/model.hpp"

namespace hfnet {

struct ValidationIssue {
  std::string code;  // short stable tag, e.g. "no ground node"
  std::string message;
  std::vector<std::string> subjects;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const { return issues.empty(); }
  bool contains(std::string_view code) const {
    for (const auto& i : issues)
      if (i.code == code) return true;
    return false;
  }
  std::string to_string() const {
    if (issues.empty()) return "ok\n";
    std::ostringstream os;
    for (const auto& i : issues) os << i.code << ": " << i.message << '\n';
    return os.str();
  }
};

namespace detail {

/// An undirected edge of the netlist graph: one per one-port element, one per
/// two-port side. `side` is 0 for one-ports and side a, 1 for side b.
struct GraphEdge {
  std::size_t element;
  int side;
  std::size_t u, v;
};

/// Edges whose terminals resolve; unresolved terminals are reported elsewhere.
inline std::vector<GraphEdge> graph_edges(const SystemModel& m) {
  std::vector<GraphEdge> edges;
  for (std::size_t e = 0; e < m.elements().size(); ++e) {
    const auto& el = m.elements()[e];
    auto add = [&](const Port& p, int side) {
      auto u = m.find_node(p.from), v = m.find_node(p.to);
      if (u && v) edges.push_back({e, side, *u, *v});
    };
    add(el.port, 0);
    if (is_two_port(el.kind) && el.side_b) add(*el.side_b, 1);
  }
  return edges;
}

inline std::vector<std::string> node_ids(const SystemModel& m, const std::vector<std::size_t>& idx) {
  std::vector<std::string> out;
  for (auto i : idx) out.push_back(m.nodes()[i].id);
  return out;
}

}  // namespace detail

/// Checks every structural invariant of a SystemModel. Never throws; an empty
/// report means the model is well-formed.
inline ValidationReport validate_model(const SystemModel& m) {
  ValidationReport r;
  auto issue = [&](std::string code, std::string msg, std::vector<std::string> subjects = {}) {
    r.issues.push_back({std::move(code), std::move(msg), std::move(subjects)});
  };

  if (m.ground_count() == 0) issue("no ground node", "model declares no ground node");

  std::set<std::string> seen;
  for (const auto& n : m.nodes())
    if (!seen.insert(n.id).second) issue("duplicate node id", "node id '" + n.id + "' declared more than once", {n.id});
  seen.clear();
  for (const auto& e : m.elements())
    if (!seen.insert(e.id).second) issue("duplicate element id", "element id '" + e.id + "' declared more than once", {e.id});

  bool any_source = false;
  for (const auto& e : m.elements()) {
    any_source = any_source || is_source(e.kind);
    auto check_port = [&](const Port& p, const char* what) -> bool {
      bool ok = true;
      for (const auto* t : {&p.from, &p.to})
        if (!m.find_node(*t)) {
          issue("unknown terminal", "element '" + e.id + "' " + what + " references unknown node '" + *t + "'", {e.id, *t});
          ok = false;
        }
      if (!ok) return false;
      if (p.from == p.to) {
        issue("self loop", "element '" + e.id + "' " + what + " connects node '" + p.from + "' to itself", {e.id});
        return false;
      }
      if (m.node(p.from).domain != m.node(p.to).domain) {
        issue("domain mismatch", "element '" + e.id + "' " + what + " spans two physical domains", {e.id});
        return false;
      }
      return true;
    };
    bool ports_ok = check_port(e.port, is_two_port(e.kind) ? "side a" : "terminals");
    if (is_two_port(e.kind)) {
      if (!e.side_b)
        issue("missing side b", "two-port element '" + e.id + "' has no side-b terminals", {e.id});
      else
        ports_ok = check_port(*e.side_b, "side b") && ports_ok;
    } else if (e.side_b) {
      issue("unexpected side b", "one-port element '" + e.id + "' declares side-b terminals", {e.id});
    }

    if (!std::isfinite(e.parameter))
      issue("invalid parameter", "element '" + e.id + "' has a non-finite parameter", {e.id});
    else if ((e.kind == ElementKind::DType || e.kind == ElementKind::AType || e.kind == ElementKind::TType) && !(e.parameter > 0))
      issue("invalid parameter", "element '" + e.id + "' requires a positive parameter", {e.id});
    else if (is_two_port(e.kind) && e.parameter == 0)
      issue("invalid parameter", "element '" + e.id + "' requires a nonzero ratio", {e.id});

    if (ports_ok && e.kind == ElementKind::TType && m.element_domain(e) == PhysicalDomain::Thermal)
      issue("thermal ttype", "element '" + e.id + "' is a T-type element in the thermal domain", {e.id});

    if (is_source(e.kind) && e.signal.kind == SourceSignal::Kind::SampledSeries) {
      for (std::size_t i = 1; i < e.signal.samples.size(); ++i)
        if (!(e.signal.samples[i].first > e.signal.samples[i - 1].first)) {
          issue("invalid signal", "source '" + e.id + "' samples are not strictly increasing in time", {e.id});
          break;
        }
      if (e.signal.samples.empty()) issue("invalid signal", "source '" + e.id + "' has an empty sample series", {e.id});
    }
  }
  if (!any_source) issue("no source element", "model contains no source element");

  // Connectivity and grounding per connected same-domain subnet.
  const auto edges = detail::graph_edges(m);
  const std::size_t n = m.nodes().size();
  DisjointSets dsu(n);
  for (const auto& ed : edges) dsu.unite(ed.u, ed.v);
  std::map<std::size_t, std::vector<std::size_t>> components;
  for (std::size_t i = 0; i < n; ++i) components[dsu.find(i)].push_back(i);
  std::set<PhysicalDomain> grounded_domains;
  for (const auto& nd : m.nodes())
    if (nd.is_ground) grounded_domains.insert(nd.domain);
  for (const auto& [root, members] : components) {
    std::vector<std::size_t> grounds;
    for (auto i : members)
      if (m.nodes()[i].is_ground) grounds.push_back(i);
    auto ids = detail::node_ids(m, members);
    if (grounds.size() > 1) {
      issue("multiple grounds", "subnet {" + detail::join(ids) + "} has grounds {" + detail::join(detail::node_ids(m, grounds)) + "}", ids);
    } else if (grounds.empty() && m.ground_count() > 0) {
      const auto d = m.nodes()[members.front()].domain;
      if (!grounded_domains.count(d))
        issue("missing ground", std::string(to_string(d)) + " subnet {" + detail::join(ids) + "} has no ground node", ids);
      else
        issue("disconnected subnet", "nodes {" + detail::join(ids) + "} have no path to a ground node", ids);
    }
  }

  // Ill-posed source topologies.
  DisjointSets across(n);
  for (const auto& ed : edges) {
    const auto& el = m.elements()[ed.element];
    if (el.kind == ElementKind::AcrossSource && !across.unite(ed.u, ed.v))
      issue("across source loop", "across source '" + el.id + "' closes a loop of across sources", {el.id});
  }
  DisjointSets others(n);
  for (const auto& ed : edges)
    if (m.elements()[ed.element].kind != ElementKind::ThroughSource) others.unite(ed.u, ed.v);
  for (const auto& ed : edges) {
    const auto& el = m.elements()[ed.element];
    if (el.kind == ElementKind::ThroughSource && !others.same(ed.u, ed.v))
      issue("through source cutset", "through source '" + el.id + "' lies in a cutset of through sources only", {el.id});
  }
  return r;
}

}  // namespace hfnet
