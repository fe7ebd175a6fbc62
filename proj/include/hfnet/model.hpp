#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hfnet/error.hpp"

namespace hfnet {

// =====================================================================
// Physical domains
// =====================================================================

enum class PhysicalDomain { Electrical, TranslationalMechanical, RotationalMechanical, Fluidic, Thermal };

/// Observer convention fixing which bond-graph variable (effort or flow)
/// plays the role of the across variable.
enum class View { Eulerian, Lagrangian };

constexpr View domain_view(PhysicalDomain d) {
  switch (d) {
    case PhysicalDomain::TranslationalMechanical:
    case PhysicalDomain::RotationalMechanical:
      return View::Lagrangian;
    case PhysicalDomain::Electrical:
    case PhysicalDomain::Fluidic:
    case PhysicalDomain::Thermal:
      return View::Eulerian;
  }
  return View::Eulerian;
}

struct DomainQuantities {
  std::string_view across;
  std::string_view through;
  std::string_view across_symbol;   // prefix used in state-variable names
  std::string_view through_symbol;
};

constexpr DomainQuantities quantities(PhysicalDomain d) {
  switch (d) {
    case PhysicalDomain::Electrical: return {"voltage", "current", "V", "i"};
    case PhysicalDomain::TranslationalMechanical: return {"velocity", "force", "v", "F"};
    case PhysicalDomain::RotationalMechanical: return {"angular velocity", "torque", "w", "tau"};
    case PhysicalDomain::Fluidic: return {"pressure", "volumetric flow rate", "P", "Q"};
    case PhysicalDomain::Thermal: return {"temperature", "heat flow rate", "T", "q"};
  }
  return {"", "", "", ""};
}

constexpr std::string_view to_string(PhysicalDomain d) {
  switch (d) {
    case PhysicalDomain::Electrical: return "electrical";
    case PhysicalDomain::TranslationalMechanical: return "translational";
    case PhysicalDomain::RotationalMechanical: return "rotational";
    case PhysicalDomain::Fluidic: return "fluidic";
    case PhysicalDomain::Thermal: return "thermal";
  }
  return "";
}

inline std::optional<PhysicalDomain> parse_domain(std::string_view s) {
  if (s == "electrical") return PhysicalDomain::Electrical;
  if (s == "translational" || s == "translational_mechanical") return PhysicalDomain::TranslationalMechanical;
  if (s == "rotational" || s == "rotational_mechanical") return PhysicalDomain::RotationalMechanical;
  if (s == "fluidic") return PhysicalDomain::Fluidic;
  if (s == "thermal") return PhysicalDomain::Thermal;
  return std::nullopt;
}

// =====================================================================
// Elements
// =====================================================================

enum class ElementKind { AcrossSource, ThroughSource, DType, AType, TType, Transformer, Gyrator };

constexpr std::string_view to_string(ElementKind k) {
  switch (k) {
    case ElementKind::AcrossSource: return "across_source";
    case ElementKind::ThroughSource: return "through_source";
    case ElementKind::DType: return "dtype";
    case ElementKind::AType: return "atype";
    case ElementKind::TType: return "ttype";
    case ElementKind::Transformer: return "transformer";
    case ElementKind::Gyrator: return "gyrator";
  }
  return "";
}

inline std::optional<ElementKind> parse_element_kind(std::string_view s) {
  for (auto k : {ElementKind::AcrossSource, ElementKind::ThroughSource, ElementKind::DType, ElementKind::AType,
                 ElementKind::TType, ElementKind::Transformer, ElementKind::Gyrator})
    if (s == to_string(k)) return k;
  return std::nullopt;
}

constexpr bool is_source(ElementKind k) { return k == ElementKind::AcrossSource || k == ElementKind::ThroughSource; }
constexpr bool is_two_port(ElementKind k) { return k == ElementKind::Transformer || k == ElementKind::Gyrator; }

/// Time-varying value driven by a source element.
struct SourceSignal {
  enum class Kind { Step, SampledSeries };
  Kind kind = Kind::Step;
  double amplitude = 1.0;
  std::vector<std::pair<double, double>> samples;  // (time, value), ascending time

  static SourceSignal step(double a) { return {Kind::Step, a, {}}; }
  static SourceSignal sampled(std::vector<std::pair<double, double>> s) { return {Kind::SampledSeries, 0.0, std::move(s)}; }

  /// Zero-order hold for sampled series; a step is constant on the grid.
  double value_at(double t) const {
    if (kind == Kind::Step) return amplitude;
    if (samples.empty()) return 0.0;
    const double eps = 1e-12 * std::max(1.0, std::abs(t));
    auto it = std::upper_bound(samples.begin(), samples.end(), t + eps,
                               [](double v, const auto& s) { return v < s.first; });
    if (it == samples.begin()) return samples.front().second;
    return std::prev(it)->second;
  }

  bool covers(double t0, double t1) const {
    if (kind == Kind::Step) return true;
    if (samples.empty()) return false;
    const double eps = 1e-12 * std::max({1.0, std::abs(t0), std::abs(t1)});
    return samples.front().first <= t0 + eps && samples.back().first >= t1 - eps;
  }

  bool operator==(const SourceSignal&) const = default;
};

/// Ordered terminal pair; positive through flows first → second inside the element.
struct Port {
  std::string from;
  std::string to;
  bool operator==(const Port&) const = default;
};

struct Element {
  std::string id;
  ElementKind kind = ElementKind::DType;
  /// Resistance-, capacitance- or inductance-analog for D/A/T types, ratio for
  /// Transformer, gyration coefficient for Gyrator, unused for sources.
  double parameter = 0.0;
  Port port;                 // one-port terminals, or side a of a two-port
  std::optional<Port> side_b;
  SourceSignal signal = SourceSignal::step(1.0);

  bool operator==(const Element&) const = default;
};

struct Node {
  std::string id;
  PhysicalDomain domain = PhysicalDomain::Electrical;
  bool is_ground = false;
  bool operator==(const Node&) const = default;
};

// =====================================================================
// System model
// =====================================================================

/// Immutable netlist. Lookups by id resolve to the first declaration; duplicate
/// ids are reported by validate_model rather than rejected here.
class SystemModel {
 public:
  SystemModel() = default;
  SystemModel(std::string name, std::vector<Node> nodes, std::vector<Element> elements)
      : name_(std::move(name)), nodes_(std::move(nodes)), elements_(std::move(elements)) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) node_index_.emplace(nodes_[i].id, i);
    for (std::size_t i = 0; i < elements_.size(); ++i) element_index_.emplace(elements_[i].id, i);
  }

  const std::string& name() const { return name_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Element>& elements() const { return elements_; }

  std::optional<std::size_t> find_node(std::string_view id) const {
    auto it = node_index_.find(std::string(id));
    if (it == node_index_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<std::size_t> find_element(std::string_view id) const {
    auto it = element_index_.find(std::string(id));
    if (it == element_index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t node_index(std::string_view id) const {
    if (auto i = find_node(id)) return *i;
    throw Error(ErrorCode::InvalidModel, "unknown node '" + std::string(id) + "'", {std::string(id)});
  }
  const Node& node(std::string_view id) const { return nodes_[node_index(id)]; }
  const Element& element(std::string_view id) const {
    if (auto i = find_element(id)) return elements_[*i];
    throw Error(ErrorCode::InvalidModel, "unknown element '" + std::string(id) + "'", {std::string(id)});
  }

  std::size_t ground_count() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_ground; }));
  }

  /// Domain of an element's side-a terminals (of the element for one-ports).
  PhysicalDomain element_domain(const Element& e) const { return node(e.port.from).domain; }

  bool operator==(const SystemModel& o) const {
    return name_ == o.name_ && nodes_ == o.nodes_ && elements_ == o.elements_;
  }

 private:
  std::string name_;
  std::vector<Node> nodes_;
  std::vector<Element> elements_;
  std::unordered_map<std::string, std::size_t> node_index_;
  std::unordered_map<std::string, std::size_t> element_index_;
};

/// Structural equality ignoring model names.
inline bool same_netlist(const SystemModel& a, const SystemModel& b) {
  return a.nodes() == b.nodes() && a.elements() == b.elements();
}

// =====================================================================
// Disjoint-set union, shared by validation, tree building and conversion
// =====================================================================

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n = 0) : parent_(n), rank_(n, 0) {
    for (std::size_t i = 0; i < n; ++i) parent_[i] = i;
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  /// Returns false when a and b were already joined (the edge closes a loop).
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    return true;
  }
  bool same(std::size_t a, std::size_t b) { return find(a) == find(b); }
  std::size_t size() const { return parent_.size(); }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> rank_;
};

}  // namespace hfnet
