#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "hfnet/bondgraph.hpp"
#include "hfnet/model.hpp"

namespace hfnet {

/// Default simulation grid stored alongside a model.
struct GridSpec {
  double dt = 0.0;
  double horizon = 0.0;
};

struct LoadedModel {
  SystemModel model;
  std::optional<GridSpec> grid;
  std::optional<BondGraphModel> bondgraph;  // set when the file was a bond graph
};

namespace detail {

using nlohmann::json;

inline Error parse_error(const std::string& msg) { return Error(ErrorCode::Parse, msg); }

inline const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw parse_error(where + ": missing key '" + key + "'");
  return j.at(key);
}

inline std::string get_string(const json& j, const char* key, const std::string& where) {
  const auto& v = require(j, key, where);
  if (!v.is_string()) throw parse_error(where + ": '" + key + "' must be a string");
  return v.get<std::string>();
}

inline double get_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw parse_error(where + " must be a number");
  return v.get<double>();
}

inline PhysicalDomain get_domain(const json& j, const std::string& where) {
  const auto s = get_string(j, "domain", where);
  if (auto d = parse_domain(s)) return *d;
  throw Error(ErrorCode::UnknownDomain, where + ": unknown domain '" + s + "'");
}

inline SourceSignal parse_signal(const json& j, const std::string& where) {
  if (!j.contains("signal")) return SourceSignal::step(1.0);
  const auto& s = j.at("signal");
  const auto kind = s.value("kind", std::string("step"));
  if (kind == "step") return SourceSignal::step(s.contains("amplitude") ? get_number(s.at("amplitude"), where + ".signal.amplitude") : 1.0);
  if (kind == "sampled") {
    std::vector<std::pair<double, double>> samples;
    for (const auto& p : require(s, "samples", where + ".signal")) {
      if (!p.is_array() || p.size() != 2) throw parse_error(where + ".signal.samples entries must be [time, value]");
      samples.emplace_back(get_number(p[0], where + ".signal time"), get_number(p[1], where + ".signal value"));
    }
    return SourceSignal::sampled(std::move(samples));
  }
  throw parse_error(where + ": unknown signal kind '" + kind + "'");
}

/// `parameter` gives the linear-graph analog directly; `inverse_parameter`
/// gives its reciprocal (stiffness for springs, damping for dampers, ...).
inline double parse_parameter(const json& j, const std::string& where) {
  if (j.contains("parameter") && j.contains("inverse_parameter"))
    throw parse_error(where + ": give either 'parameter' or 'inverse_parameter', not both");
  if (j.contains("parameter")) return get_number(j.at("parameter"), where + ".parameter");
  if (j.contains("inverse_parameter")) return 1.0 / get_number(j.at("inverse_parameter"), where + ".inverse_parameter");
  return 0.0;
}

inline Port parse_port(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_string() || !j[1].is_string())
    throw parse_error(where + " must be a pair of node ids");
  return {j[0].get<std::string>(), j[1].get<std::string>()};
}

inline std::vector<Node> parse_nodes(const json& doc) {
  std::vector<Node> nodes;
  if (!doc.contains("nodes")) return nodes;
  std::size_t i = 0;
  for (const auto& n : doc.at("nodes")) {
    const std::string where = "nodes[" + std::to_string(i++) + "]";
    nodes.push_back({get_string(n, "id", where), get_domain(n, where), n.value("ground", false)});
  }
  return nodes;
}

inline std::optional<GridSpec> parse_grid(const json& doc) {
  if (!doc.contains("grid")) return std::nullopt;
  const auto& g = doc.at("grid");
  return GridSpec{get_number(require(g, "dt", "grid"), "grid.dt"), get_number(require(g, "horizon", "grid"), "grid.horizon")};
}

inline SystemModel parse_linear_graph(const json& doc) {
  std::vector<Element> elements;
  std::size_t i = 0;
  for (const auto& e : require(doc, "elements", "model")) {
    const std::string where = "elements[" + std::to_string(i++) + "]";
    Element el;
    el.id = get_string(e, "id", where);
    const auto kind = get_string(e, "kind", where);
    auto k = parse_element_kind(kind);
    if (!k) throw parse_error(where + ": unknown element kind '" + kind + "'");
    el.kind = *k;
    el.parameter = parse_parameter(e, where);
    const auto& t = require(e, "terminals", where);
    if (is_two_port(el.kind)) {
      if (!t.is_array() || t.size() != 2) throw parse_error(where + ".terminals must hold side a and side b pairs");
      el.port = parse_port(t[0], where + ".terminals[0]");
      el.side_b = parse_port(t[1], where + ".terminals[1]");
    } else {
      el.port = parse_port(t, where + ".terminals");
    }
    if (is_source(el.kind)) el.signal = parse_signal(e, where);
    elements.push_back(std::move(el));
  }
  return SystemModel(doc.value("name", std::string()), parse_nodes(doc), std::move(elements));
}

inline BondGraphModel parse_bond_graph(const json& doc) {
  BondGraphModel bg;
  bg.name = doc.value("name", std::string());
  bg.nodes = parse_nodes(doc);
  std::size_t i = 0;
  for (const auto& e : require(doc, "elements", "bond graph")) {
    const std::string where = "elements[" + std::to_string(i++) + "]";
    BondElement be;
    be.id = get_string(e, "id", where);
    const auto kind = get_string(e, "kind", where);
    auto k = parse_bond_element_kind(kind);
    if (!k) throw parse_error(where + ": unknown bond-graph element kind '" + kind + "'");
    be.kind = *k;
    be.parameter = parse_parameter(e, where);
    if (be.kind == BondElementKind::EffortSource || be.kind == BondElementKind::FlowSource) be.signal = parse_signal(e, where);
    bg.elements.push_back(std::move(be));
  }
  i = 0;
  for (const auto& j : require(doc, "junctions", "bond graph")) {
    const std::string where = "junctions[" + std::to_string(i++) + "]";
    Junction jn;
    jn.id = get_string(j, "id", where);
    const auto type = get_string(j, "type", where);
    if (type == "0") jn.type = Junction::Type::Zero;
    else if (type == "1") jn.type = Junction::Type::One;
    else throw parse_error(where + ": junction type must be \"0\" or \"1\"");
    if (j.contains("domain")) jn.domain = get_domain(j, where);
    bg.junctions.push_back(std::move(jn));
  }
  i = 0;
  for (const auto& b : require(doc, "bonds", "bond graph")) {
    const std::string where = "bonds[" + std::to_string(i++) + "]";
    Bond bond{get_string(b, "from", where), get_string(b, "to", where), std::nullopt, std::nullopt};
    if (b.contains("hi")) bond.hi = get_string(b, "hi", where);
    if (b.contains("lo")) bond.lo = get_string(b, "lo", where);
    bg.bonds.push_back(std::move(bond));
  }
  return bg;
}

}  // namespace detail

/// Parses a model document (linear graph, or bond graph when `bondgraph` is true).
inline LoadedModel parse_model(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::Parse, e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::Parse, "model document must be a JSON object");
  try {
    LoadedModel out;
    out.grid = detail::parse_grid(doc);
    if (doc.value("bondgraph", false)) {
      out.bondgraph = detail::parse_bond_graph(doc);
      out.model = bondgraph_to_lineargraph(*out.bondgraph);
    } else {
      out.model = detail::parse_linear_graph(doc);
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, e.what());
  }
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'", {path.string()});
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline LoadedModel load_model(const std::filesystem::path& path) { return parse_model(read_text_file(path)); }

/// Serialises a linear-graph model in the same schema parse_model reads.
inline nlohmann::json to_json(const SystemModel& m) {
  using nlohmann::json;
  json doc;
  doc["name"] = m.name();
  doc["nodes"] = json::array();
  for (const auto& n : m.nodes()) {
    json jn{{"id", n.id}, {"domain", std::string(to_string(n.domain))}};
    if (n.is_ground) jn["ground"] = true;
    doc["nodes"].push_back(jn);
  }
  doc["elements"] = json::array();
  for (const auto& e : m.elements()) {
    json je{{"id", e.id}, {"kind", std::string(to_string(e.kind))}};
    if (!is_source(e.kind)) je["parameter"] = e.parameter;
    if (e.side_b)
      je["terminals"] = json::array({json::array({e.port.from, e.port.to}), json::array({e.side_b->from, e.side_b->to})});
    else
      je["terminals"] = json::array({e.port.from, e.port.to});
    if (is_source(e.kind)) {
      if (e.signal.kind == SourceSignal::Kind::Step) {
        je["signal"] = {{"kind", "step"}, {"amplitude", e.signal.amplitude}};
      } else {
        json samples = json::array();
        for (const auto& [t, v] : e.signal.samples) samples.push_back(json::array({t, v}));
        je["signal"] = {{"kind", "sampled"}, {"samples", samples}};
      }
    }
    doc["elements"].push_back(je);
  }
  return doc;
}

}  // namespace hfnet
