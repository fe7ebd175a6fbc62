#pragma once

#include <Eigen/Dense>

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hfnet/esn.hpp"
#include "hfnet/normal_tree.hpp"
#include "hfnet/trajectories.hpp"

namespace hfnet {

/// Element variables as linear functions of the state and input vectors:
/// U = U_x·x + U_u·u, y = y_x·x + y_u·u.
struct Reconstruction {
  Eigen::MatrixXd U_x, U_u, y_x, y_u;
  std::vector<std::string> U_labels;
  std::vector<std::string> y_labels;
};

/// ẋ = A·x + B·u over named states and source inputs.
struct StateSpace {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  std::vector<std::string> state_names;
  std::vector<std::string> input_names;    // source element ids, declaration order
  std::vector<StateVar> state_variables;
  std::vector<SourceSignal> input_signals;
  Reconstruction recon;

  std::size_t n() const { return state_names.size(); }
  std::size_t m() const { return input_names.size(); }
};

namespace detail {

/// Layout of the algebraic unknowns: U (capabilities), y (non-ground nodes), ẋ.
struct AlgebraicLayout {
  std::size_t ncap, ny, nx;
  std::size_t U(std::size_t c) const { return c; }
  std::size_t y(std::size_t i) const { return ncap + i; }
  std::size_t xdot(std::size_t s) const { return ncap + ny + s; }
  std::size_t size() const { return ncap + ny + nx; }
};

/// Position of each node among the non-ground nodes (-1 for grounds).
inline std::vector<long> reduced_row_of(const EngineeringSystemNet& net) {
  std::vector<long> row(net.buffers.size(), -1);
  long r = 0;
  for (std::size_t i = 0; i < net.buffers.size(); ++i)
    if (!net.buffers[i].is_ground) row[i] = r++;
  return row;
}

inline void check_tree_usable(const NormalTree& tree) {
  if (tree.derivative_feedthrough)
    throw Error(ErrorCode::UnsupportedDerivativeFeedthrough,
                "storage elements {" + join(tree.feedthrough_elements) +
                    "} are slaved to a source; the state equation would need input derivatives",
                tree.feedthrough_elements);
  if (tree.dependent_storage)
    throw Error(ErrorCode::DependentStorage,
                "storage elements {" + join(tree.dependent_elements) + "} are not independent", tree.dependent_elements);
}

}  // namespace detail

/// Derives the state-space model by assembling every continuity and
/// constitutive law as a linear system E·z = F·x + G·u over the algebraic
/// unknowns z = [U, y, ẋ] and eliminating it with a dense LU.
inline StateSpace derive_state_space(const SystemModel& m, const NormalTree& tree) {
  detail::check_tree_usable(tree);
  const auto net = build_esn(m);
  const Eigen::MatrixXd Mr = reduced_incidence(net);
  const auto row_of = detail::reduced_row_of(net);
  const auto& els = m.elements();

  StateSpace ss;
  ss.state_variables = tree.state_variables;
  for (const auto& s : tree.state_variables) ss.state_names.push_back(s.name);
  std::map<std::size_t, std::size_t> input_of;  // element index -> input column
  for (std::size_t e = 0; e < els.size(); ++e)
    if (is_source(els[e].kind)) {
      input_of[e] = ss.input_names.size();
      ss.input_names.push_back(els[e].id);
      ss.input_signals.push_back(els[e].signal);
    }
  std::map<std::size_t, std::size_t> state_of;  // element index -> state index
  for (std::size_t s = 0; s < tree.state_variables.size(); ++s) state_of[tree.state_variables[s].element_index] = s;

  const detail::AlgebraicLayout L{net.capabilities.size(), static_cast<std::size_t>(Mr.rows()), ss.n()};
  const auto nz = static_cast<Eigen::Index>(L.size());
  const auto nx = static_cast<Eigen::Index>(ss.n());
  const auto nu = static_cast<Eigen::Index>(ss.m());
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(nz, nz), F = Eigen::MatrixXd::Zero(nz, nx), G = Eigen::MatrixXd::Zero(nz, nu);

  Eigen::Index row = 0;
  for (Eigen::Index i = 0; i < Mr.rows(); ++i, ++row)
    for (Eigen::Index j = 0; j < Mr.cols(); ++j) E(row, static_cast<Eigen::Index>(L.U(static_cast<std::size_t>(j)))) = Mr(i, j);

  // Adds coeff·((-M)^T y)_c to the current row.
  auto add_drop = [&](Eigen::Index r, std::size_t c, double coeff) {
    for (Eigen::Index i = 0; i < Mr.rows(); ++i)
      if (Mr(i, static_cast<Eigen::Index>(c)) != 0) E(r, static_cast<Eigen::Index>(L.y(static_cast<std::size_t>(i)))) -= coeff * Mr(i, static_cast<Eigen::Index>(c));
  };
  auto col_U = [&](std::size_t c) { return static_cast<Eigen::Index>(L.U(c)); };

  for (std::size_t c = 0; c < net.capabilities.size(); ++c) {
    const auto& cap = net.capabilities[c];
    const auto& el = els[cap.element_index];
    switch (el.kind) {
      case ElementKind::AcrossSource:  // rise t1 → t2 equals the signal
        add_drop(row, c, -1.0);
        G(row++, static_cast<Eigen::Index>(input_of[cap.element_index])) = 1.0;
        break;
      case ElementKind::ThroughSource:
        E(row, col_U(c)) = 1.0;
        G(row++, static_cast<Eigen::Index>(input_of[cap.element_index])) = 1.0;
        break;
      case ElementKind::DType:
        E(row, col_U(c)) = 1.0;
        add_drop(row++, c, -1.0 / el.parameter);
        break;
      case ElementKind::AType: {
        const auto s = static_cast<Eigen::Index>(state_of.at(cap.element_index));
        E(row, col_U(c)) = 1.0;  // U = C·ẋ
        E(row++, static_cast<Eigen::Index>(L.xdot(static_cast<std::size_t>(s)))) = -el.parameter;
        add_drop(row, c, 1.0);  // drop = x
        F(row++, s) = 1.0;
        break;
      }
      case ElementKind::TType: {
        const auto s = static_cast<Eigen::Index>(state_of.at(cap.element_index));
        E(row, col_U(c)) = 1.0;  // U = x
        F(row++, s) = 1.0;
        E(row, static_cast<Eigen::Index>(L.xdot(static_cast<std::size_t>(s)))) = 1.0;  // ẋ = drop / L
        add_drop(row++, c, -1.0 / el.parameter);
        break;
      }
      case ElementKind::Transformer:  // drop_a − r·rise_b = 0
        add_drop(row++, c, 1.0);
        break;
      case ElementKind::Gyrator: {
        const double g = el.parameter;
        const std::size_t other = cap.side == 0 ? c + 1 : c - 1;
        add_drop(row, c, 1.0);  // side a: drop_a − g·U_b = 0; side b: drop_b + g·U_a = 0
        E(row++, col_U(other)) = cap.side == 0 ? -g : g;
        break;
      }
    }
  }
  if (row != nz)
    throw Error(ErrorCode::SingularAlgebraicSystem,
                "algebraic system has " + std::to_string(row) + " equations for " + std::to_string(nz) + " unknowns");

  std::vector<std::string> z_labels;
  for (const auto& c : net.capabilities) z_labels.push_back("U:" + c.id);
  for (auto i : net.non_ground_buffers()) z_labels.push_back("y:" + net.buffers[i].id);
  for (const auto& s : ss.state_names) z_labels.push_back("d/dt " + s);

  Eigen::FullPivLU<Eigen::MatrixXd> lu(E);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) {
    const Eigen::MatrixXd ker = lu.kernel();
    std::vector<std::string> vars;
    for (Eigen::Index i = 0; i < ker.rows(); ++i)
      if (ker.row(i).cwiseAbs().maxCoeff() > 1e-9) vars.push_back(z_labels[static_cast<std::size_t>(i)]);
    throw Error(ErrorCode::SingularAlgebraicSystem, "cannot solve for {" + detail::join(vars) + "}", vars);
  }
  const Eigen::MatrixXd Zx = lu.solve(F), Zu = lu.solve(G);
  const auto ncap = static_cast<Eigen::Index>(L.ncap), ny = static_cast<Eigen::Index>(L.ny);
  ss.A = Zx.bottomRows(nx);
  ss.B = Zu.bottomRows(nx);
  ss.recon.U_x = Zx.topRows(ncap);
  ss.recon.U_u = Zu.topRows(ncap);
  ss.recon.y_x = Zx.middleRows(ncap, ny);
  ss.recon.y_u = Zu.middleRows(ncap, ny);
  ss.recon.U_labels = prefixed("U:", net.capability_ids());
  ss.recon.y_labels = prefixed("y:", net.buffer_ids(false));
  return ss;
}

/// Human-readable listing of the continuity and constitutive laws, one per line.
inline std::vector<std::string> law_listing(const SystemModel& m, const NormalTree& tree) {
  const auto net = build_esn(m);
  const Eigen::MatrixXd M = net.M();
  std::vector<std::string> out;
  auto term = [](double w, const std::string& var) {
    std::ostringstream os;
    os << (w < 0 ? "- " : "+ ");
    if (std::abs(w) != 1) os << detail::fmt_number(std::abs(w)) << "*";
    os << var;
    return os.str();
  };
  for (auto i : net.non_ground_buffers()) {
    std::string line = "continuity @" + net.buffers[i].id + ":";
    for (std::size_t c = 0; c < net.capabilities.size(); ++c)
      if (M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) != 0)
        line += " " + term(M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)), "U:" + net.capabilities[c].id);
    out.push_back(line + " = 0");
  }
  std::map<std::string, std::string> state_of;
  for (const auto& s : tree.state_variables) state_of[s.element] = s.name;
  auto drop = [&](const Port& p) {
    auto y = [&](const std::string& n) { return m.node(n).is_ground ? std::string("0") : "y:" + n; };
    return "(" + y(p.from) + " - " + y(p.to) + ")";
  };
  auto rise = [&](const Port& p) { return drop(Port{p.to, p.from}); };
  for (const auto& el : m.elements()) {
    const std::string p = detail::fmt_number(el.parameter);
    const std::string head = el.id + " [" + std::string(to_string(el.kind)) + "]: ";
    const auto st = state_of.count(el.id) ? " (state " + state_of[el.id] + ")" : std::string();
    switch (el.kind) {
      case ElementKind::AcrossSource: out.push_back(head + rise(el.port) + " = u:" + el.id); break;
      case ElementKind::ThroughSource: out.push_back(head + "U:" + el.id + " = u:" + el.id); break;
      case ElementKind::DType: out.push_back(head + "U:" + el.id + " = " + drop(el.port) + " / " + p); break;
      case ElementKind::AType: out.push_back(head + "U:" + el.id + " = " + p + " * d/dt " + drop(el.port) + st); break;
      case ElementKind::TType: out.push_back(head + "d/dt U:" + el.id + " = " + drop(el.port) + " / " + p + st); break;
      case ElementKind::Transformer:
        out.push_back(head + drop(el.port) + " = " + p + " * " + rise(*el.side_b) + "; side-b through = " + p + " * U:" + el.id);
        break;
      case ElementKind::Gyrator:
        out.push_back(head + drop(el.port) + " = " + p + " * U:" + el.id + ":b; " + drop(*el.side_b) + " = -" + p + " * U:" + el.id + ":a");
        break;
    }
  }
  return out;
}

}  // namespace hfnet
