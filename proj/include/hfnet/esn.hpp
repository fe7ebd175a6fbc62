#pragma once

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hfnet/model.hpp"
#include "hfnet/validate.hpp"

namespace hfnet {

enum class Process {
  InjectPowerAcrossImposed,
  InjectPowerThroughImposed,
  DissipatePower,
  StorePotentialEnergy,
  StoreKineticEnergy,
  TransformPower,
  GyratePower,
};

constexpr std::string_view to_string(Process p) {
  switch (p) {
    case Process::InjectPowerAcrossImposed: return "inject power (across imposed)";
    case Process::InjectPowerThroughImposed: return "inject power (through imposed)";
    case Process::DissipatePower: return "dissipate power";
    case Process::StorePotentialEnergy: return "store potential energy";
    case Process::StoreKineticEnergy: return "store kinetic energy";
    case Process::TransformPower: return "transform power";
    case Process::GyratePower: return "gyrate power";
  }
  return "";
}

struct Arc {
  std::size_t buffer;
  double weight;
};

/// A (resource, process) pair. Gyrators contribute one capability per side
/// (`<id>:a`, `<id>:b`); every other element contributes exactly one.
struct Capability {
  std::string id;
  std::string resource_element;
  std::size_t element_index = 0;
  int side = 0;  // 1 only for a gyrator's side-b capability
  Process process = Process::DissipatePower;
  std::vector<Arc> pulls;
  std::vector<Arc> injects;
};

struct EngineeringSystemNet {
  std::vector<Node> buffers;
  std::vector<Capability> capabilities;
  Eigen::MatrixXd M_plus;
  Eigen::MatrixXd M_minus;

  Eigen::MatrixXd M() const { return M_plus - M_minus; }

  /// Indices of the non-ground buffers, in buffer order.
  std::vector<std::size_t> non_ground_buffers() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < buffers.size(); ++i)
      if (!buffers[i].is_ground) out.push_back(i);
    return out;
  }
  std::vector<std::string> capability_ids() const {
    std::vector<std::string> out;
    for (const auto& c : capabilities) out.push_back(c.id);
    return out;
  }
  std::vector<std::string> buffer_ids(bool include_ground = true) const {
    std::vector<std::string> out;
    for (const auto& b : buffers)
      if (include_ground || !b.is_ground) out.push_back(b.id);
    return out;
  }
};

struct Marking {
  Eigen::VectorXd Q_B;
  Eigen::VectorXd Q_E;
};

namespace detail {

inline Process storage_process(ElementKind k, View v) {
  const bool across_store = k == ElementKind::AType;
  // Eulerian A-types (capacitors) hold potential energy; Lagrangian A-types
  // (masses, inertias) hold kinetic energy. T-types are the complement.
  return (across_store == (v == View::Eulerian)) ? Process::StorePotentialEnergy : Process::StoreKineticEnergy;
}

/// Structural defects that make the net itself undefinable.
inline void require_structurally_valid(const SystemModel& m) {
  static const char* fatal[] = {"duplicate node id", "duplicate element id", "unknown terminal", "self loop",
                                "domain mismatch", "missing side b", "unexpected side b", "invalid parameter"};
  const auto report = validate_model(m);
  std::vector<std::string> problems;
  for (const auto& i : report.issues)
    for (const char* f : fatal)
      if (i.code == f) problems.push_back(i.code + ": " + i.message);
  if (!problems.empty()) throw Error(ErrorCode::InvalidModel, detail::join(problems, "; "));
}

}  // namespace detail

/// Builds the engineering system net: one buffer per node (grounds included),
/// capabilities in element declaration order.
inline EngineeringSystemNet build_esn(const SystemModel& m) {
  detail::require_structurally_valid(m);
  EngineeringSystemNet net;
  net.buffers = m.nodes();
  for (std::size_t e = 0; e < m.elements().size(); ++e) {
    const auto& el = m.elements()[e];
    const auto a1 = m.node_index(el.port.from), a2 = m.node_index(el.port.to);
    const View view = domain_view(m.element_domain(el));
    Capability c;
    c.id = el.id;
    c.resource_element = el.id;
    c.element_index = e;
    auto one_port = [&](Capability& cap, std::size_t from, std::size_t to, bool skip_ground) {
      if (!(skip_ground && net.buffers[from].is_ground)) cap.pulls.push_back({from, 1.0});
      if (!(skip_ground && net.buffers[to].is_ground)) cap.injects.push_back({to, 1.0});
    };
    switch (el.kind) {
      case ElementKind::AcrossSource:
      case ElementKind::ThroughSource:
        c.process = el.kind == ElementKind::AcrossSource ? Process::InjectPowerAcrossImposed : Process::InjectPowerThroughImposed;
        one_port(c, a1, a2, true);
        break;
      case ElementKind::DType:
        c.process = Process::DissipatePower;
        one_port(c, a1, a2, false);
        break;
      case ElementKind::AType:
      case ElementKind::TType:
        c.process = detail::storage_process(el.kind, view);
        one_port(c, a1, a2, false);
        break;
      case ElementKind::Transformer: {
        c.process = Process::TransformPower;
        one_port(c, a1, a2, false);
        auto b1 = m.node_index(el.side_b->from), b2 = m.node_index(el.side_b->to);
        const double r = el.parameter;
        if (r < 0) std::swap(b1, b2);
        c.pulls.push_back({b1, std::abs(r)});
        c.injects.push_back({b2, std::abs(r)});
        break;
      }
      case ElementKind::Gyrator: {
        c.id = el.id + ":a";
        c.process = Process::GyratePower;
        one_port(c, a1, a2, false);
        Capability cb = c;
        cb.id = el.id + ":b";
        cb.side = 1;
        cb.pulls.clear();
        cb.injects.clear();
        one_port(cb, m.node_index(el.side_b->from), m.node_index(el.side_b->to), false);
        net.capabilities.push_back(std::move(c));
        net.capabilities.push_back(std::move(cb));
        continue;
      }
    }
    net.capabilities.push_back(std::move(c));
  }
  const auto nb = static_cast<Eigen::Index>(net.buffers.size());
  const auto nc = static_cast<Eigen::Index>(net.capabilities.size());
  net.M_plus = Eigen::MatrixXd::Zero(nb, nc);
  net.M_minus = Eigen::MatrixXd::Zero(nb, nc);
  for (Eigen::Index j = 0; j < nc; ++j) {
    for (const auto& a : net.capabilities[j].injects) net.M_plus(a.buffer, j) += a.weight;
    for (const auto& a : net.capabilities[j].pulls) net.M_minus(a.buffer, j) += a.weight;
  }
  return net;
}

/// M with every ground row removed. Throws RankDeficient, naming the nodes of
/// the floating subnetwork(s), when the result lacks full row rank.
inline Eigen::MatrixXd reduced_incidence(const EngineeringSystemNet& net) {
  const auto keep = net.non_ground_buffers();
  const Eigen::MatrixXd M = net.M();
  Eigen::MatrixXd R(static_cast<Eigen::Index>(keep.size()), M.cols());
  for (std::size_t i = 0; i < keep.size(); ++i) R.row(static_cast<Eigen::Index>(i)) = M.row(static_cast<Eigen::Index>(keep[i]));
  if (R.rows() == 0) return R;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(R.transpose());
  lu.setThreshold(1e-10);
  if (lu.rank() < R.rows()) {
    // Left null space of R: nonzero coefficients mark the floating nodes.
    const Eigen::MatrixXd ker = lu.kernel();
    std::vector<std::string> nodes;
    for (Eigen::Index i = 0; i < ker.rows(); ++i)
      if (ker.row(i).cwiseAbs().maxCoeff() > 1e-9) nodes.push_back(net.buffers[keep[static_cast<std::size_t>(i)]].id);
    throw Error(ErrorCode::RankDeficient,
                "reduced incidence has rank " + std::to_string(lu.rank()) + " < " + std::to_string(R.rows()) +
                    "; floating subnetwork {" + detail::join(nodes) + "}",
                nodes);
  }
  return R;
}

/// Discrete state transition of the net over one step of length dT.
inline Marking esn_step(const EngineeringSystemNet& net, const Marking& Q, const Eigen::VectorXd& U_minus,
                        const Eigen::VectorXd& U_plus, double dT) {
  const auto nc = static_cast<Eigen::Index>(net.capabilities.size());
  const auto nb = static_cast<Eigen::Index>(net.buffers.size());
  if (U_minus.size() != nc || U_plus.size() != nc || Q.Q_E.size() != nc || Q.Q_B.size() != nb)
    throw Error(ErrorCode::DimensionMismatch, "esn_step: vector sizes do not match the net (" + std::to_string(nb) +
                                                  " buffers, " + std::to_string(nc) + " capabilities)");
  return {Q.Q_B + net.M_plus * U_plus * dT - net.M_minus * U_minus * dT, Q.Q_E - U_plus * dT + U_minus * dT};
}

// =====================================================================
// Matrix export
// =====================================================================

namespace detail {
/// Shortest text that reads back as exactly `v`.
inline std::string fmt_number(double v) {
  if (v == 0) return "0";  // normalises -0
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}
/// Six significant digits, for messages rather than data files.
inline std::string fmt_short(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}
}  // namespace detail

/// Dense CSV with a header row of column labels and a leading row-label column.
inline void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& M, const std::vector<std::string>& row_labels,
                             const std::vector<std::string>& col_labels) {
  os << "row";
  for (const auto& c : col_labels) os << ',' << c;
  os << '\n';
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    os << (static_cast<std::size_t>(i) < row_labels.size() ? row_labels[static_cast<std::size_t>(i)] : std::to_string(i));
    for (Eigen::Index j = 0; j < M.cols(); ++j) os << ',' << detail::fmt_number(M(i, j));
    os << '\n';
  }
}

/// One "row col value" line per nonzero (0-based indices), after a size header.
inline void write_matrix_triplets(std::ostream& os, const Eigen::MatrixXd& M) {
  os << "# rows " << M.rows() << " cols " << M.cols() << '\n';
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      if (M(i, j) != 0) os << i << ' ' << j << ' ' << detail::fmt_number(M(i, j)) << '\n';
}

}  // namespace hfnet
