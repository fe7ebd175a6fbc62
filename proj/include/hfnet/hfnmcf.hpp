#pragma once

#include <Eigen/Dense>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <Eigen/SparseQR>

#include <algorithm>
#include <map>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "hfnet/esn.hpp"
#include "hfnet/oracle.hpp"
#include "hfnet/trajectories.hpp"

namespace hfnet {

/// Flat index of every unknown: per step k, the U[k] block (capabilities)
/// followed by the y[k] block (non-ground buffers).
struct VariableLayout {
  std::size_t ncap = 0;
  std::size_t ny = 0;
  std::size_t K = 0;
  std::vector<std::string> cap_ids;
  std::vector<std::string> node_ids;

  std::size_t block() const { return ncap + ny; }
  std::size_t size() const { return K * block(); }
  std::size_t U(std::size_t c, std::size_t k) const { return k * block() + c; }
  std::size_t y(std::size_t i, std::size_t k) const { return k * block() + ncap + i; }

  /// "U:<capability>@k" or "y:<node>@k", with k counted from 1.
  std::string label(std::size_t index) const {
    const auto k = index / block(), j = index % block();
    const auto step = "@" + std::to_string(k + 1);
    return j < ncap ? "U:" + cap_ids[j] + step : "y:" + node_ids[j - ncap] + step;
  }
};

enum class RowBlock { Continuity, SourceU, SourceY, RLaw, LLaw, CLaw, TransformerLaw, GyratorLaw, InitU, InitY };

constexpr std::string_view to_string(RowBlock b) {
  switch (b) {
    case RowBlock::Continuity: return "Continuity";
    case RowBlock::SourceU: return "SourceU";
    case RowBlock::SourceY: return "SourceY";
    case RowBlock::RLaw: return "RLaw";
    case RowBlock::LLaw: return "LLaw";
    case RowBlock::CLaw: return "CLaw";
    case RowBlock::TransformerLaw: return "TransformerLaw";
    case RowBlock::GyratorLaw: return "GyratorLaw";
    case RowBlock::InitU: return "InitU";
    case RowBlock::InitY: return "InitY";
  }
  return "";
}

struct RowTag {
  RowBlock block;
  std::string subject;  // node id for continuity rows, capability id otherwise
  std::size_t k;        // 0-based step

  std::string to_string() const {
    std::string s = std::string(hfnet::to_string(block)) + "(" + subject + ")";
    if (block != RowBlock::InitU && block != RowBlock::InitY) s += "@" + std::to_string(k + 1);
    return s;
  }
};

struct ConstraintSystem {
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::VectorXd rhs;
  std::vector<RowTag> row_tags;
  VariableLayout layout;
  TimeGrid grid;

  std::size_t rows() const { return row_tags.size(); }
  std::size_t unknowns() const { return layout.size(); }

  Eigen::SparseMatrix<double> matrix() const {
    Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(unknowns()));
    A.setFromTriplets(triplets.begin(), triplets.end());
    A.makeCompressed();
    return A;
  }

  /// Triplet dump: size header, "row col value" lines, then rhs and row tags.
  void write(std::ostream& os) const {
    os << "# rows " << rows() << " unknowns " << unknowns() << '\n';
    for (const auto& t : triplets) os << t.row() << ' ' << t.col() << ' ' << detail::fmt_number(t.value()) << '\n';
    os << "# rhs\n";
    for (Eigen::Index i = 0; i < rhs.size(); ++i)
      os << i << ' ' << detail::fmt_number(rhs[i]) << ' ' << row_tags[static_cast<std::size_t>(i)].to_string() << '\n';
    os << "# unknowns\n";
    for (std::size_t j = 0; j < unknowns(); ++j) os << j << ' ' << layout.label(j) << '\n';
  }
};

namespace detail {

/// A-types that receive an initial-condition row: those the normal-tree
/// priority order (across sources, then A-types) places in the tree.
inline std::vector<bool> atypes_in_tree(const SystemModel& m) {
  DisjointSets dsu(m.nodes().size());
  std::vector<bool> in(m.elements().size(), false);
  for (auto kind : {ElementKind::AcrossSource, ElementKind::AType})
    for (std::size_t e = 0; e < m.elements().size(); ++e) {
      const auto& el = m.elements()[e];
      if (el.kind != kind) continue;
      if (dsu.unite(m.node_index(el.port.from), m.node_index(el.port.to))) in[e] = kind == ElementKind::AType;
    }
  return in;
}

}  // namespace detail

/// Assembles the Z = 0 HFNMCF program as one sparse linear system over the grid.
inline ConstraintSystem assemble(const SystemModel& m, const EngineeringSystemNet& net, const TimeGrid& grid,
                                 const InitialConditions& overrides = {}) {
  if (grid.K < 2 || !(grid.dT > 0)) throw Error(ErrorCode::InvalidGrid, "invalid time grid");
  const Eigen::MatrixXd Mr = reduced_incidence(net);
  const auto& els = m.elements();
  const std::size_t K = grid.K;
  const double dT = grid.dT;

  ConstraintSystem cs;
  cs.grid = grid;
  cs.layout = {net.capabilities.size(), static_cast<std::size_t>(Mr.rows()), K, net.capability_ids(), net.buffer_ids(false)};
  const auto& L = cs.layout;
  std::vector<double> rhs;

  auto new_row = [&](RowBlock b, const std::string& subject, std::size_t k, double value) {
    cs.row_tags.push_back({b, subject, k});
    rhs.push_back(value);
    return static_cast<int>(rhs.size() - 1);
  };
  auto put = [&](int r, std::size_t col, double v) {
    if (v != 0) cs.triplets.emplace_back(r, static_cast<int>(col), v);
  };
  // coeff·((−M)ᵀ y[k])_c
  auto put_drop = [&](int r, std::size_t c, std::size_t k, double coeff) {
    for (Eigen::Index i = 0; i < Mr.rows(); ++i) {
      const double w = Mr(i, static_cast<Eigen::Index>(c));
      if (w != 0) put(r, L.y(static_cast<std::size_t>(i), k), -coeff * w);
    }
  };

  for (std::size_t k = 0; k < K; ++k) {
    const double t = grid.time(k);
    for (Eigen::Index i = 0; i < Mr.rows(); ++i) {
      const int r = new_row(RowBlock::Continuity, L.node_ids[static_cast<std::size_t>(i)], k, 0.0);
      for (Eigen::Index j = 0; j < Mr.cols(); ++j) put(r, L.U(static_cast<std::size_t>(j), k), Mr(i, j));
    }
    for (std::size_t c = 0; c < net.capabilities.size(); ++c) {
      const auto& cap = net.capabilities[c];
      const auto& el = els[cap.element_index];
      switch (el.kind) {
        case ElementKind::ThroughSource: {
          put(new_row(RowBlock::SourceU, cap.id, k, el.signal.value_at(t)), L.U(c, k), 1.0);
          break;
        }
        case ElementKind::AcrossSource: {
          put_drop(new_row(RowBlock::SourceY, cap.id, k, el.signal.value_at(t)), c, k, -1.0);
          break;
        }
        case ElementKind::DType: {
          const int r = new_row(RowBlock::RLaw, cap.id, k, 0.0);
          put(r, L.U(c, k), 1.0);
          put_drop(r, c, k, -1.0 / el.parameter);
          break;
        }
        case ElementKind::TType:
          if (k + 1 < K) {
            const int r = new_row(RowBlock::LLaw, cap.id, k, 0.0);
            put(r, L.U(c, k + 1), 1.0);
            put(r, L.U(c, k), -1.0);
            put_drop(r, c, k, -dT / el.parameter);
          }
          break;
        case ElementKind::AType:
          if (k + 1 < K) {
            const int r = new_row(RowBlock::CLaw, cap.id, k, 0.0);
            put(r, L.U(c, k), dT);
            put_drop(r, c, k + 1, -el.parameter);
            put_drop(r, c, k, el.parameter);
          }
          break;
        case ElementKind::Transformer:
          put_drop(new_row(RowBlock::TransformerLaw, cap.id, k, 0.0), c, k, 1.0);
          break;
        case ElementKind::Gyrator: {
          const int r = new_row(RowBlock::GyratorLaw, cap.id, k, 0.0);
          put_drop(r, c, k, 1.0);
          put(r, L.U(cap.side == 0 ? c + 1 : c - 1, k), cap.side == 0 ? -el.parameter : el.parameter);
          break;
        }
      }
    }
  }

  // Initial conditions, keyed like the derivation's state variables.
  const auto tree_a = detail::atypes_in_tree(m);
  std::vector<StateVar> states;
  for (const auto& cap : net.capabilities) {
    const auto& el = els[cap.element_index];
    if (el.kind == ElementKind::AType && tree_a[cap.element_index])
      states.push_back({el.id, cap.element_index, StateVar::Variable::AcrossOfATypeInTree, detail::state_name(m, el, true)});
    else if (el.kind == ElementKind::TType)
      states.push_back({el.id, cap.element_index, StateVar::Variable::ThroughOfTTypeInCotree, detail::state_name(m, el, false)});
  }
  const Eigen::VectorXd x0 = initial_state(states, overrides);
  for (std::size_t s = 0; s < states.size(); ++s) {
    std::size_t c = 0;
    while (net.capabilities[c].element_index != states[s].element_index) ++c;
    if (states[s].variable == StateVar::Variable::ThroughOfTTypeInCotree)
      put(new_row(RowBlock::InitU, net.capabilities[c].id, 0, x0[static_cast<Eigen::Index>(s)]), L.U(c, 0), 1.0);
    else
      put_drop(new_row(RowBlock::InitY, net.capabilities[c].id, 0, x0[static_cast<Eigen::Index>(s)]), c, 0, 1.0);
  }

  cs.rhs = Eigen::Map<Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
  return cs;
}

struct SolveOptions {
  double tol = 1e-9;  // absolute residual ∞-norm
};

/// Solves the constraint system: sparse LU when square and nonsingular,
/// otherwise QR least squares followed by a consistency/rank diagnosis.
inline Trajectories solve(const ConstraintSystem& cs, const SolveOptions& opt = {}) {
  const auto A = cs.matrix();
  const Eigen::VectorXd& b = cs.rhs;
  const auto& L = cs.layout;
  Eigen::VectorXd x;
  bool solved = false;

  if (A.rows() == A.cols()) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(A);
    lu.factorize(A);
    if (lu.info() == Eigen::Success) {
      x = lu.solve(b);
      solved = lu.info() == Eigen::Success && x.allFinite() && (A * x - b).cwiseAbs().maxCoeff() <= opt.tol;
    }
  }
  if (!solved) {
    Eigen::SparseQR<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> qr;
    qr.setPivotThreshold(1e-12);
    qr.compute(A);
    if (qr.info() != Eigen::Success) throw Error(ErrorCode::Underdetermined, "QR factorisation of the constraint system failed");
    x = qr.solve(b);
    const Eigen::VectorXd r = A * x - b;
    const double res = r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
    if (!(res <= opt.tol)) {
      std::vector<std::size_t> idx(static_cast<std::size_t>(r.size()));
      std::iota(idx.begin(), idx.end(), 0);
      std::stable_sort(idx.begin(), idx.end(), [&](auto i, auto j) { return std::abs(r[static_cast<Eigen::Index>(i)]) > std::abs(r[static_cast<Eigen::Index>(j)]); });
      std::vector<std::string> tags;
      for (auto i : idx) {
        if (tags.size() >= 12 || !(std::abs(r[static_cast<Eigen::Index>(i)]) > opt.tol)) break;
        tags.push_back(cs.row_tags[i].to_string());
      }
      throw Error(ErrorCode::Inconsistent,
                  "least-squares residual " + detail::fmt_short(res) + " exceeds " + detail::fmt_short(opt.tol) +
                      "; conflicting rows {" + detail::join(tags) + "}",
                  tags);
    }
    const auto n = static_cast<std::size_t>(A.cols());
    if (static_cast<std::size_t>(qr.rank()) < n) {
      // Variables with no row at all, else the columns QR found dependent.
      std::vector<bool> touched(n, false);
      for (const auto& t : cs.triplets) touched[static_cast<std::size_t>(t.col())] = true;
      std::vector<std::string> vars;
      for (std::size_t j = 0; j < n; ++j)
        if (!touched[j]) vars.push_back(L.label(j));
      if (vars.empty())
        for (auto j = qr.rank(); j < A.cols(); ++j) vars.push_back(L.label(static_cast<std::size_t>(qr.colsPermutation().indices()[j])));
      const auto shown = std::vector<std::string>(vars.begin(), vars.begin() + static_cast<long>(std::min<std::size_t>(vars.size(), 12)));
      throw Error(ErrorCode::Underdetermined,
                  std::to_string(n - static_cast<std::size_t>(qr.rank())) + " unknown(s) lack a defining equation: {" +
                      detail::join(shown) + (vars.size() > shown.size() ? ", ..." : "") + "}",
                  vars);
    }
  }

  Trajectories tr;
  const auto K = static_cast<Eigen::Index>(L.K);
  tr.times.resize(K);
  tr.U.resize(K, static_cast<Eigen::Index>(L.ncap));
  tr.y.resize(K, static_cast<Eigen::Index>(L.ny));
  for (std::size_t k = 0; k < L.K; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    tr.times[kk] = cs.grid.time(k);
    for (std::size_t c = 0; c < L.ncap; ++c) tr.U(kk, static_cast<Eigen::Index>(c)) = x[static_cast<Eigen::Index>(L.U(c, k))];
    for (std::size_t i = 0; i < L.ny; ++i) tr.y(kk, static_cast<Eigen::Index>(i)) = x[static_cast<Eigen::Index>(L.y(i, k))];
  }
  tr.U_labels = prefixed("U:", L.cap_ids);
  tr.y_labels = prefixed("y:", L.node_ids);
  tr.residual = (A * x - b).cwiseAbs().maxCoeff();
  return tr;
}

}  // namespace hfnet
