#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hfnet/error.hpp"
#include "hfnet/esn.hpp"

namespace hfnet {

/// Uniform grid of K points t_k = k·dT, k = 0..K-1.
struct TimeGrid {
  double dT = 0.0;
  std::size_t K = 0;

  TimeGrid() = default;
  TimeGrid(double dt, std::size_t steps) : dT(dt), K(steps) {
    if (!(dt > 0) || !std::isfinite(dt)) throw Error(ErrorCode::InvalidGrid, "time step must be positive and finite");
    if (steps < 2) throw Error(ErrorCode::InvalidGrid, "at least two grid points are required");
  }
  /// Grid covering [0, horizon) with K = round(horizon / dT) points.
  static TimeGrid from_horizon(double dt, double horizon) {
    if (!(dt > 0)) throw Error(ErrorCode::InvalidGrid, "time step must be positive");
    return TimeGrid(dt, static_cast<std::size_t>(std::llround(horizon / dt)));
  }
  double time(std::size_t k) const { return static_cast<double>(k) * dT; }
  double horizon() const { return static_cast<double>(K) * dT; }
};

/// Element through values U and node across values y on a time grid.
struct Trajectories {
  Eigen::VectorXd times;
  Eigen::MatrixXd U;  // K × |capabilities|
  Eigen::MatrixXd y;  // K × |non-ground nodes|
  std::vector<std::string> U_labels;  // "U:<capability>"
  std::vector<std::string> y_labels;  // "y:<node>"
  double residual = 0.0;              // solver residual ∞-norm, when produced by a solve

  std::vector<std::string> labels() const {
    auto out = U_labels;
    out.insert(out.end(), y_labels.begin(), y_labels.end());
    return out;
  }

  /// Column for a label such as "U:L1" or "y:V_C1".
  Eigen::VectorXd series(std::string_view label) const {
    for (std::size_t i = 0; i < U_labels.size(); ++i)
      if (U_labels[i] == label) return U.col(static_cast<Eigen::Index>(i));
    for (std::size_t i = 0; i < y_labels.size(); ++i)
      if (y_labels[i] == label) return y.col(static_cast<Eigen::Index>(i));
    throw Error(ErrorCode::LabelMismatch, "no trajectory labelled '" + std::string(label) + "'", {std::string(label)});
  }

  void write_csv(std::ostream& os) const {
    os << "time";
    for (const auto& l : labels()) os << ',' << l;
    os << '\n';
    for (Eigen::Index k = 0; k < times.size(); ++k) {
      os << detail::fmt_number(times[k]);
      for (Eigen::Index j = 0; j < U.cols(); ++j) os << ',' << detail::fmt_number(U(k, j));
      for (Eigen::Index j = 0; j < y.cols(); ++j) os << ',' << detail::fmt_number(y(k, j));
      os << '\n';
    }
  }
};

inline std::vector<std::string> prefixed(const std::string& prefix, const std::vector<std::string>& ids) {
  std::vector<std::string> out;
  for (const auto& id : ids) out.push_back(prefix + id);
  return out;
}

struct VariableDeviation {
  std::string label;
  double max_abs = 0.0;
  double max_rel = 0.0;
};

struct ComparisonReport {
  std::vector<VariableDeviation> variables;
  double max_abs = 0.0;
  double max_rel = 0.0;
  double tol = 0.0;
  bool pass = true;

  const VariableDeviation& variable(std::string_view label) const {
    for (const auto& v : variables)
      if (v.label == label) return v;
    throw Error(ErrorCode::LabelMismatch, "no variable '" + std::string(label) + "' in comparison", {std::string(label)});
  }

  void write(std::ostream& os) const {
    os << "variable,max_abs_deviation,max_rel_deviation\n";
    for (const auto& v : variables) os << v.label << ',' << detail::fmt_number(v.max_abs) << ',' << detail::fmt_number(v.max_rel) << '\n';
    os << "# max_rel " << detail::fmt_number(max_rel) << " tol " << detail::fmt_number(tol) << (pass ? " PASS" : " FAIL") << '\n';
  }
};

/// Relative deviation of one variable: max_k |a-b| / max(max_k |b|, 1e-12).
inline ComparisonReport compare(const Trajectories& a, const Trajectories& b, double tol) {
  if (a.U_labels != b.U_labels || a.y_labels != b.y_labels) {
    std::vector<std::string> diff;
    auto la = a.labels(), lb = b.labels();
    std::sort(la.begin(), la.end());
    std::sort(lb.begin(), lb.end());
    std::set_symmetric_difference(la.begin(), la.end(), lb.begin(), lb.end(), std::back_inserter(diff));
    throw Error(ErrorCode::LabelMismatch,
                diff.empty() ? "variable orderings differ" : "variable label sets differ: {" + detail::join(diff) + "}", diff);
  }
  if (a.times.size() != b.times.size() || (a.times - b.times).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, a.times.cwiseAbs().maxCoeff()))
    throw Error(ErrorCode::DimensionMismatch, "trajectories are on different time grids");
  ComparisonReport r;
  r.tol = tol;
  auto add = [&](const std::string& label, const Eigen::VectorXd& x, const Eigen::VectorXd& ref) {
    VariableDeviation d{label, 0.0, 0.0};
    if (x.size() > 0) {
      d.max_abs = (x - ref).cwiseAbs().maxCoeff();
      d.max_rel = d.max_abs / std::max(ref.cwiseAbs().maxCoeff(), 1e-12);
    }
    if (!std::isfinite(d.max_abs)) d.max_abs = d.max_rel = std::numeric_limits<double>::infinity();
    r.max_abs = std::max(r.max_abs, d.max_abs);
    r.max_rel = std::max(r.max_rel, d.max_rel);
    r.variables.push_back(std::move(d));
  };
  for (Eigen::Index j = 0; j < a.U.cols(); ++j) add(a.U_labels[static_cast<std::size_t>(j)], a.U.col(j), b.U.col(j));
  for (Eigen::Index j = 0; j < a.y.cols(); ++j) add(a.y_labels[static_cast<std::size_t>(j)], a.y.col(j), b.y.col(j));
  r.pass = r.max_rel <= tol;
  return r;
}

}  // namespace hfnet
