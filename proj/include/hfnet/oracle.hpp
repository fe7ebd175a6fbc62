#pragma once

#include <Eigen/Dense>

#include <map>
#include <string>
#include <vector>

#include "hfnet/state_space.hpp"
#include "hfnet/trajectories.hpp"

namespace hfnet {

/// Initial-condition overrides keyed by state name ("i_L1") or element id ("L1").
using InitialConditions = std::map<std::string, double>;

struct OdeRun {
  StateSpace ss;
  std::vector<SourceSignal> u;  // one per input, in ss.input_names order
  TimeGrid grid;
  Eigen::VectorXd x0;
};

/// Resolves overrides against the state list; unknown names are an error.
inline Eigen::VectorXd initial_state(const std::vector<StateVar>& states, const InitialConditions& ic) {
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(states.size()));
  for (const auto& [name, value] : ic) {
    bool found = false;
    for (std::size_t s = 0; s < states.size(); ++s)
      if (states[s].name == name || states[s].element == name) {
        x0[static_cast<Eigen::Index>(s)] = value;
        found = true;
      }
    if (!found) throw Error(ErrorCode::InvalidModel, "initial condition '" + name + "' names no state variable", {name});
  }
  return x0;
}

inline OdeRun make_run(const StateSpace& ss, const TimeGrid& grid, const InitialConditions& ic = {}) {
  return {ss, ss.input_signals, grid, initial_state(ss.state_variables, ic)};
}

namespace detail {

inline void check_run(const OdeRun& run) {
  const auto n = run.ss.A.rows();
  if (run.ss.A.cols() != n || run.ss.B.rows() != n || run.x0.size() != n ||
      run.ss.B.cols() != static_cast<Eigen::Index>(run.u.size()))
    throw Error(ErrorCode::DimensionMismatch, "ODE run dimensions are inconsistent (n = " + std::to_string(n) + ")");
  if (run.grid.K < 2 || !(run.grid.dT > 0)) throw Error(ErrorCode::InvalidGrid, "invalid time grid");
}

inline Eigen::VectorXd inputs_at(const std::vector<SourceSignal>& u, double t) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(u.size()));
  for (std::size_t i = 0; i < u.size(); ++i) v[static_cast<Eigen::Index>(i)] = u[i].value_at(t);
  return v;
}

/// Fills U and y from the states via the derivation's algebraic block.
template <class Step>
Trajectories integrate(const OdeRun& run, Step&& step) {
  check_run(run);
  const auto K = static_cast<Eigen::Index>(run.grid.K);
  const auto& rc = run.ss.recon;
  const bool have_recon = rc.U_x.rows() == static_cast<Eigen::Index>(rc.U_labels.size()) && !rc.U_labels.empty();
  Trajectories tr;
  tr.times.resize(K);
  Eigen::MatrixXd X(K, run.ss.A.rows());
  Eigen::VectorXd x = run.x0;
  for (Eigen::Index k = 0; k < K; ++k) {
    const double t = run.grid.time(static_cast<std::size_t>(k));
    tr.times[k] = t;
    X.row(k) = x.transpose();
    if (k + 1 < K) x = step(x, t);
  }
  if (!have_recon) {
    // Bare state-space: expose the states themselves.
    tr.U = X;
    tr.U_labels = run.ss.state_names;
    tr.y.resize(K, 0);
    return tr;
  }
  Eigen::MatrixXd Uin(K, static_cast<Eigen::Index>(run.u.size()));
  for (Eigen::Index k = 0; k < K; ++k) Uin.row(k) = inputs_at(run.u, tr.times[k]).transpose();
  tr.U = X * rc.U_x.transpose() + Uin * rc.U_u.transpose();
  tr.y = X * rc.y_x.transpose() + Uin * rc.y_u.transpose();
  tr.U_labels = rc.U_labels;
  tr.y_labels = rc.y_labels;
  return tr;
}

}  // namespace detail

/// Forward Euler: x[k+1] = x[k] + dT·(A·x[k] + B·u(t_k)).
inline Trajectories euler_integrate(const OdeRun& run) {
  const auto& A = run.ss.A;
  const auto& B = run.ss.B;
  const double h = run.grid.dT;
  return detail::integrate(run, [&](const Eigen::VectorXd& x, double t) -> Eigen::VectorXd {
    return x + h * (A * x + B * detail::inputs_at(run.u, t));
  });
}

/// Classical fourth-order Runge–Kutta with inputs sampled at t, t+dT/2, t+dT.
inline Trajectories rk4_integrate(const OdeRun& run) {
  const auto& A = run.ss.A;
  const auto& B = run.ss.B;
  const double h = run.grid.dT;
  return detail::integrate(run, [&](const Eigen::VectorXd& x, double t) -> Eigen::VectorXd {
    auto f = [&](const Eigen::VectorXd& s, double tt) -> Eigen::VectorXd { return A * s + B * detail::inputs_at(run.u, tt); };
    const Eigen::VectorXd k1 = f(x, t);
    const Eigen::VectorXd k2 = f(x + 0.5 * h * k1, t + 0.5 * h);
    const Eigen::VectorXd k3 = f(x + 0.5 * h * k2, t + 0.5 * h);
    const Eigen::VectorXd k4 = f(x + h * k3, t + h);
    return x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
  });
}

/// DC operating point x* = −A⁻¹·B·u for a constant input vector.
inline Eigen::VectorXd dc_steady_state(const StateSpace& ss, const Eigen::VectorXd& u) {
  if (u.size() != ss.B.cols()) throw Error(ErrorCode::DimensionMismatch, "input vector has the wrong length");
  if (ss.A.rows() == 0) return Eigen::VectorXd(0);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(ss.A);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) throw Error(ErrorCode::SingularA, "state matrix is singular; no unique DC operating point");
  return -lu.solve(ss.B * u);
}

}  // namespace hfnet
