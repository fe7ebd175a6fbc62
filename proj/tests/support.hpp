#pragma once

// Shared fixtures and independent reference values for the test suites.
// The golden matrices below are written out from the published symbolic
// forms, not computed by the library.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hfnet/hfnet.hpp"

namespace hfnet::testing {

inline const std::vector<std::string>& fixture_names() {
  static const std::vector<std::string> names = {"electrical", "translational", "rotational",
                                                 "fluidic",    "thermal",       "electromechanical"};
  return names;
}

inline std::filesystem::path model_path(const std::string& name, bool bond = false) {
  return std::filesystem::path(HFNET_MODEL_DIR) / (bond ? "bondgraph" : "lineargraph") / (name + ".json");
}
inline LoadedModel load_fixture(const std::string& name, bool bond = false) { return load_model(model_path(name, bond)); }

inline std::filesystem::path malformed(const std::string& name) {
  return std::filesystem::path(HFNET_TEST_DATA) / "malformed" / (name + ".json");
}

inline TimeGrid paper_grid(const LoadedModel& lm) { return TimeGrid::from_horizon(lm.grid->dt, lm.grid->horizon); }

/// Published state-space form: states named as the library names them.
struct Golden {
  std::vector<std::string> states;
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
};

inline Golden golden(const std::string& name) {
  Golden g;
  if (name == "electrical") {
    const double R1 = 200, R2 = 200, R3 = 220, L1 = 0.1, L2 = 0.15, C1 = 1e-5;
    g.states = {"V_C1", "i_L1", "i_L2"};
    g.A.resize(3, 3);
    g.A << -1 / (R3 * C1), 1 / C1, -1 / C1,  //
        -1 / L1, -R1 / L1, 0,                //
        1 / L2, 0, -R2 / L2;
    g.B.resize(3, 1);
    g.B << 0, 1 / L1, 0;
  } else if (name == "translational") {
    const double m1 = 1, m2 = 2, k1 = 20, k2 = 10, b1 = 1, b2 = 10;
    g.states = {"v_m1", "v_m2", "F_k1", "F_k2"};
    g.A.resize(4, 4);
    g.A << -b1 / m1, 0, -1 / m1, -1 / m1,  //
        0, 0, 0, 1 / m2,                   //
        k1, 0, 0, 0,                       //
        k2, -k2, 0, -k2 / b2;
    g.B.resize(4, 1);
    g.B << 0, 1 / m2, 0, 0;
  } else if (name == "rotational") {
    const double J = 0.5, K = 2, b = 0.5;
    g.states = {"w_J", "tau_K"};
    g.A.resize(2, 2);
    g.A << -b / J, -1 / J,  //
        K, 0;
    g.B.resize(2, 1);
    g.B << 1 / J, 0;
  } else if (name == "fluidic") {
    const double R1 = 2, R2 = 1, C1 = 0.02, C2 = 0.05, I = 2;
    g.states = {"P_C1", "P_C2", "Q_I"};
    g.A.resize(3, 3);
    g.A << 0, 0, -1 / C1,            //
        0, -1 / (C2 * R2), 1 / C2,   //
        1 / I, -1 / I, -R1 / I;
    g.B.resize(3, 1);
    g.B << 1 / C1, 0, 0;
  } else if (name == "thermal") {
    const double Ri = 0.5, Rh = 0.2, Ci = 1, Ch = 2;
    g.states = {"T_C_i", "T_C_h"};
    g.A.resize(2, 2);
    g.A << -1 / (Ci * Ri), 1 / (Ci * Ri),  //
        1 / (Ri * Ch), -1 / (Ri * Ch) - 1 / (Ch * Rh);
    g.B.resize(2, 1);
    g.B << 0, 1 / Ch;
  } else if (name == "electromechanical") {
    const double R = 1, L = 0.01, J = 5, B = 0.1, ka = 0.1;
    g.states = {"w_J", "i_L"};
    g.A.resize(2, 2);
    g.A << -B / J, 1 / (J * ka),  //
        -1 / (ka * L), -R / L;
    g.B.resize(2, 1);
    g.B << 0, 1 / L;
  }
  return g;
}

/// Published reduced continuity matrices (element order = columns, non-ground nodes = rows).
inline Eigen::MatrixXd golden_incidence(const std::string& name) {
  Eigen::MatrixXd M;
  if (name == "electrical") {
    M.resize(4, 7);
    M << 1, -1, 0, 0, 0, 0, 0,  //
        0, 1, -1, 0, 0, 0, 0,   //
        0, 0, 1, -1, -1, 0, -1, //
        0, 0, 0, 0, 1, -1, 0;
  } else if (name == "translational") {
    M.resize(3, 7);
    M << 1, -1, 1, 0, 0, 0, 0,  //
        0, 0, -1, 1, 0, 0, 0,   //
        0, 0, 0, -1, -1, -1, -1;
  } else if (name == "rotational") {
    M.resize(1, 4);
    M << 1, -1, -1, -1;
  } else if (name == "fluidic") {
    M.resize(3, 6);
    M << 1, -1, -1, 0, 0, 0,  //
        0, 1, 0, -1, 0, 0,    //
        0, 0, 0, 1, -1, -1;
  } else if (name == "thermal") {
    M.resize(2, 5);
    M << 1, -1, 0, -1, -1,  //
        0, 1, -1, 0, 0;
  } else if (name == "electromechanical") {
    const double ka = 0.1;
    M.resize(4, 6);
    M << 1, -1, 0, 0, 0, 0,  //
        0, 1, -1, 0, 0, 0,   //
        0, 0, 1, -1, 0, 0,   //
        0, 0, 0, 1 / ka, -1, -1;
  }
  return M;
}

/// Permutes (A, B) from `from` state order into `to` state order.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> reorder(const StateSpace& ss, const std::vector<std::string>& to) {
  const auto n = static_cast<Eigen::Index>(to.size());
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (ss.state_names[static_cast<std::size_t>(j)] == to[static_cast<std::size_t>(i)]) P(i, j) = 1;
  return {P * ss.A * P.transpose(), P * ss.B};
}

/// Largest entrywise relative error, with an absolute floor scaled to the matrix.
inline double max_rel_error(const Eigen::MatrixXd& got, const Eigen::MatrixXd& want) {
  if (got.rows() != want.rows() || got.cols() != want.cols()) return INFINITY;
  const double scale = want.size() ? want.cwiseAbs().maxCoeff() : 1.0;
  double worst = 0;
  for (Eigen::Index i = 0; i < want.rows(); ++i)
    for (Eigen::Index j = 0; j < want.cols(); ++j) {
      const double d = std::abs(got(i, j) - want(i, j));
      const double e = want(i, j) != 0 ? d / std::abs(want(i, j)) : d / scale;
      worst = std::max(worst, e);
    }
  return worst;
}

/// Instantaneous total element power Σ U·((−M)ᵀ y) at every step, using the
/// full incidence (ground rows contribute y = 0).
inline Eigen::VectorXd tellegen_power(const EngineeringSystemNet& net, const Trajectories& tr) {
  const Eigen::MatrixXd Mr = reduced_incidence(net);
  Eigen::VectorXd p(tr.times.size());
  for (Eigen::Index k = 0; k < tr.times.size(); ++k) {
    const Eigen::VectorXd drop = -Mr.transpose() * tr.y.row(k).transpose();
    p[k] = tr.U.row(k).dot(drop);
  }
  return p;
}

/// Grid for steady-state checks: the model's own step, with the horizon
/// stretched to cover ten time constants of the discretised dynamics,
/// τ_d = −dT / ln ρ(I + dT·A).
inline TimeGrid settling_grid(const LoadedModel& lm, const StateSpace& ss) {
  const double dT = lm.grid->dt;
  const Eigen::MatrixXd Phi = Eigen::MatrixXd::Identity(ss.A.rows(), ss.A.cols()) + dT * ss.A;
  const double rho = Phi.eigenvalues().cwiseAbs().maxCoeff();
  const double tau = -dT / std::log(rho);
  return TimeGrid::from_horizon(dT, std::max(lm.grid->horizon, 10 * tau));
}

/// Tiny builder for ad-hoc linear-graph models in tests.
struct ModelBuilder {
  std::string name = "test";
  std::vector<Node> nodes;
  std::vector<Element> elements;

  ModelBuilder& node(std::string id, PhysicalDomain d = PhysicalDomain::Electrical, bool ground = false) {
    nodes.push_back({std::move(id), d, ground});
    return *this;
  }
  ModelBuilder& ground(std::string id, PhysicalDomain d = PhysicalDomain::Electrical) { return node(std::move(id), d, true); }
  ModelBuilder& el(std::string id, ElementKind k, double p, std::string from, std::string to, double amplitude = 1.0) {
    Element e;
    e.id = std::move(id);
    e.kind = k;
    e.parameter = p;
    e.port = {std::move(from), std::move(to)};
    e.signal = SourceSignal::step(amplitude);
    elements.push_back(std::move(e));
    return *this;
  }
  ModelBuilder& two_port(std::string id, ElementKind k, double p, Port a, Port b) {
    Element e;
    e.id = std::move(id);
    e.kind = k;
    e.parameter = p;
    e.port = std::move(a);
    e.side_b = std::move(b);
    elements.push_back(std::move(e));
    return *this;
  }
  SystemModel build() const { return SystemModel(name, nodes, elements); }
};

}  // namespace hfnet::testing
