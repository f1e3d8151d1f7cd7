#pragma once

#include <string>

#include "freqdesign/fullorder.hpp"
#include "freqdesign/reduced.hpp"
#include "freqdesign/sim.hpp"

namespace freqdesign {

// Linear step responses in deviation coordinates about the pre-disturbance equilibrium:
// x(0) = 0 and the load input changes by -delta_p at t = 0.

inline void tag(Trajectory& traj, ModelKind kind, const StepScenario& sc) {
  traj.model_kind = kind;
  traj.metadata["model"] = to_string(kind);
  traj.metadata["step_bus"] = std::to_string(sc.bus);
  traj.metadata["delta_p_pu"] = std::to_string(sc.delta_p);
  traj.metadata["dt"] = std::to_string(sc.dt);
  traj.metadata["horizon"] = std::to_string(sc.horizon);
}

inline Trajectory simulate_full_step(const FullOrderModel& full, const StepScenario& sc,
                                     Integrator method = Integrator::Exact) {
  sc.check();
  const auto u = load_step_input(full.b.cols(), sc.delta_p);
  auto traj = simulate_linear(full.a, full.b, u, Vector::Zero(full.a.rows()), sc.dt, sc.horizon, method);
  traj.labels = full.state_labels;
  tag(traj, ModelKind::Full, sc);
  return traj;
}

inline Trajectory simulate_reduced_step(const ReducedModel& red, const StepScenario& sc,
                                        Integrator method = Integrator::Exact) {
  sc.check();
  const auto u = load_step_input(2, sc.delta_p);
  auto traj = simulate_linear(red.a_red, red.b_red, u, Vector::Zero(2), sc.dt, sc.horizon, method);
  traj.labels = {"domega", "Pm_red"};
  tag(traj, ModelKind::Reduced, sc);
  traj.metadata["tau_bar"] = std::to_string(red.tau_bar);
  return traj;
}

inline Trajectory simulate_auxiliary_step(const AuxiliaryModel& aux, const StepScenario& sc,
                                          Integrator method = Integrator::Exact) {
  sc.check();
  const auto u = load_step_input(aux.b_bar.cols(), sc.delta_p);
  auto traj = simulate_linear(aux.a_bar, aux.b_bar, u, Vector::Zero(aux.a_bar.rows()), sc.dt, sc.horizon, method);
  traj.labels = {"domega"};
  for (Eigen::Index i = 1; i < aux.a_bar.rows(); ++i) traj.labels.push_back("Pm_bar_" + std::to_string(i));
  tag(traj, ModelKind::Auxiliary, sc);
  return traj;
}

}  // namespace freqdesign
