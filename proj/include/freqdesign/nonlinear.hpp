#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "freqdesign/error.hpp"
#include "freqdesign/linalg.hpp"
#include "freqdesign/network.hpp"
#include "freqdesign/sim.hpp"
#include "freqdesign/system.hpp"

namespace freqdesign {

struct NonlinearOptions {
  /// Upper bound on the internal RK4 step; the step is further limited by the fastest local swing mode.
  double max_internal_step = 0.01;
  int newton_max_iterations = 50;
  double newton_tolerance = 1e-12;
};

namespace detail {

/// Per-bus swing network with generator governors; buses without inertia are algebraic.
class SwingNetwork {
 public:
  SwingNetwork(const SystemDescription& sys, const AngleSolution& eq, const NonlinearOptions& opts)
      : sys_(sys), opts_(opts) {
    const std::size_t n = sys.buses.size();
    inertia_.assign(n, 0.0);
    damping_.assign(n, 0.0);
    gen_of_bus_.assign(n, -1);
    injection_.resize(n);
    for (std::size_t i = 0; i < n; ++i) injection_[i] = sys.buses[i].injection;
    for (std::size_t g = 0; g < sys.generators.size(); ++g) {
      const auto& gp = sys.generators[g];
      const std::size_t i = sys.require_bus(gp.bus);
      inertia_[i] = gp.inertia;
      damping_[i] = gp.damping;
      gen_of_bus_[i] = static_cast<int>(g);
    }
    for (const auto& d : sys.ders) {
      const std::size_t i = sys.require_bus(d.bus);
      if (d.synthetic_inertia == 0.0 && d.droop != 0.0)
        throw Error(ErrorKind::InvalidArgument, "bus " + std::to_string(d.bus) +
                                                    ": a DER without synthetic inertia must also have zero droop");
      inertia_[i] = d.synthetic_inertia;
      damping_[i] = d.droop;
    }
    dyn_index_.assign(n, -1);
    alg_index_.assign(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
      if (inertia_[i] > 0.0) {
        dyn_index_[i] = static_cast<int>(dyn_.size());
        dyn_.push_back(i);
      } else {
        alg_index_[i] = static_cast<int>(alg_.size());
        alg_.push_back(i);
      }
    }
    for (const auto& l : sys.lines) lines_.push_back({sys.require_bus(l.from), sys.require_bus(l.to), 1.0 / l.reactance});

    // Equilibrium: mechanical power balances the network flows exactly at each generator.
    angles_ = eq.angles;
    const auto flows = network_outflows(sys, angles_);
    reference_.assign(sys.generators.size(), 0.0);
    for (std::size_t g = 0; g < sys.generators.size(); ++g) {
      const std::size_t i = sys.require_bus(sys.generators[g].bus);
      reference_[g] = flows[i] - injection_[i];
    }
  }

  std::size_t state_size() const { return 2 * dyn_.size() + sys_.generators.size(); }

  Vector initial_state() const {
    Vector y = Vector::Zero(static_cast<Eigen::Index>(state_size()));
    for (std::size_t k = 0; k < dyn_.size(); ++k) y(static_cast<Eigen::Index>(k)) = angles_[dyn_[k]];
    for (std::size_t g = 0; g < sys_.generators.size(); ++g) y(pm_offset() + static_cast<Eigen::Index>(g)) = reference_[g];
    return y;
  }

  void apply_step(std::size_t bus_index, double delta_p) { injection_[bus_index] -= delta_p; }

  /// Time derivative; also refreshes the algebraic bus angles in place (warm start).
  Vector rhs(const Vector& y) {
    load_angles(y);
    solve_algebraic();
    const auto flows = network_outflows(sys_, angles_);
    Vector dy = Vector::Zero(y.size());
    const auto nd = static_cast<Eigen::Index>(dyn_.size());
    for (Eigen::Index k = 0; k < nd; ++k) {
      const std::size_t i = dyn_[static_cast<std::size_t>(k)];
      const double w = y(nd + k);
      double accel = injection_[i] - flows[i] - damping_[i] * w;
      if (gen_of_bus_[i] >= 0) accel += y(pm_offset() + gen_of_bus_[i]);
      dy(k) = w;
      dy(nd + k) = accel / inertia_[i];
    }
    for (std::size_t g = 0; g < sys_.generators.size(); ++g) {
      const auto& gp = sys_.generators[g];
      const double w = y(nd + dyn_index_[sys_.require_bus(gp.bus)]);
      const Eigen::Index ip = pm_offset() + static_cast<Eigen::Index>(g);
      dy(ip) = (-y(ip) + reference_[g] - gp.droop_inverse * w) / gp.turbine_tc;
    }
    return dy;
  }

  /// Step bound from the stiffest local swing mode and damping rate.
  double stable_step() const {
    double h = opts_.max_internal_step;
    std::vector<double> stiffness(sys_.buses.size(), 0.0);
    for (const auto& l : lines_) {
      const double k = sys_.buses[l.from].voltage_mag * sys_.buses[l.to].voltage_mag * l.b;
      stiffness[l.from] += k;
      stiffness[l.to] += k;
    }
    for (const std::size_t i : dyn_) {
      h = std::min(h, 0.2 / std::sqrt(stiffness[i] / inertia_[i]));
      if (damping_[i] > 0.0) h = std::min(h, 0.2 * inertia_[i] / damping_[i]);
    }
    return h;
  }

  const std::vector<double>& angles() const { return angles_; }
  const std::vector<std::size_t>& dynamic_buses() const { return dyn_; }
  const std::vector<double>& inertia() const { return inertia_; }
  const std::vector<double>& damping() const { return damping_; }
  Eigen::Index pm_offset() const { return static_cast<Eigen::Index>(2 * dyn_.size()); }
  int dyn_index(std::size_t bus) const { return dyn_index_[bus]; }

 private:
  void load_angles(const Vector& y) {
    for (std::size_t k = 0; k < dyn_.size(); ++k) angles_[dyn_[k]] = y(static_cast<Eigen::Index>(k));
  }

  void solve_algebraic() {
    const auto m = static_cast<Eigen::Index>(alg_.size());
    if (m == 0) return;
    Vector r(m);
    auto residual = [&] {
      const auto flows = network_outflows(sys_, angles_);
      for (Eigen::Index k = 0; k < m; ++k) {
        const std::size_t i = alg_[static_cast<std::size_t>(k)];
        r(k) = injection_[i] - flows[i];
      }
      return r.cwiseAbs().maxCoeff();
    };
    double mismatch = residual();
    for (int it = 0; mismatch > opts_.newton_tolerance; ++it) {
      if (it >= opts_.newton_max_iterations)
        throw Error(ErrorKind::NonConvergence, "algebraic bus balance did not converge (mismatch " +
                                                   std::to_string(mismatch) + " pu)");
      Matrix jac = Matrix::Zero(m, m);
      for (const auto& l : lines_) {
        const double k = sys_.buses[l.from].voltage_mag * sys_.buses[l.to].voltage_mag * l.b *
                         std::cos(angles_[l.from] - angles_[l.to]);
        const int a = alg_index_[l.from];
        const int b = alg_index_[l.to];
        if (a >= 0) jac(a, a) += k;
        if (b >= 0) jac(b, b) += k;
        if (a >= 0 && b >= 0) {
          jac(a, b) -= k;
          jac(b, a) -= k;
        }
      }
      const Vector step = jac.fullPivLu().solve(r);
      if (!step.allFinite()) throw Error(ErrorKind::NonConvergence, "singular algebraic-bus Jacobian");
      for (Eigen::Index k = 0; k < m; ++k) angles_[alg_[static_cast<std::size_t>(k)]] += step(k);
      const double next = residual();
      if (next >= mismatch && next <= 1e3 * opts_.newton_tolerance) break;  // at rounding floor
      mismatch = next;
    }
  }

  struct IndexedLine {
    std::size_t from;
    std::size_t to;
    double b;
  };

  const SystemDescription& sys_;
  NonlinearOptions opts_;
  std::vector<double> inertia_;
  std::vector<double> damping_;
  std::vector<int> gen_of_bus_;
  std::vector<double> injection_;
  std::vector<double> reference_;
  std::vector<double> angles_;
  std::vector<std::size_t> dyn_;
  std::vector<std::size_t> alg_;
  std::vector<int> dyn_index_;
  std::vector<int> alg_index_;
  std::vector<IndexedLine> lines_;
};

}  // namespace detail

/// RK4 simulation of the per-bus swing/governor network after a load step, starting from an equilibrium.
/// Columns: theta_<bus> for every bus, domega_<bus> for buses with inertia, Pm_<bus> per generator,
/// domega_sys (inertia-weighted frequency deviation) and der_dp_<bus> (DER power injected) per DER.
inline Trajectory simulate_nonlinear(const SystemDescription& sys, const AngleSolution& angles0,
                                     const StepScenario& scenario, const NonlinearOptions& opts = {}) {
  scenario.check();
  detail::SwingNetwork net(sys, angles0, opts);
  net.apply_step(sys.require_bus(scenario.bus), scenario.delta_p);

  const auto& dyn = net.dynamic_buses();
  const auto nd = static_cast<Eigen::Index>(dyn.size());
  Trajectory traj;
  traj.model_kind = ModelKind::Nonlinear;
  traj.times = uniform_grid(scenario.dt, scenario.horizon);
  for (const auto& b : sys.buses) traj.labels.push_back("theta_" + std::to_string(b.id));
  for (const std::size_t i : dyn) traj.labels.push_back("domega_" + std::to_string(sys.buses[i].id));
  for (const auto& g : sys.generators) traj.labels.push_back("Pm_" + std::to_string(g.bus));
  traj.labels.push_back("domega_sys");
  for (const auto& d : sys.ders) traj.labels.push_back("der_dp_" + std::to_string(d.bus));
  traj.states.resize(static_cast<Eigen::Index>(traj.times.size()), static_cast<Eigen::Index>(traj.labels.size()));

  double total_inertia = 0.0;
  for (const std::size_t i : dyn) total_inertia += net.inertia()[i];

  const int substeps = static_cast<int>(std::ceil(scenario.dt / net.stable_step() - 1e-9));
  const double h = scenario.dt / substeps;
  traj.metadata["integrator"] = "rk4";
  traj.metadata["internal_step"] = std::to_string(h);

  Vector y = net.initial_state();
  auto record = [&](std::size_t k) {
    const Vector dy = net.rhs(y);  // also settles algebraic angles for this state
    const auto row = static_cast<Eigen::Index>(k);
    Eigen::Index c = 0;
    for (double th : net.angles()) traj.states(row, c++) = th;
    double weighted = 0.0;
    for (Eigen::Index j = 0; j < nd; ++j) {
      traj.states(row, c++) = y(nd + j);
      weighted += net.inertia()[dyn[static_cast<std::size_t>(j)]] * y(nd + j);
    }
    for (std::size_t g = 0; g < sys.generators.size(); ++g)
      traj.states(row, c++) = y(net.pm_offset() + static_cast<Eigen::Index>(g));
    traj.states(row, c++) = weighted / total_inertia;
    for (const auto& d : sys.ders) {
      const std::size_t i = sys.require_bus(d.bus);
      const int j = net.dyn_index(i);
      double dp = 0.0;
      if (j >= 0) dp = -(net.damping()[i] * y(nd + j) + net.inertia()[i] * dy(nd + j));
      traj.states(row, c++) = dp;
    }
  };

  record(0);
  for (std::size_t k = 0; k + 1 < traj.times.size(); ++k) {
    for (int s = 0; s < substeps; ++s) {
      const Vector k1 = net.rhs(y);
      const Vector k2 = net.rhs(y + 0.5 * h * k1);
      const Vector k3 = net.rhs(y + 0.5 * h * k2);
      const Vector k4 = net.rhs(y + h * k3);
      y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    detail::check_finite(y, traj.times[k + 1]);
    record(k + 1);
  }
  return traj;
}

}  // namespace freqdesign
