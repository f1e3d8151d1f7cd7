#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "freqdesign/error.hpp"
#include "freqdesign/linalg.hpp"
#include "freqdesign/system.hpp"

namespace freqdesign {

struct BranchFlow {
  double p = 0.0;
  double q = 0.0;
};

/// Real and reactive power leaving the "from" end of a lossless line.
inline BranchFlow branch_flow(const Line& line, double angle_from, double angle_to, double vmag_from,
                              double vmag_to) {
  const double b = 1.0 / line.reactance;
  const double d = angle_from - angle_to;
  return {vmag_from * vmag_to * b * std::sin(d), vmag_from * vmag_from * b - vmag_from * vmag_to * b * std::cos(d)};
}

struct AngleSolution {
  std::vector<double> angles;  // radians, same order as SystemDescription::buses
  BusId reference_bus = 0;
  /// Extra real power the reference bus injects beyond its schedule so that the network balances.
  double reference_mismatch = 0.0;
  double max_mismatch = 0.0;
  int iterations = 0;
};

namespace detail {

struct LineIndex {
  std::size_t from;
  std::size_t to;
  double b;  // 1/x
};

inline std::vector<LineIndex> index_lines(const SystemDescription& sys) {
  std::vector<LineIndex> out;
  out.reserve(sys.lines.size());
  for (const auto& l : sys.lines) out.push_back({sys.require_bus(l.from), sys.require_bus(l.to), 1.0 / l.reactance});
  return out;
}

}  // namespace detail

/// Net real power flowing out of each bus into the network at the given angles.
inline std::vector<double> network_outflows(const SystemDescription& sys, const std::vector<double>& angles) {
  std::vector<double> out(sys.buses.size(), 0.0);
  for (const auto& l : sys.lines) {
    const std::size_t i = sys.require_bus(l.from);
    const std::size_t j = sys.require_bus(l.to);
    const double vi = sys.buses[i].voltage_mag;
    const double vj = sys.buses[j].voltage_mag;
    out[i] += branch_flow(l, angles[i], angles[j], vi, vj).p;
    out[j] += branch_flow(l, angles[j], angles[i], vj, vi).p;
  }
  return out;
}

/// Scheduled net injection per bus: bus injection plus generator reference power.
inline std::vector<double> scheduled_injections(const SystemDescription& sys) {
  std::vector<double> p(sys.buses.size());
  for (std::size_t i = 0; i < sys.buses.size(); ++i) p[i] = sys.buses[i].injection;
  for (const auto& g : sys.generators) p[sys.require_bus(g.bus)] += g.reference;
  return p;
}

/// Newton solve of real-power balance at every non-reference bus from a flat start.
/// The reference bus is held at angle 0 and absorbs any mismatch.
inline AngleSolution solve_equilibrium(const SystemDescription& sys, int max_iterations = 50,
                                       double tolerance = 1e-10) {
  const std::size_t n = sys.buses.size();
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "solve_equilibrium: empty system");
  const BusId ref_id = sys.effective_reference_bus();
  const std::size_t ref = sys.require_bus(ref_id);
  const auto lines = detail::index_lines(sys);
  const auto target = scheduled_injections(sys);

  // Map non-reference bus index -> unknown index.
  std::vector<int> unk(n, -1);
  int m = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (i != ref) unk[i] = m++;

  AngleSolution sol;
  sol.angles.assign(n, 0.0);
  sol.reference_bus = ref_id;

  auto residual = [&](Vector& r) {
    const auto flows = network_outflows(sys, sol.angles);
    for (std::size_t i = 0; i < n; ++i)
      if (unk[i] >= 0) r(unk[i]) = target[i] - flows[i];
  };

  Vector r(m);
  residual(r);
  double mismatch = m > 0 ? r.cwiseAbs().maxCoeff() : 0.0;
  int it = 0;
  // Iterate past the tolerance until the residual stops improving so that
  // the equilibrium is as close to an exact fixed point as rounding allows.
  while (m > 0 && it < max_iterations) {
    if (mismatch <= tolerance * 1e-4) break;
    Matrix jac = Matrix::Zero(m, m);
    for (const auto& l : lines) {
      const double vi = sys.buses[l.from].voltage_mag;
      const double vj = sys.buses[l.to].voltage_mag;
      const double k = vi * vj * l.b * std::cos(sol.angles[l.from] - sol.angles[l.to]);
      const int a = unk[l.from];
      const int b = unk[l.to];
      // d(outflow_i)/d(theta_i) = +k, d(outflow_i)/d(theta_j) = -k; residual is target - outflow.
      if (a >= 0) jac(a, a) += k;
      if (b >= 0) jac(b, b) += k;
      if (a >= 0 && b >= 0) {
        jac(a, b) -= k;
        jac(b, a) -= k;
      }
    }
    Eigen::FullPivLU<Matrix> lu(jac);
    if (!lu.isInvertible()) throw Error(ErrorKind::NonConvergence, "singular power-flow Jacobian");
    const Vector step = lu.solve(r);
    for (std::size_t i = 0; i < n; ++i)
      if (unk[i] >= 0) sol.angles[i] += step(unk[i]);
    ++it;
    residual(r);
    const double next = r.cwiseAbs().maxCoeff();
    if (!std::isfinite(next)) throw Error(ErrorKind::NonConvergence, "power-flow iteration diverged");
    const bool stalled = next >= mismatch && mismatch <= tolerance;
    mismatch = std::min(mismatch, next);
    if (stalled) break;
  }
  if (!(mismatch <= tolerance))
    throw Error(ErrorKind::NonConvergence, "power flow did not converge in " + std::to_string(max_iterations) +
                                                " iterations (max mismatch " + std::to_string(mismatch) + " pu)");
  sol.iterations = it;
  sol.max_mismatch = mismatch;
  sol.reference_mismatch = network_outflows(sys, sol.angles)[ref] - target[ref];
  return sol;
}

/// Sum over all buses of the real power each sends into its lines; zero for a lossless network.
inline double lossless_balance(const SystemDescription& sys, const std::vector<double>& angles) {
  double total = 0.0;
  for (const double f : network_outflows(sys, angles)) total += f;
  return total;
}

inline double lossless_balance(const SystemDescription& sys, const AngleSolution& sol) {
  return lossless_balance(sys, sol.angles);
}

}  // namespace freqdesign
