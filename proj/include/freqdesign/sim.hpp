#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "freqdesign/error.hpp"
#include "freqdesign/fullorder.hpp"
#include "freqdesign/linalg.hpp"
#include "freqdesign/system.hpp"

namespace freqdesign {

enum class ModelKind { Full, Reduced, Auxiliary, Nonlinear };

inline const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Full: return "full";
    case ModelKind::Reduced: return "reduced";
    case ModelKind::Auxiliary: return "auxiliary";
    case ModelKind::Nonlinear: return "nonlinear";
  }
  return "?";
}

/// Load step at one bus. delta_p > 0 is a load increase (the bus injection drops by delta_p).
struct StepScenario {
  BusId bus = 0;
  double delta_p = 0.0;  // pu
  double horizon = 60.0;  // s
  double dt = 0.0;        // s; 0 selects min(tau)/20

  void check() const {
    if (!(horizon > 0.0)) throw Error(ErrorKind::InvalidArgument, "horizon must be > 0");
    if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt must be > 0");
    if (dt > horizon) throw Error(ErrorKind::InvalidArgument, "dt must not exceed the horizon");
  }
};

/// Default integrator step: a twentieth of the fastest turbine time constant.
inline double default_dt(std::span<const double> taus) {
  return *std::min_element(taus.begin(), taus.end()) / 20.0;
}

/// Scenario with dt filled in from the system when left at 0.
inline StepScenario resolve(StepScenario sc, const SystemDescription& sys) {
  if (sc.dt == 0.0) sc.dt = default_dt(sys.taus());
  sc.check();
  return sc;
}

/// Uniformly sampled time series; row k of `states` is the sample at times[k].
struct Trajectory {
  std::vector<double> times;
  Matrix states;
  std::vector<std::string> labels;
  ModelKind model_kind = ModelKind::Full;
  std::map<std::string, std::string> metadata;

  std::size_t size() const { return times.size(); }

  Eigen::Index index_of(const std::string& label) const {
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == label) return static_cast<Eigen::Index>(i);
    throw Error(ErrorKind::InvalidArgument, "trajectory has no column '" + label + "'");
  }

  Vector column(const std::string& label) const { return states.col(index_of(label)); }
};

/// Piecewise-constant input: values[i] holds on [breakpoints[i], breakpoints[i+1]).
struct InputSignal {
  std::vector<double> breakpoints;
  std::vector<Vector> values;

  static InputSignal constant(Vector v) { return {{0.0}, {std::move(v)}}; }

  Eigen::Index dimension() const { return values.empty() ? 0 : values.front().size(); }

  Vector at(double t) const {
    if (values.empty()) throw Error(ErrorKind::InvalidArgument, "empty input signal");
    std::size_t k = 0;
    for (std::size_t i = 0; i < breakpoints.size(); ++i)
      if (breakpoints[i] <= t + 1e-12 * std::max(1.0, std::abs(t))) k = i;
    return values[k];
  }
};

/// Input vector [P_load, Pr_1..] carrying a load step: P_load changes by -delta_p, references fixed.
inline InputSignal load_step_input(Eigen::Index n_inputs, double delta_p) {
  Vector u = Vector::Zero(n_inputs);
  u(0) = -delta_p;
  return InputSignal::constant(u);
}

enum class Integrator { Exact, Rk4 };

inline std::vector<double> uniform_grid(double dt, double horizon) {
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
  std::vector<double> t(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) t[k] = static_cast<double>(k) * dt;
  return t;
}

namespace detail {

inline void check_finite(const Vector& x, double t) {
  if (!x.allFinite()) throw Error(ErrorKind::NonFiniteState, "state became non-finite at t = " + std::to_string(t));
}

}  // namespace detail

/// Zero-order-hold simulation of x' = a x + b u on a uniform grid.
/// Exact stepping uses x+ = e^{a dt} x + a^-1 (e^{a dt} - I) b u and falls back to RK4 when a is singular.
inline Trajectory simulate_linear(const Matrix& a, const Matrix& b, const InputSignal& u, const Vector& x0,
                                  double dt, double horizon, Integrator method = Integrator::Exact) {
  if (!(dt > 0.0) || !(horizon > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt and horizon must be > 0");
  if (a.rows() != a.cols() || b.rows() != a.rows() || x0.size() != a.rows() || u.dimension() != b.cols())
    throw Error(ErrorKind::InvalidArgument, "simulate_linear: inconsistent dimensions");

  Trajectory traj;
  traj.times = uniform_grid(dt, horizon);
  const auto n = a.rows();
  traj.states.resize(static_cast<Eigen::Index>(traj.times.size()), n);

  Matrix ad;
  Matrix bd;
  bool exact = method == Integrator::Exact;
  if (exact) {
    Eigen::FullPivLU<Matrix> lu(a);
    if (lu.isInvertible() && linalg::condition_number(a) < 1e12) {
      ad = linalg::expm(a * dt);
      bd = lu.solve((ad - Matrix::Identity(n, n)) * b);
    } else {
      exact = false;
    }
  }
  traj.metadata["integrator"] = exact ? "exact" : "rk4";

  Vector x = x0;
  traj.states.row(0) = x.transpose();
  for (std::size_t k = 0; k + 1 < traj.times.size(); ++k) {
    const Vector uk = u.at(traj.times[k]);
    if (exact) {
      x = ad * x + bd * uk;
    } else {
      const Vector bu = b * uk;
      const Vector k1 = a * x + bu;
      const Vector k2 = a * (x + 0.5 * dt * k1) + bu;
      const Vector k3 = a * (x + 0.5 * dt * k2) + bu;
      const Vector k4 = a * (x + dt * k3) + bu;
      x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    detail::check_finite(x, traj.times[k + 1]);
    traj.states.row(static_cast<Eigen::Index>(k) + 1) = x.transpose();
  }
  return traj;
}

struct StepMetrics {
  double nadir = 0.0;
  double nadir_time = 0.0;
  double steady_state = 0.0;
  double overshoot = 0.0;
  double settling_time_2pct = 0.0;
  double final_window_variation = 0.0;
};

/// Nadir, steady state (mean of the final 10% of samples), overshoot and 2% settling time.
inline StepMetrics step_metrics(const Trajectory& traj, Eigen::Index column, double settle_tolerance = 1e-8) {
  const auto n = static_cast<Eigen::Index>(traj.size());
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "empty trajectory");
  const Vector y = traj.states.col(column);

  StepMetrics m;
  Eigen::Index imin = 0;
  m.nadir = y.minCoeff(&imin);
  m.nadir_time = traj.times[imin];

  const Eigen::Index window = std::max<Eigen::Index>(1, n / 10);
  const auto tail = y.tail(window);
  m.steady_state = tail.mean();
  m.final_window_variation = tail.maxCoeff() - tail.minCoeff();
  if (m.final_window_variation >= settle_tolerance) {
    throw Error(ErrorKind::NotSettled, "final-window variation " + std::to_string(m.final_window_variation) +
                                           " exceeds " + std::to_string(settle_tolerance));
  }

  const double mag = std::abs(m.steady_state);
  if (mag > 0.0) {
    const double sign = m.steady_state > 0.0 ? 1.0 : -1.0;
    const double peak = (sign * y.array()).maxCoeff();
    m.overshoot = std::max(0.0, (peak - mag) / mag);
  }
  const double band = 0.02 * mag;
  m.settling_time_2pct = 0.0;
  for (Eigen::Index k = n - 1; k >= 0; --k) {
    if (std::abs(y(k) - m.steady_state) > band) {
      m.settling_time_2pct = traj.times[std::min(k + 1, n - 1)];
      break;
    }
  }
  return m;
}

struct PoleZero {
  std::vector<std::complex<double>> poles;
  std::vector<std::complex<double>> zeros;
};

/// Poles of a and transmission zeros of the SISO channel input_index -> output_index.
inline PoleZero pole_zero(const Matrix& a, const Matrix& b, Eigen::Index input_index = 0,
                          Eigen::Index output_index = 0) {
  const auto n = a.rows();
  PoleZero pz;
  pz.poles = linalg::sorted(linalg::eigenvalues(a));

  // Rosenbrock pencil [[A, b_j], [e_i^T, 0]] - s [[I, 0], [0, 0]].
  Matrix p = Matrix::Zero(n + 1, n + 1);
  Matrix q = Matrix::Zero(n + 1, n + 1);
  p.topLeftCorner(n, n) = a;
  p.block(0, n, n, 1) = b.col(input_index);
  p(n, output_index) = 1.0;
  q.topLeftCorner(n, n).setIdentity();
  Eigen::GeneralizedEigenSolver<Matrix> ges(p, q, false);
  if (ges.info() != Eigen::Success) throw Error(ErrorKind::EigensolveFailure, "QZ iteration failed");
  const double scale = std::max(1.0, p.cwiseAbs().maxCoeff());
  ComplexVector finite(n + 1);
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i < n + 1; ++i) {
    const std::complex<double> alpha = ges.alphas()(i);
    const double beta = ges.betas()(i);
    if (std::abs(beta) > 1e-10 * std::max(scale, std::abs(alpha))) finite(count++) = alpha / beta;
  }
  pz.zeros = linalg::sorted(finite.head(count));
  return pz;
}

/// Complex pole with the largest positive imaginary part among the least-damped pairs.
inline std::optional<std::complex<double>> dominant_complex_pole(const std::vector<std::complex<double>>& poles,
                                                                 double imag_tolerance = 1e-9) {
  std::optional<std::complex<double>> best;
  for (const auto& p : poles) {
    if (p.imag() <= imag_tolerance) continue;
    if (!best || p.real() > best->real()) best = p;
  }
  return best;
}

/// DER power output changes D_d dw + M_d dw' along a linear trajectory whose first state is dw.
/// Returned as power injected (positive when frequency falls).
inline Matrix der_power_response(const Trajectory& traj, const Matrix& a, const Matrix& b, const InputSignal& u,
                                 std::span<const DerParams> ders) {
  const auto n = static_cast<Eigen::Index>(traj.size());
  Matrix out(n, static_cast<Eigen::Index>(ders.size()));
  for (Eigen::Index k = 0; k < n; ++k) {
    const Vector x = traj.states.row(k).transpose();
    const double w = x(0);
    const double wdot = a.row(0).dot(x) + b.row(0).dot(u.at(traj.times[k]));
    for (std::size_t d = 0; d < ders.size(); ++d)
      out(k, static_cast<Eigen::Index>(d)) = -(ders[d].droop * w + ders[d].synthetic_inertia * wdot);
  }
  return out;
}

}  // namespace freqdesign
