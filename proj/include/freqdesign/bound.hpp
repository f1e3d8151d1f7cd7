#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <vector>

#include "freqdesign/error.hpp"
#include "freqdesign/fullorder.hpp"
#include "freqdesign/linalg.hpp"
#include "freqdesign/sim.hpp"

namespace freqdesign {

/// ||(Gamma - I) A||_2 for Gamma = diag(gamma).
inline double perturbation_norm(const FullOrderModel& full, const Vector& gamma) {
  if (gamma.size() != full.a.rows()) throw Error(ErrorKind::InvalidArgument, "gamma has the wrong dimension");
  const Vector scale = gamma - Vector::Ones(gamma.size());
  return linalg::spectral_norm(scale.asDiagonal() * full.a);
}

/// ||e^{A t}||_2 <= k e^{-lambda t} for all t >= 0.
struct DecayEnvelope {
  double k = 1.0;
  double lambda = 0.0;
};

/// Certificate from the eigendecomposition: lambda = -abscissa, k = cond_2(eigenvectors).
inline DecayEnvelope decay_envelope(const Matrix& a_bar) {
  const auto dec = linalg::eigen_decompose(a_bar);
  const double abscissa = linalg::spectral_abscissa(dec.values);
  if (!(abscissa < -kHurwitzMargin))
    throw Error(ErrorKind::NotHurwitz, "spectral abscissa " + std::to_string(abscissa) + " is not negative");
  const double k = linalg::condition_number(dec.vectors);
  if (!(k <= kDefectiveThreshold))
    throw Error(ErrorKind::EffectivelyDefective,
                "eigenvector condition number " + std::to_string(k) + " exceeds the diagonalizability threshold");
  return {std::max(1.0, k), -abscissa};
}

/// Largest ratio ||e^{A t}||_2 / (k e^{-lambda t}) over `samples` log-spaced times in [lambda^-1/1000, 10/lambda],
/// plus t = 0. Values <= 1 mean the envelope holds at every sample.
inline double envelope_worst_ratio(const Matrix& a, const DecayEnvelope& env, int samples = 200) {
  double worst = linalg::spectral_norm(Matrix::Identity(a.rows(), a.cols())) / env.k;
  const double t_hi = 10.0 / env.lambda;
  const double t_lo = t_hi * 1e-4;
  for (int i = 0; i < samples; ++i) {
    const double t = t_lo * std::pow(t_hi / t_lo, static_cast<double>(i) / (samples - 1));
    const double lhs = linalg::spectral_norm(linalg::expm(a * t));
    worst = std::max(worst, lhs / (env.k * std::exp(-env.lambda * t)));
  }
  return worst;
}

struct BoundReport {
  double e_norm = 0.0;
  DecayEnvelope envelope;
  std::vector<double> times;
  std::vector<double> bound_series;
  std::vector<double> error_series;
  bool satisfied = false;
  std::size_t violations = 0;
  double max_ratio = 0.0;  // max error/bound over samples with bound > 0
};

/// Evaluates e_norm (k/lambda) sup_{s<=t}(||x(s)|| + ||A^-1 B u(s)||) along the full-model trajectory and
/// compares it with |dw(t) - dw_red(t)|. Column 0 of both trajectories must be the frequency deviation.
inline BoundReport evaluate_bound(const Trajectory& full_traj, const Trajectory& reduced_traj, const InputSignal& u,
                                  const FullOrderModel& full, double e_norm, const DecayEnvelope& envelope) {
  const std::size_t n = full_traj.size();
  if (reduced_traj.size() != n) throw Error(ErrorKind::GridMismatch, "trajectories have different lengths");
  for (std::size_t k = 0; k < n; ++k) {
    const double t = full_traj.times[k];
    if (std::abs(t - reduced_traj.times[k]) > 1e-12 * std::max(1.0, std::abs(t)))
      throw Error(ErrorKind::GridMismatch, "sample times differ at index " + std::to_string(k));
  }
  Eigen::FullPivLU<Matrix> lu(full.a);
  if (!lu.isInvertible()) throw Error(ErrorKind::SingularMatrix, "state matrix is singular; A^-1 B u is undefined");

  BoundReport rep;
  rep.e_norm = e_norm;
  rep.envelope = envelope;
  rep.times = full_traj.times;
  rep.bound_series.resize(n);
  rep.error_series.resize(n);
  const double gain = e_norm * envelope.k / envelope.lambda;
  double running_sup = 0.0;
  rep.satisfied = true;
  for (std::size_t k = 0; k < n; ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    const Vector x = full_traj.states.row(row).transpose();
    const Vector forced = lu.solve(full.b * u.at(full_traj.times[k]));
    running_sup = std::max(running_sup, x.norm() + forced.norm());
    rep.bound_series[k] = gain * running_sup;
    rep.error_series[k] = std::abs(full_traj.states(row, 0) - reduced_traj.states(row, 0));
    if (rep.error_series[k] > rep.bound_series[k] + 1e-12) {
      rep.satisfied = false;
      ++rep.violations;
    }
    if (rep.bound_series[k] > 0.0) rep.max_ratio = std::max(rep.max_ratio, rep.error_series[k] / rep.bound_series[k]);
  }
  return rep;
}

inline void write_bound_csv(std::ostream& os, const BoundReport& rep) {
  const auto old = os.precision(17);
  os << "t,error,bound\n";
  for (std::size_t k = 0; k < rep.times.size(); ++k)
    os << rep.times[k] << ',' << rep.error_series[k] << ',' << rep.bound_series[k] << '\n';
  os.precision(old);
}

}  // namespace freqdesign
