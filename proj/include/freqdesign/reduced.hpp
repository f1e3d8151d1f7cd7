#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "freqdesign/error.hpp"
#include "freqdesign/fullorder.hpp"
#include "freqdesign/linalg.hpp"

namespace freqdesign {

namespace detail {

/// The |G| x 2|G| governor block [A_R  A_tau] of the full model.
inline Matrix governor_block(std::span<const double> taus, std::span<const double> droops) {
  const auto g = static_cast<Eigen::Index>(taus.size());
  Matrix block = Matrix::Zero(g, 2 * g);
  for (Eigen::Index i = 0; i < g; ++i) {
    block(i, i) = -droops[i] / taus[i];
    block(i, g + i) = -1.0 / taus[i];
  }
  return block;
}

inline void check_taus(std::span<const double> taus, std::span<const double> droops) {
  if (taus.empty() || taus.size() != droops.size())
    throw Error(ErrorKind::InvalidArgument, "tau and droop vectors must be nonempty and of equal length");
  for (double t : taus)
    if (!(t > 0.0)) throw Error(ErrorKind::InvalidTau, "turbine time constants must be > 0");
}

}  // namespace detail

/// Spectral norm of (tau_hat^-1 diag(tau) - I) [A_R A_tau].
inline double tau_objective(double tau_hat, std::span<const double> taus, std::span<const double> droops) {
  if (!(tau_hat > 0.0)) throw Error(ErrorKind::InvalidTau, "tau_hat must be > 0");
  detail::check_taus(taus, droops);
  // Row i of the product is (tau_i/tau_hat - 1) times row i of the governor block.
  Matrix m = detail::governor_block(taus, droops);
  for (Eigen::Index i = 0; i < m.rows(); ++i) m.row(i) *= taus[i] / tau_hat - 1.0;
  return linalg::spectral_norm(m);
}

struct TauBarResult {
  double tau_bar = 0.0;
  double objective_value = 0.0;
  std::vector<std::pair<double, double>> search_trace;  // (tau_hat, objective)
};

struct TauSearchOptions {
  int grid_points = 2000;
  double relative_tolerance = 1e-10;
};

/// Golden-section minimization of f on [lo, hi] to the given relative tolerance.
template <typename F>
std::pair<double, double> golden_section(F&& f, double lo, double hi, double relative_tolerance) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  for (int iter = 0; iter < 500 && (hi - lo) > relative_tolerance * std::abs(c + d) * 0.5; ++iter) {
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
    }
  }
  return fc <= fd ? std::pair{c, fc} : std::pair{d, fd};
}

/// Global search for the lumped turbine time constant over [min(tau)/10, 10 max(tau)]:
/// a log-spaced grid (plus each tau_g itself) followed by golden-section refinement
/// inside the bracket around the best sample.
inline TauBarResult optimize_tau_bar(std::span<const double> taus, std::span<const double> droops,
                                     const TauSearchOptions& opts = {}) {
  detail::check_taus(taus, droops);
  if (opts.grid_points < 3) throw Error(ErrorKind::InvalidArgument, "grid needs at least 3 points");
  const double lo = *std::min_element(taus.begin(), taus.end()) / 10.0;
  const double hi = *std::max_element(taus.begin(), taus.end()) * 10.0;

  std::vector<double> samples;
  samples.reserve(opts.grid_points + taus.size());
  const double log_lo = std::log(lo);
  const double log_step = (std::log(hi) - log_lo) / (opts.grid_points - 1);
  for (int i = 0; i < opts.grid_points; ++i) samples.push_back(std::exp(log_lo + log_step * i));
  samples.front() = lo;
  samples.back() = hi;
  samples.insert(samples.end(), taus.begin(), taus.end());
  std::sort(samples.begin(), samples.end());
  samples.erase(std::unique(samples.begin(), samples.end()), samples.end());

  TauBarResult result;
  result.search_trace.reserve(samples.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double v = tau_objective(samples[i], taus, droops);
    result.search_trace.emplace_back(samples[i], v);
    if (v < result.search_trace[best].second) best = i;  // ties keep the smaller tau_hat
  }
  result.tau_bar = samples[best];
  result.objective_value = result.search_trace[best].second;

  if (result.objective_value > 0.0) {
    const double a = samples[best == 0 ? 0 : best - 1];
    const double b = samples[std::min(best + 1, samples.size() - 1)];
    auto f = [&](double t) { return tau_objective(t, taus, droops); };
    const auto [t, v] = golden_section(f, a, b, opts.relative_tolerance);
    if (v < result.objective_value) {
      result.tau_bar = t;
      result.objective_value = v;
    }
  }
  return result;
}

inline void write_search_trace_csv(std::ostream& os, const TauBarResult& r) {
  const auto old = os.precision(17);
  os << "tau_hat,objective\n";
  for (const auto& [t, v] : r.search_trace) os << t << ',' << v << '\n';
  os.precision(old);
}

/// Two-state model x' = A_red x + B_red u with x = [dw, Pm_red], u = [P_load, Pr_red].
struct ReducedModel {
  Matrix a_red;
  Matrix b_red;
  double tau_bar = 0.0;
  Aggregates aggregates;
};

inline ReducedModel build_reduced(const Aggregates& agg, double tau_bar) {
  if (!(agg.m_eff > 0.0)) throw Error(ErrorKind::DegenerateModel, "effective inertia must be > 0");
  if (!(tau_bar > 0.0)) throw Error(ErrorKind::InvalidTau, "tau_bar must be > 0");
  ReducedModel r;
  r.a_red.resize(2, 2);
  r.a_red << -agg.d_eff / agg.m_eff, 1.0 / agg.m_eff, -agg.r_g_eff / tau_bar, -1.0 / tau_bar;
  r.b_red.resize(2, 2);
  r.b_red << 1.0 / agg.m_eff, 0.0, 0.0, 1.0 / tau_bar;
  r.tau_bar = tau_bar;
  r.aggregates = agg;
  return r;
}

/// Full-dimension model with every turbine time constant replaced by tau_bar.
struct AuxiliaryModel {
  Matrix a_bar;
  Matrix b_bar;
  Vector gamma;  // diagonal of the scaling matrix
};

inline Vector gamma_diagonal(std::span<const double> taus, double tau_bar) {
  Vector gamma(static_cast<Eigen::Index>(taus.size()) + 1);
  gamma(0) = 1.0;
  for (std::size_t i = 0; i < taus.size(); ++i) gamma(static_cast<Eigen::Index>(i) + 1) = taus[i] / tau_bar;
  return gamma;
}

inline AuxiliaryModel build_auxiliary(const FullOrderModel& full, double tau_bar) {
  if (!(tau_bar > 0.0)) throw Error(ErrorKind::InvalidTau, "tau_bar must be > 0");
  AuxiliaryModel aux;
  aux.gamma = gamma_diagonal(full.taus, tau_bar);
  aux.a_bar = aux.gamma.asDiagonal() * full.a;
  aux.b_bar = aux.gamma.asDiagonal() * full.b;
  return aux;
}

}  // namespace freqdesign
