#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "freqdesign/error.hpp"
#include "freqdesign/linalg.hpp"
#include "freqdesign/system.hpp"

namespace freqdesign {

/// Spectral abscissa must be below -kHurwitzMargin for a matrix to count as Hurwitz.
inline constexpr double kHurwitzMargin = 1e-9;
/// Eigenvector condition numbers above this are treated as non-diagonalizable.
inline constexpr double kDefectiveThreshold = 1e8;

struct Aggregates {
  double m_eff = 0.0;
  double d_eff = 0.0;
  double r_g_eff = 0.0;
  double p_load = 0.0;
  // Generator-only parts, kept for design feasibility checks.
  double m_gen = 0.0;
  double d_gen = 0.0;

  double m_der() const { return m_eff - m_gen; }
  double d_der() const { return d_eff - d_gen; }
};

/// Effective inertia, damping, governor droop and total load of the common-frequency model.
inline Aggregates aggregate(const SystemDescription& sys) {
  Aggregates agg;
  for (const auto& g : sys.generators) {
    agg.m_gen += g.inertia;
    agg.d_gen += g.damping;
    agg.r_g_eff += g.droop_inverse;
    agg.p_load += sys.buses[sys.require_bus(g.bus)].injection;
  }
  double m_der = 0.0;
  double d_der = 0.0;
  for (const auto& d : sys.ders) {
    m_der += d.synthetic_inertia;
    d_der += d.droop;
    agg.p_load += d.injection;
  }
  agg.m_eff = agg.m_gen + m_der;
  agg.d_eff = agg.d_gen + d_der;
  return agg;
}

/// Linear model x' = A x + B u with x = [dw, Pm_1..Pm_G] and u = [P_load, Pr_1..Pr_G].
struct FullOrderModel {
  Matrix a;
  Matrix b;
  std::vector<std::string> state_labels;
  std::vector<std::string> input_labels;
  std::vector<double> taus;
  std::vector<double> droops;
  Aggregates aggregates;

  std::size_t generator_count() const { return taus.size(); }
};

inline FullOrderModel build_full_model(const Aggregates& agg, std::span<const double> taus,
                                       std::span<const double> droops) {
  if (taus.size() != droops.size())
    throw Error(ErrorKind::InvalidArgument, "tau and droop vectors differ in length");
  if (taus.empty()) throw Error(ErrorKind::InvalidArgument, "at least one generator is required");
  if (!(agg.m_eff > 0.0)) throw Error(ErrorKind::DegenerateModel, "effective inertia must be > 0");
  for (double t : taus)
    if (!(t > 0.0)) throw Error(ErrorKind::DegenerateModel, "turbine time constants must be > 0");

  const auto g = static_cast<Eigen::Index>(taus.size());
  FullOrderModel model;
  model.a = Matrix::Zero(g + 1, g + 1);
  model.b = Matrix::Zero(g + 1, g + 1);
  model.a(0, 0) = -agg.d_eff / agg.m_eff;
  model.b(0, 0) = 1.0 / agg.m_eff;
  for (Eigen::Index i = 0; i < g; ++i) {
    const double inv_tau = 1.0 / taus[i];
    model.a(0, i + 1) = 1.0 / agg.m_eff;
    model.a(i + 1, 0) = -droops[i] * inv_tau;
    model.a(i + 1, i + 1) = -inv_tau;
    model.b(i + 1, i + 1) = inv_tau;
  }
  model.state_labels.push_back("domega");
  model.input_labels.push_back("P_load");
  for (Eigen::Index i = 0; i < g; ++i) {
    model.state_labels.push_back("Pm_" + std::to_string(i + 1));
    model.input_labels.push_back("Pr_" + std::to_string(i + 1));
  }
  model.taus.assign(taus.begin(), taus.end());
  model.droops.assign(droops.begin(), droops.end());
  model.aggregates = agg;
  return model;
}

inline FullOrderModel build_full_model(const SystemDescription& sys, const Aggregates& agg) {
  const auto taus = sys.taus();
  const auto droops = sys.droops();
  return build_full_model(agg, taus, droops);
}

struct HurwitzReport {
  bool hurwitz = false;
  double spectral_abscissa = 0.0;
};

inline HurwitzReport is_hurwitz(const Matrix& a) {
  const double abscissa = linalg::spectral_abscissa(linalg::eigenvalues(a));
  return {abscissa < -kHurwitzMargin, abscissa};
}

/// 2-norm condition number of the (unit-column) eigenvector matrix.
inline double diagonalizability_report(const Matrix& a) {
  const auto dec = linalg::eigen_decompose(a);
  return linalg::condition_number(dec.vectors);
}

inline bool effectively_diagonalizable(const Matrix& a) { return diagonalizability_report(a) <= kDefectiveThreshold; }

}  // namespace freqdesign
