#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "freqdesign/error.hpp"
#include "freqdesign/fullorder.hpp"
#include "freqdesign/system.hpp"

namespace freqdesign {

/// H(s) = gain (s + zero_rate) / (s^2 + 2 zeta omega_n s + omega_n^2), load step to frequency deviation.
struct TransferFunction2 {
  double gain = 0.0;
  double zero_rate = 0.0;
  double omega_n = 0.0;
  double zeta = 0.0;

  double zero() const { return -zero_rate; }
};

inline TransferFunction2 transfer_function(const Aggregates& agg, double tau_bar) {
  const double stiffness = agg.r_g_eff + agg.d_eff;
  if (!(agg.m_eff > 0.0) || !(tau_bar > 0.0) || !(stiffness > 0.0))
    throw Error(ErrorKind::DegenerateModel, "transfer function needs m_eff > 0, tau_bar > 0 and r_g_eff + d_eff > 0");
  TransferFunction2 tf;
  tf.gain = 1.0 / agg.m_eff;
  tf.zero_rate = 1.0 / tau_bar;
  tf.omega_n = std::sqrt(stiffness / (tau_bar * agg.m_eff));
  tf.zeta = 0.5 * (agg.m_eff + tau_bar * agg.d_eff) / std::sqrt(tau_bar * agg.m_eff * stiffness);
  return tf;
}

/// Steady-state regulation, the inverse DC gain of H.
inline double steady_state_regulation(const TransferFunction2& tf) {
  return tf.omega_n * tf.omega_n / (tf.gain * tf.zero_rate);
}

/// Total DER droop needed for the requested regulation.
inline double required_der_droop_total(double r_reg, double r_g_eff, double gen_damping_total) {
  double total = r_reg - r_g_eff - gen_damping_total;
  // Totals short only by summation rounding count as exactly zero.
  if (total < 0.0 && total > -1e-12 * std::max(1.0, std::abs(r_reg))) total = 0.0;
  if (total < 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "r_reg = %.6g < r_g_eff + sum D_G = %.6g + %.6g = %.6g", r_reg, r_g_eff,
                  gen_damping_total, r_g_eff + gen_damping_total);
    throw Error(ErrorKind::InfeasibleRegulation, buf);
  }
  return total;
}

/// Positive real roots of M^2 + (2 tau D - 4 zeta^2 tau (R + D)) M + tau^2 D^2 = 0, ascending.
/// Each root is checked by recomputing zeta forward.
inline std::vector<double> solve_m_eff_for_zeta(double zeta_target, double d_eff, double r_g_eff, double tau_bar) {
  if (!(zeta_target > 0.0)) throw Error(ErrorKind::InvalidArgument, "zeta target must be > 0");
  if (!(d_eff >= 0.0) || !(tau_bar > 0.0) || !(r_g_eff + d_eff > 0.0))
    throw Error(ErrorKind::InvalidArgument, "need d_eff >= 0, tau_bar > 0 and r_g_eff + d_eff > 0");
  const double stiffness = r_g_eff + d_eff;
  const double p = 2.0 * tau_bar * d_eff - 4.0 * zeta_target * zeta_target * tau_bar * stiffness;
  const double q = tau_bar * tau_bar * d_eff * d_eff;
  const double disc = p * p - 4.0 * q;
  if (disc < 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "zeta = %.6g is unreachable for d_eff = %.6g, tau_bar = %.6g (discriminant %.3g < 0)",
                  zeta_target, d_eff, tau_bar, disc);
    throw Error(ErrorKind::NoRealSolution, buf);
  }
  // Numerically stable pair: q1 = (-p - sign(p) sqrt(disc)) / 2, q2 = q / q1.
  std::vector<double> roots;
  const double s = std::sqrt(disc);
  const double big = -0.5 * (p + (p >= 0.0 ? s : -s));
  if (big != 0.0) {
    roots.push_back(big);
    roots.push_back(q / big);
  } else {
    roots.push_back(0.0);
  }
  std::vector<double> out;
  for (double m : roots) {
    if (!(m > 0.0)) continue;
    const double zeta = 0.5 * (m + tau_bar * d_eff) / std::sqrt(tau_bar * m * stiffness);
    if (std::abs(zeta - zeta_target) <= 1e-9 * std::max(1.0, zeta_target)) out.push_back(m);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.empty()) throw Error(ErrorKind::NoRealSolution, "no positive M_eff reproduces the requested zeta");
  return out;
}

/// Inertia that places the natural frequency at omega_n.
inline double m_eff_for_omega_n(double omega_n_target, double d_eff, double r_g_eff, double tau_bar) {
  if (!(omega_n_target > 0.0) || !(tau_bar > 0.0) || !(r_g_eff + d_eff > 0.0))
    throw Error(ErrorKind::InvalidArgument, "need omega_n > 0, tau_bar > 0 and r_g_eff + d_eff > 0");
  return (r_g_eff + d_eff) / (tau_bar * omega_n_target * omega_n_target);
}

/// Splits a total across DERs in proportion to their ratings.
inline std::vector<double> allocate_proportional(double total, std::span<const double> ratings) {
  if (!(total >= 0.0)) throw Error(ErrorKind::InvalidArgument, "allocation total must be >= 0");
  if (ratings.empty()) {
    if (total == 0.0) return {};
    throw Error(ErrorKind::InvalidArgument, "cannot allocate a nonzero total to an empty DER set");
  }
  for (double r : ratings)
    if (!(r > 0.0)) throw Error(ErrorKind::InvalidArgument, "ratings must be > 0");
  // Sort before summing so that the result does not depend on input order.
  std::vector<double> sorted(ratings.begin(), ratings.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  double comp = 0.0;
  for (double r : sorted) {
    const double y = r - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  std::vector<double> out;
  out.reserve(ratings.size());
  for (double r : ratings) out.push_back(total * (r / sum));
  return out;
}

struct DesignTargets {
  double r_reg = 0.0;
  std::optional<double> zeta_target;
  std::optional<double> omega_n_target;
};

struct DesignResult {
  double d_eff = 0.0;
  double m_eff = 0.0;
  double der_droop_total = 0.0;
  double der_inertia_total = 0.0;
  std::vector<BusId> der_buses;
  std::vector<double> der_droops;
  std::vector<double> der_inertias;
  std::vector<double> m_eff_candidates;
  double tau_bar = 0.0;
  TransferFunction2 achieved;
  double r_reg_achieved = 0.0;
};

/// Chooses DER droop and synthetic inertia so that the lumped model meets the regulation and
/// transient targets, then shares both totals across DERs in proportion to ratings.
inline DesignResult design(const SystemDescription& sys, const DesignTargets& targets, double tau_bar) {
  if (targets.zeta_target.has_value() == targets.omega_n_target.has_value())
    throw Error(ErrorKind::InvalidArgument, "exactly one of zeta or omega_n must be targeted");
  if (!(tau_bar > 0.0)) throw Error(ErrorKind::InvalidTau, "tau_bar must be > 0");

  Aggregates gen_only = aggregate(sys);
  const double m_gen = gen_only.m_gen;
  const double d_gen = gen_only.d_gen;
  const double r_g_eff = gen_only.r_g_eff;

  DesignResult res;
  res.tau_bar = tau_bar;
  res.der_droop_total = required_der_droop_total(targets.r_reg, r_g_eff, d_gen);
  res.d_eff = d_gen + res.der_droop_total;
  if (res.der_droop_total > 0.0 && sys.ders.empty())
    throw Error(ErrorKind::InfeasibleRegulation, "regulation target needs DER droop but the system has no DERs");

  // Admit roots that fall short of the generator inertia only by rounding.
  const double slack = 1e-12 * std::max(1.0, m_gen);
  if (targets.zeta_target) {
    res.m_eff_candidates = solve_m_eff_for_zeta(*targets.zeta_target, res.d_eff, r_g_eff, tau_bar);
  } else {
    res.m_eff_candidates = {m_eff_for_omega_n(*targets.omega_n_target, res.d_eff, r_g_eff, tau_bar)};
  }
  std::optional<double> chosen;
  for (double m : res.m_eff_candidates)
    if (m >= m_gen - slack) {
      chosen = m;
      break;  // candidates are ascending; take the least added inertia
    }
  if (!chosen) {
    std::ostringstream os;
    os.precision(6);
    os << "every M_eff candidate is below sum M_G = " << m_gen << " (candidates:";
    for (double m : res.m_eff_candidates) os << ' ' << m;
    os << ")";
    throw Error(ErrorKind::InfeasibleInertia, os.str());
  }
  res.der_inertia_total = std::max(0.0, *chosen - m_gen);
  res.m_eff = m_gen + res.der_inertia_total;
  if (res.der_inertia_total > 0.0 && sys.ders.empty())
    throw Error(ErrorKind::InfeasibleInertia, "transient target needs DER inertia but the system has no DERs");

  const auto ratings = sys.der_ratings();
  res.der_droops = allocate_proportional(res.der_droop_total, ratings);
  res.der_inertias = allocate_proportional(res.der_inertia_total, ratings);
  for (const auto& d : sys.ders) res.der_buses.push_back(d.bus);

  Aggregates designed = gen_only;
  designed.m_eff = res.m_eff;
  designed.d_eff = res.d_eff;
  res.achieved = transfer_function(designed, tau_bar);
  res.r_reg_achieved = steady_state_regulation(res.achieved);
  return res;
}

/// Copy of the system with DER inertia and droop set from a design.
inline SystemDescription apply_design(SystemDescription sys, const DesignResult& res) {
  for (std::size_t i = 0; i < sys.ders.size() && i < res.der_droops.size(); ++i) {
    sys.ders[i].droop = res.der_droops[i];
    sys.ders[i].synthetic_inertia = res.der_inertias[i];
  }
  return sys;
}

/// Copy of the system with all DER responses switched off.
inline SystemDescription without_der_response(SystemDescription sys) {
  for (auto& d : sys.ders) {
    d.droop = 0.0;
    d.synthetic_inertia = 0.0;
  }
  return sys;
}

inline std::string format_design_report(const SystemDescription& sys, const DesignResult& res) {
  const Aggregates agg = aggregate(sys);
  char buf[512];
  std::string out;
  auto line = [&](const char* fmt, auto... args) {
    std::snprintf(buf, sizeof buf, fmt, args...);
    out += buf;
  };
  out += "design report\n";
  line("  tau_bar               %.10g s\n", res.tau_bar);
  line("  D_eff                 %.10g pu  (generators %.10g + DERs %.10g)\n", res.d_eff, agg.d_gen, res.der_droop_total);
  line("  M_eff                 %.10g pu s (generators %.10g + DERs %.10g)\n", res.m_eff, agg.m_gen,
       res.der_inertia_total);
  out += "  M_eff candidates     ";
  for (double m : res.m_eff_candidates) line(" %.10g", m);
  out += "\n";
  line("  achieved R_reg        %.10g pu\n", res.r_reg_achieved);
  line("  achieved zeta         %.10g\n", res.achieved.zeta);
  line("  achieved omega_n      %.10g rad/s\n", res.achieved.omega_n);
  line("  transfer zero         %.10g 1/s\n", res.achieved.zero());
  line("\n  %-6s %-12s %-16s %-16s\n", "bus", "rating", "droop D_D", "inertia M_D");
  for (std::size_t i = 0; i < res.der_buses.size(); ++i)
    line("  %-6d %-12.6g %-16.10g %-16.10g\n", res.der_buses[i], sys.ders[i].rating, res.der_droops[i],
         res.der_inertias[i]);
  return out;
}

}  // namespace freqdesign
