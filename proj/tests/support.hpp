#pragma once

// Test-only helpers: independent oracles and random system generators.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "freqdesign/freqdesign.hpp"

namespace freqdesign::testing {

/// Spectral norm from the largest eigenvalue of M^T M (symmetric solver, no SVD).
inline double spectral_norm_oracle(const Matrix& m) {
  const Matrix g = m.transpose() * m;
  Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

/// The |G| x 2|G| matrix (tau_hat^-1 diag(tau) - I) [A_R A_tau], formed entry by entry.
inline Matrix explicit_tau_matrix(double tau_hat, const std::vector<double>& taus, const std::vector<double>& droops) {
  const auto g = static_cast<Eigen::Index>(taus.size());
  Matrix m = Matrix::Zero(g, 2 * g);
  for (Eigen::Index i = 0; i < g; ++i) {
    const double s = taus[i] / tau_hat - 1.0;
    m(i, i) = s * (-droops[i] / taus[i]);
    m(i, g + i) = s * (-1.0 / taus[i]);
  }
  return m;
}

struct GridMin {
  double tau = 0.0;
  double value = 0.0;
};

/// Brute-force minimum of the tau objective on a uniform grid.
inline GridMin brute_force_tau(const std::vector<double>& taus, const std::vector<double>& droops, double lo,
                               double hi, int points) {
  GridMin best{lo, std::numeric_limits<double>::infinity()};
  for (int i = 0; i < points; ++i) {
    const double t = lo + (hi - lo) * i / (points - 1);
    // Closed-form norm for diagonal-row structure: rows are orthogonal, so the norm is the largest row norm.
    double v = 0.0;
    for (std::size_t g = 0; g < taus.size(); ++g) {
      const double s = std::abs(taus[g] / t - 1.0);
      v = std::max(v, s * std::hypot(droops[g], 1.0) / taus[g]);
    }
    if (v < best.value) best = {t, v};
  }
  return best;
}

/// Polynomial roots by Durand-Kerner iteration; coeffs are highest degree first, monic not required.
inline std::vector<std::complex<double>> polynomial_roots(std::vector<double> coeffs) {
  const double lead = coeffs.front();
  for (double& c : coeffs) c /= lead;
  const std::size_t n = coeffs.size() - 1;
  std::vector<std::complex<double>> z(n);
  const std::complex<double> seed(0.4, 0.9);
  for (std::size_t i = 0; i < n; ++i) z[i] = std::pow(seed, static_cast<double>(i));
  auto eval = [&](std::complex<double> x) {
    std::complex<double> acc = 0.0;
    for (double c : coeffs) acc = acc * x + c;
    return acc;
  };
  for (int it = 0; it < 2000; ++it) {
    double delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::complex<double> den = 1.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) den *= z[i] - z[j];
      const auto step = eval(z[i]) / den;
      z[i] -= step;
      delta = std::max(delta, std::abs(step));
    }
    if (delta < 1e-15) break;
  }
  return z;
}

/// Characteristic polynomial coefficients of a 3x3 matrix: s^3 - tr s^2 + c2 s - det.
inline std::vector<double> char_poly3(const Matrix& a) {
  const double tr = a.trace();
  const double c2 = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0) + a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0) +
                    a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1);
  return {1.0, -tr, c2, -a.determinant()};
}

/// e^{A t} through the eigendecomposition (independent of the Pade route).
inline Matrix expm_eig(const Matrix& a, double t) {
  Eigen::EigenSolver<Matrix> es(a);
  const ComplexMatrix p = es.eigenvectors();
  ComplexVector ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = std::exp(ev(i) * t);
  return (p * ev.asDiagonal() * p.inverse()).real();
}

/// Analytic step response of k (s + a) / (s^2 + 2 zeta wn s + wn^2) to a step of height h (underdamped).
inline double tf2_step(const TransferFunction2& tf, double h, double t) {
  const double wn2 = tf.omega_n * tf.omega_n;
  const double sigma = tf.zeta * tf.omega_n;
  const double wd = tf.omega_n * std::sqrt(1.0 - tf.zeta * tf.zeta);
  const double a0 = tf.gain * tf.zero_rate / wn2;
  const double b = -a0;
  const double c = tf.gain - 2.0 * sigma * a0;
  const double e = std::exp(-sigma * t);
  return h * (a0 + e * (b * std::cos(wd * t) + (c - b * sigma) / wd * std::sin(wd * t)));
}

/// Random connected lossless network with 4-8 buses, 1-3 generators and a mix of DER and passive buses.
/// Injections are balanced, so the reference bus needs no extra power.
inline SystemDescription random_system(unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto uni = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };
  const int n = 4 + static_cast<int>(rng() % 5);
  const int n_gen = 1 + static_cast<int>(rng() % 3);

  SystemDescription sys;
  sys.base_mva = uni(10.0, 100.0);
  sys.base_kv = uni(1.0, 230.0);
  for (int i = 0; i < n; ++i) {
    Bus b;
    b.id = 10 + 3 * i;  // non-contiguous ids
    b.kind = i < n_gen ? BusKind::Generator : (u01(rng) < 0.6 ? BusKind::Der : BusKind::Passive);
    b.voltage_mag = uni(0.95, 1.05);
    sys.buses.push_back(b);
  }
  std::shuffle(sys.buses.begin(), sys.buses.end(), rng);

  // Spanning tree plus a few chords.
  std::set<std::pair<int, int>> used;
  for (int i = 1; i < n; ++i) {
    const int j = static_cast<int>(rng() % static_cast<unsigned>(i));
    used.insert(std::minmax(i, j));
    sys.lines.push_back({sys.buses[i].id, sys.buses[j].id, uni(0.05, 0.4)});
  }
  for (int extra = 0; extra < n / 2; ++extra) {
    const int i = static_cast<int>(rng() % n);
    const int j = static_cast<int>(rng() % n);
    if (i == j || used.count(std::minmax(i, j))) continue;
    used.insert(std::minmax(i, j));
    sys.lines.push_back({sys.buses[i].id, sys.buses[j].id, uni(0.05, 0.4)});
  }

  double load = 0.0;
  for (auto& b : sys.buses) {
    if (b.kind == BusKind::Generator) continue;
    b.injection = -uni(0.0, 0.05);
    load -= b.injection;
  }
  std::vector<GeneratorParams> gens;
  double share_total = 0.0;
  std::vector<double> shares;
  for (const auto& b : sys.buses)
    if (b.kind == BusKind::Generator) {
      shares.push_back(uni(0.5, 1.5));
      share_total += shares.back();
    }
  std::size_t gi = 0;
  for (const auto& b : sys.buses) {
    if (b.kind == BusKind::Generator) {
      GeneratorParams g;
      g.bus = b.id;
      g.inertia = uni(0.09, 0.2);
      g.damping = uni(0.03, 0.065);
      g.droop_inverse = uni(0.06, 0.33);
      g.turbine_tc = uni(2.7, 15.0);
      g.reference = load * shares[gi++] / share_total;
      sys.generators.push_back(g);
    } else if (b.kind == BusKind::Der) {
      DerParams d;
      d.bus = b.id;
      d.rating = uni(0.1, 1.0);
      if (u01(rng) < 0.7) {
        d.synthetic_inertia = uni(0.005, 0.05);
        d.droop = uni(0.0, 0.05);
      }
      d.injection = b.injection;
      sys.ders.push_back(d);
    }
  }
  return sys;
}

inline double max_abs_diff(const Vector& a, const Vector& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace freqdesign::testing
