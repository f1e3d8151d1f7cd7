#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "freqdesign/four_bus.hpp"
#include "freqdesign/design.hpp"
#include "freqdesign/reduced.hpp"
#include "support.hpp"

namespace fd = freqdesign;

namespace {

double four_bus_tau_bar() {
  const auto sys = fd::four_bus_system();
  return fd::optimize_tau_bar(sys.taus(), sys.droops()).tau_bar;
}

void expect_kind(fd::ErrorKind kind, auto&& fn) {
  try {
    fn();
    ADD_FAILURE() << "expected " << fd::to_string(kind);
  } catch (const fd::Error& e) {
    EXPECT_EQ(e.kind(), kind) << e.what();
  }
}

}  // namespace

TEST(TransferFunction, UnitParameters) {
  fd::Aggregates agg;
  agg.m_eff = 1.0;
  agg.d_eff = 1.0;
  agg.r_g_eff = 1.0;
  const auto tf = fd::transfer_function(agg, 1.0);
  EXPECT_DOUBLE_EQ(tf.gain, 1.0);
  EXPECT_DOUBLE_EQ(tf.zero_rate, 1.0);
  EXPECT_DOUBLE_EQ(tf.omega_n, std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(tf.zeta, 1.0 / std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(fd::steady_state_regulation(tf), 2.0);
}

TEST(TransferFunction, MatchesReducedModelPoles) {
  const auto agg = fd::aggregate(fd::four_bus_system());
  const double tb = four_bus_tau_bar();
  const auto tf = fd::transfer_function(agg, tb);
  const auto red = fd::build_reduced(agg, tb);
  // s^2 - tr s + det must equal s^2 + 2 zeta wn s + wn^2
  EXPECT_NEAR(-red.a_red.trace(), 2 * tf.zeta * tf.omega_n, 1e-14);
  EXPECT_NEAR(red.a_red.determinant(), tf.omega_n * tf.omega_n, 1e-14);
  EXPECT_NEAR(fd::steady_state_regulation(tf), 0.0868 + 0.3038, 1e-13);
}

TEST(TransferFunction, Degenerate) {
  fd::Aggregates agg;
  expect_kind(fd::ErrorKind::DegenerateModel, [&] { fd::transfer_function(agg, 1.0); });
}

TEST(Allocation, ProportionalToRatings) {
  const std::vector<double> ratings{0.25, 0.75};
  const auto a = fd::allocate_proportional(0.0738, ratings);
  EXPECT_NEAR(a[0], 0.01845, 1e-15);
  EXPECT_NEAR(a[1], 0.05535, 1e-15);
  EXPECT_NEAR(a[0] / a[1], 1.0 / 3.0, 1e-15);
}

TEST(Allocation, SumAndOrderIndependence) {
  const std::vector<double> r1{0.3, 1.7, 0.01, 5.0}, r2{5.0, 0.01, 1.7, 0.3};
  const auto a = fd::allocate_proportional(1.234, r1);
  const auto b = fd::allocate_proportional(1.234, r2);
  EXPECT_NEAR(a[0] + a[1] + a[2] + a[3], 1.234, 1e-15);
  EXPECT_EQ(a[0], b[3]);
  EXPECT_EQ(a[1], b[2]);
}

TEST(Allocation, Errors) {
  const std::vector<double> bad{1.0, 0.0}, none;
  expect_kind(fd::ErrorKind::InvalidArgument, [&] { fd::allocate_proportional(1.0, bad); });
  expect_kind(fd::ErrorKind::InvalidArgument, [&] { fd::allocate_proportional(1.0, none); });
  EXPECT_TRUE(fd::allocate_proportional(0.0, none).empty());
}

TEST(SolveMEff, RootsReproduceZeta) {
  for (double zeta : {0.6, 0.7, 1.0, 1.5}) {
    const auto roots = fd::solve_m_eff_for_zeta(zeta, 0.1606, 0.3038, 5.69);
    ASSERT_FALSE(roots.empty());
    for (double m : roots) {
      fd::Aggregates agg;
      agg.m_eff = m;
      agg.d_eff = 0.1606;
      agg.r_g_eff = 0.3038;
      EXPECT_NEAR(fd::transfer_function(agg, 5.69).zeta, zeta, 1e-12);
    }
  }
}

TEST(SolveMEff, UnreachableZeta) {
  // zeta is bounded below by sqrt(tau D / (R + D)) over M
  expect_kind(fd::ErrorKind::NoRealSolution, [] { fd::solve_m_eff_for_zeta(0.1, 0.5, 0.01, 5.0); });
}

TEST(MEffForOmegaN, RoundTrip) {
  const double m = fd::m_eff_for_omega_n(0.6, 0.16, 0.30, 5.7);
  fd::Aggregates agg;
  agg.m_eff = m;
  agg.d_eff = 0.16;
  agg.r_g_eff = 0.30;
  EXPECT_NEAR(fd::transfer_function(agg, 5.7).omega_n, 0.6, 1e-14);
}

TEST(RequiredDroop, Values) {
  EXPECT_NEAR(fd::required_der_droop_total(0.4644, 0.3038, 0.0868), 0.0738, 1e-15);
  EXPECT_EQ(fd::required_der_droop_total(0.3906, 0.3038, 0.0868), 0.0);
  expect_kind(fd::ErrorKind::InfeasibleRegulation, [] { fd::required_der_droop_total(0.3, 0.3038, 0.0868); });
}

TEST(Design, FourBusTargets) {
  const auto sys = fd::four_bus_system();
  const double tb = four_bus_tau_bar();
  const auto res = fd::design(sys, {0.4644, 0.7, std::nullopt}, tb);
  EXPECT_NEAR(res.der_droop_total, 0.0738, 1e-12);
  EXPECT_NEAR(res.r_reg_achieved, 0.4644, 1e-9);
  EXPECT_NEAR(res.achieved.zeta, 0.7, 1e-9);
  EXPECT_GE(res.m_eff, 0.2604);
  EXPECT_NEAR(res.der_inertias[0] / res.der_inertias[1], 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(res.der_droops[0] / res.der_droops[1], 1.0 / 3.0, 1e-12);
  EXPECT_EQ(res.der_buses, (std::vector<fd::BusId>{3, 4}));
  // The chosen root is the smallest one that respects the generator inertia.
  ASSERT_EQ(res.m_eff_candidates.size(), 2u);
  EXPECT_EQ(res.m_eff, res.m_eff_candidates.front());

  const auto designed = fd::apply_design(sys, res);
  const auto agg = fd::aggregate(designed);
  EXPECT_NEAR(agg.m_eff, res.m_eff, 1e-14);
  EXPECT_NEAR(agg.d_eff, res.d_eff, 1e-14);
}

TEST(Design, OmegaNTarget) {
  const auto sys = fd::four_bus_system();
  const double tb = four_bus_tau_bar();
  const auto res = fd::design(sys, {0.4644, std::nullopt, 0.5}, tb);
  EXPECT_NEAR(res.achieved.omega_n, 0.5, 1e-12);
}

TEST(Design, NoDerCaseNeedsNothing) {
  const auto sys = fd::four_bus_system();
  const double tb = four_bus_tau_bar();
  const auto agg = fd::aggregate(sys);
  const auto tf = fd::transfer_function(agg, tb);
  const auto res = fd::design(sys, {agg.r_g_eff + agg.d_eff, tf.zeta, std::nullopt}, tb);
  EXPECT_EQ(res.der_droop_total, 0.0);
  EXPECT_NEAR(res.der_inertia_total, 0.0, 1e-9);
}

TEST(Design, Errors) {
  const auto sys = fd::four_bus_system();
  expect_kind(fd::ErrorKind::InfeasibleRegulation, [&] { fd::design(sys, {0.2, 0.7, std::nullopt}, 5.0); });
  expect_kind(fd::ErrorKind::InvalidArgument, [&] { fd::design(sys, {0.5, 0.7, 0.5}, 5.0); });
  expect_kind(fd::ErrorKind::InvalidArgument, [&] { fd::design(sys, {0.5, std::nullopt, std::nullopt}, 5.0); });
  expect_kind(fd::ErrorKind::InvalidTau, [&] { fd::design(sys, {0.5, 0.7, std::nullopt}, 0.0); });
  // Large natural frequency asks for less inertia than the generators already provide.
  expect_kind(fd::ErrorKind::InfeasibleInertia, [&] { fd::design(sys, {0.5, std::nullopt, 5.0}, 5.0); });
  auto no_der = sys;
  no_der.ders.clear();
  expect_kind(fd::ErrorKind::InfeasibleRegulation, [&] { fd::design(no_der, {0.5, 0.7, std::nullopt}, 5.0); });
}

TEST(Design, ReportMentionsEveryDer) {
  const auto sys = fd::four_bus_system();
  const auto res = fd::design(sys, {0.4644, 0.7, std::nullopt}, four_bus_tau_bar());
  const auto text = fd::format_design_report(sys, res);
  EXPECT_NE(text.find("achieved zeta"), std::string::npos);
  EXPECT_NE(text.find("\n  3 "), std::string::npos);
  EXPECT_NE(text.find("\n  4 "), std::string::npos);
}
