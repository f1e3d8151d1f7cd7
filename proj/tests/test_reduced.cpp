#include <chrono>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "freqdesign/four_bus.hpp"
#include "freqdesign/reduced.hpp"
#include "freqdesign/scenario.hpp"
#include "support.hpp"

namespace fd = freqdesign;
namespace ft = freqdesign::testing;

TEST(TauObjective, SingleUnitGovernor) {
  const std::vector<double> taus{1.0}, droops{1.0};
  // (1/2 - 1) [-1 -1] has norm sqrt(2)/2
  EXPECT_NEAR(fd::tau_objective(2.0, taus, droops), std::sqrt(2.0) / 2.0, 1e-15);
  EXPECT_NEAR(fd::tau_objective(1.0, taus, droops), 0.0, 1e-15);
}

TEST(TauObjective, FourBusMatchesExplicitMatrix) {
  const auto sys = fd::four_bus_system();
  const auto taus = sys.taus();
  const auto droops = sys.droops();
  for (double t : {0.4, 1.0, 4.0, 5.69, 7.0, 10.0, 55.0}) {
    const double oracle = ft::spectral_norm_oracle(ft::explicit_tau_matrix(t, taus, droops));
    EXPECT_NEAR(fd::tau_objective(t, taus, droops), oracle, 1e-14) << t;
  }
}

TEST(TauObjective, RejectsBadInput) {
  const std::vector<double> taus{1.0}, droops{1.0};
  for (double bad : {0.0, -1.0}) {
    try {
      fd::tau_objective(bad, taus, droops);
      FAIL();
    } catch (const fd::Error& e) {
      EXPECT_EQ(e.kind(), fd::ErrorKind::InvalidTau);
    }
  }
  const std::vector<double> zero_tau{0.0};
  EXPECT_THROW(fd::tau_objective(1.0, zero_tau, droops), fd::Error);
}

TEST(OptimizeTauBar, EqualTausGiveExactMinimum) {
  const std::vector<double> taus{4.0, 4.0}, droops{0.217, 0.0868};
  const auto r = fd::optimize_tau_bar(taus, droops);
  EXPECT_DOUBLE_EQ(r.tau_bar, 4.0);
  EXPECT_NEAR(r.objective_value, 0.0, 1e-15);
}

TEST(OptimizeTauBar, FourBusMatchesBruteForce) {
  const auto sys = fd::four_bus_system();
  const auto taus = sys.taus();
  const auto droops = sys.droops();
  const auto r = fd::optimize_tau_bar(taus, droops);
  const auto g = ft::brute_force_tau(taus, droops, 0.4, 100.0, 1000000);
  EXPECT_NEAR(r.tau_bar, g.tau, 5e-4 * g.tau);
  // The objective has a kink at the minimum, so the grid itself is only accurate to slope x spacing.
  EXPECT_LE(r.objective_value, g.value + 1e-15);
  EXPECT_GE(r.tau_bar, 4.0);
  EXPECT_LE(r.tau_bar, 10.0);
}

TEST(OptimizeTauBar, RandomGovernorsAgainstBruteForce) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> tau(0.5, 15.0), droop(0.02, 0.5);
  for (int trial = 0; trial < 10; ++trial) {
    const int g = 1 + trial % 4;
    std::vector<double> taus, droops;
    for (int i = 0; i < g; ++i) {
      taus.push_back(tau(rng));
      droops.push_back(droop(rng));
    }
    const double lo = *std::min_element(taus.begin(), taus.end()) / 10.0;
    const double hi = *std::max_element(taus.begin(), taus.end()) * 10.0;
    const auto r = fd::optimize_tau_bar(taus, droops);
    const auto b = ft::brute_force_tau(taus, droops, lo, hi, 200000);
    EXPECT_LE(r.objective_value, b.value + 1e-9) << trial;
  }
}

TEST(OptimizeTauBar, TraceCoversGrid) {
  const auto sys = fd::four_bus_system();
  const auto taus = sys.taus();
  const auto droops = sys.droops();
  const auto r = fd::optimize_tau_bar(taus, droops);
  EXPECT_GE(r.search_trace.size(), 2000u);
  EXPECT_DOUBLE_EQ(r.search_trace.front().first, 0.4);
  EXPECT_DOUBLE_EQ(r.search_trace.back().first, 100.0);
}

TEST(BuildReduced, FourBusEntries) {
  const auto agg = fd::aggregate(fd::four_bus_system());
  const auto r = fd::build_reduced(agg, 5.0);
  EXPECT_DOUBLE_EQ(r.a_red(0, 0), -0.0868 / 0.2604);
  EXPECT_DOUBLE_EQ(r.a_red(0, 1), 1 / 0.2604);
  EXPECT_DOUBLE_EQ(r.a_red(1, 0), -0.3038 / 5.0);
  EXPECT_DOUBLE_EQ(r.a_red(1, 1), -0.2);
  EXPECT_DOUBLE_EQ(r.b_red(0, 0), 1 / 0.2604);
  EXPECT_DOUBLE_EQ(r.b_red(1, 1), 0.2);
  EXPECT_EQ(r.b_red(0, 1), 0.0);
}

TEST(BuildReduced, TauBarIndependentOfInertiaAndDamping) {
  auto sys = fd::four_bus_system();
  const auto base = fd::optimize_tau_bar(sys.taus(), sys.droops());
  sys.generators[0].inertia *= 3.0;
  sys.generators[1].damping *= 0.2;
  sys.ders[0].synthetic_inertia = 0.05;
  const auto other = fd::optimize_tau_bar(sys.taus(), sys.droops());
  EXPECT_EQ(base.tau_bar, other.tau_bar);
}

TEST(Auxiliary, ScalesGovernorRowsOnly) {
  const auto sys = fd::four_bus_system();
  const auto full = fd::build_full_model(sys, fd::aggregate(sys));
  const auto aux = fd::build_auxiliary(full, 5.0);
  EXPECT_EQ(aux.a_bar.row(0), full.a.row(0));
  EXPECT_NEAR(aux.a_bar(1, 1), -1.0 / 5.0, 1e-15);
  EXPECT_NEAR(aux.a_bar(2, 2), -1.0 / 5.0, 1e-15);
  EXPECT_NEAR(aux.a_bar(1, 0), -0.217 / 5.0, 1e-15);
  EXPECT_NEAR(aux.b_bar(2, 2), 1.0 / 5.0, 1e-15);
}

TEST(Auxiliary, FrequencyMatchesReducedModel) {
  // With every turbine sharing tau_bar, the summed mechanical power obeys the reduced dynamics.
  const auto sys = fd::four_bus_system();
  const auto agg = fd::aggregate(sys);
  const auto full = fd::build_full_model(sys, agg);
  const double tau_bar = 5.69;
  const auto aux = fd::build_auxiliary(full, tau_bar);
  const auto red = fd::build_reduced(agg, tau_bar);
  fd::StepScenario sc{3, fd::mw_to_pu(0.02, sys.base_mva), 60.0, 0.2};
  const auto ta = fd::simulate_auxiliary_step(aux, sc);
  const auto tr = fd::simulate_reduced_step(red, sc);
  EXPECT_LT(ft::max_abs_diff(ta.states.col(0), tr.states.col(0)), 1e-12);
  const fd::Vector pm_sum = ta.states.col(1) + ta.states.col(2);
  EXPECT_LT(ft::max_abs_diff(pm_sum, tr.states.col(1)), 1e-12);
}

TEST(ExactReduction, EqualTimeConstants) {
  auto sys = fd::four_bus_system();
  for (auto& g : sys.generators) g.turbine_tc = 4.0;
  const auto agg = fd::aggregate(sys);
  const auto full = fd::build_full_model(sys, agg);
  const auto red = fd::build_reduced(agg, 4.0);
  const auto sc = fd::resolve({3, fd::mw_to_pu(0.02, sys.base_mva), 60.0, 0.0}, sys);
  const auto tf = fd::simulate_full_step(full, sc);
  const auto tr = fd::simulate_reduced_step(red, sc);
  EXPECT_LT(ft::max_abs_diff(tf.states.col(0), tr.states.col(0)), 1e-9);
}
