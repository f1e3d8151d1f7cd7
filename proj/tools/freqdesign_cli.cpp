// freqdesign: reduce, design, simulate, bound-check and pole-zero sweeps from a system file.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "freqdesign/freqdesign.hpp"

namespace fd = freqdesign;
namespace fs = std::filesystem;

namespace {

struct ScenarioFlags {
  std::optional<int> bus;
  std::optional<double> dp_mw;
  std::optional<double> dp_pu;
  double horizon = 60.0;
  double dt = 0.0;
};

void add_scenario_flags(CLI::App* cmd, ScenarioFlags& f) {
  cmd->add_option("--bus", f.bus, "bus carrying the load step (default: first DER bus)");
  auto* mw = cmd->add_option("--dp-mw", f.dp_mw, "load step in MW (positive = load increase)");
  auto* pu = cmd->add_option("--dp-pu", f.dp_pu, "load step in pu on the system base");
  mw->excludes(pu);
  cmd->add_option("--horizon", f.horizon, "simulated time in s")->check(CLI::PositiveNumber);
  cmd->add_option("--dt", f.dt, "sample step in s (default: min turbine time constant / 20)")
      ->check(CLI::NonNegativeNumber);
}

fd::StepScenario make_scenario(const ScenarioFlags& f, const fd::SystemDescription& sys) {
  fd::StepScenario sc;
  if (f.bus) {
    sc.bus = *f.bus;
  } else if (!sys.ders.empty()) {
    sc.bus = sys.ders.front().bus;
  } else {
    sc.bus = sys.buses.front().id;
  }
  sys.require_bus(sc.bus);
  if (f.dp_pu) {
    sc.delta_p = *f.dp_pu;
  } else if (f.dp_mw) {
    sc.delta_p = fd::mw_to_pu(*f.dp_mw, sys.base_mva);
  } else {
    throw fd::Error(fd::ErrorKind::InvalidArgument, "one of --dp-mw or --dp-pu is required");
  }
  sc.horizon = f.horizon;
  sc.dt = f.dt;
  return fd::resolve(sc, sys);
}

fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw fd::Error(fd::ErrorKind::InvalidArgument, "cannot create output directory '" + dir + "'");
  return p;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw fd::Error(fd::ErrorKind::InvalidArgument, "cannot write '" + path.string() + "'");
  return os;
}

double tau_bar_for(const fd::SystemDescription& sys) {
  return fd::optimize_tau_bar(sys.taus(), sys.droops()).tau_bar;
}

void print_matrix_checks(const char* name, const fd::Matrix& a) {
  const auto h = fd::is_hurwitz(a);
  const double kappa = fd::diagonalizability_report(a);
  std::printf("  %-6s hurwitz %-3s  spectral abscissa %.10g  eigenvector cond %.6g  diagonalizable %s\n", name,
              h.hurwitz ? "yes" : "no", h.spectral_abscissa, kappa, kappa <= fd::kDefectiveThreshold ? "yes" : "no");
}

int cmd_reduce(const std::string& file, const std::string& trace) {
  const auto sys = fd::load_system(file);
  const auto taus = sys.taus();
  const auto droops = sys.droops();
  const auto r = fd::optimize_tau_bar(taus, droops);
  const auto full = fd::build_full_model(sys, fd::aggregate(sys));
  const auto aux = fd::build_auxiliary(full, r.tau_bar);
  std::printf("system %s (hash %s)\n", file.c_str(), fd::parameter_hash(sys).c_str());
  std::printf("  tau_bar         %.12g s\n", r.tau_bar);
  std::printf("  objective       %.12g\n", r.objective_value);
  std::printf("  ||E||_2         %.12g\n", fd::perturbation_norm(full, aux.gamma));
  print_matrix_checks("A", full.a);
  print_matrix_checks("GammaA", aux.a_bar);
  if (!trace.empty()) {
    if (fs::path(trace).has_parent_path()) prepare_dir(fs::path(trace).parent_path().string());
    auto os = open_out(trace);
    fd::write_search_trace_csv(os, r);
    std::printf("  search trace    %s\n", trace.c_str());
  }
  return 0;
}

int cmd_design(const std::string& file, double r_reg, std::optional<double> zeta, std::optional<double> omega_n,
               const std::string& out) {
  const auto sys = fd::load_system(file);
  const auto res = fd::design(sys, {r_reg, zeta, omega_n}, tau_bar_for(sys));
  std::fputs(fd::format_design_report(sys, res).c_str(), stdout);
  const fs::path target = out.empty() ? fs::path(fs::path(file).stem().string() + ".designed.sys") : fs::path(out);
  if (target.has_parent_path()) prepare_dir(target.parent_path().string());
  auto os = open_out(target);
  os << "# designed for R_reg = " << fd::format_g17(r_reg);
  if (zeta) os << ", zeta = " << fd::format_g17(*zeta);
  if (omega_n) os << ", omega_n = " << fd::format_g17(*omega_n);
  os << "\n" << fd::serialize_system(fd::apply_design(sys, res));
  std::printf("\nwrote %s\n", target.string().c_str());
  return 0;
}

// Appends Hz columns for the given frequency-deviation column.
fd::Trajectory with_hz(fd::Trajectory tr, Eigen::Index freq_col, double sync_freq) {
  const Eigen::Index c = tr.states.cols();
  tr.states.conservativeResize(Eigen::NoChange, c + 2);
  const double two_pi = 2.0 * std::numbers::pi;
  tr.states.col(c) = tr.states.col(freq_col) / two_pi;
  tr.states.col(c + 1) = tr.states.col(c).array() + sync_freq / two_pi;
  tr.labels.push_back("dfreq_hz");
  tr.labels.push_back("freq_hz");
  return tr;
}

template <typename F>
fd::Trajectory run_model(const char* name, F&& fn) {
  try {
    return fn();
  } catch (const fd::Error& e) {
    throw fd::Error(e.kind(), std::string("model ") + name + ": " + e.what());
  }
}

void print_metrics(const char* name, const fd::Trajectory& tr, Eigen::Index col) {
  const auto m = fd::step_metrics(tr, col, std::numeric_limits<double>::infinity());
  const bool settled = m.final_window_variation < 1e-8;
  std::printf("  %-10s nadir %.10g at %.4g s  final %.10g  overshoot %.4g  settling(2%%) %.4g s%s\n", name, m.nadir,
              m.nadir_time, m.steady_state, m.overshoot, m.settling_time_2pct,
              settled ? "" : "  (not settled)");
}

int cmd_simulate(const std::string& file, const std::string& model, const ScenarioFlags& flags,
                 const std::string& out_dir) {
  const auto sys = fd::load_system(file);
  const auto sc = make_scenario(flags, sys);
  const auto dir = prepare_dir(out_dir);
  const auto agg = fd::aggregate(sys);
  const bool all = model == "all";

  std::optional<fd::Trajectory> full, reduced, nonlinear;
  if (all || model == "full")
    full = run_model("full", [&] { return fd::simulate_full_step(fd::build_full_model(sys, agg), sc); });
  if (all || model == "reduced")
    reduced = run_model("reduced", [&] { return fd::simulate_reduced_step(fd::build_reduced(agg, tau_bar_for(sys)), sc); });
  if (all || model == "nonlinear")
    nonlinear = run_model("nonlinear", [&] { return fd::simulate_nonlinear(sys, fd::solve_equilibrium(sys), sc); });

  std::printf("step %.10g pu at bus %d, dt %.6g s, horizon %.6g s\n", sc.delta_p, sc.bus, sc.dt, sc.horizon);
  auto emit = [&](const char* name, const fd::Trajectory& tr, Eigen::Index col) {
    const auto path = dir / (std::string(name) + ".csv");
    auto os = open_out(path);
    fd::write_trajectory_csv(os, with_hz(tr, col, sys.sync_freq));
    print_metrics(name, tr, col);
  };
  if (full) emit("full", *full, 0);
  if (reduced) emit("reduced", *reduced, 0);
  if (nonlinear) emit("nonlinear", *nonlinear, nonlinear->index_of("domega_sys"));

  if (all) {
    const fd::Vector wf = full->states.col(0);
    const fd::Vector wr = reduced->states.col(0);
    const fd::Vector wn = nonlinear->column("domega_sys");
    const std::vector<std::string> header{"t", "full_minus_reduced", "full_minus_nonlinear", "reduced_minus_nonlinear"};
    auto to_vec = [](const fd::Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    const std::vector<std::vector<double>> cols{full->times, to_vec(wf - wr), to_vec(wf - wn), to_vec(wr - wn)};
    auto os = open_out(dir / "errors.csv");
    fd::write_columns_csv(os, header, cols);
    const double nadir = std::abs(wr.minCoeff());
    std::printf("  max |reduced - nonlinear| %.6g (%.3g%% of reduced nadir)\n", (wr - wn).cwiseAbs().maxCoeff(),
                nadir > 0 ? 100.0 * (wr - wn).cwiseAbs().maxCoeff() / nadir : 0.0);
    std::printf("  max |full - nonlinear|    %.6g\n", (wf - wn).cwiseAbs().maxCoeff());
  }
  std::printf("wrote CSV files to %s\n", dir.string().c_str());
  return 0;
}

int cmd_bound(const std::string& file, const ScenarioFlags& flags, const std::string& out_dir) {
  const auto sys = fd::load_system(file);
  const auto sc = make_scenario(flags, sys);
  const auto agg = fd::aggregate(sys);
  const auto full = fd::build_full_model(sys, agg);
  const double tb = tau_bar_for(sys);
  const auto aux = fd::build_auxiliary(full, tb);
  const auto env = fd::decay_envelope(aux.a_bar);
  const auto tf = fd::simulate_full_step(full, sc);
  const auto tr = fd::simulate_reduced_step(fd::build_reduced(agg, tb), sc);
  const auto u = fd::load_step_input(full.b.cols(), sc.delta_p);
  const auto rep = fd::evaluate_bound(tf, tr, u, full, fd::perturbation_norm(full, aux.gamma), env);

  const auto dir = prepare_dir(out_dir);
  auto os = open_out(dir / "bound.csv");
  fd::write_bound_csv(os, rep);
  std::printf("tau_bar %.10g  ||E|| %.10g  k %.6g  lambda %.6g\n", tb, rep.e_norm, env.k, env.lambda);
  std::printf("max error %.6g  final bound %.6g  max error/bound %.6g  violations %zu\n",
              *std::max_element(rep.error_series.begin(), rep.error_series.end()), rep.bound_series.back(),
              rep.max_ratio, rep.violations);
  std::printf("%s\n", rep.satisfied ? "SATISFIED" : "VIOLATED");
  return 0;
}

int cmd_poles(const std::string& file, const std::vector<double>& mults, const std::string& out_dir) {
  const auto sys = fd::load_system(file);
  const auto base = fd::aggregate(sys);
  const double tb = tau_bar_for(sys);
  const auto taus = sys.taus();
  const auto droops = sys.droops();
  const auto dir = prepare_dir(out_dir);
  auto os = open_out(dir / "poles.csv");
  os << "d_mult,m_mult,model,kind,re,im\n";
  std::printf("%-7s %-7s %-28s %-28s %-10s %-10s\n", "d_mult", "m_mult", "full dominant pair", "reduced pair",
              "rel re", "rel im");
  for (double dm : mults) {
    for (double mm : mults) {
      auto agg = base;
      agg.d_eff *= dm;
      agg.m_eff *= mm;
      try {
        const auto full = fd::build_full_model(agg, taus, droops);
        const auto red = fd::build_reduced(agg, tb);
        const auto pf = fd::pole_zero(full.a, full.b);
        const auto pr = fd::pole_zero(red.a_red, red.b_red);
        auto rows = [&](const char* model, const fd::PoleZero& pz) {
          for (const auto& p : pz.poles)
            os << fd::format_g17(dm) << ',' << fd::format_g17(mm) << ',' << model << ",pole," << fd::format_g17(p.real())
               << ',' << fd::format_g17(p.imag()) << '\n';
          for (const auto& z : pz.zeros)
            os << fd::format_g17(dm) << ',' << fd::format_g17(mm) << ',' << model << ",zero," << fd::format_g17(z.real())
               << ',' << fd::format_g17(z.imag()) << '\n';
        };
        rows("full", pf);
        rows("reduced", pr);
        const auto a = fd::dominant_complex_pole(pf.poles);
        const auto b = fd::dominant_complex_pole(pr.poles);
        char fa[40] = "none", fb[40] = "none", re[16] = "-", im[16] = "-";
        if (a) std::snprintf(fa, sizeof fa, "%.5f%+.5fj", a->real(), a->imag());
        if (b) std::snprintf(fb, sizeof fb, "%.5f%+.5fj", b->real(), b->imag());
        if (a && b) {
          std::snprintf(re, sizeof re, "%.3g", std::abs(b->real() - a->real()) / std::abs(a->real()));
          std::snprintf(im, sizeof im, "%.3g", std::abs(b->imag() - a->imag()) / std::abs(a->imag()));
        }
        std::printf("%-7.4g %-7.4g %-28s %-28s %-10s %-10s\n", dm, mm, fa, fb, re, im);
      } catch (const fd::Error& e) {
        if (e.kind() != fd::ErrorKind::EigensolveFailure) throw;
        std::fprintf(stderr, "skipping (%g, %g): %s\n", dm, mm, e.what());
      }
    }
  }
  std::printf("reduced zero %.12g (= -1/tau_bar at every point)\nwrote %s\n", -1.0 / tb,
              (dir / "poles.csv").string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency-response design for DER inertia and droop"};
  app.require_subcommand(1);
  std::string file;
  std::string out_dir = ".";

  auto* reduce = app.add_subcommand("reduce", "lumped turbine time constant and model checks");
  std::string trace;
  reduce->add_option("system", file, "system file")->required();
  reduce->add_option("--trace", trace, "write the tau search trace to this CSV");

  auto* design = app.add_subcommand("design", "DER droop and inertia for regulation and damping targets");
  double r_reg = 0.0;
  std::optional<double> zeta, omega_n;
  std::string design_out;
  design->add_option("system", file, "system file")->required();
  design->add_option("--rreg", r_reg, "steady-state regulation target (pu)")->required();
  auto* z = design->add_option("--zeta", zeta, "damping ratio target")->check(CLI::PositiveNumber);
  auto* w = design->add_option("--omega-n", omega_n, "natural frequency target (rad/s)")->check(CLI::PositiveNumber);
  z->excludes(w);
  design->add_option("--out", design_out, "designed system file (default: <stem>.designed.sys)");

  auto* simulate = app.add_subcommand("simulate", "load-step response of the full, reduced and nonlinear models");
  ScenarioFlags sim_flags;
  std::string model = "all";
  simulate->add_option("system", file, "system file")->required();
  simulate->add_option("--model", model, "full | reduced | nonlinear | all")
      ->check(CLI::IsMember({"full", "reduced", "nonlinear", "all"}));
  add_scenario_flags(simulate, sim_flags);
  simulate->add_option("--out-dir", out_dir, "directory for CSV output");

  auto* bound = app.add_subcommand("bound", "check the reduction error bound along a load step");
  ScenarioFlags bound_flags;
  bound->add_option("system", file, "system file")->required();
  add_scenario_flags(bound, bound_flags);
  bound->add_option("--out-dir", out_dir, "directory for CSV output");

  auto* poles = app.add_subcommand("poles", "poles and zeros over a D_eff x M_eff multiplier grid");
  std::vector<double> sweep{1.0};
  poles->add_option("--sweep", sweep, "multipliers applied to both D_eff and M_eff")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  poles->add_option("system", file, "system file")->required();
  poles->add_option("--out-dir", out_dir, "directory for CSV output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*reduce) return cmd_reduce(file, trace);
    if (*design) {
      if (!zeta && !omega_n) throw fd::Error(fd::ErrorKind::InvalidArgument, "one of --zeta or --omega-n is required");
      return cmd_design(file, r_reg, zeta, omega_n, design_out);
    }
    if (*simulate) return cmd_simulate(file, model, sim_flags, out_dir);
    if (*bound) return cmd_bound(file, bound_flags, out_dir);
    if (*poles) return cmd_poles(file, sweep, out_dir);
  } catch (const fd::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return fd::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
  return 0;
}
