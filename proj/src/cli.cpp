#include "platelab/cli.hpp"

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "platelab/config.hpp"
#include "platelab/energy.hpp"
#include "platelab/geometry.hpp"
#include "platelab/lab.hpp"
#include "platelab/minimize.hpp"

namespace platelab {

namespace {

struct Flags {
  std::string config;
  std::optional<std::string> out, h, rho, crack, datum, experiment;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> settings;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "configuration file (key = value lines)");
  sub->add_option("--out", f.out, "CSV output path");
  sub->add_option("--seed", f.seed, "global seed");
  sub->add_option("--h", f.h, "lattice spacing or comma-separated list");
  sub->add_option("--rho", f.rho, "thickness parameter or comma-separated list, decreasing");
  sub->add_option("--crack", f.crack, "crack file");
  sub->add_option("--datum", f.datum, "boundary datum: zero | stretch:t | bend:k | rigid:c");
  sub->add_option("--set", f.settings, "extra key=value setting (repeatable)");
}

ExperimentConfig resolve(const Flags& f, const std::string& experiment) {
  ExperimentConfig c = f.config.empty() ? ExperimentConfig{} : load_config(f.config);
  c.experiment = experiment;
  for (const auto& kv : f.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    apply_setting(c, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (f.out) c.output = *f.out;
  if (f.seed) c.seed = *f.seed;
  if (f.h) apply_setting(c, "h", *f.h);
  if (f.rho) apply_setting(c, "rho", *f.rho);
  if (f.crack) c.crack = *f.crack;
  if (f.datum) c.datum = *f.datum;
  if (f.experiment) c.experiment = *f.experiment;
  c.validate();
  return c;
}

CrackSurface need_crack(const ExperimentConfig& c) {
  if (c.crack.empty()) throw std::invalid_argument("this experiment needs --crack FILE");
  return CrackSurface::load(c.crack, c.n);
}

Table classify_table(const ExperimentConfig& c, bool per_h) {
  const CrackSurface crack = need_crack(c);
  const Vec3 lo = c.vec(c.region_lo, 0.0), hi = c.vec(c.region_hi, 1.0);
  const std::uint64_t seed = substream_seed(c.seed, "classify");
  Table t;
  if (per_h) {
    t.header = {"h", "samples", "mean_bad_count", "mean_boundary_measure", "mean_jump_energy"};
    for (double h : c.h) {
      const OffsetStatistics st = offset_statistics(c.n, h, lo, hi, crack, c.samples, seed);
      double bad = 0.0;
      for (int b : st.bad_count) bad += b;
      t.add_row({fmt(h), fmt(c.samples), fmt(bad / c.samples), fmt(st.mean_boundary_measure),
                 fmt(st.mean_jump_energy)});
    }
    return t;
  }
  const double h = c.h.front();
  const auto ys = sample_offsets(c.n, c.samples, seed);
  const OffsetStatistics st = offset_statistics(c.n, h, lo, hi, crack, c.samples, seed);
  t.header = {"sample", "y1", "y2", "y3", "bad_count", "boundary_measure"};
  for (int k = 0; k < c.samples; ++k)
    t.add_row({fmt(k), fmt(ys[k][0]), fmt(ys[k][1]), fmt(ys[k][2]), fmt(st.bad_count[k]),
               fmt(st.boundary_measure[k])});
  std::printf("classify: h=%g, %d offsets, mean bad cubes %.3f\n", h, c.samples,
              [&] {
                double s = 0.0;
                for (int b : st.bad_count) s += b;
                return s / c.samples;
              }());
  return t;
}

Table jump_table(const ExperimentConfig& c, bool per_h) {
  const CrackSurface crack = need_crack(c);
  const Vec3 lo = c.vec(c.region_lo, 0.0), hi = c.vec(c.region_hi, 1.0);
  const std::uint64_t seed = substream_seed(c.seed, "jump-energy");
  if (!per_h) {
    const JumpEnergyStudy st = jump_energy_study(crack, c.h.front(), lo, hi, c.samples, seed);
    std::printf("jump-energy: mean %.6f (sd %.6f) oracle %.6f relative error %.4f\n", st.stats.mean_jump_energy,
                st.stats.stddev_jump_energy, st.oracle, st.rel_error);
    return st.table();
  }
  Table t;
  t.header = {"h", "samples", "mean", "stddev", "oracle", "rel_error"};
  for (double h : c.h) {
    const JumpEnergyStudy st = jump_energy_study(crack, h, lo, hi, c.samples, seed);
    t.add_row({fmt(h), fmt(c.samples), fmt(st.stats.mean_jump_energy), fmt(st.stats.stddev_jump_energy),
               fmt(st.oracle), fmt(st.rel_error)});
  }
  return t;
}

PiecewiseAffine test_field(const ExperimentConfig& c) {
  PiecewiseAffine v;
  v.n = c.n;
  v.A(0, 0) = 0.3;
  v.A(1, 0) = -0.2;
  v.A(1, 1) = 0.5;
  if (c.n == 3) {
    v.A(2, 0) = 0.1;
    v.A(2, 2) = 0.2;
  }
  v.b = Vec3(0.1, -0.1, 0.05);
  v.jump = Vec3(0.4, -0.3, c.n == 3 ? 0.2 : 0.0);
  v.nu = Vec3::UnitX();
  v.offset = c.jump_position;
  return v;
}

Table approximate_table(const ExperimentConfig& c) {
  const ApproximationSweep sw =
      approximation_sweep(test_field(c), c.h, c.vec(c.offset, 0.0), c.vec(c.domain_lo, -1.0),
                          c.vec(c.domain_hi, 2.0), c.vec(c.region_lo, 0.0), c.vec(c.region_hi, 1.0), c.delta);
  std::printf("approximate: weak-probe slope %.3f, mismatch %s\n", sw.weak_slope,
              sw.mismatch_monotone ? "decreasing" : "not decreasing");
  return sw.table();
}

Table projection_table(const ExperimentConfig& c) {
  const CrackSurface crack = need_crack(c);
  const int axis = c.projection_axis < 0 ? c.n - 1 : c.projection_axis;
  const ProjectionSweep sw = projection_sweep(crack, c.h, c.vec(c.offset, 0.0), c.vec(c.region_lo, 0.0),
                                              c.vec(c.region_hi, 1.0), axis);
  return sw.table();
}

Table recover_table(const ExperimentConfig& c) {
  const KLState s = make_state(c.state, c.n, c.omega());
  const RecoverySweep sw = recovery_sweep(s, c.lame(), c.rho, c.layers, parse_smoothing_rule(c.smoothing));
  std::printf("recover: limit energy %.8f, gaps %s, %s\n", limit_energy(s, c.lame()).total,
              sw.gap_nonincreasing ? "nonincreasing" : "not monotone",
              sw.converged ? "converged" : "NOT converged");
  return sw.table();
}

Table liminf_table(const ExperimentConfig& c) {
  const KLState s = make_state(c.state, c.n, c.omega());
  const LiminfProbe pr = liminf_probe(parse_probe_sequence(c.sequence), s, c.lame(), c.rho, c.layers);
  std::printf("liminf: minimum margin %.3e\n", pr.min_margin);
  return pr.table();
}

Table minimize_table(const ExperimentConfig& c) {
  const BoundaryDatum g = BoundaryDatum::parse(c.n, c.datum);
  const double rho = c.rho.front();
  const MinimizeResult r = alternate_minimize(g, c.lame(), rho, c.plate(), c.solver);
  Table t;
  t.header = {"stage", "round", "rho", "bulk", "surface", "penalty", "total"};
  for (size_t k = 0; k < r.trace.size(); ++k) {
    const auto& e = r.trace[k];
    t.add_row({"plate", fmt(static_cast<int>(k)), fmt(e.rho), fmt(e.bulk), fmt(e.surface),
               fmt(e.boundary_penalty), fmt(e.total)});
  }
  std::printf("minimize: rho=%g total %.8f after %d rounds%s\n", rho, r.energy.total, r.rounds,
              r.converged ? "" : " (round cap reached)");
  if (c.n == 2) {
    const LimitResult L = minimize_limit(g, c.lame(), c.omega(), c.solver);
    for (size_t k = 0; k < L.trace.size(); ++k) {
      const auto& e = L.trace[k];
      t.add_row({"limit", fmt(static_cast<int>(k)), fmt(0.0), fmt(e.bulk), fmt(e.surface),
                 fmt(e.boundary_penalty), fmt(e.total)});
    }
    std::printf("minimize: reduced problem total %.8f\n", L.energy.total);
  }
  return t;
}

Table minima_table(const ExperimentConfig& c) {
  const BoundaryDatum g = BoundaryDatum::parse(c.n, c.datum);
  const MinimaSweep sw = minima_sweep(g, c.lame(), c.omega(), c.layers, c.rho, c.solver);
  for (const auto& r : sw.rows)
    if (!r.error.empty()) throw SolverFailure("rho=" + fmt(r.rho) + ": " + r.error);
  return sw.table();
}

Table dispatch(const ExperimentConfig& c, bool sweep) {
  const std::string& e = c.experiment;
  if (e == "classify") return classify_table(c, sweep);
  if (e == "jump-energy") return jump_table(c, sweep);
  if (e == "approximate") return approximate_table(c);
  if (e == "projection") return projection_table(c);
  if (e == "recover") return recover_table(c);
  if (e == "liminf") return liminf_table(c);
  if (e == "minimize") return sweep ? minima_table(c) : minimize_table(c);
  throw std::invalid_argument("unknown experiment '" + e + "'");
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"plate_lab: thin-plate fracture reduction experiments"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print this help and exit");
  app.footer("Configuration keys:\n" + config_help() +
             "\nEnvironment: PLATE_LAB_THREADS caps the worker count.\n"
             "Exit codes: 0 success, 1 invalid input, 2 solver failure.");
  Flags f;
  const std::vector<std::pair<std::string, std::string>> subs = {
      {"classify", "bad-cube statistics over lattice offsets"},
      {"jump-energy", "discrete jump energy against the slab oracle"},
      {"approximate", "approximant properties over the h list"},
      {"recover", "recovery-sequence energies over the rho list"},
      {"liminf", "lower-bound margins over the rho list"},
      {"minimize", "alternating minimisation at the first rho, plus the reduced problem"},
      {"sweep", "run an experiment in sweep form (one row per h or rho)"}};
  for (const auto& [name, desc] : subs) {
    CLI::App* sub = app.add_subcommand(name, desc);
    add_common(sub, f);
    if (name == "sweep")
      sub->add_option("--experiment", f.experiment, "classify | jump-energy | approximate | projection | "
                                                    "recover | liminf | minimize")
          ->required();
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const CLI::App* sub = app.get_subcommands().front();
    const bool sweep = sub->get_name() == "sweep";
    const ExperimentConfig c = resolve(f, sweep ? "" : sub->get_name());
    const auto t0 = std::chrono::steady_clock::now();
    const Table t = dispatch(c, sweep);
    t.write_csv(c.output);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("wrote %zu rows to %s (%.2f s)\n", t.rows.size(), c.output.c_str(), secs);
    return 0;
  } catch (const SolverFailure& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("plate_lab");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace platelab
