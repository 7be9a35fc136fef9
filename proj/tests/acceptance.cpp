#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "platelab/config.hpp"
#include "platelab/elasticity.hpp"
#include "platelab/energy.hpp"
#include "platelab/kirchhoff_love.hpp"
#include "platelab/lab.hpp"
#include "platelab/minimize.hpp"

using namespace platelab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string format(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

BoxGrid interval(int cells) { return BoxGrid(1, {cells, 1, 1}, Vec3::Zero(), Vec3(1, 0, 0)); }

const LameParams kLame{1.0, 1.0, 2};

Outcome reduced_tensor() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> unit(-1.0, 1.0), mu_d(0.1, 5.0), lam_d(0.0, 1.0);
  double worst = 0.0;
  int cases = 0;
  for (int n = 2; n <= 3; ++n)
    for (int k = 0; k < 10; ++k) {
      LameParams p;
      p.n = n;
      p.mu = mu_d(rng);
      // lambda in (-2 mu / n, 5)
      const double lo = -2.0 * p.mu / n * 0.99;
      p.lambda = lo + lam_d(rng) * (5.0 - lo);
      for (int s = 0; s < 200; ++s) {
        SymMatrix e(n - 1);
        for (int i = 0; i < n - 1; ++i)
          for (int j = i; j < n - 1; ++j) e.set(i, j, unit(rng));
        const double a = reduced_min_oracle(p, e).value, b = quadratic_form_C0(p, e);
        worst = std::max(worst, std::abs(a - b) / std::max(std::abs(b), 1e-300));
        ++cases;
      }
    }
  return {worst <= 1e-9, format("%d cases, max relative error %.3g (tol 1e-9)", cases, worst)};
}

Outcome griffith_crossover() {
  const BoxGrid om = interval(256);
  int switches = 0;
  double at = NAN;
  bool prev_cracked = false;
  for (int k = 0; k <= 35; ++k) {
    const double t = 0.5 + 0.02 * k;
    const LimitResult r = minimize_limit(BoundaryDatum::stretch(2, t), kLame, om);
    const bool cracked = r.energy.surface + r.energy.boundary_penalty > 0.0;
    if (k > 0 && cracked != prev_cracked) {
      ++switches;
      at = t;
    }
    prev_cracked = cracked;
  }
  const double target = std::sqrt(3.0) / 2.0;
  const double rel = std::abs(at - target) / target;
  return {switches == 1 && rel <= 0.05,
          format("%d switch(es), first cracked t = %.2f, relative offset from sqrt(3)/2 %.3g (tol 0.05)", switches,
                 at, rel)};
}

const std::vector<double> kRecoveryRhos{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};

const RecoverySweep& recovery_family() {
  static const RecoverySweep sw = recovery_sweep(make_state("crack:1:0.5:0.25", 2, interval(256)), kLame,
                                                 kRecoveryRhos, 32);
  return sw;
}

Outcome recovery_convergence() {
  const RecoverySweep& sw = recovery_family();
  bool nonincreasing = true;
  for (size_t k = 1; k < sw.rows.size(); ++k) nonincreasing = nonincreasing && sw.rows[k].rel_gap <= sw.rows[k - 1].rel_gap;
  const double last = sw.rows.back().rel_gap;
  std::string gaps;
  for (const auto& r : sw.rows) gaps += format(" %.3g", r.rel_gap);
  return {nonincreasing && last <= 0.02,
          format("relative gaps%s; nonincreasing %s, final %.3g (tol 0.02)", gaps.c_str(),
                 nonincreasing ? "yes" : "no", last)};
}

Outcome minima_convergence() {
  const BoxGrid om = interval(128);
  bool ok = true;
  std::string detail;
  for (double t : {0.5, 1.2}) {
    const MinimaSweep sw = minima_sweep(BoundaryDatum::stretch(2, t), kLame, om, 16, {1e-1, 1e-2});
    const MinimaRow& r = sw.rows.back();
    const bool row_ok = r.error.empty() && r.rel_gap <= 0.05 && r.surface_gap <= r.face_area;
    ok = ok && row_ok;
    detail += format("t=%.1f: rel gap %.3g (tol 0.05), surface gap %.3g vs face %.3g; ", t, r.rel_gap,
                     r.surface_gap, r.face_area);
  }
  return {ok, detail};
}

Outcome jump_energy_averaging() {
  const double h = 1.0 / 64;
  CrackSurface vertical(2);
  vertical.add_segment(Vec3(0.5, 0, 0), Vec3(0.5, 1, 0));
  CrackSurface tilted(2);
  const Vec3 c(0.5, 0.5, 0), tangent(0.8, -0.6, 0);
  tilted.add_segment(c - 0.4 * tangent, c + 0.4 * tangent);
  const JumpEnergyStudy a = jump_energy_study(vertical, h, Vec3::Zero(), Vec3::Ones(), 200, 17);
  const JumpEnergyStudy b = jump_energy_study(tilted, h, Vec3::Zero(), Vec3::Ones(), 200, 17);
  const double oracle = 1.0 + 3.0 / std::sqrt(2.0);
  const bool oracle_ok = std::abs(a.oracle - oracle) < 1e-12;
  return {oracle_ok && a.rel_error <= 0.03 && b.rel_error <= 0.03,
          format("vertical mean %.4f vs %.4f (rel %.3g), tilted mean %.4f vs %.4f (rel %.3g), tol 0.03",
                 a.stats.mean_jump_energy, a.oracle, a.rel_error, b.stats.mean_jump_energy, b.oracle, b.rel_error)};
}

Outcome projection_vanishing() {
  CrackSurface crack(2);
  crack.add_segment(Vec3(0.5, 0, 0), Vec3(0.5, 1, 0));
  const ProjectionSweep sw = projection_sweep(crack, {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256},
                                              Vec3(0.37, 0.81, 0), Vec3::Zero(), Vec3::Ones(), 1);
  const double kC = 3.0;
  bool ok = true;
  double cmax = 0.0, rmin = 1.0, rmax = 0.0;
  for (size_t k = 0; k < sw.rows.size(); ++k) {
    const auto& r = sw.rows[k];
    cmax = std::max(cmax, r.measure / r.h);
    if (k > 0) {
      rmin = std::min(rmin, r.ratio);
      rmax = std::max(rmax, r.ratio);
    }
  }
  ok = cmax <= kC && rmin >= 0.4 && rmax <= 0.6;
  return {ok, format("max measure/h %.3g (C = %.0f), halving ratios in [%.3g, %.3g] (want [0.4, 0.6])", cmax, kC,
                     rmin, rmax)};
}

Outcome approximant_properties() {
  PiecewiseAffine v;
  v.n = 2;
  v.A << 0.3, 0, 0, -0.2, 0.5, 0, 0, 0, 0;
  v.jump = Vec3(1.0, 0.5, 0);
  v.nu = Vec3(1, 0, 0);
  v.offset = 0.5;
  const ApproximationSweep sw =
      approximation_sweep(v, {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256}, Vec3(0.3, 0.7, 0),
                          Vec3::Constant(-1), Vec3::Constant(2), Vec3::Zero(), Vec3::Ones(), 1e-3);
  bool structure = true;
  for (const auto& r : sw.rows) structure = structure && r.structure_passed;
  const double last = sw.rows.back().mismatch_fraction;
  return {sw.mismatch_monotone && last < 0.01 && sw.weak_slope >= 0.9 && structure,
          format("mismatch monotone %s, final fraction %.3g (tol 0.01), weak slope %.3g (min 0.9), structure %s",
                 sw.mismatch_monotone ? "yes" : "no", last, sw.weak_slope, structure ? "passed" : "failed")};
}

KLState random_state(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const BoxGrid om = n == 2 ? interval(16) : BoxGrid(2, {8, 8, 1}, Vec3::Zero(), Vec3(1, 1, 0));
  const double a = u(rng), b = u(rng), k = u(rng), jump = u(rng);
  const int cut = 1 + static_cast<int>((u(rng) + 1.0) * 3.0);  // plane index in 1..6
  const double pos = cut / 8.0;
  SidedFieldFn ub([=](const Vec3& x, const Vec3& toward) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n - 1);
    v[0] = a * x[0] + (toward[0] > pos ? jump : 0.0);
    if (n == 3) v[1] = b * x[0] * x[1];
    return v;
  });
  SidedFieldFn un([=](const Vec3& x, const Vec3& toward) {
    return Eigen::VectorXd::Constant(1, 0.5 * k * x[0] * x[0] + (toward[0] > pos ? b : 0.0));
  });
  SidedFieldFn gr([=](const Vec3& x, const Vec3&) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n - 1);
    v[0] = k * x[0];
    return v;
  });
  KLState s = KLState::from_functions(n, om, ub, un, gr);
  s.add_crack_plane(0, pos);
  return s;
}

Outcome kl_structure() {
  std::mt19937_64 rng(29);
  double roundtrip = 0.0;
  int decomposed = 0, non_vertical = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 2;
    const KLState s = random_state(rng, n);
    const NodalField u = kl_lift(s, plate_grid(s.omega(), 4));
    const NodalField avg = kl_average(u);
    const PsiResult psi = extract_psi(u, -0.5, 0.5);
    for (int c = 0; c < s.omega().num_cells(); ++c)
      for (int k = 0; k < s.omega().corners(); ++k)
        for (int a = 0; a < n - 1; ++a) {
          roundtrip = std::max(roundtrip, std::abs(avg.at(c, k, a) - s.fields.at(c, k, s.ubar_comp(a))));
          roundtrip = std::max(roundtrip, std::abs(psi.psi.at(c, k, a) - s.fields.at(c, k, s.grad_comp(a))));
        }
    decomposed += jump_decomposition_check(s, u) ? 1 : 0;
    non_vertical += kl_verify(u, LameParams{1.0, 1.0, n}).non_vertical_broken;
  }

  auto field = FieldFn([](const Vec3& x) {
    Eigen::VectorXd v(2);
    v << std::sin(2 * x[0]) * std::cos(x[1]), std::exp(0.5 * x[0]);
    return v;
  });
  double slope = INFINITY, prev = 0.0;
  for (int k = 0; k < 3; ++k) {
    const int m = 8 << k;
    const BoxGrid plate(2, {m, m, 1}, Vec3(0, -0.5, 0), Vec3(1, 0.5, 0));
    const double r = kl_verify(NodalField::sample(plate, 2, field), kLame).appgra_residual;
    if (k > 0) slope = std::min(slope, std::log2(prev / r));
    prev = r;
  }
  return {roundtrip <= 1e-12 && decomposed == 20 && non_vertical == 0 && slope >= 1.9,
          format("round-trip error %.3g, decomposition %d/20, non-vertical faces %d, appgra slope %.3g (min 1.9)",
                 roundtrip, decomposed, non_vertical, slope)};
}

Outcome compactness() {
  const RecoverySweep& sw = recovery_family();
  double worst_a = 0.0, worst_n = 0.0;
  bool ok = true;
  for (const auto& r : sw.rows) {
    ok = ok && r.alpha_n_norm <= r.alpha_n_bound && r.nn_norm <= r.nn_bound;
    worst_a = std::max(worst_a, r.alpha_n_norm / r.alpha_n_bound);
    worst_n = std::max(worst_n, r.nn_norm / r.nn_bound);
  }
  return {ok, format("max ||e_an|| / bound %.3g, max ||e_nn|| / bound %.3g over %zu rows", worst_a, worst_n,
                     sw.rows.size())};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget;  // seconds, 0 when unbounded
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"1 reduced tensor identity", 1.0, reduced_tensor},
      {"2 Griffith bar crossover", 30.0, griffith_crossover},
      {"3 recovery convergence", 60.0, recovery_convergence},
      {"4 minima convergence", 120.0, minima_convergence},
      {"5 jump energy averaging", 0.0, jump_energy_averaging},
      {"6 transversal projection", 0.0, projection_vanishing},
      {"7 approximant properties", 0.0, approximant_properties},
      {"8 Kirchhoff-Love structure", 10.0, kl_structure},
      {"9 compactness diagnostics", 0.0, compactness},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.budget == 0.0 || secs <= c.budget;
    const bool pass = o.pass && in_time;
    failed += pass ? 0 : 1;
    std::string budget = c.budget > 0.0 ? format(", budget %.0f s", c.budget) : std::string();
    std::printf("%s  %-28s %s [%.2f s%s]\n", pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs, budget.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
