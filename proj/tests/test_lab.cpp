#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "platelab/config.hpp"
#include "platelab/lab.hpp"

using namespace platelab;

namespace {

BoxGrid omega(int cells) { return BoxGrid(1, {cells, 1, 1}, Vec3::Zero(), Vec3(1, 0, 0)); }

const LameParams kLame{1.0, 1.0, 2};

}  // namespace

TEST_CASE("tables") {
  Table t;
  t.header = {"a", "b"};
  t.add_row({fmt(0.1), "x,y\nz"});
  t.add_row({fmt(std::numeric_limits<double>::quiet_NaN()), fmt(3)});
  CHECK(t.csv() == "a,b\n0.1,x;y;z\n,3\n");
  CHECK_THROWS(t.add_row({"1"}));
  const auto path = (std::filesystem::temp_directory_path() / "platelab_table.csv").string();
  t.write_csv(path);
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == t.csv());
}

TEST_CASE("recovery targets for a stretched membrane") {
  const KLState s = make_state("membrane:0.6", 2, omega(64));
  const RecoveryField r = recovery_sequence(s, kLame, 0.01, 0.25, 8);
  // away from the cut-off band the target is -lambda/(lambda + 2 mu) t
  const int mid = 32;
  CHECK(r.h1[mid] == doctest::Approx(-0.2).epsilon(1e-12));
  CHECK(r.h2[mid] == doctest::Approx(0.0));
  CHECK(r.h1.front() == 0.0);
  CHECK(r.h1.back() == 0.0);
  CHECK(r.shear_audit > 0.0);
  CHECK_THROWS_AS(recovery_sequence(s, kLame, 0.01, 1e-3, 8), std::invalid_argument);
}

TEST_CASE("recovery sweep converges to the limit energy") {
  const KLState s = make_state("crack:1:0.5:0.25", 2, omega(128));
  const RecoverySweep sw = recovery_sweep(s, kLame, {0.1, 0.03, 0.01}, 8);
  REQUIRE(sw.rows.size() == 3);
  CHECK(sw.gap_nonincreasing);
  CHECK(sw.compactness_holds);
  CHECK(sw.converged);
  for (const auto& r : sw.rows) {
    CHECK(r.resolved);
    CHECK(r.alpha_n_norm <= r.alpha_n_bound);
    CHECK(r.nn_norm <= r.nn_bound);
  }
  CHECK(sw.rows.back().rel_gap < 0.05);
  CHECK(sw.rows.front().limit == doctest::Approx(4.0 / 3.0 + 1.0).epsilon(1e-9));

  const RecoverySweep fast = recovery_sweep(s, kLame, {0.1, 0.01}, 8, SmoothingRule::rho_squared);
  CHECK_FALSE(fast.rows.back().resolved);
  CHECK_FALSE(fast.converged);
  CHECK(fast.table().csv().find(",,") != std::string::npos);

  CHECK_THROWS_AS(recovery_sweep(s, kLame, {0.01, 0.1}, 8), std::invalid_argument);
  CHECK_THROWS_AS(parse_smoothing_rule("cubic"), std::invalid_argument);
}

TEST_CASE("lower-bound probes") {
  const KLState s = make_state("bend:0.5", 2, omega(64));
  const LiminfProbe c = liminf_probe(ProbeSequence::constant, s, kLame, {0.1, 0.01}, 8);
  CHECK(c.min_margin >= -1e-9);
  const LiminfProbe t = liminf_probe(ProbeSequence::tilted, s, kLame, {0.1, 0.01}, 8);
  CHECK(t.rows.back().surface_margin > t.rows.front().surface_margin);
  CHECK(t.min_margin > 0.0);
  CHECK_THROWS_AS(parse_probe_sequence("wiggle"), std::invalid_argument);
}

TEST_CASE("minima converge on a coarse bar") {
  const MinimaSweep sw = minima_sweep(BoundaryDatum::stretch(2, 1.2), kLame, omega(32), 4, {0.1, 0.05});
  REQUIRE(sw.rows.size() == 2);
  for (const auto& r : sw.rows) {
    CHECK(r.error.empty());
    CHECK(r.converged);
    CHECK_FALSE(r.tie);
    CHECK(r.energy_0 == doctest::Approx(1.0));
    CHECK(r.rel_gap < 1e-6);
  }
}

TEST_CASE("lattice studies") {
  CrackSurface c(2);
  c.add_segment(Vec3(0.5, 0, 0), Vec3(0.5, 1, 0));
  const JumpEnergyStudy st = jump_energy_study(c, 1.0 / 32, Vec3::Zero(), Vec3::Ones(), 30, 9);
  CHECK(st.rel_error < 0.05);
  CHECK(st.table().rows.size() == 30);

  const ProjectionSweep ps = projection_sweep(c, {1.0 / 8, 1.0 / 16, 1.0 / 32}, Vec3(0.3, 0.3, 0), Vec3::Zero(),
                                              Vec3::Ones(), 1);
  for (size_t k = 0; k < ps.rows.size(); ++k) {
    CHECK(ps.rows[k].measure <= 2 * ps.rows[k].h + 1e-12);
    if (k > 0) CHECK(ps.rows[k].ratio <= 0.75);
  }
  CHECK_THROWS_AS(projection_sweep(c, {0.1}, Vec3::Zero(), Vec3::Zero(), Vec3::Ones(), 2), std::invalid_argument);
}
