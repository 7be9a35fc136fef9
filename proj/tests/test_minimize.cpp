#include <cmath>
#include <random>

#include "doctest.h"
#include "platelab/minimize.hpp"

using namespace platelab;

namespace {

BoxGrid omega(int cells) { return BoxGrid(1, {cells, 1, 1}, Vec3::Zero(), Vec3(1, 0, 0)); }

const LameParams kLame{1.0, 1.0, 2};

}  // namespace

TEST_CASE("affine stretch is exact without Poisson coupling") {
  const LameParams p{0.0, 1.0, 2};
  const BoundaryDatum g = BoundaryDatum::stretch(2, 0.4);
  const BoxGrid plate = plate_grid(omega(8), 4);
  const NodalField u = elastic_solve(CrackIndicator{std::vector<char>(plate.num_faces(), 0)}, g, p, 0.1, plate);
  const NodalField exact = g.lift(plate);
  double err = 0.0;
  for (size_t i = 0; i < u.values.size(); ++i) err = std::max(err, std::abs(u.values[i] - exact.values[i]));
  CHECK(err < 1e-10);
  const ElasticSystem sys(plate, p, 0.1, g);
  CHECK(sys.bulk(u) == doctest::Approx(0.16));
}

TEST_CASE("element matrix reproduces the bulk energy") {
  const BoxGrid plate = plate_grid(omega(6), 3);
  const ElasticSystem sys(plate, kLame, 0.2, BoundaryDatum::zero(2));
  const NodalField u = NodalField::sample(plate, 2, FieldFn([](const Vec3& x) {
                                            Eigen::VectorXd v(2);
                                            v << std::sin(x[0]) * x[1], 0.3 * x[0] * x[0] + x[1] * x[1];
                                            return v;
                                          }));
  CHECK(sys.bulk(u) == doctest::Approx(bulk_terms(u, kLame, 0.2).total()));
}

TEST_CASE("the elastic solution is stationary") {
  const BoundaryDatum g = BoundaryDatum::stretch(2, 0.5);
  const BoxGrid plate = plate_grid(omega(12), 4);
  const ElasticSystem sys(plate, kLame, 0.1, g);
  const std::vector<char> intact(plate.num_faces(), 0);
  const NodalField u = sys.solve(intact);
  const double e0 = sys.bulk(u);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> coef;
  for (int trial = 0; trial < 20; ++trial) {
    const double a = coef(rng), b = coef(rng), c = coef(rng);
    // vanishes on x_1 = 0 and x_1 = 1
    const NodalField phi = NodalField::sample(plate, 2, FieldFn([=](const Vec3& x) {
                                                const double s = std::sin(M_PI * x[0]);
                                                Eigen::VectorXd v(2);
                                                v << s * (a + b * x[1]), s * c * x[1] * x[1];
                                                return v;
                                              }));
    for (double eps : {1e-2, -1e-2}) {
      NodalField w = u;
      for (size_t i = 0; i < w.values.size(); ++i) w.values[i] += eps * phi.values[i];
      CHECK(sys.bulk(w) >= e0 - 1e-12);
    }
  }
}

TEST_CASE("direct and iterative solves agree") {
  const BoundaryDatum g = BoundaryDatum::bend(2, 0.7);
  const BoxGrid plate = plate_grid(omega(12), 4);
  std::vector<char> broken(plate.num_faces(), 0);
  SolverConfig cg;
  cg.linear = SolverConfig::Linear::cg;
  cg.cg_tol = 1e-12;
  const ElasticSystem a(plate, kLame, 0.1, g), b(plate, kLame, 0.1, g, cg);
  const NodalField ua = a.solve(broken), ub = b.solve(broken);
  CHECK(b.bulk(ub) == doctest::Approx(a.bulk(ua)).epsilon(1e-8));

  SolverConfig starved = cg;
  starved.cg_max_iter = 2;
  const ElasticSystem c(plate, kLame, 0.1, g, starved);
  CHECK_THROWS_AS(c.solve(broken), SolverFailure);
}

TEST_CASE("solver configuration is validated") {
  SolverConfig c;
  c.cg_tol = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = SolverConfig{};
  c.activation_rule = "random";
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK_THROWS_AS(ElasticSystem(plate_grid(omega(4), 2), kLame, -1.0, BoundaryDatum::zero(2)), std::invalid_argument);
}

TEST_CASE("Griffith bar under stretching") {
  const BoxGrid plate = plate_grid(omega(32), 4);
  SUBCASE("zero datum stays at zero") {
    const MinimizeResult r = alternate_minimize(BoundaryDatum::zero(2), kLame, 0.1, plate);
    CHECK(r.energy.total == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(r.field.broken_interior_count() == 0);
    CHECK(r.converged);
  }
  SUBCASE("subcritical load stays intact") {
    const MinimizeResult r = alternate_minimize(BoundaryDatum::stretch(2, 0.5), kLame, 0.1, plate);
    CHECK(r.energy.surface == 0.0);
    CHECK(r.energy.total == doctest::Approx(1.0 / 3.0).epsilon(0.02));
    CHECK(r.monotone);
  }
  SUBCASE("supercritical load breaks once") {
    const MinimizeResult r = alternate_minimize(BoundaryDatum::stretch(2, 1.2), kLame, 0.1, plate);
    CHECK(r.energy.total == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.energy.bulk == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(r.monotone);
    CHECK(r.converged);
    for (size_t k = 1; k < r.trace.size(); ++k) CHECK(r.trace[k].total <= r.trace[k - 1].total + 1e-12);
    const ElasticSystem sys(plate, kLame, 0.1, BoundaryDatum::stretch(2, 1.2));
    const CrackIndicator again = activation_step(sys, r.field, r.cracks);
    CHECK(again.broken == r.cracks.broken);
  }
}

TEST_CASE("faces mode lowers the energy monotonically") {
  SolverConfig cfg;
  cfg.mode = SolverConfig::Mode::faces;
  cfg.exhaustive = false;
  // one layer, so a single face is a full column and the local release pays for it
  const BoxGrid plate = plate_grid(omega(8), 1);
  const MinimizeResult r = alternate_minimize(BoundaryDatum::stretch(2, 1.5), kLame, 0.1, plate, cfg);
  CHECK(r.monotone);
  CHECK(r.energy.total < r.trace.front().total);
  CHECK(r.field.broken_interior_count() >= 1);
  for (size_t f = 0; f < r.cracks.broken.size(); ++f)
    if (r.trace.size() > 1 && r.cracks.broken[f]) CHECK(r.field.broken[f]);
}

TEST_CASE("reduced minimisation") {
  const BoxGrid om = omega(128);
  SUBCASE("membrane below and above the switch") {
    const LimitResult a = minimize_limit(BoundaryDatum::stretch(2, 0.5), kLame, om);
    CHECK(a.energy.total == doctest::Approx(1.0 / 3.0));
    CHECK(a.crack_nodes.empty());
    CHECK(a.released_sides.empty());
    const LimitResult b = minimize_limit(BoundaryDatum::stretch(2, 1.2), kLame, om);
    CHECK(b.energy.total == doctest::Approx(1.0));
    CHECK(b.crack_nodes.size() + b.released_sides.size() == 1);
    CHECK(b.monotone);
    CHECK(b.trace.front().total == doctest::Approx(4.0 / 3.0 * 1.44));
  }
  SUBCASE("pure bending") {
    // second differences with clamped ends converge at first order
    double prev = 0.0;
    for (int cells : {64, 128, 256}) {
      const double err = std::abs(minimize_limit(BoundaryDatum::bend(2, 1.5), kLame, omega(cells)).energy.total -
                                  2.25 / 9.0);
      CHECK(err <= 2.0 / cells * 2.25 / 9.0);
      if (prev > 0.0) CHECK(err < 0.6 * prev);
      prev = err;
    }
    const LimitResult b = minimize_limit(BoundaryDatum::bend(2, 4.0), kLame, om);
    CHECK(b.energy.total == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("fixed configurations") {
    const LimitResult r = solve_limit(BoundaryDatum::stretch(2, 1.2), kLame, om, {64}, {});
    CHECK(r.energy.surface == doctest::Approx(1.0));
    CHECK(r.energy.bulk == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.energy.boundary_penalty == 0.0);
    const LimitResult s = solve_limit(BoundaryDatum::stretch(2, 1.2), kLame, om, {}, {1});
    CHECK(s.energy.boundary_penalty == doctest::Approx(1.0));
    CHECK_THROWS_AS(solve_limit(BoundaryDatum::zero(2), kLame, om, {0}, {}), std::invalid_argument);
  }
  SUBCASE("only the two-dimensional plate is supported") {
    const BoxGrid om2(2, {4, 4, 1}, Vec3::Zero(), Vec3(1, 1, 0));
    CHECK_THROWS_AS(minimize_limit(BoundaryDatum::zero(3), LameParams{1.0, 1.0, 3}, om2), std::invalid_argument);
  }
}
