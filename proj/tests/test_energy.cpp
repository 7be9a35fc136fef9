#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "platelab/config.hpp"
#include "platelab/energy.hpp"

using namespace platelab;

namespace {

BoxGrid unit_plate(int cells, int layers) { return BoxGrid(2, {cells, layers, 1}, Vec3(0, -0.5, 0), Vec3(1, 0.5, 0)); }

NodalField linear_field(const BoxGrid& g, const Eigen::Matrix2d& G) {
  return NodalField::sample(g, 2, FieldFn([G](const Vec3& x) { return Eigen::VectorXd(G * x.head<2>()); }));
}

}  // namespace

TEST_CASE("bulk energy of homogeneous strains") {
  const BoxGrid g = unit_plate(4, 2);
  Eigen::Matrix2d G;
  SUBCASE("in-plane stretch") {
    G << 0.3, 0, 0, 0;
    const LameParams p{1.0, 1.0, 2};
    CHECK(bulk_terms(linear_field(g, G), p, 1.0).total() == doctest::Approx(1.5 * 0.09));
    const LameParams q{0.0, 1.0, 2};
    CHECK(bulk_terms(linear_field(g, G), q, 0.2).total() == doctest::Approx(0.09));
  }
  SUBCASE("mixed strain scales with 1/rho") {
    G << 0, 1, 0, 0;  // e_12 = 1/2
    const LameParams p{1.0, 2.0, 2};
    const BulkTerms b = bulk_terms(linear_field(g, G), p, 0.5);
    CHECK(b.gauss_part == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(b.transverse_part == doctest::Approx(0.5 * 4 * 2.0 * 1.0));
    CHECK(b.alpha_n_norm == doctest::Approx(0.5));
  }
  SUBCASE("normal strain scales with 1/rho^2") {
    G << 0, 0, 0, 1;
    const LameParams p{1.0, 1.0, 2};
    const BulkTerms b = bulk_terms(linear_field(g, G), p, 0.5);
    CHECK(b.gauss_part == doctest::Approx(0.5 * 3.0 * 16.0));
    CHECK(b.nn_norm == doctest::Approx(1.0));
  }
}

TEST_CASE("surface term weights faces by phi_rho") {
  NodalField u(unit_plate(4, 2), 2);
  const BoxGrid& g = u.grid;
  u.broken[g.face_id(0, {2, 0, 0})] = 1;  // vertical face, height 1/2
  CHECK(surface_term(u, 0.1) == doctest::Approx(0.5));
  u.broken[g.face_id(1, {1, 1, 0})] = 1;  // horizontal face, width 1/4
  CHECK(surface_term(u, 0.1) == doctest::Approx(0.5 + 0.25 / 0.1));
  u.broken[g.face_id(0, {0, 0, 0})] = 1;  // boundary faces carry no energy
  CHECK(surface_term(u, 0.1) == doctest::Approx(0.5 + 0.25 / 0.1));
  CHECK_THROWS_AS(surface_term(u, 0.0), std::invalid_argument);
}

TEST_CASE("change of variables between thin and unit domains") {
  const double rho = 0.05;
  const BoxGrid thin(2, {8, 4, 1}, Vec3(0, -rho / 2, 0), Vec3(1, rho / 2, 0));
  NodalField u = NodalField::sample(thin, 2, FieldFn([](const Vec3& x) {
                                      Eigen::VectorXd v(2);
                                      v << 0.2 * x[0] + x[1] * x[0], 0.1 * x[0] * x[0] + 3 * x[1];
                                      return v;
                                    }));
  u.broken[thin.face_id(0, {4, 1, 0})] = 1;
  u.broken[thin.face_id(1, {2, 2, 0})] = 1;
  CHECK(change_of_variables_check(u, LameParams{1.0, 1.0, 2}, rho) < 1e-10);
}

TEST_CASE("limit energy of closed-form states") {
  const LameParams p{1.0, 1.0, 2};
  const BoxGrid om(1, {64, 1, 1}, Vec3::Zero(), Vec3(1, 0, 0));
  CHECK(reduced_modulus_1d(p) == doctest::Approx(8.0 / 3.0));
  CHECK(limit_energy(make_state("membrane:0.5", 2, om), p).bulk == doctest::Approx(4.0 / 3.0 * 0.25));
  CHECK(limit_energy(make_state("bend:0.6", 2, om), p).bulk == doctest::Approx(0.36 / 9.0));
  const EnergyBreakdown c = limit_energy(make_state("crack:0:0.5:1", 2, om), p);
  CHECK(c.bulk == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(c.surface == doctest::Approx(1.0));
  CHECK(c.total == doctest::Approx(1.0));
}

TEST_CASE("boundary data and penalties") {
  const BoxGrid om(1, {8, 1, 1}, Vec3::Zero(), Vec3(1, 0, 0));
  const BoxGrid plate = plate_grid(om, 4);
  const BoundaryDatum g = BoundaryDatum::parse(2, "stretch:0.5");
  CHECK(g.name.rfind("stretch", 0) == 0);
  CHECK(g.displacement(Vec3(1.0, 0.3, 0))[0] == doctest::Approx(0.5));
  CHECK_THROWS_AS(BoundaryDatum::parse(2, "twist:1"), std::invalid_argument);
  CHECK_THROWS_AS(BoundaryDatum::parse(2, "stretch:abc"), std::invalid_argument);

  CHECK(boundary_penalty(g.lift(plate), g) == doctest::Approx(0.0));
  const NodalField zero(plate, 2);
  CHECK(boundary_penalty(zero, g) == doctest::Approx(1.0));  // only the side x_1 = 1 mismatches
  CHECK(boundary_penalty(KLState(2, om), g) == doctest::Approx(1.0));
  CHECK(boundary_penalty(g.sample(om), g) == doctest::Approx(0.0));

  const EnergyBreakdown e = penalized_energy(zero, LameParams{1.0, 1.0, 2}, 0.1, g);
  CHECK(e.total == doctest::Approx(e.bulk + e.surface + e.boundary_penalty));
  CHECK(trace_tolerance(0.5) == doctest::Approx(1e-9));
  CHECK(trace_tolerance(20.0) == doctest::Approx(2e-8));
}

TEST_CASE("energy rows have as many fields as the header") {
  EnergyBreakdown e;
  e.rho = 0.1, e.bulk = 1, e.surface = 2, e.boundary_penalty = 0;
  e.finalize();
  CHECK(e.total == 3.0);
  auto count = [](const std::string& s) { return std::count(s.begin(), s.end(), ','); };
  CHECK(count(EnergyBreakdown::csv_header()) == count(e.csv_row()));
}
