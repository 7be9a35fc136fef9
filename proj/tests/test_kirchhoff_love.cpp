#include <cmath>
#include <filesystem>
#include <limits>

#include "doctest.h"
#include "platelab/config.hpp"
#include "platelab/kirchhoff_love.hpp"

using namespace platelab;

namespace {

BoxGrid omega2(int cells) { return BoxGrid(1, {cells, 1, 1}, Vec3::Zero(), Vec3(1, 0, 0)); }

BoxGrid omega3(int cells) { return BoxGrid(2, {cells, cells, 1}, Vec3::Zero(), Vec3(1, 1, 0)); }

// u_n = sin(x1) + x1 x2 / 2, with its exact gradient and a small in-plane part
KLState smooth_state(const BoxGrid& omega) {
  SidedFieldFn ub([](const Vec3& x, const Vec3&) {
    Eigen::VectorXd v(2);
    v << 0.1 * x[0] * x[0], -0.2 * x[1];
    return v;
  });
  SidedFieldFn un([](const Vec3& x, const Vec3&) {
    return Eigen::VectorXd::Constant(1, std::sin(x[0]) + 0.5 * x[0] * x[1]);
  });
  SidedFieldFn gr([](const Vec3& x, const Vec3&) {
    Eigen::VectorXd v(2);
    v << std::cos(x[0]) + 0.5 * x[1], 0.5 * x[0];
    return v;
  });
  return KLState::from_functions(3, omega, ub, un, gr);
}

}  // namespace

TEST_CASE("component layout") {
  const KLState s(3, omega3(2));
  CHECK(s.ubar_comp(1) == 1);
  CHECK(s.un_comp() == 2);
  CHECK(s.grad_comp(0) == 3);
  CHECK(s.fields.components == 5);
}

TEST_CASE("lifted states are Kirchhoff-Love") {
  const LameParams p{1.0, 1.0, 2};
  const BoxGrid om = omega2(16);
  const KLState s = make_state("bend:0.8", 2, om);
  CHECK(s.gradient_residual() < 1e-12);
  const NodalField u = kl_lift(s, plate_grid(om, 4));
  const KLReport r = kl_verify(u, p);
  CHECK(r.is_kl());
  CHECK(r.max_transverse_strain < 1e-12);
  CHECK(r.non_vertical_broken == 0);
  CHECK(r.max_un_variation < 1e-14);
}

TEST_CASE("averaging and slice extraction recover the reduced state") {
  const BoxGrid om = omega3(8);
  const KLState s = smooth_state(om);
  const NodalField u = kl_lift(s, plate_grid(om, 4));
  const NodalField avg = kl_average(u);
  double e_avg = 0.0, e_psi = 0.0;
  const PsiResult psi = extract_psi(u, -0.5, 0.5);
  for (int c = 0; c < om.num_cells(); ++c)
    for (int k = 0; k < om.corners(); ++k)
      for (int a = 0; a < 2; ++a) {
        e_avg = std::max(e_avg, std::abs(avg.at(c, k, a) - s.fields.at(c, k, s.ubar_comp(a))));
        e_psi = std::max(e_psi, std::abs(psi.psi.at(c, k, a) - s.fields.at(c, k, s.grad_comp(a))));
      }
  CHECK(e_avg < 1e-12);
  CHECK(e_psi < 1e-12);
  CHECK(psi.excluded_count == 0);
  const SliceReport sr = slice_independence(u);
  CHECK(sr.independent);
  CHECK(sr.max_deviation < 1e-12);
}

TEST_CASE("a non-KL field is flagged") {
  const LameParams p{1.0, 1.0, 2};
  const BoxGrid plate = plate_grid(omega2(64), 16);
  const NodalField u = NodalField::sample(plate, 2, FieldFn([](const Vec3& x) {
                                            Eigen::VectorXd v(2);
                                            v << x[1], 0.0;  // shear: e_12 = 1/2
                                            return v;
                                          }));
  const KLReport r = kl_verify(u, p);
  CHECK_FALSE(r.is_kl());
  CHECK(r.max_transverse_strain == doctest::Approx(0.5));
}

TEST_CASE("approximate-gradient identity converges at second order") {
  // smooth, u_n independent of x_n, not Kirchhoff-Love
  auto field = FieldFn([](const Vec3& x) {
    Eigen::VectorXd v(2);
    v << std::sin(2 * x[0]) * std::cos(x[1]), std::exp(0.5 * x[0]);
    return v;
  });
  const LameParams p{1.0, 1.0, 2};
  double prev = 0.0;
  for (int k = 0; k < 3; ++k) {
    const int m = 8 << k;
    const BoxGrid plate(2, {m, m, 1}, Vec3(0, -0.5, 0), Vec3(1, 0.5, 0));
    const double r = kl_verify(NodalField::sample(plate, 2, field), p).appgra_residual;
    CHECK(r > 0.0);
    if (k > 0) CHECK(std::log2(prev / r) >= 1.9);
    prev = r;
  }
}

TEST_CASE("crack lines become vertical columns") {
  const BoxGrid om = omega2(8);
  const KLState s = make_state("crack:1:0.5:0.25", 2, om);
  CHECK(s.crack_measure() == doctest::Approx(1.0));
  CHECK(s.crack_faces().size() == 1);
  const NodalField u = kl_lift(s, plate_grid(om, 4));
  CHECK(u.broken_interior_count() == 4);
  CHECK(jump_decomposition_check(s, u));
  NodalField v = u;
  v.broken.assign(v.broken.size(), 0);
  CHECK_FALSE(jump_decomposition_check(s, v));

  KLState t(3, omega3(4));
  t.add_crack_plane(1, 0.25);
  CHECK(t.crack_measure() == doctest::Approx(1.0));
  CHECK_THROWS_AS(t.add_crack_plane(0, 0.3), std::invalid_argument);
}

TEST_CASE("validation and persistence") {
  const BoxGrid om = omega3(4);
  KLState s = smooth_state(om);
  s.add_crack_plane(0, 0.5);
  const auto path = (std::filesystem::temp_directory_path() / "platelab_kl_state.txt").string();
  s.save(path);
  const KLState r = KLState::load(path);
  CHECK(r.n == 3);
  CHECK(r.fields.values == s.fields.values);
  CHECK(r.fields.broken == s.fields.broken);
  CHECK_THROWS(KLState::load(path + ".missing"));

  KLState bad = s;
  bad.fields.values[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  const KLState sum = KLState::combine(2.0, s, -1.0, s);
  CHECK(sum.fields.values[7] == doctest::Approx(s.fields.values[7]));
}

TEST_CASE("finite-difference tolerance") {
  CHECK(fd_tolerance(0.1, 0.5) == doctest::Approx(0.1));
  CHECK(fd_tolerance(0.1, 3.0) == doctest::Approx(0.3));
}
