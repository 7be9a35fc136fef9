#include <cmath>
#include <random>

#include "doctest.h"
#include "platelab/elasticity.hpp"

using namespace platelab;

namespace {

SymMatrix random_sym(std::mt19937_64& rng, int dim) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  SymMatrix e(dim);
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) e.set(i, j, U(rng));
  return e;
}

// lambda tr^2 + 2 mu |e|^2 written out entry by entry.
double isotropic_energy(double lambda, double mu, const SymMatrix& e) {
  double tr = 0.0, sq = 0.0;
  for (int i = 0; i < e.dim(); ++i) {
    tr += e(i, i);
    for (int j = 0; j < e.dim(); ++j) sq += e(i, j) * e(i, j);
  }
  return lambda * tr * tr + 2.0 * mu * sq;
}

}  // namespace

TEST_CASE("Lame validation") {
  CHECK(validate_lame({1.0, 1.0, 2}));
  CHECK(validate_lame({-0.5, 1.0, 3}));
  CHECK_FALSE(validate_lame({1.0, 0.0, 2}));
  CHECK_FALSE(validate_lame({-1.0, 1.0, 2}));
  CHECK_FALSE(validate_lame({1.0, 1.0, 4}));
  CHECK_THROWS_AS(require_valid_lame({1.0, -1.0, 3}), std::invalid_argument);
}

TEST_CASE("quadratic form of C matches the explicit isotropic energy") {
  std::mt19937_64 rng(3);
  for (int n = 2; n <= 3; ++n)
    for (int k = 0; k < 50; ++k) {
      const SymMatrix e = random_sym(rng, n);
      const LameParams p{0.7, 1.3, n};
      CHECK(quadratic_form_C(p, e) == doctest::Approx(isotropic_energy(0.7, 1.3, e)).epsilon(1e-13));
    }
}

TEST_CASE("reduced tensor is the minimum over the transverse column") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int n = 2; n <= 3; ++n) {
    const LameParams p{1.4, 0.6, n};
    for (int k = 0; k < 40; ++k) {
      const SymMatrix e = random_sym(rng, n - 1);
      const double c0 = quadratic_form_C0(p, e);
      const ReducedMinimum m = reduced_min_oracle(p, e);
      CHECK(m.value == doctest::Approx(c0).epsilon(1e-10));
      CHECK(quadratic_form_C(p, embed_with_column(e, m.xi)) == doctest::Approx(c0).epsilon(1e-10));
      for (int t = 0; t < 5; ++t) {
        Eigen::VectorXd xi(n);
        for (int i = 0; i < n; ++i) xi[i] = U(rng);
        CHECK(quadratic_form_C(p, embed_with_column(e, xi)) >= c0 - 1e-12);
      }
    }
  }
}

TEST_CASE("one-dimensional reduced modulus") {
  // 4 mu (lambda + mu) / (lambda + 2 mu)
  CHECK(reduced_modulus_1d({1.0, 1.0, 2}) == doctest::Approx(8.0 / 3.0));
  CHECK(reduced_modulus_1d({2.0, 0.5, 2}) == doctest::Approx(4.0 * 0.5 * 2.5 / 3.0));
}

TEST_CASE("anisotropic surface weight") {
  Eigen::VectorXd v(2), h(2), t(2);
  v << 1.0, 0.0;
  h << 0.0, 1.0;
  t << 0.6, 0.8;
  CHECK(phi_rho(0.1, v) == doctest::Approx(1.0));
  CHECK(phi_rho(0.1, h) == doctest::Approx(10.0));
  CHECK(phi_rho(0.1, t) == doctest::Approx(std::sqrt(0.36 + 64.0)));
  CHECK(phi_rho(1.0, t) == doctest::Approx(1.0));
}

TEST_CASE("strain rescaling divides mixed entries by rho and the normal entry by rho^2") {
  SymMatrix e(3);
  e.set(0, 0, 1.0);
  e.set(0, 1, 2.0);
  e.set(0, 2, 3.0);
  e.set(2, 2, 4.0);
  const SymMatrix r = rescale_strain(e, 0.5);
  CHECK(r(0, 0) == doctest::Approx(1.0));
  CHECK(r(0, 1) == doctest::Approx(2.0));
  CHECK(r(0, 2) == doctest::Approx(6.0));
  CHECK(r(2, 2) == doctest::Approx(16.0));
}

TEST_CASE("displacement rescaling round trip") {
  const double rho = 0.2;
  BoxGrid thin(2, {8, 4, 1}, Vec3(0, -0.5 * rho, 0), Vec3(1, 0.5 * rho, 0));
  NodalField u = NodalField::sample(thin, 2, FieldFn([](const Vec3& x) {
                                      Eigen::VectorXd v(2);
                                      v << std::sin(x[0]) + x[1], x[0] * x[0];
                                      return v;
                                    }));
  const NodalField v = rescale_displacement(u, rho);
  CHECK(v.grid.lo(1) == doctest::Approx(-0.5));
  const NodalField back = unrescale_displacement(v, rho);
  for (size_t i = 0; i < u.values.size(); ++i) CHECK(back.values[i] == doctest::Approx(u.values[i]));
  // v_n = rho u_n
  CHECK(v.at(3, 1, 1) == doctest::Approx(rho * u.at(3, 1, 1)));
}
