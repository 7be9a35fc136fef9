#include <cmath>

#include "doctest.h"
#include "platelab/grid.hpp"

using namespace platelab;

TEST_CASE("cell, node and face ids round trip") {
  BoxGrid g(3, {3, 4, 2}, Vec3(0, 0, 0), Vec3(3, 2, 1));
  CHECK(g.num_cells() == 24);
  CHECK(g.num_nodes() == 4 * 5 * 3);
  CHECK(g.num_faces() == 4 * 4 * 2 + 3 * 5 * 2 + 3 * 4 * 3);
  for (int c = 0; c < g.num_cells(); ++c) CHECK(g.cell_id(g.cell_index(c)) == c);
  for (int v = 0; v < g.num_nodes(); ++v) CHECK(g.node_id(g.node_index(v)) == v);
  for (int f = 0; f < g.num_faces(); ++f) {
    auto [axis, idx] = g.face_info(f);
    CHECK(g.face_id(axis, idx) == f);
    auto [below, above] = g.face_cells(f);
    CHECK(g.is_boundary_face(f) == (below < 0 || above < 0));
  }
  CHECK(g.face_area(g.face_id(0, {1, 0, 0})) == doctest::Approx(0.5 * 0.5));
}

TEST_CASE("shape functions form a partition of unity") {
  BoxGrid g(3, {2, 2, 2}, Vec3::Zero(), Vec3(1, 2, 4));
  const Vec3 x(0.3, 0.7, 0.1);
  double s = 0.0;
  Vec3 gs = Vec3::Zero();
  for (int k = 0; k < g.corners(); ++k) {
    s += shape_value(3, k, x);
    gs += shape_gradient(g, k, x);
  }
  CHECK(s == doctest::Approx(1.0));
  CHECK(gs.norm() == doctest::Approx(0.0));
}

TEST_CASE("nodal fields reproduce affine functions") {
  BoxGrid g(2, {5, 3, 1}, Vec3(-1, 0, 0), Vec3(1, 1, 0));
  const NodalField u = NodalField::sample(g, 2, FieldFn([](const Vec3& x) {
                                            Eigen::VectorXd v(2);
                                            v << 2 * x[0] - x[1] + 1, 0.5 * x[1];
                                            return v;
                                          }));
  const auto [cell, local] = g.locate(Vec3(0.13, 0.77, 0));
  const Eigen::VectorXd v = u.value(cell, local);
  CHECK(v[0] == doctest::Approx(2 * 0.13 - 0.77 + 1));
  const Eigen::Matrix3d G = u.gradient(cell, local);
  CHECK(G(0, 0) == doctest::Approx(2.0));
  CHECK(G(0, 1) == doctest::Approx(-1.0));
  CHECK(G(1, 1) == doctest::Approx(0.5));
}

TEST_CASE("two-point Gauss rule integrates cubics exactly") {
  for (int dim = 1; dim <= 3; ++dim) {
    const CellQuadrature q = gauss2(dim);
    double w = 0.0, m = 0.0;
    for (size_t k = 0; k < q.points.size(); ++k) {
      w += q.weights[k];
      m += q.weights[k] * std::pow(q.points[k][0], 3);
    }
    CHECK(w == doctest::Approx(1.0));
    CHECK(m == doctest::Approx(0.25));
  }
}

TEST_CASE("sided sampling keeps one-sided values across a break") {
  BoxGrid g(1, {4, 1, 1}, Vec3::Zero(), Vec3(1, 0, 0));
  NodalField u = NodalField::sample(g, 1, SidedFieldFn([](const Vec3& x, const Vec3& toward) {
                                      return Eigen::VectorXd::Constant(1, toward[0] > 0.5 ? 1.0 + x[0] : x[0]);
                                    }));
  CHECK(u.at(1, 1, 0) == doctest::Approx(0.5));
  CHECK(u.at(2, 0, 0) == doctest::Approx(1.5));
}
