#include "platelab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace platelab {

BoxGrid::BoxGrid(int dim, Idx3 cells, const Vec3& lo, const Vec3& hi) : dim_(dim), lo_(lo), hi_(hi) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("BoxGrid: dimension must be 1, 2 or 3");
  num_cells_ = 1;
  num_nodes_ = 1;
  for (int a = 0; a < 3; ++a) {
    if (a >= dim) {
      cells_[a] = 1;
      lo_[a] = 0.0;
      hi_[a] = 0.0;
      spacing_[a] = 1.0;
      continue;
    }
    if (cells[a] < 1) throw std::invalid_argument("BoxGrid: cell counts must be positive");
    if (!(hi[a] > lo[a])) throw std::invalid_argument("BoxGrid: empty extent");
    cells_[a] = cells[a];
    spacing_[a] = (hi[a] - lo[a]) / cells[a];
    num_cells_ *= cells[a];
    num_nodes_ *= cells[a] + 1;
  }
  face_offset_[0] = 0;
  for (int a = 0; a < 3; ++a) {
    int count = 0;
    if (a < dim) {
      count = 1;
      for (int b = 0; b < dim; ++b) count *= (b == a) ? cells_[b] + 1 : cells_[b];
    }
    face_offset_[a + 1] = face_offset_[a] + count;
  }
}

Idx3 BoxGrid::cell_index(int cell) const {
  Idx3 idx{0, 0, 0};
  for (int a = 0; a < dim_; ++a) {
    idx[a] = cell % cells_[a];
    cell /= cells_[a];
  }
  return idx;
}

int BoxGrid::cell_id(const Idx3& idx) const {
  int id = 0;
  for (int a = dim_ - 1; a >= 0; --a) id = id * cells_[a] + idx[a];
  return id;
}

Idx3 BoxGrid::node_index(int node) const {
  Idx3 idx{0, 0, 0};
  for (int a = 0; a < dim_; ++a) {
    idx[a] = node % (cells_[a] + 1);
    node /= cells_[a] + 1;
  }
  return idx;
}

int BoxGrid::node_id(const Idx3& idx) const {
  int id = 0;
  for (int a = dim_ - 1; a >= 0; --a) id = id * (cells_[a] + 1) + idx[a];
  return id;
}

int BoxGrid::corner_node(int cell, int corner) const {
  Idx3 idx = cell_index(cell);
  for (int a = 0; a < dim_; ++a) idx[a] += (corner >> a) & 1;
  return node_id(idx);
}

Vec3 BoxGrid::node_position(const Idx3& idx) const {
  Vec3 x = Vec3::Zero();
  for (int a = 0; a < dim_; ++a) x[a] = (idx[a] == cells_[a]) ? hi_[a] : lo_[a] + idx[a] * spacing_[a];
  return x;
}

Vec3 BoxGrid::corner_position(int cell, int corner) const {
  Idx3 idx = cell_index(cell);
  for (int a = 0; a < dim_; ++a) idx[a] += (corner >> a) & 1;
  return node_position(idx);
}

Vec3 BoxGrid::cell_center(int cell) const {
  const Idx3 idx = cell_index(cell);
  Vec3 x = Vec3::Zero();
  for (int a = 0; a < dim_; ++a) x[a] = lo_[a] + (idx[a] + 0.5) * spacing_[a];
  return x;
}

double BoxGrid::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= spacing_[a];
  return v;
}

int BoxGrid::face_id(int axis, const Idx3& idx) const {
  int id = 0;
  for (int b = dim_ - 1; b >= 0; --b) id = id * ((b == axis) ? cells_[b] + 1 : cells_[b]) + idx[b];
  return face_offset_[axis] + id;
}

int BoxGrid::cell_face(int cell, int axis, int side) const {
  Idx3 idx = cell_index(cell);
  idx[axis] += side;
  return face_id(axis, idx);
}

std::pair<int, Idx3> BoxGrid::face_info(int face) const {
  int axis = 0;
  while (axis + 1 <= dim_ && face >= face_offset_[axis + 1]) ++axis;
  int local = face - face_offset_[axis];
  Idx3 idx{0, 0, 0};
  for (int b = 0; b < dim_; ++b) {
    const int extent = (b == axis) ? cells_[b] + 1 : cells_[b];
    idx[b] = local % extent;
    local /= extent;
  }
  return {axis, idx};
}

std::pair<int, int> BoxGrid::face_cells(int face) const {
  auto [axis, idx] = face_info(face);
  int below = -1;
  int above = -1;
  if (idx[axis] > 0) {
    Idx3 c = idx;
    c[axis] -= 1;
    below = cell_id(c);
  }
  if (idx[axis] < cells_[axis]) above = cell_id(idx);
  return {below, above};
}

bool BoxGrid::is_boundary_face(int face) const {
  auto [axis, idx] = face_info(face);
  return idx[axis] == 0 || idx[axis] == cells_[axis];
}

double BoxGrid::face_area(int face) const {
  const int axis = face_info(face).first;
  double area = 1.0;
  for (int b = 0; b < dim_; ++b)
    if (b != axis) area *= spacing_[b];
  return area;
}

Vec3 BoxGrid::face_center(int face) const {
  auto [axis, idx] = face_info(face);
  Vec3 x = Vec3::Zero();
  for (int b = 0; b < dim_; ++b)
    x[b] = (b == axis) ? lo_[b] + idx[b] * spacing_[b] : lo_[b] + (idx[b] + 0.5) * spacing_[b];
  return x;
}

std::pair<int, Vec3> BoxGrid::locate(const Vec3& x) const {
  Idx3 idx{0, 0, 0};
  Vec3 local = Vec3::Zero();
  for (int a = 0; a < dim_; ++a) {
    const double t = (x[a] - lo_[a]) / spacing_[a];
    int i = static_cast<int>(std::floor(t));
    i = std::clamp(i, 0, cells_[a] - 1);
    idx[a] = i;
    local[a] = std::clamp(t - i, 0.0, 1.0);
  }
  return {cell_id(idx), local};
}

bool BoxGrid::same_shape(const BoxGrid& other) const {
  if (dim_ != other.dim_) return false;
  for (int a = 0; a < dim_; ++a)
    if (cells_[a] != other.cells_[a]) return false;
  return true;
}

double shape_value(int dim, int corner, const Vec3& local) {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= ((corner >> a) & 1) ? local[a] : 1.0 - local[a];
  return v;
}

Vec3 shape_gradient(const BoxGrid& grid, int corner, const Vec3& local) {
  const int dim = grid.dim();
  Vec3 g = Vec3::Zero();
  for (int a = 0; a < dim; ++a) {
    double d = (((corner >> a) & 1) ? 1.0 : -1.0) / grid.spacing(a);
    for (int b = 0; b < dim; ++b) {
      if (b == a) continue;
      d *= ((corner >> b) & 1) ? local[b] : 1.0 - local[b];
    }
    g[a] = d;
  }
  return g;
}

NodalField::NodalField(const BoxGrid& g, int comps)
    : grid(g),
      components(comps),
      values(static_cast<size_t>(g.num_cells()) * g.corners() * comps, 0.0),
      broken(static_cast<size_t>(g.num_faces()), 0) {}

Eigen::VectorXd NodalField::value(int cell, const Vec3& local) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(components);
  for (int k = 0; k < grid.corners(); ++k) {
    const double w = shape_value(grid.dim(), k, local);
    for (int c = 0; c < components; ++c) v[c] += w * at(cell, k, c);
  }
  return v;
}

Eigen::Matrix3d NodalField::gradient(int cell, const Vec3& local) const {
  Eigen::Matrix3d g = Eigen::Matrix3d::Zero();
  for (int k = 0; k < grid.corners(); ++k) {
    const Vec3 dn = shape_gradient(grid, k, local);
    for (int c = 0; c < components && c < 3; ++c) g.row(c) += at(cell, k, c) * dn.transpose();
  }
  return g;
}

NodalField NodalField::sample(const BoxGrid& g, int comps, const SidedFieldFn& fn) {
  NodalField f(g, comps);
  for (int cell = 0; cell < g.num_cells(); ++cell) {
    const Vec3 center = g.cell_center(cell);
    for (int k = 0; k < g.corners(); ++k) {
      const Eigen::VectorXd v = fn(g.corner_position(cell, k), center);
      if (v.size() != comps) throw std::invalid_argument("NodalField::sample: evaluator returned wrong size");
      for (int c = 0; c < comps; ++c) f.at(cell, k, c) = v[c];
    }
  }
  return f;
}

NodalField NodalField::sample(const BoxGrid& g, int comps, const FieldFn& fn) {
  return sample(g, comps, SidedFieldFn([&fn](const Vec3& x, const Vec3&) { return fn(x); }));
}

int NodalField::broken_interior_count() const {
  int count = 0;
  for (int f = 0; f < grid.num_faces(); ++f)
    if (broken[f] && !grid.is_boundary_face(f)) ++count;
  return count;
}

bool NodalField::cell_touches_break(int cell) const {
  for (int a = 0; a < grid.dim(); ++a)
    for (int s = 0; s < 2; ++s) {
      const int f = grid.cell_face(cell, a, s);
      if (broken[f] && !grid.is_boundary_face(f)) return true;
    }
  return false;
}

CellQuadrature gauss2(int dim) {
  const double g = 0.5 / std::sqrt(3.0);
  const double pts[2] = {0.5 - g, 0.5 + g};
  CellQuadrature q;
  const int count = 1 << dim;
  for (int k = 0; k < count; ++k) {
    Vec3 p = Vec3::Zero();
    for (int a = 0; a < dim; ++a) p[a] = pts[(k >> a) & 1];
    q.points.push_back(p);
    q.weights.push_back(1.0 / count);
  }
  return q;
}

}  // namespace platelab
