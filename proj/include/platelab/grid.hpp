#pragma once

#include <array>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace platelab {

using Vec3 = Eigen::Vector3d;
using Idx3 = std::array<int, 3>;

/// Axis-aligned box split into a uniform tensor grid of cells (dimension 1..3).
///
/// Cells, nodes and faces are addressed by flat ids. A face is identified by
/// the axis of its normal and a multi-index whose entry along that axis is a
/// node coordinate (0..cells) while the other entries are cell coordinates.
class BoxGrid {
 public:
  BoxGrid() = default;
  BoxGrid(int dim, Idx3 cells, const Vec3& lo, const Vec3& hi);

  int dim() const { return dim_; }
  int cells(int axis) const { return cells_[axis]; }
  double lo(int axis) const { return lo_[axis]; }
  double hi(int axis) const { return hi_[axis]; }
  double spacing(int axis) const { return spacing_[axis]; }
  const Vec3& lo() const { return lo_; }
  const Vec3& hi() const { return hi_; }

  int corners() const { return 1 << dim_; }
  int num_cells() const { return num_cells_; }
  int num_nodes() const { return num_nodes_; }
  int num_faces() const { return face_offset_[dim_]; }

  Idx3 cell_index(int cell) const;
  int cell_id(const Idx3& idx) const;
  Idx3 node_index(int node) const;
  int node_id(const Idx3& idx) const;
  int corner_node(int cell, int corner) const;
  Vec3 node_position(const Idx3& idx) const;
  Vec3 corner_position(int cell, int corner) const;
  Vec3 cell_center(int cell) const;
  double cell_volume() const;

  /// Face of `cell` with normal `axis`; side 0 is the lower face, 1 the upper.
  int cell_face(int cell, int axis, int side) const;
  int face_id(int axis, const Idx3& idx) const;
  std::pair<int, Idx3> face_info(int face) const;
  /// Cells below/above the face along its axis, -1 outside the grid.
  std::pair<int, int> face_cells(int face) const;
  bool is_boundary_face(int face) const;
  double face_area(int face) const;
  Vec3 face_center(int face) const;

  /// Cell containing x (clamped to the grid) and local coordinates in [0,1]^dim.
  std::pair<int, Vec3> locate(const Vec3& x) const;

  bool same_shape(const BoxGrid& other) const;

 private:
  int dim_ = 0;
  Idx3 cells_{1, 1, 1};
  Vec3 lo_ = Vec3::Zero();
  Vec3 hi_ = Vec3::Zero();
  Vec3 spacing_ = Vec3::Ones();
  int num_cells_ = 0;
  int num_nodes_ = 0;
  std::array<int, 4> face_offset_{0, 0, 0, 0};
};

/// Value of the Q1 shape function of `corner` at local coordinates.
double shape_value(int dim, int corner, const Vec3& local);
/// Gradient (physical units) of the Q1 shape function of `corner`.
Vec3 shape_gradient(const BoxGrid& grid, int corner, const Vec3& local);

/// Field evaluator with a side hint: `toward` is a point inside the cell being
/// sampled, so closed-form fields with jumps can return the one-sided value.
using SidedFieldFn = std::function<Eigen::VectorXd(const Vec3& x, const Vec3& toward)>;
using FieldFn = std::function<Eigen::VectorXd(const Vec3& x)>;

/// Vector field stored per cell corner (Q1 in every cell), plus per-face
/// break indicators. Slots of neighbouring cells agree across unbroken faces
/// for fields that are continuous there; across a broken face they are
/// independent, which represents a jump.
struct NodalField {
  BoxGrid grid;
  int components = 0;
  std::vector<double> values;
  std::vector<char> broken;

  NodalField() = default;
  NodalField(const BoxGrid& g, int comps);

  double& at(int cell, int corner, int comp) {
    return values[(static_cast<size_t>(cell) * grid.corners() + corner) * components + comp];
  }
  double at(int cell, int corner, int comp) const {
    return values[(static_cast<size_t>(cell) * grid.corners() + corner) * components + comp];
  }

  Eigen::VectorXd value(int cell, const Vec3& local) const;
  /// Row c holds the gradient of component c; unused entries are zero.
  Eigen::Matrix3d gradient(int cell, const Vec3& local) const;

  static NodalField sample(const BoxGrid& g, int comps, const SidedFieldFn& fn);
  static NodalField sample(const BoxGrid& g, int comps, const FieldFn& fn);

  int broken_interior_count() const;
  bool cell_touches_break(int cell) const;
};

/// Tensor Gauss-Legendre points on [0,1]^dim (2 per axis) with weights summing to 1.
struct CellQuadrature {
  std::vector<Vec3> points;
  std::vector<double> weights;
};
CellQuadrature gauss2(int dim);

}  // namespace platelab
