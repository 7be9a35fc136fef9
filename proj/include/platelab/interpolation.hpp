#pragma once

#include <cstdint>
#include <vector>

#include "platelab/geometry.hpp"
#include "platelab/grid.hpp"

namespace platelab {

/// Point samples v(xi + h y) on a block of lattice indices.
struct SampledField {
  ShiftedGrid grid;
  LatticeBox points;
  int components = 0;
  std::vector<double> values;

  Eigen::VectorXd value(const Idx3& z) const;
  bool covers(const Idx3& z) const { return points.contains(z); }
};

/// Samples `v` at every lattice point needed to interpolate and difference on
/// the cubes meeting grid's box (indices one beyond the cube range on each side).
/// Throws if a required point leaves the closed domain [domain_lo, domain_hi].
SampledField sample(const FieldFn& v, int components, const ShiftedGrid& grid, const Vec3& domain_lo,
                    const Vec3& domain_hi);

/// Hat kernel prod_i (1 - |x_i|)^+.
double hat_kernel(int n, const Vec3& x);

/// Multilinear interpolant sum_xi v(xi + hy) hat((x - xi - hy) / h).
Eigen::VectorXd interpolate(const SampledField& s, const Vec3& x);
/// Gradient of the interpolant (row c = gradient of component c).
Eigen::Matrix3d interpolate_gradient(const SampledField& s, const Vec3& x);

/// Piecewise constant difference quotient along e with the crack cutoff.
struct DirectionalStrainField {
  ShiftedGrid grid;
  Direction e;
  LatticeBox cubes;
  std::vector<double> strain;
  std::vector<char> cutoff;  // 0 where the cube corner lies in J^{he}

  double at_cube(const Idx3& z) const { return strain[cubes.offset(z)]; }
  double at(const Vec3& x) const;
};

DirectionalStrainField directional_strain(const SampledField& s, const Direction& e, const CrackSurface& crack);

/// Interpolant that vanishes on bad cubes, restricted to the region V.
struct Approximant {
  SampledField samples;
  CubeClassification classification;
  Vec3 region_lo = Vec3::Zero();
  Vec3 region_hi = Vec3::Ones();

  Idx3 cube_of(const Vec3& x) const;
  bool in_bad_cube(const Vec3& x) const;
  Eigen::VectorXd value(const Vec3& x) const;
  Eigen::Matrix3d gradient(const Vec3& x) const;
};

/// Builds the approximant on V = [region_lo, region_hi] from samples on the domain U.
/// V must keep a margin of at least 2 n h from the boundary of U.
Approximant build_approximant(const FieldFn& v, int components, double h, const Vec3& y, const CrackSurface& crack,
                              const Vec3& domain_lo, const Vec3& domain_hi, const Vec3& region_lo,
                              const Vec3& region_hi);

struct StrainBoundReport {
  double max_ratio = 0.0;
  int points = 0;
};

/// Max of |e(w) e . e| / |E_e| over random points in good cubes of V (0/0 counts as 0).
StrainBoundReport strain_bound_check(const Approximant& a, const DirectionalStrainField& ds, int points,
                                     std::uint64_t seed);

struct StructureReport {
  bool precondition = false;  // v . e_j independent of x_i on the probed fibres
  bool passed = false;
  int fibres = 0;
  double max_variation = 0.0;
};

/// Checks that the j-th component of the approximant is constant along e_i
/// fibres of V that avoid the shadow of the bad cubes.
StructureReport structure_preservation_check(const FieldFn& v, const Approximant& a, int i, int j,
                                             int fibres_per_axis = 16, int points_per_fibre = 33);

/// Lebesgue measure of {x in V : |v_k(x) - v(x)| > delta}, by midpoint sampling
/// with `sub` points per axis in each cube.
double mismatch_measure(const Approximant& a, const FieldFn& v, double delta, int sub = 4);

/// Fraction of sampled boundary points of V where the traces differ by more than delta.
double trace_mismatch_fraction(const Approximant& a, const FieldFn& v, double delta, int samples_per_face = 400);

/// Integral over V of E_e * phi, with Gauss quadrature on each cube-by-V intersection.
double weak_strain_integral(const DirectionalStrainField& ds, const Vec3& region_lo, const Vec3& region_hi,
                            const std::function<double(const Vec3&)>& phi);

}  // namespace platelab
