#pragma once

#include <string>
#include <vector>

#include "platelab/elasticity.hpp"
#include "platelab/geometry.hpp"
#include "platelab/grid.hpp"

namespace platelab {

/// Reduced plate state on the mid-surface grid over omega.
///
/// `fields` stores, per omega-cell corner, the components
///   [ubar_1 .. ubar_{n-1}, u_n, d_1 u_n .. d_{n-1} u_n]
/// and its broken flags are the crack lines (interior faces of the omega grid).
struct KLState {
  int n = 2;
  NodalField fields;

  KLState() = default;
  KLState(int plate_dim, const BoxGrid& omega);

  const BoxGrid& omega() const { return fields.grid; }
  int ubar_comp(int a) const { return a; }
  int un_comp() const { return n - 1; }
  int grad_comp(int a) const { return n + a; }

  /// Samples closed-form pieces; each evaluator returns (n-1), 1 and (n-1) values.
  static KLState from_functions(int plate_dim, const BoxGrid& omega, const SidedFieldFn& ubar,
                                const SidedFieldFn& un, const SidedFieldFn& grad_un);

  /// Marks every interior omega face on the plane x_axis = position; throws if the
  /// plane is not a grid plane.
  void add_crack_plane(int axis, double position);
  void add_crack_face(int face);
  std::vector<int> crack_faces() const;
  /// H^{n-2} of the crack lines: face count (n = 2) or total length (n = 3).
  double crack_measure() const;
  /// Crack lines as simplices in omega's dimension (points for n = 2, segments for n = 3).
  CrackSurface crack_lines() const;

  /// Throws std::invalid_argument on non-finite values or flags on boundary faces.
  void validate() const;
  /// Largest gap between grad_un and the cellwise gradient of u_n at centres of uncut cells.
  double gradient_residual() const;
  double scale() const;

  /// a*s1 + b*s2 on a shared grid; crack lines must coincide.
  static KLState combine(double a, const KLState& s1, double b, const KLState& s2);

  void save(const std::string& path) const;
  static KLState load(const std::string& path);
};

/// tol_fd = 10 h^2 max(1, scale).
double fd_tolerance(double h, double scale);

/// Plate grid over omega x (-1/2, 1/2) with `layers` cells across the thickness.
BoxGrid plate_grid(const BoxGrid& omega, int layers);

/// u_alpha = ubar_alpha - x_n d_alpha u_n, u_n = u_n(x'); crack lines become full vertical columns.
NodalField kl_lift(const KLState& s, const BoxGrid& plate);

/// Thickness average of the in-plane components, per omega-cell corner (exact for the Q1 field).
NodalField kl_average(const NodalField& u);

struct PsiResult {
  NodalField psi;                // n-1 components on the omega grid
  std::vector<char> excluded;    // per omega cell: a broken face lies between the slices
  int excluded_count = 0;
};

/// psi_alpha = (u_alpha(x', t1) - u_alpha(x', t2)) / (t2 - t1).
PsiResult extract_psi(const NodalField& u, double t1, double t2);

struct SliceReport {
  double max_deviation = 0.0;
  double tolerance = 0.0;
  bool independent = true;
};

/// Compares extract_psi over every pair of layer planes against the (bottom, top) pair.
SliceReport slice_independence(const NodalField& u);

struct KLReport {
  double max_transverse_strain = 0.0;  // max |e_{i,n}| at centres of uncut cells
  int non_vertical_broken = 0;
  double max_un_variation = 0.0;       // along uncut columns
  double appgra_residual = 0.0;
  double tolerance = 0.0;
  bool is_kl() const {
    return non_vertical_broken == 0 && max_transverse_strain <= tolerance && max_un_variation <= tolerance;
  }
};

KLReport kl_verify(const NodalField& u, const LameParams& p);

/// True iff the broken faces of u are exactly the vertical columns over the crack lines of s.
bool jump_decomposition_check(const KLState& s, const NodalField& u);

}  // namespace platelab
