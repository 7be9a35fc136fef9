#pragma once

#include <functional>
#include <string>

#include "platelab/elasticity.hpp"
#include "platelab/grid.hpp"
#include "platelab/kirchhoff_love.hpp"

namespace platelab {

struct EnergyBreakdown {
  double rho = 0.0;  // 0 for the limit functional
  double bulk = 0.0;
  double surface = 0.0;
  double boundary_penalty = 0.0;
  double total = 0.0;

  /// Recomputes total from the components.
  EnergyBreakdown& finalize();
  static std::string csv_header();
  std::string csv_row() const;
};

/// Pieces of the discrete bulk integral. Normal strains and in-plane shear are
/// integrated at the 2^n Gauss points of each cell; the mixed strains e_{alpha,n}
/// at the cell centre.
struct BulkTerms {
  double gauss_part = 0.0;       // 1/2 int (lambda tr^2 + 2 mu sum e_ii^2 + 4 mu sum_{i<j<n} e_ij^2)
  double transverse_part = 0.0;  // 1/2 int 4 mu sum_alpha e_{alpha,n}^2
  double alpha_n_norm = 0.0;     // ||e_{alpha,n}||_2 of the unscaled strain
  double nn_norm = 0.0;          // ||e_{n,n}||_2 of the unscaled strain
  double total() const { return gauss_part + transverse_part; }
};

/// Bulk terms with the mixed strains divided by `rho` and the normal strain by rho^2
/// (rho = 1 gives the physical integral).
BulkTerms bulk_terms(const NodalField& u, const LameParams& p, double rho);

/// Sum of interior broken-face areas weighted by phi_rho of the face normal.
double surface_term(const NodalField& u, double rho);

/// Physical Griffith energy on a grid over the thin domain.
EnergyBreakdown griffith_energy(const NodalField& u, const LameParams& p);
/// Rescaled energy E_rho on a grid over omega x (-1/2, 1/2).
EnergyBreakdown rescaled_energy(const NodalField& v, const LameParams& p, double rho);
/// |F_rho(u) - rho E_rho(v)| / F_rho(u) with v the rescaled field (0 when both vanish).
double change_of_variables_check(const NodalField& u, const LameParams& p, double rho);

/// Limit functional: 1/2 int_omega C0 e(ubar).e(ubar) + (1/12) C0 H.H with H the symmetric
/// gradient of grad_un, plus the measure of crack_lines times the unit thickness.
EnergyBreakdown limit_energy(const KLState& s, const LameParams& p);

/// Kirchhoff-Love boundary datum given by closed forms on a neighbourhood of omega.
struct BoundaryDatum {
  int n = 2;
  std::string name = "zero";
  std::function<Eigen::VectorXd(const Vec3&)> ubar;
  std::function<double(const Vec3&)> un;
  std::function<Eigen::VectorXd(const Vec3&)> grad_un;

  /// Lifted displacement at x = (x', x_n).
  Eigen::VectorXd displacement(const Vec3& x) const;
  KLState sample(const BoxGrid& omega) const;
  NodalField lift(const BoxGrid& plate) const;
  double scale(const BoxGrid& omega) const;

  static BoundaryDatum zero(int n);
  /// ubar = (t x_1, 0, ...).
  static BoundaryDatum stretch(int n, double t);
  /// u_n = k x_1^2 / 2.
  static BoundaryDatum bend(int n, double k);
  /// ubar = (c, ..., c), u_n = c.
  static BoundaryDatum rigid(int n, double c);
  /// Parses "zero", "stretch:t", "bend:k" or "rigid:c".
  static BoundaryDatum parse(int n, const std::string& spec);
};

/// tol_trace = 1e-9 max(1, scale).
double trace_tolerance(double scale);

/// Lateral boundary area where the nodal trace of u differs from g.
double boundary_penalty(const NodalField& u, const BoundaryDatum& g);
/// Same for a reduced state (boundary faces of omega times the unit thickness).
double boundary_penalty(const KLState& s, const BoundaryDatum& g);
/// Per lateral boundary face of the plate grid: 1 where the trace mismatches g.
std::vector<char> boundary_mismatch(const NodalField& u, const BoundaryDatum& g);

EnergyBreakdown penalized_energy(const NodalField& v, const LameParams& p, double rho, const BoundaryDatum& g);
EnergyBreakdown penalized_energy(const KLState& s, const LameParams& p, const BoundaryDatum& g);

}  // namespace platelab
