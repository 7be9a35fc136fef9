#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "platelab/elasticity.hpp"
#include "platelab/energy.hpp"
#include "platelab/geometry.hpp"
#include "platelab/grid.hpp"
#include "platelab/kirchhoff_love.hpp"
#include "platelab/minimize.hpp"

namespace platelab {

/// Header plus string cells; numbers are formatted with %.12g, missing values are empty.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  std::string csv() const;
  /// Writes to a temporary sibling and renames it over `path`.
  void write_csv(const std::string& path) const;
};

std::string fmt(double v);
std::string fmt(int v);

// ---------------------------------------------------------------------------
// Recovery sequences

struct RecoveryField {
  NodalField field;        // rescaled displacement on the plate grid
  std::vector<double> h1;  // per omega node
  std::vector<double> h2;
  double smoothing = 0.0;
  double shear_audit = 0.0;  // rho * max |grad h|
};

/// u + (0, .., 0, rho^2 x_n (h1 - x_n h2 / 2)) with h1, h2 mollified targets
/// -lambda/(lambda + 2 mu) div ubar and -lambda/(lambda + 2 mu) lap u_n, cut off
/// within `smoothing_scale` of the boundary of omega.
RecoveryField recovery_sequence(const KLState& s, const LameParams& p, double rho, double smoothing_scale,
                                int layers);

enum class SmoothingRule { sqrt_rho, rho_squared };
SmoothingRule parse_smoothing_rule(const std::string& name);

struct RecoveryRow {
  double rho = 0.0;
  double smoothing = 0.0;
  bool resolved = true;  // false when the smoothing radius is below the grid spacing
  double energy = 0.0;
  double limit = 0.0;
  double gap = 0.0;
  double rel_gap = 0.0;
  double shear_audit = 0.0;
  double alpha_n_norm = 0.0;
  double nn_norm = 0.0;
  double alpha_n_bound = 0.0;  // rho sqrt(2 E)
  double nn_bound = 0.0;       // rho^2 sqrt(2 E)
};

struct RecoverySweep {
  std::vector<RecoveryRow> rows;
  bool gap_nonincreasing = true;
  bool compactness_holds = true;
  bool converged = true;  // every row resolved, gaps nonincreasing, audit decreasing

  Table table() const;
};

RecoverySweep recovery_sweep(const KLState& s, const LameParams& p, const std::vector<double>& rhos, int layers,
                             SmoothingRule rule = SmoothingRule::sqrt_rho);

// ---------------------------------------------------------------------------
// Lower-bound probe

enum class ProbeSequence { recovery, constant, tilted };
ProbeSequence parse_probe_sequence(const std::string& name);

struct LiminfRow {
  double rho = 0.0;
  double energy = 0.0;
  double limit = 0.0;
  double margin = 0.0;
  double surface_margin = 0.0;
};

struct LiminfProbe {
  std::vector<LiminfRow> rows;
  double min_margin = 0.0;

  Table table() const;
};

/// Margins E_rho(v_rho) - E_0(s). The tilted family breaks one horizontal face per
/// omega cell touching the middle of omega.
LiminfProbe liminf_probe(ProbeSequence kind, const KLState& s, const LameParams& p, const std::vector<double>& rhos,
                         int layers);

// ---------------------------------------------------------------------------
// Convergence of minima

struct MinimaRow {
  double rho = 0.0;
  double energy_rho = 0.0;
  double energy_0 = 0.0;
  double gap = 0.0;
  double rel_gap = 0.0;
  double surface_rho = 0.0;  // surface term plus boundary penalty
  double surface_0 = 0.0;
  double surface_gap = 0.0;
  double face_area = 0.0;    // largest lateral face of the plate grid
  double distance = 0.0;     // measure of cells where |u_rho - lifted limit minimiser| > delta
  int rounds = 0;
  bool converged = true;
  bool tie = false;          // intact and cracked limit energies agree within tolerance
  std::string error;         // solver failure message for this row
};

struct MinimaSweep {
  std::vector<MinimaRow> rows;
  Table table() const;
};

MinimaSweep minima_sweep(const BoundaryDatum& g, const LameParams& p, const BoxGrid& omega, int layers,
                         const std::vector<double>& rhos, const SolverConfig& cfg = {});

// ---------------------------------------------------------------------------
// Lattice experiments

struct JumpEnergyStudy {
  OffsetStatistics stats;
  double oracle = 0.0;
  double rel_error = 0.0;

  Table table() const;
};

JumpEnergyStudy jump_energy_study(const CrackSurface& crack, double h, const Vec3& lo, const Vec3& hi, int samples,
                                  std::uint64_t seed);

struct ProjectionRow {
  double h = 0.0;
  int bad_count = 0;
  double measure = 0.0;
  double error_bound = 0.0;
  double ratio = 0.0;  // measure / previous row's measure (0 on the first row)
};

struct ProjectionSweep {
  std::vector<ProjectionRow> rows;
  Table table() const;
};

/// Shadow of the closed bad-cube union (clipped to [lo, hi]) along e_axis for each h.
ProjectionSweep projection_sweep(const CrackSurface& crack, const std::vector<double>& hs, const Vec3& y,
                                 const Vec3& lo, const Vec3& hi, int axis);

/// Piecewise-affine test field v(x) = A x + b + [x . nu > c] jump.
struct PiecewiseAffine {
  int n = 2;
  Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
  Vec3 b = Vec3::Zero();
  Vec3 jump = Vec3::Zero();
  Vec3 nu = Vec3::UnitX();
  double offset = 0.5;

  FieldFn fn() const;
  /// Crack {x . nu = offset} clipped to the box [lo, hi] (axis-aligned nu only).
  CrackSurface crack(const Vec3& lo, const Vec3& hi) const;
};

struct ApproximationRow {
  double h = 0.0;
  int bad_count = 0;
  double mismatch = 0.0;           // measure of |v_h - v| > delta in V
  double mismatch_fraction = 0.0;  // divided by |V|
  double weak_integral = 0.0;
  double weak_error = 0.0;
  bool structure_passed = false;
  double strain_bound_ratio = 0.0;
};

struct ApproximationSweep {
  std::vector<ApproximationRow> rows;
  double weak_oracle = 0.0;
  double weak_slope = 0.0;  // least-squares slope of log error against log h
  bool mismatch_monotone = true;

  Table table() const;
};

/// Runs the approximant on V = [region_lo, region_hi] over the h list, probing the
/// strain along e_0 with phi = prod sin(pi (x - lo)/(hi - lo)).
ApproximationSweep approximation_sweep(const PiecewiseAffine& v, const std::vector<double>& hs, const Vec3& y,
                                       const Vec3& domain_lo, const Vec3& domain_hi, const Vec3& region_lo,
                                       const Vec3& region_hi, double delta);

}  // namespace platelab
