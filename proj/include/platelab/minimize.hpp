#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "platelab/elasticity.hpp"
#include "platelab/energy.hpp"
#include "platelab/grid.hpp"
#include "platelab/kirchhoff_love.hpp"

namespace platelab {

/// Raised when a linear solve does not reach its tolerance.
class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverConfig {
  enum class Linear { direct, cg };
  enum class Mode { columns, faces };

  double cg_tol = 1e-10;
  int cg_max_iter = 20000;
  int altmin_max_rounds = 20;
  std::string activation_rule = "cell_energy_release";
  std::uint64_t seed = 1;
  Linear linear = Linear::direct;
  Mode mode = Mode::columns;
  bool vertical_only = true;
  bool exhaustive = true;     // k <= max_exhaustive sweep after alternation (n = 2)
  int max_exhaustive = 2;
  int patch_radius = 2;       // faces mode: cells around a face in the local release solve

  void validate() const;
};

/// Broken flags per face of the plate grid. Interior flags are cracks; flags on
/// lateral boundary faces release the boundary datum there.
struct CrackIndicator {
  std::vector<char> broken;
};

/// Candidate crack column: the plane x_axis = index * h_axis. Planes on the
/// boundary of omega release the datum on that side.
struct CrackColumn {
  int axis = 0;
  int index = 0;
};

/// Discrete bulk problem of the rescaled energy on a plate grid.
class ElasticSystem {
 public:
  ElasticSystem(const BoxGrid& plate, const LameParams& p, double rho, const BoundaryDatum& g,
                const SolverConfig& cfg = {});

  const BoxGrid& grid() const { return grid_; }
  double rho() const { return rho_; }
  const LameParams& lame() const { return p_; }
  const BoundaryDatum& datum() const { return g_; }
  const SolverConfig& config() const { return cfg_; }
  const Eigen::MatrixXd& element_matrix() const { return ke_; }

  /// Minimises the bulk energy with the datum imposed on unreleased lateral faces.
  NodalField solve(const std::vector<char>& broken) const;
  /// Re-solves only on `cells`, holding every slot shared with other cells at `current`.
  NodalField solve_patch(const std::vector<char>& broken, const NodalField& current,
                         const std::vector<int>& cells) const;

  double bulk(const NodalField& u) const;
  /// 1/2 u_e^T K u_e summed over `cells`.
  double cell_energy(const NodalField& u, const std::vector<int>& cells) const;
  EnergyBreakdown energy(const NodalField& u) const;

  /// Slot equivalence classes: slot (cell * corners + corner) -> class id.
  std::vector<int> slot_classes(const std::vector<char>& broken, int* count = nullptr) const;

  std::vector<CrackColumn> columns() const;
  std::vector<int> column_faces(const CrackColumn& c) const;
  double column_cost(const CrackColumn& c) const;
  bool column_active(const CrackColumn& c, const std::vector<char>& broken) const;

 private:
  BoxGrid grid_;
  LameParams p_;
  double rho_;
  BoundaryDatum g_;
  SolverConfig cfg_;
  Eigen::MatrixXd ke_;
};

NodalField elastic_solve(const CrackIndicator& breaks, const BoundaryDatum& g, const LameParams& p, double rho,
                         const BoxGrid& plate, const SolverConfig& cfg = {});

/// One activation round. Columns mode activates the single best column when it
/// lowers the total energy; faces mode activates every face whose local release
/// gain exceeds its cost. Existing breaks are never removed.
CrackIndicator activation_step(const ElasticSystem& sys, const NodalField& u, const CrackIndicator& breaks);

struct MinimizeResult {
  NodalField field;
  CrackIndicator cracks;
  EnergyBreakdown energy;
  std::vector<EnergyBreakdown> trace;  // energy after each round
  int rounds = 0;
  bool converged = false;
  bool monotone = true;
  bool exhaustive_improved = false;
};

MinimizeResult alternate_minimize(const BoundaryDatum& g, const LameParams& p, double rho, const BoxGrid& plate,
                                  const SolverConfig& cfg = {});

struct LimitResult {
  KLState state;
  EnergyBreakdown energy;
  std::vector<EnergyBreakdown> trace;
  std::vector<int> crack_nodes;     // interior omega nodes carrying a crack
  std::vector<int> released_sides;  // 0 = x_1 = lo, 1 = x_1 = hi
  int rounds = 0;
  bool converged = false;
  bool monotone = true;
};

/// Minimises the reduced functional with the datum on omega = (lo, hi), n = 2.
/// Membrane by linear elements, bending by second differences with ghost values from g.
LimitResult minimize_limit(const BoundaryDatum& g, const LameParams& p, const BoxGrid& omega,
                           const SolverConfig& cfg = {});

/// Reduced energy of a fixed crack/release configuration (n = 2).
LimitResult solve_limit(const BoundaryDatum& g, const LameParams& p, const BoxGrid& omega,
                        const std::vector<int>& crack_nodes, const std::vector<int>& released_sides);

}  // namespace platelab
